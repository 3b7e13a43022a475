//
// Copyright 2026 The manipgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "manipgen/unicode.h"

#include <gtest/gtest.h>

#include "manipgen/errors.h"

namespace manipgen {
namespace {

TEST(UnicodeTest, CodePointRoundTrip) {
  const std::string text = "برشلونة 120 abc";
  const std::u32string cps = ToCodePoints(text);
  EXPECT_EQ(cps.size(), 15u);
  EXPECT_EQ(FromCodePoints(cps), text);
  EXPECT_EQ(CodePointLength(text), 15u);
}

TEST(UnicodeTest, RejectsInvalidUtf8) {
  const std::string bad = "ab\xC3";
  EXPECT_FALSE(IsValidUtf8(bad));
  EXPECT_TRUE(IsValidUtf8("محرز"));
  EXPECT_THROW(ToCodePoints(bad), Error);
  EXPECT_THROW(ToNfc(bad), Error);
}

TEST(UnicodeTest, NfcComposesAlefWithHamza) {
  // U+0627 U+0654 composes to U+0623.
  EXPECT_EQ(ToNfc("\xD8\xA7\xD9\x94"), "أ");
  EXPECT_EQ(ToNfc("e\xCC\x81"), "\xC3\xA9");
}

TEST(UnicodeTest, FoldCase) {
  EXPECT_EQ(FoldCase("Sports"), "sports");
  EXPECT_EQ(FoldCase("STRASSE"), "strasse");
  EXPECT_EQ(FoldCase("رياضة"), "رياضة");
}

TEST(UnicodeTest, SplitWhitespaceHandlesUnicodeSpaces) {
  const auto parts = SplitWhitespace("  a\tb c  d  ");
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[0], "a");
  EXPECT_EQ(parts[3], "d");
  EXPECT_TRUE(SplitWhitespace("   ").empty());
  EXPECT_EQ(Join(parts, "-"), "a-b-c-d");
  EXPECT_EQ(Join({}, "-"), "");
}

}  // namespace
}  // namespace manipgen
