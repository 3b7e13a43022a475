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

// Thin UTF-8 helpers over ICU.

#ifndef MANIPGEN_UNICODE_H_
#define MANIPGEN_UNICODE_H_

#include <string>
#include <string_view>
#include <vector>

namespace manipgen {

bool IsValidUtf8(std::string_view text);

// Decodes UTF-8 into code points. Throws Error on invalid input.
std::u32string ToCodePoints(std::string_view text);

std::string FromCodePoints(std::u32string_view code_points);

// Number of code points in valid UTF-8 text.
std::size_t CodePointLength(std::string_view text);

// Canonical composition (NFC). Throws Error on invalid UTF-8.
std::string ToNfc(std::string_view text);

// Full Unicode case folding.
std::string FoldCase(std::string_view text);

// Splits on runs of ASCII/Unicode whitespace, dropping empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace manipgen

#endif  // MANIPGEN_UNICODE_H_
