// Copyright 2026 The tovd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOVD_TOKENIZE_HPP
#define TOVD_TOKENIZE_HPP

#include <string>
#include <vector>

namespace tovd {

enum class TokenPolicy { Keep, Drop, Placeholder };

// Tokens are runs of word characters with internal hyphen/apostrophe
// ("covid-19", "don't"). URLs, @mentions and #hashtags are recognized
// first and handled per policy: Placeholder maps URLs to "<url>",
// mentions to "<user>", and keeps the hashtag body text.
//
// Casefolding is ASCII-only; non-ASCII bytes pass through untouched.
struct TokenizerConfig {
  bool lowercase = true;
  TokenPolicy url_policy = TokenPolicy::Placeholder;
  TokenPolicy mention_policy = TokenPolicy::Placeholder;
  TokenPolicy hashtag_policy = TokenPolicy::Keep;
};

std::vector<std::string> tokenize(const std::string& text,
                                  const TokenizerConfig& cfg);

}  // namespace tovd

#endif  // TOVD_TOKENIZE_HPP
