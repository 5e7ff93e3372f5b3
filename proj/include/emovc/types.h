// Copyright (c) 2026 The emovc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOVC_TYPES_H_
#define EMOVC_TYPES_H_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emovc {

enum class DomainKind { kSpeaker, kEmotion };

/// Identity of a conditioning domain: a speaker or an emotion class.
struct DomainCode {
  int index = 0;
  DomainKind kind = DomainKind::kSpeaker;

  friend bool operator==(const DomainCode&, const DomainCode&) = default;
};

inline constexpr int kNumEmotions = 5;
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "happy", "sad", "anger", "neutral", "surprise"};

/// Index of an emotion label, or nullopt for anything outside the class set.
std::optional<int> EmotionIndex(std::string_view name);
std::string_view EmotionName(int index);

std::string_view DomainKindName(DomainKind kind);
std::optional<DomainKind> ParseDomainKind(std::string_view name);

/// 64-bit FNV-1a digest.
uint64_t Fnv1a(std::string_view bytes);

/// Invalid user-supplied configuration (CLI exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace emovc

#endif  // EMOVC_TYPES_H_
