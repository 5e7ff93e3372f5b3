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

#include "emovc/types.h"

namespace emovc {

std::optional<int> EmotionIndex(std::string_view name) {
  for (int i = 0; i < kNumEmotions; ++i) {
    if (kEmotionNames[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view EmotionName(int index) {
  if (index < 0 || index >= kNumEmotions) {
    throw std::out_of_range("emotion index out of range");
  }
  return kEmotionNames[index];
}

std::string_view DomainKindName(DomainKind kind) {
  return kind == DomainKind::kSpeaker ? "speaker" : "emotion";
}

std::optional<DomainKind> ParseDomainKind(std::string_view name) {
  if (name == "speaker") return DomainKind::kSpeaker;
  if (name == "emotion") return DomainKind::kEmotion;
  return std::nullopt;
}

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace emovc
