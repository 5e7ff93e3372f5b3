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

#ifndef EMOVC_DATA_INGEST_H_
#define EMOVC_DATA_INGEST_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emovc/types.h"

namespace emovc {

enum class Split { kTrain, kVal, kTest };

std::string_view SplitName(Split s);
std::optional<Split> ParseSplit(std::string_view name);

struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  DomainCode speaker;
  std::optional<DomainCode> emotion;
  std::optional<std::string> transcript;
  std::optional<Split> split;
};

/// Records plus the speaker label table (dense index -> label, file order).
struct Manifest {
  std::vector<UtteranceRecord> records;
  std::vector<std::string> speaker_labels;

  int num_speakers() const { return static_cast<int>(speaker_labels.size()); }
  /// Dense index of a speaker label; throws std::out_of_range if unknown.
  int SpeakerIndex(const std::string& label) const;
};

// Parses a JSON-lines manifest. Relative audio paths are resolved against
// the manifest's directory. Throws FormatError naming the offending line.
Manifest ParseManifest(const std::string& path);
Manifest ParseManifestText(const std::string& text,
                           const std::string& base_dir = "");

// Stratified 0.8/0.1/0.1 split per speaker. Returns a copy of `records`
// with `split` assigned; order is preserved.
std::vector<UtteranceRecord> SplitRecords(
    const std::vector<UtteranceRecord>& records, uint64_t seed);

/// Per-speaker split sizes for n utterances: {train, val, test}.
std::array<int, 3> SplitSizes(int n);

// <manifest>.splits.json: {"id": "train" | "val" | "test", ...}
std::string SplitsPath(const std::string& manifest_path);
void WriteSplits(const std::string& path,
                 const std::vector<UtteranceRecord>& records);
// Applies a splits file; ids missing from the file keep their split.
void ApplySplits(const std::string& path,
                 std::vector<UtteranceRecord>* records);

/// Domain of a record under the given kind, or nullopt (no emotion label).
std::optional<DomainCode> RecordDomain(const UtteranceRecord& r,
                                       DomainKind kind);

struct TrainingTuple {
  UtteranceRecord source;
  UtteranceRecord reference;
  UtteranceRecord reference2;
  DomainCode target;
};

// Draws (source, reference, reference2) tuples from the training split.
// Records without an assigned split count as training data. The target
// domain is uniform over domains that have training utterances.
class TupleSampler {
 public:
  TupleSampler(std::vector<UtteranceRecord> records, DomainKind kind);

  TrainingTuple Sample(std::mt19937_64& rng) const;

  int num_domains() const { return static_cast<int>(by_domain_.size()); }
  const std::vector<UtteranceRecord>& pool() const { return pool_; }

 private:
  DomainKind kind_;
  std::vector<UtteranceRecord> pool_;          // eligible training records
  std::vector<std::vector<size_t>> by_domain_; // indices into pool_
  std::vector<int> live_domains_;              // domains with >= 1 record
};

TrainingTuple SampleTuple(const std::vector<UtteranceRecord>& records,
                          std::mt19937_64& rng,
                          DomainKind kind = DomainKind::kSpeaker);

}  // namespace emovc

#endif  // EMOVC_DATA_INGEST_H_
