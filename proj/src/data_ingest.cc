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

#include "emovc/data_ingest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <glog/logging.h>

#include "json.hpp"

namespace emovc {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

int Manifest::SpeakerIndex(const std::string& label) const {
  auto it = std::find(speaker_labels.begin(), speaker_labels.end(), label);
  if (it == speaker_labels.end()) {
    throw std::out_of_range("unknown speaker label: " + label);
  }
  return static_cast<int>(it - speaker_labels.begin());
}

namespace {

[[noreturn]] void LineError(size_t line_no, const std::string& what) {
  throw FormatError("manifest line " + std::to_string(line_no) + ": " + what);
}

std::string RequireString(const json& j, const char* key, size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) LineError(line_no, std::string("missing field '") + key + "'");
  if (!it->is_string()) LineError(line_no, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

Manifest ParseManifestText(const std::string& text,
                           const std::string& base_dir) {
  Manifest m;
  std::map<std::string, int> speaker_index;
  std::unordered_set<std::string> ids;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      LineError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) LineError(line_no, "record must be a JSON object");

    UtteranceRecord r;
    r.id = RequireString(j, "id", line_no);
    if (r.id.empty()) LineError(line_no, "empty id");
    r.audio_path = RequireString(j, "path", line_no);
    if (r.audio_path.empty()) LineError(line_no, "empty path");
    if (!base_dir.empty() && fs::path(r.audio_path).is_relative()) {
      r.audio_path = (fs::path(base_dir) / r.audio_path).string();
    }

    auto spk = j.find("speaker");
    if (spk == j.end()) LineError(line_no, "missing field 'speaker'");
    std::string label;
    if (spk->is_string()) {
      label = spk->get<std::string>();
    } else if (spk->is_number_integer()) {
      label = std::to_string(spk->get<long long>());
    } else {
      LineError(line_no, "field 'speaker' must be a string or integer");
    }
    auto [it, inserted] =
        speaker_index.emplace(label, static_cast<int>(m.speaker_labels.size()));
    if (inserted) m.speaker_labels.push_back(label);
    r.speaker = {it->second, DomainKind::kSpeaker};

    if (auto e = j.find("emotion"); e != j.end() && !e->is_null()) {
      if (!e->is_string()) LineError(line_no, "field 'emotion' must be a string");
      auto idx = EmotionIndex(e->get<std::string>());
      if (!idx) LineError(line_no, "unknown emotion '" + e->get<std::string>() + "'");
      r.emotion = DomainCode{*idx, DomainKind::kEmotion};
    }
    if (auto t = j.find("text"); t != j.end() && !t->is_null()) {
      if (!t->is_string()) LineError(line_no, "field 'text' must be a string");
      r.transcript = t->get<std::string>();
    }
    if (!ids.insert(r.id).second) {
      LineError(line_no, "duplicate id '" + r.id + "'");
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest ParseManifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ParseManifestText(ss.str(), fs::path(path).parent_path().string());
}

std::array<int, 3> SplitSizes(int n) {
  int n_val = static_cast<int>(std::lround(0.1 * n));
  int n_test = static_cast<int>(std::lround(0.1 * n));
  int n_train = n - n_val - n_test;
  // Every speaker keeps at least one training item.
  while (n_train < 1 && n_test > 0) { --n_test; ++n_train; }
  while (n_train < 1 && n_val > 0) { --n_val; ++n_train; }
  return {n_train, n_val, n_test};
}

std::vector<UtteranceRecord> SplitRecords(
    const std::vector<UtteranceRecord>& records, uint64_t seed) {
  if (records.empty()) throw std::invalid_argument("SplitRecords: no records");
  int num_speakers = 0;
  for (const auto& r : records) {
    num_speakers = std::max(num_speakers, r.speaker.index + 1);
  }
  std::vector<std::vector<size_t>> by_speaker(num_speakers);
  for (size_t i = 0; i < records.size(); ++i) {
    by_speaker[records[i].speaker.index].push_back(i);
  }
  std::vector<UtteranceRecord> out = records;
  std::mt19937_64 rng(seed);
  for (int s = 0; s < num_speakers; ++s) {
    auto& idx = by_speaker[s];
    if (idx.empty()) {
      throw std::invalid_argument("SplitRecords: speaker " + std::to_string(s) +
                                  " has zero utterances");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto [n_train, n_val, n_test] = SplitSizes(static_cast<int>(idx.size()));
    (void)n_test;
    for (size_t k = 0; k < idx.size(); ++k) {
      const int ki = static_cast<int>(k);
      out[idx[k]].split = ki < n_train           ? Split::kTrain
                          : ki < n_train + n_val ? Split::kVal
                                                 : Split::kTest;
    }
  }
  return out;
}

std::string SplitsPath(const std::string& manifest_path) {
  return manifest_path + ".splits.json";
}

void WriteSplits(const std::string& path,
                 const std::vector<UtteranceRecord>& records) {
  json j = json::object();
  for (const auto& r : records) {
    if (!r.split) throw std::invalid_argument("record " + r.id + " has no split");
    j[r.id] = std::string(SplitName(*r.split));
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

void ApplySplits(const std::string& path,
                 std::vector<UtteranceRecord>* records) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open splits file: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("splits file " + path + ": " + e.what());
  }
  for (auto& r : *records) {
    auto it = j.find(r.id);
    if (it == j.end()) continue;
    auto s = ParseSplit(it->get<std::string>());
    if (!s) throw FormatError("splits file: bad split for " + r.id);
    r.split = s;
  }
}

std::optional<DomainCode> RecordDomain(const UtteranceRecord& r,
                                       DomainKind kind) {
  if (kind == DomainKind::kSpeaker) return r.speaker;
  return r.emotion;
}

TupleSampler::TupleSampler(std::vector<UtteranceRecord> records,
                           DomainKind kind)
    : kind_(kind) {
  for (auto& r : records) {
    if (r.split && *r.split != Split::kTrain) continue;
    auto d = RecordDomain(r, kind);
    if (!d) continue;
    if (d->index >= static_cast<int>(by_domain_.size())) {
      by_domain_.resize(d->index + 1);
    }
    by_domain_[d->index].push_back(pool_.size());
    pool_.push_back(std::move(r));
  }
  if (pool_.empty()) {
    throw std::invalid_argument("TupleSampler: empty training set");
  }
  for (int d = 0; d < static_cast<int>(by_domain_.size()); ++d) {
    if (!by_domain_[d].empty()) live_domains_.push_back(d);
  }
}

TrainingTuple TupleSampler::Sample(std::mt19937_64& rng) const {
  auto pick = [&rng](size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
  };
  TrainingTuple t;
  t.source = pool_[pick(pool_.size())];
  const int target = live_domains_[pick(live_domains_.size())];
  t.target = {target, kind_};
  const auto& members = by_domain_[target];
  const size_t a = pick(members.size());
  t.reference = pool_[members[a]];
  if (members.size() < 2) {
    LOG(WARNING) << DomainKindName(kind_) << " " << target
                 << " has a single training utterance; reference2 == reference";
    t.reference2 = t.reference;
  } else {
    size_t b = pick(members.size() - 1);
    if (b >= a) ++b;
    t.reference2 = pool_[members[b]];
  }
  return t;
}

TrainingTuple SampleTuple(const std::vector<UtteranceRecord>& records,
                          std::mt19937_64& rng, DomainKind kind) {
  return TupleSampler(records, kind).Sample(rng);
}

}  // namespace emovc
