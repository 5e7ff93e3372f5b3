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

#include <fstream>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "test_util.h"

namespace emovc {
namespace {

std::vector<UtteranceRecord> Records(const std::vector<int>& per_speaker) {
  std::vector<UtteranceRecord> out;
  for (int s = 0; s < static_cast<int>(per_speaker.size()); ++s) {
    for (int i = 0; i < per_speaker[s]; ++i) {
      UtteranceRecord r;
      r.id = "s" + std::to_string(s) + "_" + std::to_string(i);
      r.audio_path = r.id + ".wav";
      r.speaker = {s, DomainKind::kSpeaker};
      r.emotion = DomainCode{i % kNumEmotions, DomainKind::kEmotion};
      out.push_back(r);
    }
  }
  return out;
}

std::map<std::pair<int, Split>, int> CountBySpeaker(const std::vector<UtteranceRecord>& rs) {
  std::map<std::pair<int, Split>, int> n;
  for (const auto& r : rs) ++n[{r.speaker.index, *r.split}];
  return n;
}

TEST(ParseManifest, MinimalLineHasNoEmotion) {
  const Manifest m = ParseManifestText(R"({"id":"u1","path":"a.wav","speaker":0})");
  ASSERT_EQ(m.records.size(), 1u);
  const UtteranceRecord& r = m.records[0];
  EXPECT_EQ(r.id, "u1");
  EXPECT_EQ(r.audio_path, "a.wav");
  EXPECT_EQ(r.speaker.index, 0);
  EXPECT_FALSE(r.emotion.has_value());
  EXPECT_FALSE(r.transcript.has_value());
  EXPECT_FALSE(r.split.has_value());
  EXPECT_EQ(m.speaker_labels, std::vector<std::string>{"0"});
}

TEST(ParseManifest, EmptyFileGivesNoRecords) {
  const std::string path = testing::TempDir("ingest") + "/empty.jsonl";
  std::ofstream(path).close();
  EXPECT_TRUE(ParseManifest(path).records.empty());
}

TEST(ParseManifest, DuplicateIdIsRejectedWithLineNumber) {
  const std::string text =
      "{\"id\":\"u1\",\"path\":\"a.wav\",\"speaker\":\"x\"}\n"
      "{\"id\":\"u1\",\"path\":\"b.wav\",\"speaker\":\"x\"}\n";
  try {
    ParseManifestText(text);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos) << e.what();
  }
}

TEST(ParseManifest, MalformedLinesReportTheirLine) {
  const std::vector<std::string> bad = {
      "{not json}",
      R"({"path":"a.wav","speaker":"x"})",
      R"({"id":"u","path":"","speaker":"x"})",
      R"({"id":"u","path":"a.wav"})",
      R"({"id":"u","path":"a.wav","speaker":"x","emotion":"bored"})",
      R"({"id":"u","path":"a.wav","speaker":1.5})",
      R"(["u","a.wav"])",
  };
  for (const auto& line : bad) {
    const std::string text = "\n" + line + "\n";
    try {
      ParseManifestText(text);
      ADD_FAILURE() << "accepted: " << line;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(ParseManifest, MissingFileThrows) {
  EXPECT_THROW(ParseManifest("/nonexistent/manifest.jsonl"), std::runtime_error);
}

TEST(ParseManifest, LabelsAreDenseInFileOrderAndPathsResolve) {
  const std::string dir = testing::TempDir("ingest");
  const std::string path = dir + "/m.jsonl";
  std::ofstream(path) << R"({"id":"a","path":"x/a.wav","speaker":"bob","emotion":"sad","text":"hi"})"
                      << "\n"
                      << R"({"id":"b","path":"/abs/b.wav","speaker":"amy"})" << "\n"
                      << R"({"id":"c","path":"c.wav","speaker":"bob","emotion":"surprise"})" << "\n";
  const Manifest m = ParseManifest(path);
  ASSERT_EQ(m.records.size(), 3u);
  EXPECT_EQ(m.speaker_labels, (std::vector<std::string>{"bob", "amy"}));
  EXPECT_EQ(m.records[1].speaker.index, 1);
  EXPECT_EQ(m.records[2].speaker.index, 0);
  EXPECT_EQ(m.SpeakerIndex("amy"), 1);
  EXPECT_THROW(m.SpeakerIndex("zed"), std::out_of_range);
  EXPECT_EQ(m.records[0].audio_path, dir + "/x/a.wav");
  EXPECT_EQ(m.records[1].audio_path, "/abs/b.wav");
  EXPECT_EQ(m.records[0].emotion->index, 1);
  EXPECT_EQ(m.records[2].emotion->index, 4);
  EXPECT_EQ(*m.records[0].transcript, "hi");
}

TEST(SplitRecords, TenRecordsOneSpeaker) {
  const auto split = SplitRecords(Records({10}), 7);
  const auto n = CountBySpeaker(split);
  EXPECT_EQ(n.at({0, Split::kTrain}), 8);
  EXPECT_EQ(n.at({0, Split::kVal}), 1);
  EXPECT_EQ(n.at({0, Split::kTest}), 1);
}

TEST(SplitRecords, HundredRecordsTwoSpeakers) {
  const auto split = SplitRecords(Records({50, 50}), 3);
  const auto n = CountBySpeaker(split);
  for (int s = 0; s < 2; ++s) {
    EXPECT_EQ(n.at({s, Split::kTrain}), 40);
    EXPECT_EQ(n.at({s, Split::kVal}), 5);
    EXPECT_EQ(n.at({s, Split::kTest}), 5);
  }
}

TEST(SplitRecords, DeterministicPartitionPreservingOrder) {
  const auto in = Records({13, 7, 1});
  const auto a = SplitRecords(in, 11);
  const auto b = SplitRecords(in, 11);
  ASSERT_EQ(a.size(), in.size());
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, in[i].id);
    ASSERT_TRUE(a[i].split.has_value());
    EXPECT_EQ(*a[i].split, *b[i].split);
  }
  // A single-utterance speaker keeps its item in train.
  EXPECT_EQ(*a.back().split, Split::kTrain);

  const auto c = SplitRecords(in, 12);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) differs |= *a[i].split != *c[i].split;
  EXPECT_TRUE(differs);
}

TEST(SplitRecords, SizesKeepOneTrainItem) {
  for (int n = 1; n <= 60; ++n) {
    const auto s = SplitSizes(n);
    EXPECT_EQ(s[0] + s[1] + s[2], n);
    EXPECT_GE(s[0], 1);
  }
  EXPECT_EQ(SplitSizes(10), (std::array<int, 3>{8, 1, 1}));
}

TEST(SplitRecords, ErrorsOnEmptyInputOrMissingSpeaker) {
  EXPECT_THROW(SplitRecords({}, 1), std::invalid_argument);
  auto rs = Records({3});
  rs[0].speaker.index = 2;  // speaker 1 now has no utterances
  EXPECT_THROW(SplitRecords(rs, 1), std::invalid_argument);
}

TEST(SplitRecords, SplitsFileRoundTrip) {
  const std::string path = testing::TempDir("ingest") + "/m.jsonl.splits.json";
  EXPECT_EQ(SplitsPath("/d/m.jsonl"), "/d/m.jsonl.splits.json");
  const auto split = SplitRecords(Records({10, 10}), 5);
  WriteSplits(path, split);
  auto fresh = Records({10, 10});
  ApplySplits(path, &fresh);
  for (size_t i = 0; i < fresh.size(); ++i) EXPECT_EQ(fresh[i].split, split[i].split);
  EXPECT_THROW(WriteSplits(path, Records({2})), std::invalid_argument);
}

TEST(SampleTuple, ReferencesShareTheTargetAndDiffer) {
  std::mt19937_64 rng(1);
  const auto rs = Records({2, 2});
  for (int i = 0; i < 200; ++i) {
    const TrainingTuple t = SampleTuple(rs, rng);
    EXPECT_EQ(t.reference.speaker, t.target);
    EXPECT_EQ(t.reference2.speaker, t.target);
    EXPECT_NE(t.reference.id, t.reference2.id);
  }
}

TEST(SampleTuple, SingleUtteranceFallsBackToSameReference) {
  std::mt19937_64 rng(2);
  const auto rs = Records({1});
  const TrainingTuple t = SampleTuple(rs, rng);
  EXPECT_EQ(t.reference.id, t.reference2.id);
  EXPECT_EQ(t.source.id, t.reference.id);
}

TEST(SampleTuple, TargetsAreUniformOverSpeakers) {
  const TupleSampler sampler(Records({3, 10, 25}), DomainKind::kSpeaker);
  std::mt19937_64 rng(3);
  std::array<int, 3> counts{};
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) ++counts[sampler.Sample(rng).target.index];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / kDraws, 1.0 / 3.0, 0.05 / 3.0);
}

TEST(SampleTuple, NeverDrawsHeldOutRecords) {
  const auto split = SplitRecords(Records({20, 20}), 9);
  const TupleSampler sampler(split, DomainKind::kSpeaker);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const TrainingTuple t = sampler.Sample(rng);
    for (const auto* r : {&t.source, &t.reference, &t.reference2}) EXPECT_EQ(*r->split, Split::kTrain);
  }
}

TEST(SampleTuple, IdenticalSeedsGiveIdenticalStreams) {
  const auto rs = Records({5, 6, 7});
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 50; ++i) {
    const TrainingTuple x = SampleTuple(rs, a), y = SampleTuple(rs, b);
    EXPECT_EQ(x.source.id, y.source.id);
    EXPECT_EQ(x.reference.id, y.reference.id);
    EXPECT_EQ(x.reference2.id, y.reference2.id);
  }
}

TEST(SampleTuple, EmotionDomainsSkipUnlabeledRecords) {
  auto rs = Records({10});
  for (size_t i = 0; i < rs.size(); i += 2) rs[i].emotion.reset();
  const TupleSampler sampler(rs, DomainKind::kEmotion);
  EXPECT_EQ(sampler.pool().size(), 5u);
  std::mt19937_64 rng(5);
  const TrainingTuple t = sampler.Sample(rng);
  EXPECT_EQ(t.target.kind, DomainKind::kEmotion);
  EXPECT_EQ(t.reference.emotion->index, t.target.index);
}

TEST(SampleTuple, EmptyTrainingSetThrows) {
  auto rs = Records({2});
  for (auto& r : rs) r.split = Split::kTest;
  std::mt19937_64 rng(6);
  EXPECT_THROW(SampleTuple(rs, rng), std::invalid_argument);
  EXPECT_THROW(SampleTuple({}, rng), std::invalid_argument);
}

}  // namespace
}  // namespace emovc
