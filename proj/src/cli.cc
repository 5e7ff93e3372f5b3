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

#include "emovc/cli.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <glog/logging.h>

#include "CLI11.hpp"
#include "emovc/checkpoint.h"
#include "emovc/config.h"
#include "emovc/diagnostics.h"
#include "emovc/emotion_embedder.h"
#include "emovc/evaluation.h"
#include "emovc/npy.h"
#include "emovc/trainer.h"
#include "json.hpp"

namespace emovc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for user errors that CLI11 cannot see, such as a missing --out.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string FileDigest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream bytes;
  bytes << in.rdbuf();
  return Hex(Fnv1a(bytes.str()));
}

struct Globals {
  std::string config_path;
  std::string out;
};

struct Context {
  std::string command;
  std::vector<std::string> args;
  std::string config_path;
  ConfigFile config;
  uint64_t seed = 0;
  json lineage = json::array();

  json EffectiveConfig() const {
    return {{"seed", seed},
            {"mel", ToJson(config.mel)},
            {"network", ToJson(config.network)},
            {"train", ToJson(config.train)},
            {"loss_weights", losses::ToJson(config.weights)},
            {"stage2", ToJson(config.stage2)},
            {"tsne", ToJson(config.tsne)}};
  }

  // Records an input checkpoint: its digest plus what its metadata says.
  void AddCheckpoint(const std::string& path) {
    json entry = {{"path", fs::absolute(path).string()}, {"fnv1a", FileDigest(path)}};
    try {
      const Checkpoint c = LoadCheckpoint(path);
      entry["kind"] = c.meta.value("kind", "");
      if (c.meta.contains("step")) entry["step"] = c.meta.at("step");
    } catch (const std::exception&) {
      // The command itself reports unreadable checkpoints.
    }
    lineage.push_back(std::move(entry));
  }

  void WriteProvenance(const std::string& out, bool out_is_dir, const json& outputs) const {
    const std::string path = ProvenancePath(out, out_is_dir);
    const json cfg = EffectiveConfig();
    const json record = {{"command", command},
                         {"args", args},
                         {"seed", seed},
                         {"config_path", config_path.empty() ? json() : json(config_path)},
                         {"config_hash", Hex(Fnv1a(cfg.dump()))},
                         {"config", cfg},
                         {"checkpoint_lineage", lineage},
                         {"outputs", outputs}};
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) {
      fs::create_directories(parent);
    }
    std::ofstream(path) << record.dump(2) << '\n';
  }
};

const std::string& RequireOut(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return g.out;
}

Manifest LoadManifestWithSplits(const std::string& path) {
  Manifest m = ParseManifest(path);
  const std::string splits = SplitsPath(path);
  if (fs::exists(splits)) ApplySplits(splits, &m.records);
  return m;
}

RunOptions BaseRunOptions(const Context& ctx) {
  RunOptions o;
  o.net = ctx.config.network;
  o.train = ctx.config.train;
  o.train.seed = ctx.seed;
  o.weights = ctx.config.weights;
  o.mel = ctx.config.mel;
  return o;
}

json CheckpointOutputs(const CheckpointSet& set) {
  return {{"final", set.final_checkpoint}, {"periodic", set.periodic}, {"log", set.log_path}};
}

DomainCode TargetDomain(const VcNetworks& nets, const std::vector<std::string>& labels,
                        const std::string& target) {
  if (nets.config.domain_kind == DomainKind::kEmotion) {
    if (auto e = EmotionIndex(target)) return {*e, DomainKind::kEmotion};
    throw ConfigError("unknown target emotion '" + target + "'");
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == target) return {static_cast<int>(i), DomainKind::kSpeaker};
  }
  throw ConfigError("unknown target speaker '" + target + "'");
}

int RunPrepare(Context& ctx, const Globals& g, const std::string& manifest_path) {
  Manifest m = ParseManifest(manifest_path);
  m.records = SplitRecords(m.records, ctx.seed);
  const std::string splits = SplitsPath(manifest_path);
  WriteSplits(splits, m.records);
  std::array<int, 3> counts{};
  for (const auto& r : m.records) ++counts[static_cast<size_t>(*r.split)];
  const std::string cache = CacheDirFromEnv();
  if (!cache.empty()) {
    FeatureStore features(ctx.config.mel, cache);
    for (const auto& r : m.records) features.Get(r);
  }
  std::cout << "train " << counts[0] << ", val " << counts[1] << ", test " << counts[2]
            << " -> " << splits << '\n';
  const json outputs = {{"splits", splits}, {"cache", cache}};
  if (g.out.empty()) {
    ctx.WriteProvenance(splits, false, outputs);
  } else {
    ctx.WriteProvenance(g.out, true, outputs);
  }
  return kExitOk;
}

int RunTrainVc(Context& ctx, const Globals& g, const std::string& manifest,
               const std::string& ablate, const std::string& resume,
               const std::string& emotion_ckpt) {
  const std::string& out = RequireOut(g);
  RunOptions o = BaseRunOptions(ctx);
  if (ablate == "demo") o.weights.demo = 0.0;
  if (ablate == "style") o.train.style_loss = losses::StyleLossMode::kVanilla;
  if (!emotion_ckpt.empty()) o.train.emotion_checkpoint = emotion_ckpt;
  o.resume_from = resume;
  if (!resume.empty()) ctx.AddCheckpoint(resume);
  if (o.weights.demo > 0 && !o.train.emotion_checkpoint.empty()) {
    ctx.AddCheckpoint(o.train.emotion_checkpoint);
  }
  const CheckpointSet set = RunTraining(manifest, o, out);
  ctx.WriteProvenance(out, true, CheckpointOutputs(set));
  std::cout << set.final_checkpoint << '\n';
  return kExitOk;
}

int RunStage1(Context& ctx, const Globals& g, const std::string& manifest) {
  const std::string& out = RequireOut(g);
  const CheckpointSet set = TrainStage1(manifest, BaseRunOptions(ctx), out);
  ctx.WriteProvenance(out, true, CheckpointOutputs(set));
  std::cout << set.final_checkpoint << '\n';
  return kExitOk;
}

int RunStage2(Context& ctx, const Globals& g, const std::string& stage1,
              const std::string& manifest_path) {
  std::string out = RequireOut(g);
  if (fs::is_directory(out) || fs::path(out).extension() != ".ckpt") {
    out = (fs::path(out) / "c_emo.ckpt").string();
  }
  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  ctx.AddCheckpoint(stage1);
  const Manifest manifest = LoadManifestWithSplits(manifest_path);
  FeatureStore features(ctx.config.mel, CacheDirFromEnv());
  Stage2Config cfg = ctx.config.stage2;
  cfg.seed = ctx.seed;
  Stage2History history;
  TrainStage2(stage1, manifest, features, cfg, out, &history);
  ctx.WriteProvenance(out, false,
                      {{"checkpoint", out},
                       {"final_accuracy", history.final_accuracy},
                       {"final_loss", history.loss.empty() ? 0.0 : history.loss.back()}});
  std::cout << out << " (training accuracy " << history.final_accuracy << "%)\n";
  return kExitOk;
}

int RunConvert(Context& ctx, const Globals& g, const std::string& ckpt, const std::string& src,
               const std::string& target, const std::string& ref) {
  const std::string& out = RequireOut(g);
  ctx.AddCheckpoint(ckpt);
  std::vector<std::string> labels;
  const std::unique_ptr<VcNetworks> nets = LoadVcNetworks(ckpt, &labels);
  const DomainCode y = TargetDomain(*nets, labels, target);

  const UtteranceFeatures source = LoadUtteranceFeatures(src, ctx.config.mel);
  StyleEmbedding style;
  if (!ref.empty()) {
    style = StyleEncode(LoadUtteranceFeatures(ref, ctx.config.mel).mel, y, *nets);
  } else {
    std::mt19937_64 rng(ctx.seed);
    style = MappingForward(SampleNoise(nets->config.latent_dim, rng), y, *nets);
  }
  const std::vector<double> f0 = NormalizeF0(source.f0);
  const MelSpectrogram converted = GeneratorForward(source.mel, f0, style, *nets);

  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  npy::WriteNpz(out, {{"mel", converted.values}});

  // A pair sidecar next to the output lets `eval --pairs` score it directly.
  const fs::path out_path(out);
  const std::string stem = out_path.stem().string();
  const fs::path source_mel = out_path.parent_path() / (stem + ".source.npz");
  const fs::path pair = out_path.parent_path() / (stem + ".pair.json");
  npy::WriteNpz(source_mel.string(), {{"mel", source.mel.values}});
  json sidecar = {{"source_id", fs::path(src).stem().string()},
                  {"target_speaker", target},
                  {"source_mel", source_mel.filename().string()},
                  {"converted_mel", out_path.filename().string()}};
  const std::string ext = fs::path(src).extension().string();
  if (ext != ".npy" && ext != ".npz") sidecar["source_wav"] = fs::absolute(src).string();
  std::ofstream(pair) << sidecar.dump(2) << '\n';

  ctx.WriteProvenance(out, false,
                      {{"mel", out},
                       {"pair", pair.string()},
                       {"frames", converted.frames()},
                       {"style_source", ref.empty() ? "mapping" : "reference"}});
  return kExitOk;
}

int RunEval(Context& ctx, const Globals& g, const std::string& pairs, const std::string& cemo,
            const std::string& svm_manifest) {
  std::string out = RequireOut(g);
  if (fs::is_directory(out) || fs::path(out).extension() != ".json") {
    out = (fs::path(out) / "report.json").string();
  }
  eval::EvaluationAdapters adapters;
  adapters.mel = ctx.config.mel;
  std::shared_ptr<EmotionClassifier> c_emo;
  if (!cemo.empty()) {
    ctx.AddCheckpoint(cemo);
    c_emo = LoadEmotionClassifier(cemo);
    adapters.c_emo = c_emo.get();
  }
  std::optional<eval::EmotionSvm> svm;
  if (!svm_manifest.empty()) {
    const Manifest m = LoadManifestWithSplits(svm_manifest);
    FeatureStore features(ctx.config.mel, CacheDirFromEnv());
    std::vector<MelSpectrogram> mels;
    std::vector<std::string> labels;
    for (const auto& r : m.records) {
      if (!r.emotion || (r.split && *r.split != Split::kTrain)) continue;
      mels.push_back(features.Get(r).mel);
      labels.emplace_back(EmotionName(r.emotion->index));
    }
    svm = eval::EmotionSvm::Train(mels, labels, ctx.config.mel);
    adapters.svm = &*svm;
  }
  const eval::MetricReport report =
      eval::EvaluatePairs(eval::LoadConversionResults(pairs), adapters);

  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  const std::string csv = fs::path(out).replace_extension(".csv").string();
  std::ofstream(out) << report.ToJson().dump(2) << '\n';
  std::ofstream(csv) << report.ToCsv();
  ctx.WriteProvenance(out, false, {{"report", out}, {"csv", csv}});
  return kExitOk;
}

int RunDiagnose(Context& ctx, const Globals& g, const std::string& ckpt,
                const std::string& manifest_path) {
  const std::string& out = RequireOut(g);
  ctx.AddCheckpoint(ckpt);
  std::vector<std::string> labels;
  const std::unique_ptr<VcNetworks> nets = LoadVcNetworks(ckpt, &labels);
  const Manifest manifest = ParseManifest(manifest_path);
  FeatureStore features(ctx.config.mel, CacheDirFromEnv());
  const EmbeddingSet set =
      CollectStyleEmbeddings(*nets, manifest.records, features, labels, true);
  const LeakageScore score = ScoreLeakage(set);
  TsneConfig tsne = ctx.config.tsne;
  tsne.seed = ctx.seed;
  const Eigen::MatrixXd layout = ProjectTsne(set.vectors, tsne);
  WriteDiagnostics(out, set, layout, score);
  ctx.WriteProvenance(out, true,
                      {{"by_emotion", score.by_emotion},
                       {"by_speaker", score.by_speaker},
                       {"leakage_flag", score.leakage_flag}});
  std::cout << "silhouette by emotion " << score.by_emotion << ", by speaker "
            << score.by_speaker << (score.leakage_flag ? " (leakage)" : "") << '\n';
  return kExitOk;
}

int RunEmbed(Context& ctx, const Globals& g, const std::string& in, const std::string& cemo) {
  const std::string& out = RequireOut(g);
  ctx.AddCheckpoint(cemo);
  const std::shared_ptr<EmotionClassifier> c = LoadEmotionClassifier(cemo);
  if (c->trunk_config().n_mels != ctx.config.mel.n_mels) {
    throw ConfigError("classifier expects " + std::to_string(c->trunk_config().n_mels) +
                      " mel bins, config has " + std::to_string(ctx.config.mel.n_mels));
  }
  const EmotionEmbedding e = ExtractEmbedding(LoadUtteranceFeatures(in, ctx.config.mel).mel, *c);
  if (const fs::path parent = fs::path(out).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream(out) << json(std::vector<double>(e.values.data(),
                                                 e.values.data() + e.values.size()))
                            .dump()
                     << '\n';
  ctx.WriteProvenance(out, false, {{"embedding", out}, {"width", e.values.size()}});
  return kExitOk;
}

}  // namespace

std::string ProvenancePath(const std::string& out, bool out_is_dir) {
  return out_is_dir ? (fs::path(out) / "run.json").string() : out + ".run.json";
}

int Dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"emovc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return Dispatch(static_cast<int>(argv.size()), argv.data());
}

int Dispatch(int argc, const char* const* argv) {
  CLI::App app{"Emotion-preserving any-to-many voice conversion", "emovc"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  uint64_t seed_flag = 0;
  auto* seed_opt = app.add_option("--seed", seed_flag, "Random seed (overrides the config)");
  app.add_option("--config", g.config_path, "YAML configuration file");
  app.add_option("--out", g.out, "Output file or directory");

  std::string manifest, ckpt, src, target, ref, ablate, resume, emotion_ckpt, pairs, cemo,
      svm_manifest, in;

  auto* prepare = app.add_subcommand("prepare", "Assign train/val/test splits, warm the cache");
  prepare->add_option("--manifest", manifest, "JSON-lines manifest")->required();

  auto* train_vc = app.add_subcommand("train-vc", "Train the conversion model");
  train_vc->add_option("--manifest", manifest, "JSON-lines manifest")->required();
  train_vc->add_option("--ablate", ablate, "Disable a component")
      ->check(CLI::IsMember({"demo", "style"}));
  train_vc->add_option("--resume", resume, "Checkpoint to resume from");
  train_vc->add_option("--emotion-ckpt", emotion_ckpt, "Emotion classifier checkpoint");

  auto* stage1 = app.add_subcommand("train-emo-stage1", "Emotion-domain style encoder training");
  stage1->add_option("--manifest", manifest, "JSON-lines manifest")->required();

  auto* stage2 = app.add_subcommand("train-emo-stage2", "Train the emotion classifier head");
  stage2->add_option("--ckpt", ckpt, "Stage-one checkpoint")->required();
  stage2->add_option("--manifest", manifest, "JSON-lines manifest")->required();

  auto* convert = app.add_subcommand("convert", "Convert one utterance to a target speaker");
  convert->add_option("--ckpt", ckpt, "Conversion checkpoint")->required();
  convert->add_option("--src", src, "Source audio or mel")->required();
  convert->add_option("--target-speaker", target, "Target speaker label")->required();
  convert->add_option("--ref", ref, "Reference utterance of the target speaker");

  auto* evaluate = app.add_subcommand("eval", "Score a directory of conversions");
  evaluate->add_option("--pairs", pairs, "Directory of conversion sidecars")->required();
  evaluate->add_option("--cemo", cemo, "Emotion classifier checkpoint");
  evaluate->add_option("--svm-manifest", svm_manifest, "Emotion-labelled SVM training data");

  auto* diagnose = app.add_subcommand("diagnose-leakage", "Emotion-leakage diagnostics");
  diagnose->add_option("--ckpt", ckpt, "Conversion checkpoint")->required();
  diagnose->add_option("--manifest", manifest, "Emotion-labelled manifest")->required();

  auto* embed = app.add_subcommand("embed", "Emotion embedding of one utterance");
  embed->add_option("--in", in, "Audio or mel file")->required();
  embed->add_option("--cemo", cemo, "Emotion classifier checkpoint")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return kExitOk;
    std::cerr << app.help();
    return kExitUsage;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  for (int i = 1; i < argc; ++i) ctx.args.emplace_back(argv[i]);
  try {
    if (!g.config_path.empty()) {
      ctx.config = LoadConfigFile(g.config_path);
      ctx.config_path = fs::absolute(g.config_path).string();
    }
    ctx.config.network.n_mels = ctx.config.mel.n_mels;
    ctx.seed = *seed_opt ? seed_flag : ctx.config.seed.value_or(0);

    if (*prepare) return RunPrepare(ctx, g, manifest);
    if (*train_vc) return RunTrainVc(ctx, g, manifest, ablate, resume, emotion_ckpt);
    if (*stage1) return RunStage1(ctx, g, manifest);
    if (*stage2) return RunStage2(ctx, g, ckpt, manifest);
    if (*convert) return RunConvert(ctx, g, ckpt, src, target, ref);
    if (*evaluate) return RunEval(ctx, g, pairs, cemo, svm_manifest);
    if (*diagnose) return RunDiagnose(ctx, g, ckpt, manifest);
    if (*embed) return RunEmbed(ctx, g, in, cemo);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace emovc::cli
