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

#ifndef EMOVC_LOSSES_H_
#define EMOVC_LOSSES_H_

#include <optional>
#include <string>
#include <vector>

#include "emovc/audio.h"
#include "emovc/autodiff.h"
#include "json.hpp"

// Training objectives. Every distance term is a mean of elementwise
// absolute differences. Each loss exists at the graph level (ad::Var in,
// 1x1 ad::Var out) so it can be back-propagated; value-level overloads wrap
// the same graph code.
namespace emovc::losses {

using ad::Var;

struct LossWeights {
  double spk = 0.5;
  double aspk = 0.1;
  double style = 1.0;
  double div = 1.0;
  double asr = 10.0;
  double norm = 1.0;
  double cycle = 5.0;
  double f0 = 5.0;
  double demo = 2.0;
  double inv = 5.0;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

enum class StyleLossMode { kVanilla, kAugmented };
enum class AdversarialSide { kGenerator, kDiscriminator };
enum class SpeakerPhase { kGeneratorTargetsTarget, kDiscriminatorClassifiesSource };

// vanilla:   |se_ref - se_trg|
// augmented: |se_ref - se_trg| + |se_ref2 - se_trg| + |se_ref - se_ref2|
Var StyleReconstructionLoss(const Var& se_ref, const Var& se_trg,
                            const Var& se_ref2, StyleLossMode mode);
double StyleReconstructionLoss(const Eigen::VectorXd& se_ref,
                               const Eigen::VectorXd& se_trg,
                               const Eigen::VectorXd& se_ref2,
                               StyleLossMode mode);

// Distance between emotion embeddings of source and converted speech.
Var DemoLoss(const Var& emb_src, const Var& emb_trg);
double DemoLoss(const Eigen::VectorXd& emb_src, const Eigen::VectorXd& emb_trg);

// Distance between encoder latents of source and converted speech.
Var InvLoss(const Var& code_src, const Var& code_trg);

// Non-saturating form. Generator: softplus(-fake). Discriminator:
// softplus(-real) + softplus(fake). `real_logit` is ignored on the
// generator side.
Var AdversarialLoss(const Var& real_logit, const Var& fake_logit,
                    AdversarialSide side);
double AdversarialLoss(double real_logit, double fake_logit, AdversarialSide side);

// Cross-entropy of [N x 1] logits against `label`. The phase only records
// which label the caller must pass (target for the generator phase, source
// for the discriminator phase); throws std::out_of_range for a bad label.
Var SpeakerAdvLoss(const Var& logits, int label, SpeakerPhase phase);
double SpeakerAdvLoss(const Eigen::VectorXd& logits, int label, SpeakerPhase phase);

Var DiversityLoss(const Var& out1, const Var& out2);
Var CycleLoss(const Var& x_src, const Var& x_cycled);

// Mean over frames of |L1(frame_src) - L1(frame_trg)|, [bins x frames]
// layout. Only frame counts must agree.
Var NormLoss(const Var& x_src, const Var& x_trg);

// Graph-level F0 term on [1 x T] pitch tracks. Both tracks are normalised
// by their mean over `voiced` frames; unvoiced frames contribute 0.
Var NormalizeF0(const Var& track, const std::vector<bool>& voiced);
Var F0Loss(const Var& track_src, const Var& track_trg,
           const std::vector<bool>& voiced);
// Contour-level F0 term. Contours are linearly interpolated to the shorter
// length first; two all-unvoiced contours give 0 (with a warning).
double F0Loss(const F0Contour& c_src, const F0Contour& c_trg);

Var AsrLoss(const Var& feat_src, const Var& feat_trg);

// Linguistic-content feature extractor used by the ASR term.
class ContentExtractor {
 public:
  virtual ~ContentExtractor() = default;
  virtual Var Features(const Var& mel) const = 0;
};

// Stub extractor: features are the mel itself.
class IdentityContentExtractor : public ContentExtractor {
 public:
  Var Features(const Var& mel) const override { return mel; }
};

struct GeneratorLosses {
  double adv = 0, spk = 0, style = 0, div = 0, asr = 0, norm = 0, cycle = 0,
         f0 = 0, demo = 0, inv = 0;
  double total = 0;
  bool demo_evaluated = false;
};

struct DiscriminatorLosses {
  // Adversarial value maximised by C: log sigma(real) + log(1 - sigma(fake)),
  // i.e. minus the discriminator-side softplus loss.
  double adv = 0;
  double aspk = 0;
  double total = 0;
};

struct LossReport {
  std::optional<GeneratorLosses> generator;
  std::optional<DiscriminatorLosses> discriminator;
  long step = 0;
};

// adv + spk + style - div + asr + norm + cycle + f0 + demo + inv, each
// weighted by its lambda. Throws std::domain_error for a non-finite part.
double GeneratorObjective(const GeneratorLosses& parts, const LossWeights& w);
// -adv + aspk * lambda_aspk.
double DiscriminatorObjective(double adv, double aspk, const LossWeights& w);

nlohmann::json ToJson(const LossReport& r);
nlohmann::json ToJson(const LossWeights& w);
LossWeights LossWeightsFromJson(const nlohmann::json& j);

}  // namespace emovc::losses

#endif  // EMOVC_LOSSES_H_
