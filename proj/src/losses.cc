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

#include "emovc/losses.h"

#include <cmath>
#include <stdexcept>

#include <glog/logging.h>

namespace emovc::losses {

namespace {

void RequireSameShape(const Var& a, const Var& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

Var Col(const Eigen::VectorXd& v) { return Var::Constant(v); }

}  // namespace

Var StyleReconstructionLoss(const Var& se_ref, const Var& se_trg,
                            const Var& se_ref2, StyleLossMode mode) {
  RequireSameShape(se_ref, se_trg, "style loss");
  Var loss = ad::MeanAbsDiff(se_ref, se_trg);
  if (mode == StyleLossMode::kVanilla) return loss;
  RequireSameShape(se_ref, se_ref2, "style loss");
  loss = ad::Add(loss, ad::MeanAbsDiff(se_ref2, se_trg));
  return ad::Add(loss, ad::MeanAbsDiff(se_ref, se_ref2));
}

double StyleReconstructionLoss(const Eigen::VectorXd& se_ref,
                               const Eigen::VectorXd& se_trg,
                               const Eigen::VectorXd& se_ref2,
                               StyleLossMode mode) {
  return StyleReconstructionLoss(Col(se_ref), Col(se_trg), Col(se_ref2), mode).item();
}

Var DemoLoss(const Var& emb_src, const Var& emb_trg) {
  RequireSameShape(emb_src, emb_trg, "demo loss");
  return ad::MeanAbsDiff(emb_src, emb_trg);
}

double DemoLoss(const Eigen::VectorXd& emb_src, const Eigen::VectorXd& emb_trg) {
  return DemoLoss(Col(emb_src), Col(emb_trg)).item();
}

Var InvLoss(const Var& code_src, const Var& code_trg) {
  RequireSameShape(code_src, code_trg, "inv loss");
  return ad::MeanAbsDiff(code_src, code_trg);
}

Var AdversarialLoss(const Var& real_logit, const Var& fake_logit,
                    AdversarialSide side) {
  if (side == AdversarialSide::kGenerator) {
    return ad::Softplus(ad::Scale(fake_logit, -1.0));
  }
  return ad::Add(ad::Softplus(ad::Scale(real_logit, -1.0)), ad::Softplus(fake_logit));
}

double AdversarialLoss(double real_logit, double fake_logit, AdversarialSide side) {
  return AdversarialLoss(Var::Scalar(real_logit), Var::Scalar(fake_logit), side).item();
}

Var SpeakerAdvLoss(const Var& logits, int label, SpeakerPhase) {
  if (logits.cols() != 1) throw std::invalid_argument("speaker loss: logits must be a column");
  if (label < 0 || label >= logits.rows()) {
    throw std::out_of_range("speaker loss: label " + std::to_string(label) +
                            " out of range");
  }
  return ad::Scale(ad::Element(ad::LogSoftmaxCols(logits), label, 0), -1.0);
}

double SpeakerAdvLoss(const Eigen::VectorXd& logits, int label, SpeakerPhase phase) {
  return SpeakerAdvLoss(Col(logits), label, phase).item();
}

Var DiversityLoss(const Var& out1, const Var& out2) {
  RequireSameShape(out1, out2, "diversity loss");
  return ad::MeanAbsDiff(out1, out2);
}

Var CycleLoss(const Var& x_src, const Var& x_cycled) {
  RequireSameShape(x_src, x_cycled, "cycle loss");
  return ad::MeanAbsDiff(x_src, x_cycled);
}

Var NormLoss(const Var& x_src, const Var& x_trg) {
  if (x_src.cols() != x_trg.cols()) {
    throw std::invalid_argument("norm loss: frame count mismatch");
  }
  return ad::MeanAbsDiff(ad::SumRows(ad::Abs(x_src)), ad::SumRows(ad::Abs(x_trg)));
}

Var NormalizeF0(const Var& track, const std::vector<bool>& voiced) {
  if (track.rows() != 1 || track.cols() != static_cast<Eigen::Index>(voiced.size())) {
    throw std::invalid_argument("NormalizeF0: track and voicing lengths differ");
  }
  ad::Matrix mask(1, voiced.size());
  int count = 0;
  for (size_t i = 0; i < voiced.size(); ++i) {
    mask(0, i) = voiced[i] ? 1.0 : 0.0;
    count += voiced[i] ? 1 : 0;
  }
  if (count == 0) return Var::Constant(ad::Matrix::Zero(1, voiced.size()));
  Var masked = ad::Mul(track, Var::Constant(mask));
  Var mean = ad::Scale(ad::Sum(masked), 1.0 / count);
  return ad::DivByScalar(masked, mean);
}

Var F0Loss(const Var& track_src, const Var& track_trg,
           const std::vector<bool>& voiced) {
  RequireSameShape(track_src, track_trg, "f0 loss");
  return ad::MeanAbsDiff(NormalizeF0(track_src, voiced), NormalizeF0(track_trg, voiced));
}

double F0Loss(const F0Contour& c_src, const F0Contour& c_trg) {
  const size_t len = std::min(c_src.size(), c_trg.size());
  const F0Contour a = ResampleContour(c_src, len);
  const F0Contour b = ResampleContour(c_trg, len);
  const bool any_a = std::find(a.voiced.begin(), a.voiced.end(), true) != a.voiced.end();
  const bool any_b = std::find(b.voiced.begin(), b.voiced.end(), true) != b.voiced.end();
  if (!any_a && !any_b) {
    LOG(WARNING) << "F0Loss: both contours are fully unvoiced; defined as 0";
    return 0.0;
  }
  if (len == 0) return 0.0;
  const std::vector<double> na = emovc::NormalizeF0(a);
  const std::vector<double> nb = emovc::NormalizeF0(b);
  ad::Matrix ma(1, len), mb(1, len);
  for (size_t i = 0; i < len; ++i) {
    ma(0, i) = na[i];
    mb(0, i) = nb[i];
  }
  return ad::MeanAbsDiff(Var::Constant(ma), Var::Constant(mb)).item();
}

Var AsrLoss(const Var& feat_src, const Var& feat_trg) {
  RequireSameShape(feat_src, feat_trg, "asr loss");
  return ad::MeanAbsDiff(feat_src, feat_trg);
}

double GeneratorObjective(const GeneratorLosses& p, const LossWeights& w) {
  for (double v : {p.adv, p.spk, p.style, p.div, p.asr, p.norm, p.cycle, p.f0,
                   p.demo, p.inv}) {
    if (!std::isfinite(v)) throw std::domain_error("GeneratorObjective: non-finite part");
  }
  double total = p.adv;
  total += w.spk * p.spk;
  total += w.style * p.style;
  total -= w.div * p.div;
  total += w.asr * p.asr;
  total += w.norm * p.norm;
  total += w.cycle * p.cycle;
  total += w.f0 * p.f0;
  total += w.demo * p.demo;
  total += w.inv * p.inv;
  return total;
}

double DiscriminatorObjective(double adv, double aspk, const LossWeights& w) {
  return -adv + w.aspk * aspk;
}

nlohmann::json ToJson(const LossReport& r) {
  nlohmann::json j;
  j["step"] = r.step;
  if (r.generator) {
    const auto& g = *r.generator;
    j["generator"] = {{"adv", g.adv},     {"spk", g.spk},     {"style", g.style},
                      {"div", g.div},     {"asr", g.asr},     {"norm", g.norm},
                      {"cycle", g.cycle}, {"f0", g.f0},       {"demo", g.demo},
                      {"inv", g.inv},     {"total", g.total}};
  }
  if (r.discriminator) {
    const auto& d = *r.discriminator;
    j["discriminator"] = {{"adv", d.adv}, {"aspk", d.aspk}, {"total", d.total}};
  }
  return j;
}

nlohmann::json ToJson(const LossWeights& w) {
  return {{"spk", w.spk},   {"aspk", w.aspk}, {"style", w.style}, {"div", w.div},
          {"asr", w.asr},   {"norm", w.norm}, {"cycle", w.cycle}, {"f0", w.f0},
          {"demo", w.demo}, {"inv", w.inv}};
}

LossWeights LossWeightsFromJson(const nlohmann::json& j) {
  LossWeights w;
  auto get = [&j](const char* k, double& dst) {
    if (j.contains(k)) dst = j.at(k).get<double>();
  };
  get("spk", w.spk);
  get("aspk", w.aspk);
  get("style", w.style);
  get("div", w.div);
  get("asr", w.asr);
  get("norm", w.norm);
  get("cycle", w.cycle);
  get("f0", w.f0);
  get("demo", w.demo);
  get("inv", w.inv);
  return w;
}

}  // namespace emovc::losses
