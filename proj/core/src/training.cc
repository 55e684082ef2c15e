// Copyright (c) 2026 The unifyspeech-cpp Authors
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

#include "unifyspeech/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>

#include "unifyspeech/encoders.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

namespace {

// Example ids of the speech-only batch start here so their dropout masks
// never coincide with the paired batch.
constexpr std::uint64_t kUnpairedExampleBase = 1u << 20;

Tensor BatchMean(std::vector<Tensor>& terms) {
  if (terms.empty()) return Tensor::Scalar(0.0);
  Tensor acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = Add(acc, terms[i]);
  return Scale(acc, 1.0 / static_cast<double>(terms.size()));
}

void RequireLabeled(const UtteranceRecord& rec, const char* what) {
  if (rec.phonemes.empty() || rec.durations.size() != rec.phonemes.size()) {
    throw DataError(std::string(what) + ": utterance " + rec.id + " has no phoneme durations");
  }
}

Tensor LogDurationTargets(std::span<const int> durations) {
  std::vector<double> t(durations.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::log(static_cast<double>(durations[i]) + 1.0);
  const std::size_t n = t.size();
  return Tensor::FromData({n}, std::move(t));
}

double PitchMseHz(const Tensor& logits, const PitchContour& target) {
  const PitchContour pred = DecodeF0(logits);
  double s = 0.0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const double d = pred.f0_hz[t] - target.f0_hz[t];
    s += d * d;
  }
  return pred.size() ? s / static_cast<double>(pred.size()) : 0.0;
}

class Sampler {
 public:
  Sampler(std::size_t pool, std::size_t batch, Rng rng) : pool_(pool), batch_(batch), rng_(rng) {}

  std::vector<std::size_t> Next() {
    std::vector<std::size_t> out;
    while (out.size() < batch_ && pool_ > 0) {
      if (pos_ == order_.size()) Reshuffle();
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  void Reshuffle() {
    order_.resize(pool_);
    std::iota(order_.begin(), order_.end(), 0);
    Rng r = rng_.Fork(round_++);
    for (std::size_t i = pool_; i > 1; --i) {
      const auto j = static_cast<std::size_t>(r.UniformInt(0, static_cast<std::int64_t>(i - 1)));
      std::swap(order_[i - 1], order_[j]);
    }
    pos_ = 0;
  }

  std::size_t pool_, batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::uint64_t round_ = 0;
};

Tensor ConcatContentRows(const std::vector<const std::vector<QuantizedContent>*>& groups,
                         std::size_t dim) {
  std::vector<double> rows;
  for (const auto* group : groups) {
    for (const QuantizedContent& q : *group) {
      rows.insert(rows.end(), q.continuous.data().begin(), q.continuous.data().end());
    }
  }
  const std::size_t n = dim ? rows.size() / dim : 0;
  return Tensor::FromData({n, dim}, std::move(rows));
}

}  // namespace

ForwardContext StepContext::Forward(std::uint64_t example) const {
  ForwardContext f;
  f.training = training;
  f.dropout = dropout;
  f.seed = seed;
  f.step = step;
  f.example = example;
  return f;
}

TtsFragment TtsStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx) {
  TtsFragment frag;
  std::vector<Tensor> mel, ce, dur, aux;
  double pitch_mse = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const UtteranceRecord& rec = *batch[i];
    RequireLabeled(rec, "tts_step");
    const std::vector<int> bins = QuantizeContour(rec.f0);
    TtsOutputs out = model.ForwardTts(rec.phonemes, rec.durations, rec.mel, bins,
                                      ctx.Forward(i), ctx.count_usage);
    mel.push_back(Mse(out.mel, rec.mel));
    ce.push_back(SoftmaxCrossEntropy(out.pitch_logits, bins));
    dur.push_back(Mse(out.log_durations, LogDurationTargets(rec.durations)));
    aux.push_back(VqAuxLoss(out.content, ctx.beta));
    pitch_mse += PitchMseHz(out.pitch_logits, rec.f0);
    frag.quantized.push_back(std::move(out.content));
  }
  frag.mel = BatchMean(mel);
  frag.pitch_ce = BatchMean(ce);
  frag.duration = BatchMean(dur);
  frag.vq_aux = BatchMean(aux);
  frag.pitch_mse_hz = batch.empty() ? 0.0 : pitch_mse / static_cast<double>(batch.size());
  return frag;
}

VcFragment VcStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx) {
  VcFragment frag;
  std::vector<Tensor> mel, ce, aux;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const UtteranceRecord& rec = *batch[i];
    const std::vector<int> bins = QuantizeContour(rec.f0);
    VcOutputs out = model.ForwardVc(rec.mel, rec.mel, bins,
                                    ctx.Forward(kUnpairedExampleBase + i), ctx.count_usage);
    mel.push_back(Mse(out.mel, rec.mel));
    ce.push_back(SoftmaxCrossEntropy(out.pitch_logits, bins));
    aux.push_back(VqAuxLoss(out.content, ctx.beta));
    frag.quantized.push_back(std::move(out.content));
  }
  frag.mel = BatchMean(mel);
  frag.pitch_ce = BatchMean(ce);
  frag.vq_aux = BatchMean(aux);
  return frag;
}

PairFragment PairStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx) {
  PairFragment frag;
  std::vector<Tensor> pair, aux;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const UtteranceRecord& rec = *batch[i];
    RequireLabeled(rec, "pair_step");
    const ForwardContext f = ctx.Forward(i);
    // Text-side codes were already counted by the TTS fragment.
    QuantizedContent qp = model.Quantize(model.TextContent(rec.phonemes, rec.durations, f), false);
    QuantizedContent qs =
        model.Quantize(model.content_encoder().Forward(rec.mel, f), ctx.count_usage);
    pair.push_back(PairLoss(qp, qs));
    aux.push_back(VqAuxLoss(qs, ctx.beta));
    frag.text.push_back(std::move(qp));
    frag.speech.push_back(std::move(qs));
  }
  frag.pair = BatchMean(pair);
  frag.vq_aux = BatchMean(aux);
  return frag;
}

LossTerms CombineLosses(const LossWeights& w, const TtsFragment* tts, const PairFragment* pair,
                        const VcFragment* vc) {
  LossTerms out;
  LossReport& r = out.report;
  std::vector<Tensor> parts;
  Tensor aux;
  auto add_aux = [&](const Tensor& t) { aux = aux.defined() ? Add(aux, t) : t; };
  if (tts != nullptr) {
    Tensor rec = Add(Scale(tts->mel, w.mel), Scale(tts->pitch_ce, w.pitch));
    parts.push_back(rec);
    parts.push_back(Scale(tts->duration, w.duration));
    add_aux(tts->vq_aux);
    r.tts_mel = tts->mel.item();
    r.tts_pitch_ce = tts->pitch_ce.item();
    r.tts_pitch_mse_hz = tts->pitch_mse_hz;
    r.l_tts_rec = rec.item();
    r.l_duration = tts->duration.item();
  }
  if (pair != nullptr) {
    parts.push_back(Scale(pair->pair, w.pair));
    add_aux(pair->vq_aux);
    r.l_pair = pair->pair.item();
  }
  if (vc != nullptr) {
    Tensor rec = Add(Scale(vc->mel, w.mel), Scale(vc->pitch_ce, w.pitch));
    parts.push_back(Scale(rec, w.vc));
    add_aux(vc->vq_aux);
    r.vc_mel = vc->mel.item();
    r.vc_pitch_ce = vc->pitch_ce.item();
    r.l_vc_rec = rec.item();
  }
  if (aux.defined()) {
    parts.push_back(Scale(aux, w.vq_aux));
    r.l_vq_aux = aux.item();
  }
  if (parts.empty()) throw DataError("joint_step: no loss terms (empty batches)");
  out.total = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out.total = Add(out.total, parts[i]);
  r.total = out.total.item();
  return out;
}

TrainConfig ResolveMode(TrainConfig config) {
  if (config.mode == TrainMode::kNoVq) config.model.use_vq = false;
  config.Validate();
  return config;
}

namespace {

std::vector<Adam::Param> OptimizerParams(UnifySpeechModel& model) {
  std::vector<Adam::Param> params;
  for (const auto& [name, tensor] : model.params().items()) {
    params.push_back({name, tensor, name == "codebook.entries"});
  }
  return params;
}

}  // namespace

Trainer::Trainer(TrainConfig config)
    : Trainer(config, std::make_unique<UnifySpeechModel>(ResolveMode(config).model)) {}

Trainer::Trainer(TrainConfig config, std::unique_ptr<UnifySpeechModel> model)
    : config_(ResolveMode(std::move(config))),
      model_(std::move(model)),
      optimizer_(OptimizerParams(*model_), AdamOptions{config_.lr_init, 0.9, 0.999, 1e-8}) {
  if (model_->config().use_vq != config_.model.use_vq) {
    throw ConfigError("trainer: model quantization setting does not match mode " +
                      ToString(config_.mode));
  }
}

bool Trainer::UsesText() const { return config_.mode != TrainMode::kVcOnly; }

bool Trainer::UsesSpeech() const { return config_.mode != TrainMode::kTtsOnly; }

LossTerms Trainer::Compute(Batch paired, Batch unpaired, const StepContext& ctx) {
  std::optional<TtsFragment> tts;
  std::optional<PairFragment> pair;
  std::optional<VcFragment> vc;
  if (UsesText() && !paired.empty()) {
    tts = TtsStep(*model_, paired, ctx);
    if (UsesSpeech()) pair = PairStep(*model_, paired, ctx);
  }
  if (UsesSpeech() && !unpaired.empty()) vc = VcStep(*model_, unpaired, ctx);
  LossTerms terms = CombineLosses(config_.weights, tts ? &*tts : nullptr,
                                  pair ? &*pair : nullptr, vc ? &*vc : nullptr);
  if (ctx.training && !std::isfinite(terms.report.total)) {
    throw NumericError("non-finite total loss at step " + std::to_string(step_) +
                       "; last good checkpoint: " +
                       (last_checkpoint_.empty() ? std::string("none") : last_checkpoint_));
  }
  if (ctx.training && model_->config().use_vq) {
    // Usage flags and the reseeding pool for the dead-entry rule.
    std::vector<bool> used(model_->codebook().size(), false);
    std::vector<const std::vector<QuantizedContent>*> groups;
    if (tts) groups.push_back(&tts->quantized);
    if (pair) groups.push_back(&pair->speech);
    if (vc) groups.push_back(&vc->quantized);
    for (const auto* g : groups) {
      for (const QuantizedContent& q : *g) {
        for (int c : q.codes) used[static_cast<std::size_t>(c)] = true;
      }
    }
    Tensor recent = ConcatContentRows(groups, model_->config().d_model);
    terms.total.Backward();
    terms.report.grad_norm = optimizer_.ClipGradNorm(config_.clip_norm);
    optimizer_.Step();
    Rng reseed = Rng(config_.seed, StreamId("dead-entries")).Fork(step_);
    const std::vector<std::size_t> reseeded = model_->mutable_codebook().EndStep(
        used, recent, config_.dead_entry_steps, reseed);
    if (!reseeded.empty()) {
      const std::size_t d = model_->codebook().dim();
      for (std::size_t p = 0; p < optimizer_.params().size(); ++p) {
        if (optimizer_.params()[p].name != "codebook.entries") continue;
        AdamSlot& slot = optimizer_.slots()[p];
        if (slot.m.empty()) break;
        for (std::size_t row : reseeded) {
          std::fill_n(slot.m.begin() + static_cast<std::ptrdiff_t>(row * d), d, 0.0);
          std::fill_n(slot.v.begin() + static_cast<std::ptrdiff_t>(row * d), d, 0.0);
        }
      }
    }
  } else if (ctx.training) {
    terms.total.Backward();
    terms.report.grad_norm = optimizer_.ClipGradNorm(config_.clip_norm);
    optimizer_.Step();
  }
  return terms;
}

void Trainer::InitializeCodebook(Batch paired, Batch unpaired) {
  NoGradGuard no_grad;
  const ForwardContext eval;
  std::vector<double> rows;
  auto append = [&](const Tensor& t) {
    rows.insert(rows.end(), t.data().begin(), t.data().end());
  };
  if (UsesSpeech()) {
    for (const UtteranceRecord* rec : paired) append(model_->content_encoder().Forward(rec->mel, eval));
    for (const UtteranceRecord* rec : unpaired) append(model_->content_encoder().Forward(rec->mel, eval));
  } else {
    for (const UtteranceRecord* rec : paired) {
      append(model_->TextContent(rec->phonemes, rec->durations, eval));
    }
  }
  const std::size_t d = model_->config().d_model;
  const std::size_t n = rows.size() / d;
  Tensor all = Tensor::FromData({n, d}, std::move(rows));
  Rng rng(config_.seed, StreamId("codebook-init"));
  model_->mutable_codebook().InitializeFromRows(all, rng);
  codebook_initialized_ = true;
}

LossReport Trainer::JointStep(Batch paired, Batch unpaired) {
  if (paired.empty() && unpaired.empty()) throw DataError("joint_step: both batches are empty");
  if (model_->config().use_vq && !codebook_initialized_) InitializeCodebook(paired, unpaired);

  StepContext ctx;
  ctx.training = true;
  ctx.dropout = config_.model.dropout;
  ctx.seed = config_.seed;
  ctx.step = step_;
  ctx.beta = config_.beta;
  ctx.count_usage = true;

  optimizer_.ClearGrads();
  LossReport report = Compute(paired, unpaired, ctx).report;
  report.step = step_;
  report.epoch = epoch_;
  report.lr = optimizer_.lr();
  optimizer_.ClearGrads();
  ++step_;
  if (steps_per_epoch_ > 0 && step_ % steps_per_epoch_ == 0) {
    ++epoch_;
    optimizer_.set_lr(optimizer_.lr() * config_.lr_decay);
  }
  return report;
}

double Trainer::ValidationLoss(Batch paired, Batch unpaired) const {
  NoGradGuard no_grad;
  StepContext ctx;
  ctx.training = false;
  ctx.beta = config_.beta;
  // Eval forwards only read the model; Compute needs a mutable handle for
  // the usage path, which stays off here.
  auto* self = const_cast<Trainer*>(this);
  return self->Compute(paired, unpaired, ctx).report.total;
}

TrainResult Trainer::Train(const std::vector<UtteranceRecord>& corpus,
                           const std::function<void(const LossReport&)>& on_step) {
  if (corpus.empty()) throw DataError("train: corpus is empty");
  std::vector<const UtteranceRecord*> paired_pool, speech_pool;
  for (const UtteranceRecord& rec : corpus) {
    if (rec.labeled && !rec.phonemes.empty()) paired_pool.push_back(&rec);
    speech_pool.push_back(&rec);
  }
  if (UsesText() && paired_pool.empty()) {
    throw DataError("train: mode " + ToString(config_.mode) + " needs at least one paired example");
  }
  if (!UsesText()) paired_pool.clear();
  if (!UsesSpeech()) speech_pool.clear();

  if (config_.epoch_steps > 0) {
    steps_per_epoch_ = config_.epoch_steps;
  } else if (!paired_pool.empty()) {
    steps_per_epoch_ = (paired_pool.size() + config_.batch_paired - 1) / config_.batch_paired;
  } else {
    steps_per_epoch_ = (speech_pool.size() + config_.batch_unpaired - 1) / config_.batch_unpaired;
  }

  const Rng shuffle(config_.seed, StreamId("shuffle"));
  Sampler paired_sampler(paired_pool.size(), config_.batch_paired, shuffle.Fork("paired"));
  Sampler speech_sampler(speech_pool.size(), config_.batch_unpaired, shuffle.Fork("speech"));

  // Fixed validation subset: the first records of each pool.
  const std::size_t kValidation = 16;
  std::vector<const UtteranceRecord*> val_paired(
      paired_pool.begin(), paired_pool.begin() + std::min(kValidation, paired_pool.size()));
  std::vector<const UtteranceRecord*> val_speech(
      speech_pool.begin(), speech_pool.begin() + std::min(kValidation, speech_pool.size()));

  TrainResult result;
  std::vector<const UtteranceRecord*> pb, ub;
  while (step_ < config_.max_steps) {
    pb.clear();
    ub.clear();
    for (std::size_t i : paired_sampler.Next()) pb.push_back(paired_pool[i]);
    for (std::size_t i : speech_sampler.Next()) ub.push_back(speech_pool[i]);
    const std::uint64_t epoch_before = epoch_;
    LossReport report = JointStep(pb, ub);
    result.trace.push_back(report);
    if (on_step) on_step(report);
    if (config_.log_every > 0 && report.step % config_.log_every == 0) {
      std::fprintf(stderr, "step %llu total %.6f tts %.6f pair %.6f vc %.6f dur %.6f aux %.6f\n",
                   static_cast<unsigned long long>(report.step), report.total, report.l_tts_rec,
                   report.l_pair, report.l_vc_rec, report.l_duration, report.l_vq_aux);
    }
    if (config_.early_stop && epoch_ != epoch_before) {
      result.validation.push_back(ValidationLoss(val_paired, val_speech));
      const std::size_t n = result.validation.size(), k = config_.plateau_epochs;
      if (n > k) {
        const double before = *std::min_element(result.validation.begin(),
                                                result.validation.end() - static_cast<long>(k));
        const double recent = *std::min_element(result.validation.end() - static_cast<long>(k),
                                                result.validation.end());
        if (before - recent < config_.plateau_tol) {
          result.stopped_on_plateau = true;
          break;
        }
      }
    }
  }
  result.steps = step_;
  return result;
}

std::string TraceCsvHeader() {
  return "step,epoch,lr,l_tts_rec,l_pair,l_duration,l_vc_rec,l_vq_aux,total,tts_mel,"
         "tts_pitch_ce,tts_pitch_mse_hz,vc_mel,vc_pitch_ce,grad_norm";
}

std::string TraceCsvRow(const LossReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                "%.17g,%.17g",
                static_cast<unsigned long long>(r.step), static_cast<unsigned long long>(r.epoch),
                r.lr, r.l_tts_rec, r.l_pair, r.l_duration, r.l_vc_rec, r.l_vq_aux, r.total,
                r.tts_mel, r.tts_pitch_ce, r.tts_pitch_mse_hz, r.vc_mel, r.vc_pitch_ce,
                r.grad_norm);
  return buf;
}

void WriteTraceCsv(const std::string& path, const std::vector<LossReport>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << TraceCsvHeader() << '\n';
  for (const LossReport& r : trace) out << TraceCsvRow(r) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace unifyspeech
