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

// Loss assembly, the joint TTS + VC step and the training loop.

#ifndef UNIFYSPEECH_TRAINING_H_
#define UNIFYSPEECH_TRAINING_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "unifyspeech/adam.h"
#include "unifyspeech/config.h"
#include "unifyspeech/corpus.h"
#include "unifyspeech/model.h"

namespace unifyspeech {

struct LossReport {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double lr = 0.0;
  double l_tts_rec = 0.0;   // w_mel * mel + w_pitch * pitch CE, text path
  double l_pair = 0.0;
  double l_duration = 0.0;
  double l_vc_rec = 0.0;    // w_mel * mel + w_pitch * pitch CE, speech path
  double l_vq_aux = 0.0;
  double total = 0.0;
  // Unweighted parts.
  double tts_mel = 0.0;
  double tts_pitch_ce = 0.0;
  double tts_pitch_mse_hz = 0.0;  // after decoding the pitch classes
  double vc_mel = 0.0;
  double vc_pitch_ce = 0.0;
  double grad_norm = 0.0;

  double tts_loss() const { return l_tts_rec + l_pair; }
  double vc_loss() const { return l_vc_rec; }
};

// Settings shared by the fragment functions of one step.
struct StepContext {
  bool training = true;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  double beta = 0.25;
  bool count_usage = false;

  ForwardContext Forward(std::uint64_t example) const;
};

using Batch = std::span<const UtteranceRecord* const>;

// Batch means of the text-path losses. Graph-carrying when grad is enabled.
struct TtsFragment {
  Tensor mel;
  Tensor pitch_ce;
  Tensor duration;
  Tensor vq_aux;
  double pitch_mse_hz = 0.0;
  std::vector<QuantizedContent> quantized;
};

struct VcFragment {
  Tensor mel;
  Tensor pitch_ce;
  Tensor vq_aux;
  std::vector<QuantizedContent> quantized;
};

struct PairFragment {
  Tensor pair;
  Tensor vq_aux;  // of the speech-side quantization
  std::vector<QuantizedContent> text;
  std::vector<QuantizedContent> speech;
};

TtsFragment TtsStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx);
VcFragment VcStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx);
PairFragment PairStep(UnifySpeechModel& model, Batch batch, const StepContext& ctx);

// Weighted combination of whichever fragments are present.
struct LossTerms {
  Tensor total;
  LossReport report;
};
LossTerms CombineLosses(const LossWeights& weights, const TtsFragment* tts,
                        const PairFragment* pair, const VcFragment* vc);

struct TrainResult {
  std::vector<LossReport> trace;
  std::vector<double> validation;  // per epoch
  std::uint64_t steps = 0;
  bool stopped_on_plateau = false;
};

class Trainer {
 public:
  explicit Trainer(TrainConfig config);
  // Takes over an existing model (e.g. restored from a checkpoint).
  Trainer(TrainConfig config, std::unique_ptr<UnifySpeechModel> model);

  // One optimization step. `unpaired` may be empty; which fragments run is
  // decided by the training mode.
  LossReport JointStep(Batch paired, Batch unpaired);

  // Loops JointStep over the corpus until max_steps or a validation plateau.
  TrainResult Train(const std::vector<UtteranceRecord>& corpus,
                    const std::function<void(const LossReport&)>& on_step = {});

  // Eval-mode total loss over the records (no graph, no usage counting).
  double ValidationLoss(Batch paired, Batch unpaired) const;

  // Initializes the codebook from content rows of the given records.
  void InitializeCodebook(Batch paired, Batch unpaired);

  const TrainConfig& config() const { return config_; }
  UnifySpeechModel& model() { return *model_; }
  const UnifySpeechModel& model() const { return *model_; }
  Adam& optimizer() { return optimizer_; }
  const Adam& optimizer() const { return optimizer_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t step) { step_ = step; }
  std::uint64_t epoch() const { return epoch_; }
  void set_epoch(std::uint64_t epoch) { epoch_ = epoch; }
  bool codebook_initialized() const { return codebook_initialized_; }
  void set_codebook_initialized(bool v) { codebook_initialized_ = v; }
  std::size_t steps_per_epoch() const { return steps_per_epoch_; }
  void set_steps_per_epoch(std::size_t n) { steps_per_epoch_ = n; }
  // Reported in the diagnostic when a step produces a non-finite loss.
  void set_last_checkpoint(std::string path) { last_checkpoint_ = std::move(path); }

 private:
  bool UsesText() const;
  bool UsesSpeech() const;
  LossTerms Compute(Batch paired, Batch unpaired, const StepContext& ctx);

  TrainConfig config_;
  std::unique_ptr<UnifySpeechModel> model_;
  Adam optimizer_;
  std::uint64_t step_ = 0;
  std::uint64_t epoch_ = 0;
  std::size_t steps_per_epoch_ = 0;
  bool codebook_initialized_ = false;
  std::string last_checkpoint_;
};

// Normalizes mode-dependent settings (novq implies use_vq = false).
TrainConfig ResolveMode(TrainConfig config);

void WriteTraceCsv(const std::string& path, const std::vector<LossReport>& trace);
std::string TraceCsvHeader();
std::string TraceCsvRow(const LossReport& report);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_TRAINING_H_
