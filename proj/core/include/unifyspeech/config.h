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

// Model and training configuration, plus the `key = value` text format used
// for config files and for the config snapshot stored in checkpoints.

#ifndef UNIFYSPEECH_CONFIG_H_
#define UNIFYSPEECH_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

namespace unifyspeech {

enum class FusionMode { kAdditive, kSaln };

// Ablation arms. kFull: joint TTS + VC with VQ and pair loss. kTtsOnly: paired
// data only, no VC or pair term. kVcOnly: speech-only self-reconstruction on
// every utterance. kNoVq: joint training with quantization replaced by the
// identity and the pair loss taken on continuous content.
enum class TrainMode { kFull, kTtsOnly, kVcOnly, kNoVq };

std::string ToString(FusionMode mode);
std::string ToString(TrainMode mode);
FusionMode ParseFusionMode(const std::string& text);
TrainMode ParseTrainMode(const std::string& text);

struct ModelConfig {
  std::size_t d_model = 256;
  std::size_t num_heads = 2;
  std::size_t ffn_hidden = 256;
  std::size_t text_blocks = 4;
  std::size_t content_blocks = 6;
  std::size_t decoder_blocks = 6;
  std::size_t conv_kernel = 3;
  double dropout = 0.5;
  std::size_t num_phonemes = 64;
  std::size_t num_mels = 80;
  std::size_t num_pitch_bins = 32;
  std::size_t codebook_size = 256;
  FusionMode fusion = FusionMode::kAdditive;
  bool use_vq = true;
  double layer_norm_eps = 1e-5;
  std::uint64_t init_seed = 1234;

  void Validate() const;
};

struct LossWeights {
  double mel = 1.0;
  double pitch = 0.1;
  double duration = 0.1;
  double pair = 1.0;
  double vq_aux = 1.0;
  double vc = 1.0;
};

struct TrainConfig {
  ModelConfig model;
  LossWeights weights;
  TrainMode mode = TrainMode::kFull;
  double lr_init = 1e-3;
  double lr_decay = 0.95;  // per epoch
  // Steps per epoch; 0 derives it from the corpus (one pass over the paired
  // set, or over the speech set when there is no paired data).
  std::size_t epoch_steps = 0;
  std::size_t batch_paired = 8;
  std::size_t batch_unpaired = 8;
  std::size_t max_steps = 2000;
  std::uint64_t seed = 1;
  double beta = 0.25;
  double clip_norm = 1.0;
  std::size_t dead_entry_steps = 500;
  bool early_stop = true;
  std::size_t plateau_epochs = 5;
  double plateau_tol = 1e-4;
  std::size_t log_every = 0;  // 0 = silent

  void Validate() const;
};

// Parses `key = value` lines ('#' starts a comment). Unknown keys raise
// ConfigError. Keys are the field names above; model fields may be written
// bare or with a "model." prefix, weights as "weight.<name>".
TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base = {});
TrainConfig LoadTrainConfig(const std::string& path);
std::string ToText(const TrainConfig& config);

// Raw key/value map of a config text, for tools that only need a few keys.
std::map<std::string, std::string> ParseKeyValues(const std::string& text);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_CONFIG_H_
