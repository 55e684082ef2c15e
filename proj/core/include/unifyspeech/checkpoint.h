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

// Binary checkpoints, little-endian:
//   "USPC", u32 version (1), u64 config length, config text,
//   u64 tensor count, then per tensor: u32 name length, name, u32 rank,
//   rank x u64 dims, raw f64 data.
// The config text is the TrainConfig in key = value form plus "state.*"
// lines for the trainer position. Tensors are every model parameter, the
// codebook usage counters and the Adam moments.

#ifndef UNIFYSPEECH_CHECKPOINT_H_
#define UNIFYSPEECH_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "unifyspeech/training.h"

namespace unifyspeech {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* Find(const std::string& name) const;
  TrainConfig config() const;
  std::uint64_t step() const;
};

Checkpoint MakeCheckpoint(const Trainer& trainer);
// Model-only snapshot (no optimizer state), e.g. for inference exports.
Checkpoint MakeCheckpoint(const UnifySpeechModel& model, const TrainConfig& config);

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
Checkpoint ParseCheckpoint(const std::string& bytes, const std::string& what = "checkpoint");

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
void SaveCheckpoint(const std::filesystem::path& path, const Trainer& trainer);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Throws SchemaError listing every missing parameter name.
std::unique_ptr<UnifySpeechModel> RestoreModel(const Checkpoint& checkpoint);
std::unique_ptr<Trainer> RestoreTrainer(const Checkpoint& checkpoint);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_CHECKPOINT_H_
