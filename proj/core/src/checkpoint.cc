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

#include "unifyspeech/checkpoint.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "binary_io.h"
#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

constexpr char kMagic[4] = {'U', 'S', 'P', 'C'};

std::string StateLine(const char* key, const std::string& value) {
  return std::string("state.") + key + " = " + value + "\n";
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tensor CountsTensor(const std::vector<std::int64_t>& counts) {
  std::vector<double> v(counts.begin(), counts.end());
  const std::size_t n = v.size();
  return Tensor::FromData({n}, std::move(v));
}

void AddModelTensors(const UnifySpeechModel& model, Checkpoint& ck) {
  for (const auto& [name, tensor] : model.params().items()) ck.tensors.emplace_back(name, tensor.Clone());
  ck.tensors.emplace_back("codebook.usage", CountsTensor(model.codebook().usage()));
  ck.tensors.emplace_back("codebook.idle_steps", CountsTensor(model.codebook().idle_steps()));
}

std::map<std::string, std::string> StateValues(const std::string& text) {
  std::map<std::string, std::string> state;
  for (const auto& [key, value] : ParseKeyValues(text)) {
    if (key.rfind("state.", 0) == 0) state[key.substr(6)] = value;
  }
  return state;
}

std::string WithoutStateLines(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line.compare(first, 6, "state.") == 0) continue;
    out += line + '\n';
  }
  return out;
}

void CopyCounts(const Tensor& t, std::vector<std::int64_t>& dst, const char* name) {
  if (t.size() != dst.size()) {
    throw SchemaError(std::string("checkpoint: ") + name + " has " + std::to_string(t.size()) +
                      " entries, expected " + std::to_string(dst.size()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<std::int64_t>(t.data()[i]);
}

}  // namespace

const Tensor* Checkpoint::Find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

TrainConfig Checkpoint::config() const { return ParseTrainConfig(WithoutStateLines(config_text)); }

std::uint64_t Checkpoint::step() const {
  const auto state = StateValues(config_text);
  const auto it = state.find("step");
  return it == state.end() ? 0 : std::stoull(it->second);
}

Checkpoint MakeCheckpoint(const UnifySpeechModel& model, const TrainConfig& config) {
  Checkpoint ck;
  ck.config_text = ToText(config);
  AddModelTensors(model, ck);
  return ck;
}

Checkpoint MakeCheckpoint(const Trainer& trainer) {
  Checkpoint ck;
  ck.config_text = ToText(trainer.config());
  ck.config_text += StateLine("step", std::to_string(trainer.step()));
  ck.config_text += StateLine("epoch", std::to_string(trainer.epoch()));
  ck.config_text += StateLine("steps_per_epoch", std::to_string(trainer.steps_per_epoch()));
  ck.config_text += StateLine("lr", FormatDouble(trainer.optimizer().lr()));
  ck.config_text +=
      StateLine("codebook_initialized", trainer.codebook_initialized() ? "1" : "0");
  AddModelTensors(trainer.model(), ck);
  const Adam& opt = trainer.optimizer();
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const AdamSlot& slot = opt.slots()[i];
    if (slot.m.empty()) continue;
    const std::string& name = opt.params()[i].name;
    ck.tensors.emplace_back("adam.m/" + name, Tensor::FromData({slot.m.size()}, slot.m));
    ck.tensors.emplace_back("adam.v/" + name, Tensor::FromData({slot.v.size()}, slot.v));
    ck.tensors.emplace_back("adam.step/" + name,
                            Tensor::FromData({1}, {static_cast<double>(slot.step)}));
  }
  return ck;
}

std::string SerializeCheckpoint(const Checkpoint& ck) {
  internal::ByteWriter w;
  w.Bytes(std::string_view(kMagic, 4));
  w.U32(ck.version);
  w.U64(ck.config_text.size());
  w.Bytes(ck.config_text);
  w.U64(ck.tensors.size());
  for (const auto& [name, t] : ck.tensors) {
    w.U32(static_cast<std::uint32_t>(name.size()));
    w.Bytes(name);
    w.U32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.U64(d);
    for (double v : t.data()) w.F64(v);
  }
  return w.str();
}

Checkpoint ParseCheckpoint(const std::string& bytes, const std::string& what) {
  internal::ByteReader r(bytes, what);
  if (bytes.size() < 4 || std::string_view(bytes.data(), 4) != std::string_view(kMagic, 4)) {
    throw FormatError(what + ": bad magic (expected USPC)");
  }
  r.Bytes(4);
  Checkpoint ck;
  ck.version = r.U32();
  if (ck.version != kCheckpointVersion) {
    throw FormatError(what + ": unsupported version " + std::to_string(ck.version));
  }
  const std::uint64_t config_len = r.U64();
  ck.config_text = std::string(r.Bytes(config_len));
  const std::uint64_t count = r.U64();
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.U32();
    std::string name(r.Bytes(name_len));
    const std::uint32_t rank = r.U32();
    if (rank > 8) throw FormatError(what + ": tensor " + name + " has implausible rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.U64();
    const std::size_t n = NumElements(shape);
    if (n > r.remaining() / 8) {
      throw IoError(what + ": truncated data for tensor " + name);
    }
    std::vector<double> data(n);
    for (double& v : data) v = r.F64();
    if (!seen.insert(name).second) throw FormatError(what + ": duplicate tensor " + name);
    ck.tensors.emplace_back(std::move(name), Tensor::FromData(std::move(shape), std::move(data)));
  }
  if (r.remaining() != 0) {
    throw FormatError(what + ": " + std::to_string(r.remaining()) +
                      " trailing bytes after the declared " + std::to_string(count) + " tensors");
  }
  return ck;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  internal::WriteFileBytes(path, SerializeCheckpoint(checkpoint));
}

void SaveCheckpoint(const std::filesystem::path& path, const Trainer& trainer) {
  SaveCheckpoint(path, MakeCheckpoint(trainer));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(internal::ReadFileBytes(path), path.string());
}

std::unique_ptr<UnifySpeechModel> RestoreModel(const Checkpoint& ck) {
  const TrainConfig config = ResolveMode(ck.config());
  auto model = std::make_unique<UnifySpeechModel>(config.model);
  std::vector<std::string> missing;
  for (const auto& [name, tensor] : model->params().items()) {
    if (ck.Find(name) == nullptr) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& n : missing) list += (list.empty() ? "" : ", ") + n;
    throw SchemaError("checkpoint is missing tensors: " + list);
  }
  for (const auto& [name, tensor] : model->params().items()) {
    const Tensor& src = *ck.Find(name);
    if (src.shape() != tensor.shape()) {
      throw SchemaError("checkpoint tensor " + name + " has shape " + ShapeToString(src.shape()) +
                        ", model expects " + ShapeToString(tensor.shape()));
    }
    Tensor dst = tensor;
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
  Codebook& book = model->mutable_codebook();
  if (const Tensor* usage = ck.Find("codebook.usage")) {
    CopyCounts(*usage, book.mutable_usage(), "codebook.usage");
  }
  if (const Tensor* idle = ck.Find("codebook.idle_steps")) {
    CopyCounts(*idle, book.mutable_idle_steps(), "codebook.idle_steps");
  }
  return model;
}

std::unique_ptr<Trainer> RestoreTrainer(const Checkpoint& ck) {
  auto trainer = std::make_unique<Trainer>(ck.config(), RestoreModel(ck));
  const auto state = StateValues(ck.config_text);
  auto get = [&](const char* key) -> const std::string* {
    const auto it = state.find(key);
    return it == state.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("step")) trainer->set_step(std::stoull(*v));
  if (const auto* v = get("epoch")) trainer->set_epoch(std::stoull(*v));
  if (const auto* v = get("steps_per_epoch")) trainer->set_steps_per_epoch(std::stoull(*v));
  if (const auto* v = get("lr")) trainer->optimizer().set_lr(std::stod(*v));
  if (const auto* v = get("codebook_initialized")) trainer->set_codebook_initialized(*v == "1");
  Adam& opt = trainer->optimizer();
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const std::string& name = opt.params()[i].name;
    const Tensor* m = ck.Find("adam.m/" + name);
    const Tensor* v = ck.Find("adam.v/" + name);
    const Tensor* s = ck.Find("adam.step/" + name);
    if (m == nullptr && v == nullptr && s == nullptr) continue;
    if (m == nullptr || v == nullptr || s == nullptr) {
      throw SchemaError("checkpoint has incomplete optimizer state for " + name);
    }
    const std::size_t n = opt.params()[i].tensor.size();
    if (m->size() != n || v->size() != n || s->size() != 1) {
      throw SchemaError("checkpoint optimizer state for " + name + " has the wrong size");
    }
    AdamSlot& slot = opt.slots()[i];
    slot.m.assign(m->data().begin(), m->data().end());
    slot.v.assign(v->data().begin(), v->data().end());
    slot.step = static_cast<std::int64_t>(s->data()[0]);
  }
  return trainer;
}

}  // namespace unifyspeech
