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

#include "unifyspeech/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + v);
  }
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': not a non-negative integer: " + v);
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got " + v);
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

std::string ToString(FusionMode mode) {
  return mode == FusionMode::kAdditive ? "additive" : "saln";
}

std::string ToString(TrainMode mode) {
  switch (mode) {
    case TrainMode::kFull: return "full";
    case TrainMode::kTtsOnly: return "tts-only";
    case TrainMode::kVcOnly: return "vc-only";
    case TrainMode::kNoVq: return "novq";
  }
  return "full";
}

FusionMode ParseFusionMode(const std::string& text) {
  if (text == "additive") return FusionMode::kAdditive;
  if (text == "saln") return FusionMode::kSaln;
  throw ConfigError("unknown fusion mode: " + text);
}

TrainMode ParseTrainMode(const std::string& text) {
  if (text == "full") return TrainMode::kFull;
  if (text == "tts-only") return TrainMode::kTtsOnly;
  if (text == "vc-only") return TrainMode::kVcOnly;
  if (text == "novq") return TrainMode::kNoVq;
  throw ConfigError("unknown training mode: " + text);
}

void ModelConfig::Validate() const {
  if (d_model == 0 || num_heads == 0 || d_model % num_heads != 0) {
    throw ConfigError("d_model must be a positive multiple of num_heads");
  }
  if (conv_kernel % 2 == 0) throw ConfigError("conv_kernel must be odd");
  if (!(dropout >= 0.0) || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (num_phonemes == 0 || num_mels == 0) throw ConfigError("vocabulary and mel sizes must be positive");
  if (num_pitch_bins != 32) throw ConfigError("num_pitch_bins is fixed at 32");
  if (codebook_size == 0) throw ConfigError("codebook_size must be positive");
  if (!(layer_norm_eps > 0.0)) throw ConfigError("layer_norm_eps must be positive");
}

void TrainConfig::Validate() const {
  model.Validate();
  if (!(lr_init > 0.0)) throw ConfigError("lr_init must be > 0");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) throw ConfigError("lr_decay must lie in (0, 1]");
  if (batch_paired == 0 || batch_unpaired == 0) throw ConfigError("batch sizes must be >= 1");
  if (beta < 0.0) throw ConfigError("beta must be >= 0");
  for (double w : {weights.mel, weights.pitch, weights.duration, weights.pair,
                   weights.vq_aux, weights.vc}) {
    if (w < 0.0) throw ConfigError("loss weights must be >= 0");
  }
}

std::map<std::string, std::string> ParseKeyValues(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return kv;
}

TrainConfig ParseTrainConfig(const std::string& text, TrainConfig base) {
  TrainConfig c = std::move(base);
  ModelConfig& m = c.model;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto size = [](std::size_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = ParseUnsigned(k, v); };
  };
  auto u64 = [](std::uint64_t& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = ParseUnsigned(k, v); };
  };
  auto real = [](double& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = ParseDouble(k, v); };
  };
  auto flag = [](bool& field) -> Setter {
    return [&field](const std::string& k, const std::string& v) { field = ParseBool(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"d_model", size(m.d_model)},
      {"num_heads", size(m.num_heads)},
      {"ffn_hidden", size(m.ffn_hidden)},
      {"text_blocks", size(m.text_blocks)},
      {"content_blocks", size(m.content_blocks)},
      {"decoder_blocks", size(m.decoder_blocks)},
      {"conv_kernel", size(m.conv_kernel)},
      {"dropout", real(m.dropout)},
      {"num_phonemes", size(m.num_phonemes)},
      {"num_mels", size(m.num_mels)},
      {"num_pitch_bins", size(m.num_pitch_bins)},
      {"codebook_size", size(m.codebook_size)},
      {"V", size(m.codebook_size)},
      {"fusion", [&m](const std::string&, const std::string& v) { m.fusion = ParseFusionMode(v); }},
      {"use_vq", flag(m.use_vq)},
      {"layer_norm_eps", real(m.layer_norm_eps)},
      {"init_seed", u64(m.init_seed)},
      {"weight.mel", real(c.weights.mel)},
      {"weight.pitch", real(c.weights.pitch)},
      {"weight.duration", real(c.weights.duration)},
      {"weight.pair", real(c.weights.pair)},
      {"weight.vq_aux", real(c.weights.vq_aux)},
      {"weight.vc", real(c.weights.vc)},
      {"mode", [&c](const std::string&, const std::string& v) { c.mode = ParseTrainMode(v); }},
      {"lr_init", real(c.lr_init)},
      {"lr_decay", real(c.lr_decay)},
      {"lr_decay_per_epoch", real(c.lr_decay)},
      {"epoch_steps", size(c.epoch_steps)},
      {"batch_paired", size(c.batch_paired)},
      {"batch_unpaired", size(c.batch_unpaired)},
      {"max_steps", size(c.max_steps)},
      {"seed", u64(c.seed)},
      {"beta", real(c.beta)},
      {"clip_norm", real(c.clip_norm)},
      {"dead_entry_steps", size(c.dead_entry_steps)},
      {"early_stop", flag(c.early_stop)},
      {"plateau_epochs", size(c.plateau_epochs)},
      {"plateau_tol", real(c.plateau_tol)},
      {"log_every", size(c.log_every)},
  };
  for (const auto& [raw_key, value] : ParseKeyValues(text)) {
    std::string key = raw_key;
    if (key.rfind("model.", 0) == 0) key = key.substr(6);
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key: " + raw_key);
    it->second(key, value);
  }
  c.Validate();
  return c;
}

TrainConfig LoadTrainConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseTrainConfig(ss.str());
}

std::string ToText(const TrainConfig& c) {
  const ModelConfig& m = c.model;
  std::ostringstream os;
  os << "model.d_model = " << m.d_model << "\n"
     << "model.num_heads = " << m.num_heads << "\n"
     << "model.ffn_hidden = " << m.ffn_hidden << "\n"
     << "model.text_blocks = " << m.text_blocks << "\n"
     << "model.content_blocks = " << m.content_blocks << "\n"
     << "model.decoder_blocks = " << m.decoder_blocks << "\n"
     << "model.conv_kernel = " << m.conv_kernel << "\n"
     << "model.dropout = " << FormatDouble(m.dropout) << "\n"
     << "model.num_phonemes = " << m.num_phonemes << "\n"
     << "model.num_mels = " << m.num_mels << "\n"
     << "model.num_pitch_bins = " << m.num_pitch_bins << "\n"
     << "model.codebook_size = " << m.codebook_size << "\n"
     << "model.fusion = " << ToString(m.fusion) << "\n"
     << "model.use_vq = " << (m.use_vq ? "true" : "false") << "\n"
     << "model.layer_norm_eps = " << FormatDouble(m.layer_norm_eps) << "\n"
     << "model.init_seed = " << m.init_seed << "\n"
     << "weight.mel = " << FormatDouble(c.weights.mel) << "\n"
     << "weight.pitch = " << FormatDouble(c.weights.pitch) << "\n"
     << "weight.duration = " << FormatDouble(c.weights.duration) << "\n"
     << "weight.pair = " << FormatDouble(c.weights.pair) << "\n"
     << "weight.vq_aux = " << FormatDouble(c.weights.vq_aux) << "\n"
     << "weight.vc = " << FormatDouble(c.weights.vc) << "\n"
     << "mode = " << ToString(c.mode) << "\n"
     << "lr_init = " << FormatDouble(c.lr_init) << "\n"
     << "lr_decay = " << FormatDouble(c.lr_decay) << "\n"
     << "epoch_steps = " << c.epoch_steps << "\n"
     << "batch_paired = " << c.batch_paired << "\n"
     << "batch_unpaired = " << c.batch_unpaired << "\n"
     << "max_steps = " << c.max_steps << "\n"
     << "seed = " << c.seed << "\n"
     << "beta = " << FormatDouble(c.beta) << "\n"
     << "clip_norm = " << FormatDouble(c.clip_norm) << "\n"
     << "dead_entry_steps = " << c.dead_entry_steps << "\n"
     << "early_stop = " << (c.early_stop ? "true" : "false") << "\n"
     << "plateau_epochs = " << c.plateau_epochs << "\n"
     << "plateau_tol = " << FormatDouble(c.plateau_tol) << "\n"
     << "log_every = " << c.log_every << "\n";
  return os.str();
}

}  // namespace unifyspeech
