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

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "unifyspeech/checkpoint.h"
#include "unifyspeech/corpus.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/evaluation.h"
#include "unifyspeech/features.h"
#include "unifyspeech/griffin_lim.h"
#include "unifyspeech/training.h"
#include "unifyspeech/wav.h"

namespace unifyspeech::cli {

namespace {

namespace fs = std::filesystem;

struct GenDataArgs {
  SyntheticOptions options;
  std::string out;
};

struct TrainArgs {
  std::string corpus, config, out, mode, trace;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_steps;
  std::size_t save_every = 0;
};

struct SynthArgs {
  std::string ckpt, corpus, text, durations, ref, out, wav;
};

struct ConvertArgs {
  std::string ckpt, corpus, source, ref, out, wav;
};

struct EvalArgs {
  std::string ckpt, corpus, split = "test", out;
};

struct DumpArgs {
  std::string ckpt, corpus, split = "all", out;
};

struct FeaturesArgs {
  std::string wav, mel, f0;
};

std::optional<std::uint64_t> EnvSeed() {
  const char* v = std::getenv("USPC_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0') throw ConfigError(std::string("USPC_SEED is not an integer: ") + v);
  return seed;
}

std::vector<int> ParseIdList(const std::string& text, const char* what) {
  std::vector<int> ids;
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(normalized);
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw ConfigError(std::string(what) + ": bad integer '" + tok + "'");
    ids.push_back(v);
  }
  if (ids.empty()) throw ConfigError(std::string(what) + ": empty list");
  return ids;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

void RunGenData(GenDataArgs a, std::ostream& out) {
  if (auto seed = EnvSeed()) a.options.seed = *seed;
  GenCorpus(a.options, a.out);
  out << "wrote corpus to " << a.out << "\n";
}

void RunTrain(const TrainArgs& a, std::ostream& out) {
  TrainConfig config = a.config.empty() ? TrainConfig{} : LoadTrainConfig(a.config);
  if (!a.mode.empty()) config.mode = ParseTrainMode(a.mode);
  if (a.seed) config.seed = *a.seed;
  if (auto seed = EnvSeed()) config.seed = *seed;
  if (a.max_steps) config.max_steps = *a.max_steps;
  const std::vector<UtteranceRecord> corpus = LoadCorpus(a.corpus, "train");
  Trainer trainer(config);
  std::function<void(const LossReport&)> on_step;
  if (a.save_every > 0) {
    on_step = [&](const LossReport& r) {
      if ((r.step + 1) % a.save_every == 0) {
        SaveCheckpoint(a.out, trainer);
        trainer.set_last_checkpoint(a.out);
      }
    };
  }
  const TrainResult result = trainer.Train(corpus, on_step);
  SaveCheckpoint(a.out, trainer);
  if (!a.trace.empty()) WriteTraceCsv(a.trace, result.trace);
  out << "trained " << result.steps << " steps (mode " << ToString(trainer.config().mode) << ")";
  if (!result.trace.empty()) out << ", final total loss " << result.trace.back().total;
  if (result.stopped_on_plateau) out << ", stopped on validation plateau";
  out << "\nwrote " << a.out << "\n";
}

std::vector<UtteranceRecord> LoadAll(const std::string& corpus) { return LoadCorpus(corpus, "all"); }

void MaybeRender(const std::string& wav, const Tensor& mel) {
  if (wav.empty()) return;
  WriteWav(wav, GriffinLim(mel), kSampleRate);
}

void RunSynth(const SynthArgs& a, std::ostream& out) {
  const auto model = RestoreModel(LoadCheckpoint(a.ckpt));
  const std::vector<UtteranceRecord> records = LoadAll(a.corpus);
  const UtteranceRecord& ref = FindUtterance(records, a.ref);
  const std::vector<int> phonemes = ParseIdList(a.text, "--text");
  SynthesisResult result;
  if (a.durations.empty()) {
    result = model->SynthesizeTts(phonemes, ref.mel);
  } else {
    const std::vector<int> durations = ParseIdList(a.durations, "--durations");
    result = model->SynthesizeTts(phonemes, ref.mel, std::span<const int>(durations));
  }
  WriteFeatureFile(a.out, result.mel);
  MaybeRender(a.wav, result.mel);
  out << "wrote " << result.mel.rows() << " frames to " << a.out << "\n";
}

void RunConvert(const ConvertArgs& a, std::ostream& out) {
  const auto model = RestoreModel(LoadCheckpoint(a.ckpt));
  const std::vector<UtteranceRecord> records = LoadAll(a.corpus);
  const UtteranceRecord& source = FindUtterance(records, a.source);
  const UtteranceRecord& ref = FindUtterance(records, a.ref);
  const SynthesisResult result = model->ConvertVoice(source.mel, ref.mel);
  WriteFeatureFile(a.out, result.mel);
  MaybeRender(a.wav, result.mel);
  out << "wrote " << result.mel.rows() << " frames to " << a.out << "\n";
}

void RunEval(const EvalArgs& a, std::ostream& out) {
  const auto model = RestoreModel(LoadCheckpoint(a.ckpt));
  const std::vector<UtteranceRecord> records = LoadCorpus(a.corpus, a.split);
  const EvalReport report = Evaluate(*model, records);
  const std::string csv = FormatEvalCsv(report);
  WriteText(a.out, csv);
  out << csv;
}

void RunDump(const DumpArgs& a, std::ostream& out) {
  const auto model = RestoreModel(LoadCheckpoint(a.ckpt));
  const std::vector<UtteranceRecord> records = LoadCorpus(a.corpus, a.split);
  WriteText(a.out, FormatEmbeddingCsv(records, SpeakerEmbeddings(*model, records)));
  out << "wrote " << records.size() << " embeddings to " << a.out << "\n";
}

void RunFeatures(const FeaturesArgs& a, std::ostream& out) {
  const WavAudio audio = ReadWav(a.wav);
  const MelSpectrogram mel = ComputeMelSpectrogram(audio.samples, audio.sample_rate);
  WriteFeatureFile(a.mel, mel.frames);
  if (!a.f0.empty()) {
    const PitchContour f0 = ExtractF0(audio.samples, audio.sample_rate);
    WriteFeatureFile(a.f0, Tensor::FromData({f0.size(), 1}, f0.f0_hz));
  }
  out << "wrote " << mel.num_frames() << " frames to " << a.mel << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"uspc: joint TTS/VC training and evaluation on mel features", "uspc"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic factor-model corpus");
  gen_cmd->add_option("--seed", gen.options.seed, "Generator seed");
  gen_cmd->add_option("--speakers", gen.options.n_speakers, "Training speakers");
  gen_cmd->add_option("--utts", gen.options.utts_per_speaker, "Utterances per speaker");
  gen_cmd->add_option("--labeled-frac", gen.options.labeled_fraction,
                      "Fraction of training speakers with phoneme labels");
  gen_cmd->add_option("--test-speakers", gen.options.test_speakers, "Held-out speakers");
  gen_cmd->add_option("--test-utts", gen.options.test_utts_per_speaker,
                      "Utterances per held-out speaker (0: same as --utts)");
  gen_cmd->add_option("--noise", gen.options.noise, "Gaussian noise scale on mel frames");
  gen_cmd->add_option("--phonemes", gen.options.num_phonemes, "Phoneme vocabulary size");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a corpus");
  train_cmd->add_option("--corpus", train.corpus, "Corpus directory")->required();
  train_cmd->add_option("--config", train.config, "Config file (key = value)");
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--mode", train.mode, "full | tts-only | vc-only | novq")
      ->check(CLI::IsMember({"full", "tts-only", "vc-only", "novq"}));
  train_cmd->add_option("--seed", train.seed, "Training seed");
  train_cmd->add_option("--max-steps", train.max_steps, "Override max_steps");
  train_cmd->add_option("--trace", train.trace, "Write the per-step loss trace as CSV");
  train_cmd->add_option("--save-every", train.save_every, "Checkpoint every N steps");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-tts", "Zero-shot TTS from phoneme ids");
  synth_cmd->add_option("--ckpt", synth.ckpt, "Checkpoint")->required();
  synth_cmd->add_option("--corpus", synth.corpus, "Corpus holding the reference utterance")
      ->required();
  synth_cmd->add_option("--text", synth.text, "Phoneme ids, space or comma separated")->required();
  synth_cmd->add_option("--durations", synth.durations, "Frames per phoneme (default: predicted)");
  synth_cmd->add_option("--ref-speaker", synth.ref, "Reference utterance id")->required();
  synth_cmd->add_option("--out", synth.out, "Output mel feature file")->required();
  synth_cmd->add_option("--griffin-lim", synth.wav, "Also render a rough waveform to this WAV");

  ConvertArgs conv;
  auto* conv_cmd = app.add_subcommand("convert-vc", "Zero-shot voice conversion");
  conv_cmd->add_option("--ckpt", conv.ckpt, "Checkpoint")->required();
  conv_cmd->add_option("--corpus", conv.corpus, "Corpus holding both utterances")->required();
  conv_cmd->add_option("--source", conv.source, "Source utterance id")->required();
  conv_cmd->add_option("--ref-speaker", conv.ref, "Reference utterance id")->required();
  conv_cmd->add_option("--out", conv.out, "Output mel feature file")->required();
  conv_cmd->add_option("--griffin-lim", conv.wav, "Also render a rough waveform to this WAV");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Objective metrics on a corpus split");
  eval_cmd->add_option("--ckpt", eval.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--corpus", eval.corpus, "Corpus directory")->required();
  eval_cmd->add_option("--split", eval.split, "train | test | all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  eval_cmd->add_option("--out", eval.out, "Output CSV")->required();

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("dump-embeddings", "Speaker embeddings as CSV");
  dump_cmd->add_option("--ckpt", dump.ckpt, "Checkpoint")->required();
  dump_cmd->add_option("--corpus", dump.corpus, "Corpus directory")->required();
  dump_cmd->add_option("--split", dump.split, "train | test | all")
      ->check(CLI::IsMember({"train", "test", "all"}));
  dump_cmd->add_option("--out", dump.out, "Output CSV")->required();

  FeaturesArgs feats;
  auto* feats_cmd = app.add_subcommand("features", "Mel and F0 features from a WAV file");
  feats_cmd->add_option("--wav", feats.wav, "Mono 16-bit PCM at 22050 Hz")->required();
  feats_cmd->add_option("--out-mel", feats.mel, "Output mel feature file")->required();
  feats_cmd->add_option("--out-f0", feats.f0, "Output F0 feature file");

  std::vector<const char*> cargv;
  for (const std::string& s : argv) cargv.push_back(s.c_str());
  if (cargv.empty()) cargv.push_back("uspc");
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "uspc: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*gen_cmd) RunGenData(gen, out);
    if (*train_cmd) RunTrain(train, out);
    if (*synth_cmd) RunSynth(synth, out);
    if (*conv_cmd) RunConvert(conv, out);
    if (*eval_cmd) RunEval(eval, out);
    if (*dump_cmd) RunDump(dump, out);
    if (*feats_cmd) RunFeatures(feats, out);
  } catch (const std::exception& e) {
    err << "uspc: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace unifyspeech::cli
