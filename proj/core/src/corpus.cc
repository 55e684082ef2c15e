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

#include "unifyspeech/corpus.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "binary_io.h"
#include "unifyspeech/encoders.h"
#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace fs = std::filesystem;

namespace {

std::string Join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> ParseInts(const std::string& field, const std::string& what) {
  std::vector<int> out;
  std::istringstream in(field);
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw FormatError(what + ": bad integer '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t bar = line.find('|', start);
    fields.push_back(line.substr(start, bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return fields;
}

std::string SpeakerName(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
  return buf;
}

}  // namespace

void UtteranceRecord::Validate() const {
  auto fail = [&](const std::string& msg) { throw IntegrityError("utterance " + id + ": " + msg); };
  if (id.empty()) throw IntegrityError("utterance with empty id");
  if (!mel.defined() || mel.rank() != 2 || mel.cols() != kNumMels) {
    fail("mel must be [T x 80], got " + (mel.defined() ? ShapeToString(mel.shape()) : "none"));
  }
  const std::size_t t = mel.rows();
  if (t == 0) fail("empty mel");
  if (f0.size() != t) {
    fail("f0 has " + std::to_string(f0.size()) + " frames, mel has " + std::to_string(t));
  }
  for (double v : f0.f0_hz) {
    if (!std::isfinite(v) || v < 0.0) fail("f0 value " + std::to_string(v) + " is invalid");
  }
  if (!mel.IsFinite()) fail("non-finite mel value");
  if (phonemes.size() != durations.size()) {
    fail(std::to_string(phonemes.size()) + " phonemes but " + std::to_string(durations.size()) +
         " durations");
  }
  if (labeled && phonemes.empty()) fail("labeled record without phonemes");
  if (!phonemes.empty()) {
    long sum = 0;
    for (int d : durations) {
      if (d < 0) fail("negative duration");
      sum += d;
    }
    for (int p : phonemes) {
      if (p < 0) fail("negative phoneme id");
    }
    if (sum != static_cast<long>(t)) {
      fail("durations sum to " + std::to_string(sum) + " but mel has " + std::to_string(t) +
           " frames");
    }
  }
}

void SyntheticOptions::Validate() const {
  if (n_speakers < 2) throw ConfigError("gen_corpus: need at least 2 speakers");
  if (utts_per_speaker < 2) throw ConfigError("gen_corpus: need at least 2 utterances per speaker");
  if (!(labeled_fraction >= 0.0 && labeled_fraction <= 1.0)) {
    throw ConfigError("gen_corpus: labeled fraction must lie in [0, 1]");
  }
  if (!(unvoiced_fraction >= 0.0 && unvoiced_fraction < 1.0)) {
    throw ConfigError("gen_corpus: unvoiced fraction must lie in [0, 1)");
  }
  if (!(noise >= 0.0)) throw ConfigError("gen_corpus: noise must be non-negative");
  if (num_phonemes < 2) throw ConfigError("gen_corpus: need at least 2 phonemes");
  if (min_phonemes < 1 || min_phonemes > max_phonemes) {
    throw ConfigError("gen_corpus: bad phoneme count range");
  }
  if (min_duration < 1 || min_duration > max_duration) {
    throw ConfigError("gen_corpus: bad duration range");
  }
  if (speaker_rank < 1 || speaker_rank > kNumMels) throw ConfigError("gen_corpus: bad speaker rank");
  if (modulation_period <= 0.0) throw ConfigError("gen_corpus: modulation period must be positive");
}

SyntheticFactors SyntheticFactors::Draw(const SyntheticOptions& options) {
  options.Validate();
  const Rng root(options.seed, StreamId("gen-corpus"));
  const std::size_t p = options.num_phonemes, m = kNumMels;
  SyntheticFactors f;
  f.noise = options.noise;
  f.modulation = options.modulation;
  f.modulation_period = options.modulation_period;

  Rng trng = root.Fork("templates");
  f.templates = Tensor::Zeros({p, m});
  std::span<double> tdata = f.templates.mutable_data();
  for (std::size_t i = 0; i < p; ++i) {
    for (;;) {
      for (std::size_t k = 0; k < m; ++k) tdata[i * m + k] = options.template_scale * trng.Normal();
      double min_dist = INFINITY;
      for (std::size_t j = 0; j < i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double diff = tdata[i * m + k] - tdata[j * m + k];
          s += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(s));
      }
      if (min_dist > 1.0) break;
    }
  }

  const std::size_t rank = options.speaker_rank;
  const std::size_t n_spk = options.n_speakers + options.test_speakers;
  Rng srng = root.Fork("speakers");
  f.speaker_basis = Tensor::Zeros({m, rank});
  for (double& x : f.speaker_basis.mutable_data()) {
    x = options.speaker_scale * srng.Normal() / std::sqrt(static_cast<double>(rank));
  }
  f.speaker_offsets = Tensor::Zeros({n_spk, m});
  std::span<double> odata = f.speaker_offsets.mutable_data();
  const double* basis = f.speaker_basis.data().data();
  for (std::size_t s = 0; s < n_spk; ++s) {
    std::vector<double> z(rank);
    for (double& x : z) x = srng.Normal();
    for (std::size_t k = 0; k < m; ++k) {
      double v = 0.0;
      for (std::size_t r = 0; r < rank; ++r) v += basis[k * rank + r] * z[r];
      odata[s * m + k] = v;
    }
    f.base_pitch_hz.push_back(90.0 + 160.0 * srng.Uniform());
  }

  Rng prng = root.Fork("pitch-map");
  f.pitch_map = Tensor::Zeros({static_cast<std::size_t>(kNumPitchBins), m});
  for (double& x : f.pitch_map.mutable_data()) x = options.pitch_map_scale * prng.Normal();

  Rng arng = root.Fork("phoneme-prosody");
  for (std::size_t i = 0; i < p; ++i) {
    f.accent.push_back(options.accent_range * (2.0 * arng.Uniform() - 1.0));
    f.unvoiced.push_back(arng.Uniform() < options.unvoiced_fraction);
  }
  // Keep at least one voiced phoneme.
  if (std::all_of(f.unvoiced.begin(), f.unvoiced.end(), [](bool u) { return u; })) {
    f.unvoiced[0] = false;
  }
  return f;
}

UtteranceRecord SynthesizeUtterance(const SyntheticFactors& factors, std::size_t speaker,
                                    std::vector<int> phonemes, std::vector<int> durations,
                                    double phase, Rng& noise_rng) {
  const std::size_t m = kNumMels;
  if (speaker >= factors.speaker_offsets.rows()) {
    throw IndexError("synthesize: speaker " + std::to_string(speaker) + " out of range");
  }
  if (phonemes.size() != durations.size()) {
    throw DataError("synthesize: phoneme and duration counts differ");
  }
  std::size_t t = 0;
  for (int d : durations) t += static_cast<std::size_t>(std::max(d, 0));
  UtteranceRecord rec;
  rec.labeled = true;
  rec.mel = Tensor::Zeros({t, m});
  rec.f0.f0_hz.reserve(t);
  std::span<double> out = rec.mel.mutable_data();
  const double* tmpl = factors.templates.data().data();
  const double* off = factors.speaker_offsets.data().data() + speaker * m;
  const double* pmap = factors.pitch_map.data().data();
  const double base = factors.base_pitch_hz[speaker];
  std::size_t row = 0;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    const auto ph = static_cast<std::size_t>(phonemes[i]);
    if (ph >= factors.templates.rows()) throw IndexError("synthesize: phoneme out of range");
    double hz = 0.0;
    if (!factors.unvoiced[ph]) {
      const double angle = phase + 2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 factors.modulation_period;
      hz = base * std::exp(factors.accent[ph] + factors.modulation * std::sin(angle));
      hz = std::clamp(hz, kF0MinHz, kF0MaxHz);
    }
    const auto bin = static_cast<std::size_t>(QuantizeF0(hz));
    for (int k = 0; k < durations[i]; ++k, ++row) {
      for (std::size_t c = 0; c < m; ++c) {
        double v = tmpl[ph * m + c] + off[c] + pmap[bin * m + c];
        if (factors.noise > 0.0) v += factors.noise * noise_rng.Normal();
        out[row * m + c] = v;
      }
      rec.f0.f0_hz.push_back(hz);
    }
  }
  rec.phonemes = std::move(phonemes);
  rec.durations = std::move(durations);
  return rec;
}

Corpus GenerateCorpus(const SyntheticOptions& options) {
  return GenerateCorpus(options, SyntheticFactors::Draw(options));
}

Corpus GenerateCorpus(const SyntheticOptions& options, const SyntheticFactors& factors) {
  options.Validate();
  const Rng root(options.seed, StreamId("gen-corpus"));
  const std::size_t n_labeled = static_cast<std::size_t>(
      std::llround(options.labeled_fraction * static_cast<double>(options.n_speakers)));
  const std::size_t test_utts =
      options.test_utts_per_speaker ? options.test_utts_per_speaker : options.utts_per_speaker;
  Corpus corpus;
  const std::size_t total = options.n_speakers + options.test_speakers;
  for (std::size_t s = 0; s < total; ++s) {
    const bool held_out = s >= options.n_speakers;
    const std::string speaker =
        held_out ? SpeakerName("test", s - options.n_speakers) : SpeakerName("spk", s);
    const std::size_t n_utts = held_out ? test_utts : options.utts_per_speaker;
    for (std::size_t u = 0; u < n_utts; ++u) {
      Rng rng = root.Fork("utterance").Fork(s).Fork(u);
      const auto len = static_cast<std::size_t>(rng.UniformInt(
          static_cast<std::int64_t>(options.min_phonemes),
          static_cast<std::int64_t>(options.max_phonemes)));
      std::vector<int> phonemes(len), durations(len);
      for (std::size_t i = 0; i < len; ++i) {
        phonemes[i] = static_cast<int>(
            rng.UniformInt(0, static_cast<std::int64_t>(options.num_phonemes) - 1));
        durations[i] = static_cast<int>(rng.UniformInt(options.min_duration, options.max_duration));
      }
      const double phase = 2.0 * std::numbers::pi * rng.Uniform();
      Rng noise = rng.Fork("noise");
      UtteranceRecord rec =
          SynthesizeUtterance(factors, s, std::move(phonemes), std::move(durations), phase, noise);
      char id[64];
      std::snprintf(id, sizeof id, "%s_u%03zu", speaker.c_str(), u);
      rec.id = id;
      rec.speaker_id = speaker;
      if (!held_out && s >= n_labeled) {
        rec.labeled = false;
        rec.phonemes.clear();
        rec.durations.clear();
      }
      (held_out ? corpus.test : corpus.train).push_back(std::move(rec));
    }
  }
  return corpus;
}

std::string FormatManifestLine(const UtteranceRecord& record, const std::string& mel_path,
                               const std::string& f0_path) {
  return record.id + '|' + record.speaker_id + '|' + (record.labeled ? "1" : "0") + '|' +
         Join(record.phonemes) + '|' + Join(record.durations) + '|' + mel_path + '|' + f0_path;
}

void WriteFeatureFile(const fs::path& path, const Tensor& matrix) {
  if (!matrix.defined() || matrix.rank() != 2) {
    throw DimensionError("feature file: expected a matrix for " + path.string());
  }
  internal::ByteWriter w;
  w.U32(static_cast<std::uint32_t>(matrix.rows()));
  w.U32(static_cast<std::uint32_t>(matrix.cols()));
  for (double v : matrix.data()) w.F64(v);
  internal::WriteFileBytes(path, w.str());
}

Tensor ReadFeatureFile(const fs::path& path) {
  const std::string bytes = internal::ReadFileBytes(path);
  internal::ByteReader r(bytes, path.string());
  const std::size_t rows = r.U32(), cols = r.U32();
  if (r.remaining() != rows * cols * 8) {
    throw IoError(path.string() + ": expected " + std::to_string(rows * cols) +
                  " values after the header, found " + std::to_string(r.remaining()) + " bytes");
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) v = r.F64();
  return Tensor::FromData({rows, cols}, std::move(data));
}

void WriteCorpus(const fs::path& dir, const Corpus& corpus, const SyntheticOptions* options) {
  std::error_code ec;
  fs::create_directories(dir / "feats", ec);
  if (ec) throw IoError("cannot create " + (dir / "feats").string() + ": " + ec.message());
  auto write_split = [&](const std::vector<UtteranceRecord>& records, const char* name) {
    std::string manifest = "# id|speaker|labeled|phonemes|durations|mel_path|f0_path\n";
    for (const UtteranceRecord& rec : records) {
      rec.Validate();
      const std::string mel = "feats/" + rec.id + ".mel";
      const std::string f0 = "feats/" + rec.id + ".f0";
      WriteFeatureFile(dir / mel, rec.mel);
      WriteFeatureFile(dir / f0, Tensor::FromData({rec.f0.size(), 1}, rec.f0.f0_hz));
      manifest += FormatManifestLine(rec, mel, f0) + '\n';
    }
    internal::WriteFileBytes(dir / name, manifest);
  };
  write_split(corpus.train, "manifest_train.txt");
  write_split(corpus.test, "manifest_test.txt");
  if (options != nullptr) {
    std::ostringstream info;
    info.precision(17);
    info << "seed = " << options->seed << "\nspeakers = " << options->n_speakers
         << "\nutts_per_speaker = " << options->utts_per_speaker
         << "\nlabeled_fraction = " << options->labeled_fraction
         << "\ntest_speakers = " << options->test_speakers << "\nnoise = " << options->noise
         << "\nnum_phonemes = " << options->num_phonemes << '\n';
    internal::WriteFileBytes(dir / "corpus_info.txt", info.str());
  }
}

void GenCorpus(const SyntheticOptions& options, const fs::path& dir) {
  WriteCorpus(dir, GenerateCorpus(options), &options);
}

std::vector<UtteranceRecord> ParseManifest(const std::string& text, const fs::path& base_dir) {
  std::vector<UtteranceRecord> records;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = SplitFields(line);
    const std::string where = "manifest line " + std::to_string(line_no);
    if (f.size() != 7) {
      throw FormatError(where + ": expected 7 '|'-separated fields, got " +
                        std::to_string(f.size()));
    }
    if (f[2] != "0" && f[2] != "1") throw FormatError(where + ": labeled flag must be 0 or 1");
    UtteranceRecord rec;
    rec.id = f[0];
    rec.speaker_id = f[1];
    rec.labeled = f[2] == "1";
    rec.phonemes = ParseInts(f[3], where);
    rec.durations = ParseInts(f[4], where);
    const fs::path mel = base_dir / f[5];
    const fs::path f0 = base_dir / f[6];
    if (!fs::exists(mel)) throw IoError("utterance " + rec.id + ": missing " + mel.string());
    if (!fs::exists(f0)) throw IoError("utterance " + rec.id + ": missing " + f0.string());
    rec.mel = ReadFeatureFile(mel);
    const Tensor pitch = ReadFeatureFile(f0);
    if (pitch.cols() != 1) {
      throw IntegrityError("utterance " + rec.id + ": f0 file must have one column");
    }
    rec.f0.f0_hz.assign(pitch.data().begin(), pitch.data().end());
    rec.Validate();
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<UtteranceRecord> LoadCorpus(const fs::path& dir, const std::string& split) {
  if (split == "all") {
    std::vector<UtteranceRecord> all = LoadCorpus(dir, "train");
    std::vector<UtteranceRecord> test = LoadCorpus(dir, "test");
    std::move(test.begin(), test.end(), std::back_inserter(all));
    return all;
  }
  if (split != "train" && split != "test") {
    throw ConfigError("load_corpus: split must be train, test or all, got '" + split + "'");
  }
  const fs::path manifest = dir / ("manifest_" + split + ".txt");
  if (!fs::exists(manifest)) throw IoError("missing manifest " + manifest.string());
  return ParseManifest(internal::ReadFileBytes(manifest), dir);
}

const UtteranceRecord& FindUtterance(const std::vector<UtteranceRecord>& records,
                                     const std::string& id) {
  for (const UtteranceRecord& r : records) {
    if (r.id == id) return r;
  }
  throw DataError("no utterance with id '" + id + "'");
}

}  // namespace unifyspeech
