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

// Utterance records, the synthetic factor-model corpus and the on-disk
// manifest / feature formats.

#ifndef UNIFYSPEECH_CORPUS_H_
#define UNIFYSPEECH_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "unifyspeech/features.h"
#include "unifyspeech/rng.h"
#include "unifyspeech/tensor.h"

namespace unifyspeech {

struct UtteranceRecord {
  std::string id;
  std::string speaker_id;
  bool labeled = false;
  std::vector<int> phonemes;   // empty for unlabeled records
  std::vector<int> durations;  // frames per phoneme, empty for unlabeled
  Tensor mel;                  // [T x 80]
  PitchContour f0;             // T values, 0 = unvoiced

  std::size_t num_frames() const { return mel.defined() ? mel.rows() : 0; }
  // Throws IntegrityError naming the record on the first violated invariant.
  void Validate() const;
};

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::size_t n_speakers = 6;          // training speakers
  std::size_t utts_per_speaker = 20;
  double labeled_fraction = 1.0;       // fraction of training speakers keeping (x, d)
  std::size_t test_speakers = 4;       // held out, always labeled
  std::size_t test_utts_per_speaker = 0;  // 0: same as utts_per_speaker
  double noise = 0.0;
  std::size_t num_phonemes = 64;
  std::size_t min_phonemes = 5;
  std::size_t max_phonemes = 15;
  int min_duration = 1;
  int max_duration = 8;
  // Speaker offsets live in a low-rank subspace of the 80 mel channels.
  std::size_t speaker_rank = 4;
  double speaker_scale = 1.0;
  double template_scale = 1.0;
  double pitch_map_scale = 0.3;
  // Per-phoneme intrinsic pitch in log-Hz, uniform in [-range, range].
  double accent_range = 0.15;
  // Phrase-level sinusoid over phoneme position, log-Hz amplitude.
  double modulation = 0.03;
  double modulation_period = 6.0;
  double unvoiced_fraction = 0.2;

  void Validate() const;
};

struct SyntheticFactors {
  Tensor templates;       // [P x 80]
  Tensor speaker_basis;   // [80 x rank]
  Tensor speaker_offsets; // [(train + test) speakers x 80]
  Tensor pitch_map;       // [32 x 80]
  std::vector<double> base_pitch_hz;  // per speaker
  std::vector<double> accent;         // per phoneme, log-Hz
  std::vector<bool> unvoiced;         // per phoneme
  double noise = 0.0;
  double modulation = 0.0;
  double modulation_period = 6.0;

  static SyntheticFactors Draw(const SyntheticOptions& options);
};

struct Corpus {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> test;
};

// Deterministic in the options. Training speakers are spk00..; held-out
// speakers are test00...
Corpus GenerateCorpus(const SyntheticOptions& options);
Corpus GenerateCorpus(const SyntheticOptions& options, const SyntheticFactors& factors);

// One synthetic utterance for speaker row `speaker` of the factors.
UtteranceRecord SynthesizeUtterance(const SyntheticFactors& factors, std::size_t speaker,
                                    std::vector<int> phonemes, std::vector<int> durations,
                                    double phase, Rng& noise_rng);

// Writes manifest_train.txt, manifest_test.txt, feats/*.mel, feats/*.f0 and
// corpus_info.txt under dir.
void WriteCorpus(const std::filesystem::path& dir, const Corpus& corpus,
                 const SyntheticOptions* options = nullptr);
void GenCorpus(const SyntheticOptions& options, const std::filesystem::path& dir);

// split: "train", "test" or "all".
std::vector<UtteranceRecord> LoadCorpus(const std::filesystem::path& dir,
                                        const std::string& split = "train");
std::vector<UtteranceRecord> ParseManifest(const std::string& text,
                                           const std::filesystem::path& base_dir);
std::string FormatManifestLine(const UtteranceRecord& record, const std::string& mel_path,
                               const std::string& f0_path);

// Feature files: u32 rows, u32 cols, then rows*cols little-endian f64.
void WriteFeatureFile(const std::filesystem::path& path, const Tensor& matrix);
Tensor ReadFeatureFile(const std::filesystem::path& path);

const UtteranceRecord& FindUtterance(const std::vector<UtteranceRecord>& records,
                                     const std::string& id);

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_CORPUS_H_
