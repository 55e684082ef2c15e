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

#include "unifyspeech/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "unifyspeech/encoders.h"
#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

void RequireSameLength(const PitchContour& ref, const PitchContour& hyp, const char* what) {
  if (ref.size() != hyp.size()) {
    throw DimensionError(std::string(what) + ": contours have " + std::to_string(ref.size()) +
                         " and " + std::to_string(hyp.size()) + " frames");
  }
}

}  // namespace

double F0Rmse(const PitchContour& ref, const PitchContour& hyp) {
  RequireSameLength(ref, hyp, "f0_rmse");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (PitchContour::IsVoiced(ref.f0_hz[t]) && PitchContour::IsVoiced(hyp.f0_hz[t])) {
      const double d = ref.f0_hz[t] - hyp.f0_hz[t];
      s += d * d;
      ++n;
    }
  }
  if (n == 0) throw UndefinedResultError("f0_rmse: no frames voiced in both contours");
  return std::sqrt(s / static_cast<double>(n));
}

double F0Corr(const PitchContour& ref, const PitchContour& hyp) {
  RequireSameLength(ref, hyp, "f0_corr");
  std::vector<double> a, b;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (PitchContour::IsVoiced(ref.f0_hz[t]) && PitchContour::IsVoiced(hyp.f0_hz[t])) {
      a.push_back(ref.f0_hz[t]);
      b.push_back(hyp.f0_hz[t]);
    }
  }
  if (a.size() < 2) throw UndefinedResultError("f0_corr: fewer than 2 co-voiced frames");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedResultError("f0_corr: zero variance");
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double VuvError(const PitchContour& ref, const PitchContour& hyp) {
  RequireSameLength(ref, hyp, "vuv_error");
  if (ref.size() == 0) throw UndefinedResultError("vuv_error: empty contours");
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    if (PitchContour::IsVoiced(ref.f0_hz[t]) != PitchContour::IsVoiced(hyp.f0_hz[t])) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(ref.size());
}

double McdFromCepstra(const Tensor& ref, const Tensor& hyp) {
  if (ref.shape() != hyp.shape()) {
    throw AlignmentError("mcd: cepstra " + ShapeToString(ref.shape()) + " vs " +
                         ShapeToString(hyp.shape()) + " (no DTW; inputs must be frame-synchronous)");
  }
  if (ref.rank() != 2 || ref.rows() == 0) throw UndefinedResultError("mcd: no frames");
  const std::size_t t = ref.rows(), k = ref.cols();
  const double scale = 10.0 / std::numbers::ln10;
  double total = 0.0;
  for (std::size_t r = 0; r < t; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = ref.data()[r * k + c] - hyp.data()[r * k + c];
      s += d * d;
    }
    total += scale * std::sqrt(2.0 * s);
  }
  return total / static_cast<double>(t);
}

double Mcd(const MelSpectrogram& ref, const MelSpectrogram& hyp) {
  if (ref.num_frames() != hyp.num_frames()) {
    throw AlignmentError("mcd: " + std::to_string(ref.num_frames()) + " vs " +
                         std::to_string(hyp.num_frames()) +
                         " frames (no DTW; inputs must be frame-synchronous)");
  }
  return McdFromCepstra(MelCepstra(ref).coefficients, MelCepstra(hyp).coefficients);
}

double Mcd(const Tensor& ref_mel, const Tensor& hyp_mel) {
  MelSpectrogram a, b;
  a.frames = ref_mel;
  b.frames = hyp_mel;
  return Mcd(a, b);
}

double CosineSimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("cosine: vector lengths differ");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw DegenerateEmbeddingError("cosine: zero-norm embedding");
  return std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
}

AcsReport AcsRatio(const std::vector<std::pair<std::string, Tensor>>& embeddings) {
  std::map<std::string, std::size_t> per_speaker;
  for (const auto& [speaker, e] : embeddings) {
    ++per_speaker[speaker];
    double norm = 0.0;
    for (double v : e.data()) norm += v * v;
    if (norm == 0.0) {
      throw DegenerateEmbeddingError("acs_ratio: zero-norm embedding for speaker " + speaker);
    }
  }
  if (per_speaker.size() < 2) throw UndefinedResultError("acs_ratio: need at least 2 speakers");
  for (const auto& [speaker, n] : per_speaker) {
    if (n < 2) {
      throw UndefinedResultError("acs_ratio: speaker " + speaker + " has a single embedding");
    }
  }
  AcsReport r;
  double same = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const double c = CosineSimilarity(embeddings[i].second.data(), embeddings[j].second.data());
      if (embeddings[i].first == embeddings[j].first) {
        same += c;
        ++r.same_pairs;
      } else {
        diff += c;
        ++r.different_pairs;
      }
    }
  }
  r.s_acs = same / static_cast<double>(r.same_pairs);
  r.d_acs = diff / static_cast<double>(r.different_pairs);
  if (r.d_acs == 0.0) throw UndefinedResultError("acs_ratio: different-speaker ACS is exactly 0");
  r.ratio = r.s_acs / r.d_acs;
  return r;
}

PhonemeDistance PhonemeRepDistance(const Tensor& text_content, const Tensor& speech_content,
                                   std::span<const int> phonemes,
                                   std::span<const int> durations) {
  if (text_content.shape() != speech_content.shape() || text_content.rank() != 2) {
    throw PairingError("phoneme_rep_distance: text content " +
                       ShapeToString(text_content.shape()) + " vs speech content " +
                       ShapeToString(speech_content.shape()));
  }
  if (phonemes.size() != durations.size()) {
    throw DataError("phoneme_rep_distance: phoneme and duration counts differ");
  }
  const std::vector<int> frame_to_token = ExpansionMap(durations);
  if (frame_to_token.size() != text_content.rows()) {
    throw PairingError("phoneme_rep_distance: durations cover " +
                       std::to_string(frame_to_token.size()) + " frames, content has " +
                       std::to_string(text_content.rows()));
  }
  const std::size_t d = text_content.cols();
  struct Sums {
    std::vector<double> text, speech;
    std::size_t count = 0;
  };
  std::map<int, Sums> groups;
  for (std::size_t t = 0; t < frame_to_token.size(); ++t) {
    Sums& g = groups[phonemes[static_cast<std::size_t>(frame_to_token[t])]];
    if (g.count == 0) {
      g.text.assign(d, 0.0);
      g.speech.assign(d, 0.0);
    }
    for (std::size_t k = 0; k < d; ++k) {
      g.text[k] += text_content.data()[t * d + k];
      g.speech[k] += speech_content.data()[t * d + k];
    }
    ++g.count;
  }
  PhonemeDistance out;
  double total = 0.0;
  for (const auto& [symbol, g] : groups) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = (g.text[k] - g.speech[k]) / static_cast<double>(g.count);
      s += diff * diff;
    }
    total += std::sqrt(s);
    ++out.phonemes;
  }
  if (out.phonemes == 0) throw UndefinedResultError("phoneme_rep_distance: no voiced phonemes");
  out.average = total / static_cast<double>(out.phonemes);
  return out;
}

double CodeAgreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw PairingError("code_agreement: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " codes");
  }
  if (a.empty()) throw UndefinedResultError("code_agreement: empty sequences");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace unifyspeech
