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

#include "unifyspeech/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include "unifyspeech/errors.h"

namespace unifyspeech {

namespace {

constexpr std::size_t kNumBins = kFftSize / 2 + 1;

// The FFTW planner is not reentrant; plans are built once under a lock and
// then executed with the new-array interface, which is. FFTW_ESTIMATE keeps
// the chosen algorithm (and thus the output bits) independent of timing.
class RealFft {
 public:
  RealFft() {
    std::vector<double> in(kFftSize);
    fftw_complex* out = fftw_alloc_complex(kNumBins);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.data(), out,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(out);
  }
  ~RealFft() { fftw_destroy_plan(plan_); }

  void Magnitude(std::vector<double>& frame, std::vector<double>& mag) const {
    std::vector<std::complex<double>> spec(kNumBins);
    fftw_execute_dft_r2c(plan_, frame.data(),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    mag.resize(kNumBins);
    for (std::size_t k = 0; k < kNumBins; ++k) mag[k] = std::abs(spec[k]);
  }

 private:
  fftw_plan plan_;
};

class Dct2 {
 public:
  Dct2() {
    std::vector<double> in(kNumMels), out(kNumMels);
    plan_ = fftw_plan_r2r_1d(static_cast<int>(kNumMels), in.data(), out.data(),
                             FFTW_REDFT10, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~Dct2() { fftw_destroy_plan(plan_); }

  // FFTW's REDFT10 is 2 * sum x_n cos(pi k (n + 1/2) / N); rescaled here to
  // the orthonormal DCT-II.
  void Transform(std::vector<double>& in, std::vector<double>& out) const {
    out.resize(kNumMels);
    fftw_execute_r2r(plan_, in.data(), out.data());
    const double n = static_cast<double>(kNumMels);
    out[0] *= std::sqrt(1.0 / (4.0 * n));
    for (std::size_t k = 1; k < kNumMels; ++k) out[k] *= std::sqrt(1.0 / (2.0 * n));
  }

 private:
  fftw_plan plan_;
};

std::mutex g_plan_mutex;

const RealFft& GetRealFft() {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  static const RealFft* fft = new RealFft();
  return *fft;
}

const Dct2& GetDct2() {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  static const Dct2* dct = new Dct2();
  return *dct;
}

const std::vector<double>& HannWindow() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kWinLength);
    for (std::size_t i = 0; i < kWinLength; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(kWinLength));
    }
    return w;
  }();
  return window;
}

void CheckSampleRate(int sample_rate) {
  if (sample_rate != kSampleRate) {
    throw ConfigError("expected " + std::to_string(kSampleRate) +
                      " Hz audio, got " + std::to_string(sample_rate) +
                      " Hz (resampling is not supported)");
  }
}

}  // namespace

std::size_t NumFrames(std::size_t num_samples) {
  return num_samples / kHopLength + 1;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelCenterFrequencies() {
  const double lo = HzToMel(kMelFminHz), hi = HzToMel(kMelFmaxHz);
  std::vector<double> centers(kNumMels);
  for (std::size_t m = 0; m < kNumMels; ++m) {
    centers[m] = MelToHz(lo + (hi - lo) * static_cast<double>(m + 1) /
                                  static_cast<double>(kNumMels + 1));
  }
  return centers;
}

const std::vector<double>& MelFilterbank() {
  static const std::vector<double> bank = [] {
    const double lo = HzToMel(kMelFminHz), hi = HzToMel(kMelFmaxHz);
    std::vector<double> edges(kNumMels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = MelToHz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(kNumMels + 1));
    }
    std::vector<double> w(kNumMels * kNumBins, 0.0);
    for (std::size_t m = 0; m < kNumMels; ++m) {
      const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
      const double norm = 2.0 / (right - left);
      for (std::size_t k = 0; k < kNumBins; ++k) {
        const double f = static_cast<double>(k) * kSampleRate / static_cast<double>(kFftSize);
        const double rise = (f - left) / (center - left);
        const double fall = (right - f) / (right - center);
        w[m * kNumBins + k] = norm * std::max(0.0, std::min(rise, fall));
      }
    }
    return w;
  }();
  return bank;
}

std::vector<double> ReflectPad(std::span<const double> audio, std::size_t pad) {
  const std::size_t n = audio.size();
  std::vector<double> out(n + 2 * pad, 0.0);
  if (n == 1) {
    std::fill(out.begin(), out.end(), audio[0]);
    return out;
  }
  // Mirror without repeating the edge sample; folds repeatedly for signals
  // shorter than the pad.
  const std::ptrdiff_t period = 2 * static_cast<std::ptrdiff_t>(n - 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(pad);
    idx %= period;
    if (idx < 0) idx += period;
    if (idx >= static_cast<std::ptrdiff_t>(n)) idx = period - idx;
    out[i] = audio[static_cast<std::size_t>(idx)];
  }
  return out;
}

MelSpectrogram ComputeMelSpectrogram(std::span<const double> audio,
                                     int sample_rate) {
  CheckSampleRate(sample_rate);
  if (audio.empty()) throw DataError("mel_spectrogram: empty audio");
  const std::vector<double> padded = ReflectPad(audio, kFftSize / 2);
  const std::size_t frames = NumFrames(audio.size());
  if (padded.size() < kFftSize) throw DataError("mel_spectrogram: audio shorter than one window");

  const RealFft& fft = GetRealFft();
  const std::vector<double>& window = HannWindow();
  const std::vector<double>& bank = MelFilterbank();
  const double log_floor = std::log(kLogFloor);

  std::vector<double> out(frames * kNumMels);
  std::vector<double> frame(kFftSize), mag;
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = padded.data() + t * kHopLength;
    for (std::size_t i = 0; i < kFftSize; ++i) frame[i] = src[i] * window[i];
    fft.Magnitude(frame, mag);
    for (std::size_t m = 0; m < kNumMels; ++m) {
      double e = 0.0;
      const double* w = bank.data() + m * kNumBins;
      for (std::size_t k = 0; k < kNumBins; ++k) e += w[k] * mag[k];
      out[t * kNumMels + m] = e > kLogFloor ? std::log(e) : log_floor;
    }
  }
  MelSpectrogram mel;
  mel.frames = Tensor::FromData({frames, kNumMels}, std::move(out));
  mel.sample_rate = sample_rate;
  mel.hop = kHopLength;
  return mel;
}

PitchContour ExtractF0(std::span<const double> audio, int sample_rate) {
  CheckSampleRate(sample_rate);
  PitchContour contour;
  if (audio.empty()) return contour;
  const std::vector<double> padded = ReflectPad(audio, kFftSize / 2);
  const std::size_t frames = NumFrames(audio.size());
  const std::size_t min_lag =
      static_cast<std::size_t>(std::floor(sample_rate / kF0MaxHz));
  const std::size_t max_lag =
      static_cast<std::size_t>(std::ceil(sample_rate / kF0MinHz));
  contour.f0_hz.assign(frames, 0.0);

  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* x = padded.data() + t * kHopLength;
    double energy = 0.0;
    for (std::size_t i = 0; i < kWinLength; ++i) energy += x[i] * x[i];
    const double rms = std::sqrt(energy / static_cast<double>(kWinLength));
    if (rms <= kSilenceRms) continue;

    // Prefix sums of x^2 give both normalizing energies in O(1) per lag.
    std::vector<double> csum(kWinLength + 1, 0.0);
    for (std::size_t i = 0; i < kWinLength; ++i) csum[i + 1] = csum[i] + x[i] * x[i];
    const std::size_t lo = min_lag - 1, hi = max_lag + 1;
    for (std::size_t lag = lo; lag <= hi; ++lag) {
      const std::size_t n = kWinLength - lag;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i + lag];
      const double e0 = csum[n];
      const double e1 = csum[kWinLength] - csum[lag];
      const double denom = std::sqrt(e0 * e1);
      r[lag] = denom > 0.0 ? acc / denom : 0.0;
    }
    double best_value = -1.0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) best_value = std::max(best_value, r[lag]);
    if (best_value <= kVoicingThreshold) continue;
    // Shortest local peak close to the global maximum; avoids picking a
    // multiple of the period (octave error) on strongly periodic frames.
    std::size_t best_lag = 0;
    for (std::size_t lag = min_lag; lag <= max_lag; ++lag) {
      if (r[lag] >= 0.9 * best_value && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
        best_lag = lag;
        break;
      }
    }
    if (best_lag == 0) continue;
    const double a = r[best_lag - 1], b = r[best_lag], c = r[best_lag + 1];
    const double curvature = a - 2.0 * b + c;
    double shift = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    const double f0 = sample_rate / (static_cast<double>(best_lag) + shift);
    contour.f0_hz[t] = std::clamp(f0, kF0MinHz, kF0MaxHz);
  }
  return contour;
}

CepstraSequence MelCepstra(const MelSpectrogram& mel) {
  if (!mel.frames.defined() || mel.frames.rank() != 2 || mel.frames.cols() != kNumMels) {
    throw DimensionError("mel_cepstra: expected [T x 80] mel frames");
  }
  const std::size_t frames = mel.frames.rows();
  const Dct2& dct = GetDct2();
  std::vector<double> out(frames * kNumCepstra);
  std::vector<double> in(kNumMels), coeffs;
  for (std::size_t t = 0; t < frames; ++t) {
    std::copy_n(mel.frames.data().data() + t * kNumMels, kNumMels, in.begin());
    dct.Transform(in, coeffs);
    std::copy_n(coeffs.begin() + 1, kNumCepstra, out.begin() + t * kNumCepstra);
  }
  CepstraSequence cep;
  cep.coefficients = Tensor::FromData({frames, kNumCepstra}, std::move(out));
  return cep;
}

}  // namespace unifyspeech
