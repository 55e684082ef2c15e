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

#include "unifyspeech/griffin_lim.h"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "unifyspeech/errors.h"
#include "unifyspeech/rng.h"

namespace unifyspeech {

namespace {

constexpr std::size_t kBins = kFftSize / 2 + 1;

class FftPair {
 public:
  FftPair() {
    std::vector<double> real(kFftSize);
    fftw_complex* spec = fftw_alloc_complex(kBins);
    forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), real.data(), spec,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(kFftSize), spec, real.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(spec);
  }
  ~FftPair() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  void Forward(std::vector<double>& frame, std::vector<std::complex<double>>& spec) const {
    spec.resize(kBins);
    fftw_execute_dft_r2c(forward_, frame.data(), reinterpret_cast<fftw_complex*>(spec.data()));
  }
  // c2r destroys its input, so the spectrum is taken by value.
  void Inverse(std::vector<std::complex<double>> spec, std::vector<double>& frame) const {
    frame.resize(kFftSize);
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(spec.data()), frame.data());
    for (double& x : frame) x /= static_cast<double>(kFftSize);
  }

 private:
  fftw_plan forward_;
  fftw_plan inverse_;
};

const FftPair& GetFft() {
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  static const FftPair* fft = new FftPair();
  return *fft;
}

std::vector<double> Hann() {
  std::vector<double> w(kWinLength);
  for (std::size_t i = 0; i < kWinLength; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(kWinLength));
  }
  return w;
}

}  // namespace

std::vector<double> MelToLinearMagnitude(const Tensor& log_mel) {
  if (log_mel.rank() != 2 || log_mel.cols() != kNumMels) {
    throw DimensionError("griffin_lim: expected [T x 80] mel, got " +
                         ShapeToString(log_mel.shape()));
  }
  const std::vector<double>& bank = MelFilterbank();
  const std::size_t frames = log_mel.rows();
  std::vector<double> out(frames * kBins);
  std::vector<double> target(kNumMels), approx(kNumMels), num(kBins), den(kBins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < kNumMels; ++m) target[m] = std::exp(log_mel.data()[t * kNumMels + m]);
    double* s = out.data() + t * kBins;
    // Start from the transposed filterbank, then multiplicative NNLS updates.
    for (std::size_t k = 0; k < kBins; ++k) {
      double v = 0.0;
      for (std::size_t m = 0; m < kNumMels; ++m) v += bank[m * kBins + k] * target[m];
      num[k] = v;
      s[k] = v;
    }
    for (int it = 0; it < 30; ++it) {
      for (std::size_t m = 0; m < kNumMels; ++m) {
        double v = 0.0;
        for (std::size_t k = 0; k < kBins; ++k) v += bank[m * kBins + k] * s[k];
        approx[m] = v;
      }
      for (std::size_t k = 0; k < kBins; ++k) {
        double v = 0.0;
        for (std::size_t m = 0; m < kNumMels; ++m) v += bank[m * kBins + k] * approx[m];
        den[k] = v;
      }
      for (std::size_t k = 0; k < kBins; ++k) s[k] = den[k] > 1e-12 ? s[k] * num[k] / den[k] : 0.0;
    }
  }
  return out;
}

std::vector<double> GriffinLim(const Tensor& log_mel, int iterations, std::uint64_t seed) {
  if (iterations < 0) throw ConfigError("griffin_lim: iterations must be non-negative");
  const std::vector<double> mag = MelToLinearMagnitude(log_mel);
  const std::size_t frames = log_mel.rows();
  if (frames < 2) throw DataError("griffin_lim: need at least two frames");
  const std::size_t pad = kFftSize / 2;
  const std::size_t length = (frames - 1) * kHopLength;
  const std::size_t padded_len = length + 2 * pad;
  const std::vector<double> window = Hann();
  const FftPair& fft = GetFft();

  std::vector<double> norm(padded_len, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < kFftSize; ++i) norm[t * kHopLength + i] += window[i] * window[i];
  }

  Rng rng(seed, StreamId("griffin-lim"));
  std::vector<std::complex<double>> phase(frames * kBins);
  for (auto& p : phase) p = std::polar(1.0, 2.0 * std::numbers::pi * rng.Uniform());

  std::vector<double> signal(padded_len);
  std::vector<double> frame;
  std::vector<std::complex<double>> spec(kBins);
  auto synthesize = [&] {
    std::fill(signal.begin(), signal.end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t k = 0; k < kBins; ++k) spec[k] = mag[t * kBins + k] * phase[t * kBins + k];
      fft.Inverse(spec, frame);
      for (std::size_t i = 0; i < kFftSize; ++i) signal[t * kHopLength + i] += frame[i] * window[i];
    }
    for (std::size_t i = 0; i < padded_len; ++i) {
      if (norm[i] > 1e-8) signal[i] /= norm[i];
    }
  };
  for (int it = 0; it < iterations; ++it) {
    synthesize();
    for (std::size_t t = 0; t < frames; ++t) {
      frame.assign(signal.begin() + static_cast<std::ptrdiff_t>(t * kHopLength),
                   signal.begin() + static_cast<std::ptrdiff_t>(t * kHopLength + kFftSize));
      for (std::size_t i = 0; i < kFftSize; ++i) frame[i] *= window[i];
      fft.Forward(frame, spec);
      for (std::size_t k = 0; k < kBins; ++k) {
        const double a = std::abs(spec[k]);
        phase[t * kBins + k] = a > 1e-12 ? spec[k] / a : std::complex<double>(1.0, 0.0);
      }
    }
  }
  synthesize();
  return std::vector<double>(signal.begin() + static_cast<std::ptrdiff_t>(pad),
                             signal.begin() + static_cast<std::ptrdiff_t>(pad + length));
}

}  // namespace unifyspeech
