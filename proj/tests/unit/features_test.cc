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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "unifyspeech/errors.h"
#include "unifyspeech/features.h"
#include "unifyspeech/griffin_lim.h"
#include "unifyspeech/metrics.h"
#include "unifyspeech/rng.h"
#include "unifyspeech/wav.h"

namespace unifyspeech {
namespace {

std::vector<double> Sine(double hz, double amplitude, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRate);
  }
  return x;
}

TEST(MelSpectrogram, SilenceHitsTheClamp) {
  const std::vector<double> silence(22050, 0.0);
  const MelSpectrogram mel = ComputeMelSpectrogram(silence);
  ASSERT_EQ(mel.frames.cols(), kNumMels);
  for (double v : mel.frames.data()) EXPECT_DOUBLE_EQ(v, std::log(1e-5));
}

TEST(MelSpectrogram, FrameCountFromPaddingContract) {
  EXPECT_EQ(NumFrames(22050), 80u);
  EXPECT_EQ(ComputeMelSpectrogram(std::vector<double>(22050, 0.0)).num_frames(), 80u);
  for (std::size_t len : {1000u, 2048u, 5000u, 22051u}) {
    EXPECT_EQ(NumFrames(len), (len + 1024 - 1024) / 276 + 1);
  }
}

TEST(MelSpectrogram, SinePeaksInNearestChannel) {
  const MelSpectrogram mel = ComputeMelSpectrogram(Sine(1000.0, 1.0, 22050));
  const std::vector<double> centers = MelCenterFrequencies();
  std::size_t nearest = 0;
  for (std::size_t c = 1; c < centers.size(); ++c) {
    if (std::abs(centers[c] - 1000.0) < std::abs(centers[nearest] - 1000.0)) nearest = c;
  }
  // Frames whose window reaches into the reflected padding are excluded.
  for (std::size_t t = 2; t + 1 < mel.num_frames(); ++t) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumMels; ++c) {
      if (mel.frames.at(t, c) > mel.frames.at(t, best)) best = c;
    }
    EXPECT_EQ(best, nearest) << "frame " << t;
  }
}

TEST(MelSpectrogram, DeterministicAndFloored) {
  Rng rng(3);
  std::vector<double> audio(9000);
  for (double& x : audio) x = 0.1 * rng.Normal();
  const MelSpectrogram a = ComputeMelSpectrogram(audio), b = ComputeMelSpectrogram(audio);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(a.frames.data()[i], b.frames.data()[i]);
    EXPECT_GE(a.frames.data()[i], std::log(kLogFloor));
  }
  EXPECT_EQ(ExtractF0(audio).size(), a.num_frames());
}

TEST(MelSpectrogram, RejectsBadInput) {
  EXPECT_THROW(ComputeMelSpectrogram(std::vector<double>(100, 0.0), 16000), ConfigError);
  EXPECT_THROW(ComputeMelSpectrogram(std::vector<double>{}), DataError);
}

TEST(MelFilterbank, CentersAreIncreasingWithinRange) {
  const std::vector<double> c = MelCenterFrequencies();
  ASSERT_EQ(c.size(), kNumMels);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c[i], c[i - 1]);
  EXPECT_GT(c.front(), 0.0);
  EXPECT_LT(c.back(), 8000.0);
  EXPECT_NEAR(MelToHz(HzToMel(440.0)), 440.0, 1e-9);
}

TEST(ExtractF0, SilenceAndTinyNoiseAreUnvoiced) {
  for (double v : ExtractF0(std::vector<double>(22050, 0.0)).f0_hz) EXPECT_EQ(v, 0.0);
  Rng rng(4);
  std::vector<double> noise(22050);
  for (double& x : noise) x = 1e-6 * rng.Normal();
  for (double v : ExtractF0(noise).f0_hz) EXPECT_EQ(v, 0.0);
}

TEST(ExtractF0, Sine220Hz) {
  const PitchContour f0 = ExtractF0(Sine(220.0, 0.5, 22050));
  for (std::size_t t = 2; t + 2 < f0.size(); ++t) {
    EXPECT_GT(f0.f0_hz[t], 0.0) << t;
    EXPECT_LT(std::abs(f0.f0_hz[t] - 220.0), 3.0) << t;
  }
}

TEST(ExtractF0, SineSweepWithinTwoPercent) {
  for (double hz = 80.0; hz <= 500.0; hz += 35.0) {
    const PitchContour f0 = ExtractF0(Sine(hz, 0.3, 11025));
    std::size_t good = 0, interior = 0;
    for (std::size_t t = 2; t + 2 < f0.size(); ++t) {
      ++interior;
      good += std::abs(f0.f0_hz[t] - hz) < 0.02 * hz;
    }
    EXPECT_GT(static_cast<double>(good), 0.9 * static_cast<double>(interior)) << hz;
  }
}

TEST(MelCepstra, ConstantFrameHasNoCepstrum) {
  MelSpectrogram mel;
  mel.frames = Tensor::Full({2, kNumMels}, -3.0);
  const CepstraSequence c = MelCepstra(mel);
  ASSERT_EQ(c.coefficients.cols(), kNumCepstra);
  for (double v : c.coefficients.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MelCepstra, MatchesDirectCosineSum) {
  Rng rng(5);
  std::vector<double> frame(kNumMels);
  for (double& x : frame) x = rng.Normal();
  std::vector<double> two(frame);
  two.insert(two.end(), frame.begin(), frame.end());
  MelSpectrogram mel;
  mel.frames = Tensor::FromData({2, kNumMels}, two);
  const CepstraSequence c = MelCepstra(mel);
  const double n = static_cast<double>(kNumMels);
  for (std::size_t k = 1; k <= kNumCepstra; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < kNumMels; ++i) {
      s += frame[i] * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                               static_cast<double>(k) / n);
    }
    s *= std::sqrt(2.0 / n);
    EXPECT_NEAR(c.coefficients.at(0, k - 1), s, 1e-10);
    EXPECT_EQ(c.coefficients.at(0, k - 1), c.coefficients.at(1, k - 1));
  }
  EXPECT_EQ(Mcd(mel, mel), 0.0);
}

TEST(Wav, RoundTripAndRejectsOtherRates) {
  const auto dir = std::filesystem::temp_directory_path() / "uspc_wav_test";
  std::filesystem::create_directories(dir);
  const std::vector<double> x = Sine(300.0, 0.5, 2000);
  WriteWav((dir / "a.wav").string(), x, kSampleRate);
  const WavAudio a = ReadWav((dir / "a.wav").string());
  EXPECT_EQ(a.sample_rate, kSampleRate);
  ASSERT_EQ(a.samples.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(a.samples[i], x[i], 1.0 / 32768.0);
  WriteWav((dir / "b.wav").string(), x, 16000);
  EXPECT_THROW(ReadWav((dir / "b.wav").string()), FormatError);
  EXPECT_THROW(ReadWav((dir / "missing.wav").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST(GriffinLim, ProducesFiniteAudioOfExpectedLength) {
  const MelSpectrogram mel = ComputeMelSpectrogram(Sine(440.0, 0.5, 8000));
  const std::vector<double> audio = GriffinLim(mel.frames, 5, 1);
  EXPECT_EQ(audio.size(), (mel.num_frames() - 1) * kHopLength);
  for (double v : audio) ASSERT_TRUE(std::isfinite(v));
  EXPECT_THROW(GriffinLim(Tensor::Zeros({1, kNumMels}), 5, 1), DataError);
}

}  // namespace
}  // namespace unifyspeech
