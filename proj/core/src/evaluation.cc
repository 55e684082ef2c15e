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

#include "unifyspeech/evaluation.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "unifyspeech/encoders.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"

namespace unifyspeech {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double MelMse(const Tensor& a, const Tensor& b) {
  NoGradGuard no_grad;
  return Mse(a, b).item();
}

using Histogram = std::map<int, double>;

// sum_c (total(c)^2 - sum_g part_g(c)^2) and the matching pair count.
std::pair<double, double> CrossGroupAgreement(const std::vector<Histogram>& parts) {
  Histogram total;
  double n_total = 0.0, self_pairs = 0.0, self_matches = 0.0;
  for (const Histogram& h : parts) {
    double n = 0.0;
    for (const auto& [code, count] : h) {
      total[code] += count;
      self_matches += count * count;
      n += count;
    }
    n_total += n;
    self_pairs += n * n;
  }
  double matches = 0.0;
  for (const auto& [code, count] : total) matches += count * count;
  return {matches - self_matches, n_total * n_total - self_pairs};
}

}  // namespace

std::size_t ReferenceIndex(const std::vector<UtteranceRecord>& records, std::size_t i) {
  const std::size_t n = records.size();
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t j = (i + k) % n;
    if (records[j].speaker_id == records[i].speaker_id) return j;
  }
  return i;
}

std::pair<QuantizedContent, QuantizedContent> DomainContent(const UnifySpeechModel& model,
                                                            const UtteranceRecord& record) {
  if (record.phonemes.empty()) {
    throw DataError("utterance " + record.id + " has no phonemes");
  }
  NoGradGuard no_grad;
  const ForwardContext eval;
  QuantizedContent qp = model.Quantize(model.TextContent(record.phonemes, record.durations, eval));
  QuantizedContent qs = model.Quantize(model.content_encoder().Forward(record.mel, eval));
  return {std::move(qp), std::move(qs)};
}

PhonemeDistance PhonemeRepDistance(const UnifySpeechModel& model, const UtteranceRecord& record) {
  auto [qp, qs] = DomainContent(model, record);
  return PhonemeRepDistance(qp.vectors, qs.vectors, record.phonemes, record.durations);
}

std::vector<std::pair<std::string, Tensor>> SpeakerEmbeddings(
    const UnifySpeechModel& model, const std::vector<UtteranceRecord>& records) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const UtteranceRecord& rec : records) {
    out.emplace_back(rec.speaker_id, model.SpeakerEmbedding(rec.mel));
  }
  return out;
}

EvalReport Evaluate(const UnifySpeechModel& model, const std::vector<UtteranceRecord>& records) {
  if (records.empty()) throw DataError("eval: no utterances");
  EvalReport r;
  r.utterances = records.size();
  const bool vq = model.config().use_vq;

  double rmse = 0.0, corr = 0.0, mcd = 0.0, vuv = 0.0, tts_mse = 0.0, vc_mse = 0.0;
  double distance = 0.0, agree_frames = 0.0, total_frames = 0.0;
  // speaker -> phoneme -> code histogram of speech-side frames.
  std::map<std::string, std::map<int, Histogram>> hist;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const UtteranceRecord& rec = records[i];
    const UtteranceRecord& ref = records[ReferenceIndex(records, i)];
    const SynthesisResult vc = model.ConvertVoice(rec.mel, ref.mel);
    vc_mse += MelMse(vc.mel, rec.mel);
    if (rec.phonemes.empty()) continue;
    ++r.labeled;
    const SynthesisResult tts = model.SynthesizeTts(
        rec.phonemes, ref.mel, std::span<const int>(rec.durations));
    tts_mse += MelMse(tts.mel, rec.mel);
    mcd += Mcd(rec.mel, tts.mel);
    vuv += VuvError(rec.f0, tts.f0);
    try {
      rmse += F0Rmse(rec.f0, tts.f0);
      ++r.f0_rmse_utterances;
    } catch (const UndefinedResultError&) {
    }
    try {
      corr += F0Corr(rec.f0, tts.f0);
      ++r.f0_corr_utterances;
    } catch (const UndefinedResultError&) {
    }
    auto [qp, qs] = DomainContent(model, rec);
    distance += PhonemeRepDistance(qp.vectors, qs.vectors, rec.phonemes, rec.durations).average;
    if (vq) {
      const std::vector<int> token = ExpansionMap(rec.durations);
      for (std::size_t t = 0; t < qs.codes.size(); ++t) {
        agree_frames += qp.codes[t] == qs.codes[t];
        hist[rec.speaker_id][rec.phonemes[static_cast<std::size_t>(token[t])]][qs.codes[t]] += 1.0;
      }
      total_frames += static_cast<double>(qs.codes.size());
    }
  }
  const double n = static_cast<double>(records.size());
  const double nl = static_cast<double>(r.labeled);
  r.vc_mel_mse = vc_mse / n;
  if (r.labeled > 0) {
    r.tts_mel_mse = tts_mse / nl;
    r.tts.mcd_db = mcd / nl;
    r.tts.vuv_error_rate = vuv / nl;
    r.phoneme_rep_distance = distance / nl;
  }
  r.tts.f0_rmse_hz = r.f0_rmse_utterances ? rmse / static_cast<double>(r.f0_rmse_utterances) : kNaN;
  r.tts.f0_corr = r.f0_corr_utterances ? corr / static_cast<double>(r.f0_corr_utterances) : kNaN;

  r.pair_code_agreement = kNaN;
  r.cross_speaker_same_phoneme = kNaN;
  r.within_speaker_diff_phoneme = kNaN;
  if (vq && total_frames > 0) {
    r.pair_code_agreement = agree_frames / total_frames;
    // Same phoneme, different speakers.
    std::map<int, std::vector<Histogram>> by_phoneme;
    for (const auto& [speaker, phones] : hist) {
      for (const auto& [ph, h] : phones) by_phoneme[ph].push_back(h);
    }
    double num = 0.0, den = 0.0;
    for (const auto& [ph, parts] : by_phoneme) {
      auto [m, p] = CrossGroupAgreement(parts);
      num += m;
      den += p;
    }
    if (den > 0) r.cross_speaker_same_phoneme = num / den;
    // Same speaker, different phonemes.
    num = den = 0.0;
    for (const auto& [speaker, phones] : hist) {
      std::vector<Histogram> parts;
      for (const auto& [ph, h] : phones) parts.push_back(h);
      auto [m, p] = CrossGroupAgreement(parts);
      num += m;
      den += p;
    }
    if (den > 0) r.within_speaker_diff_phoneme = num / den;
  }

  try {
    r.acs = AcsRatio(SpeakerEmbeddings(model, records));
    r.acs_defined = true;
  } catch (const UndefinedResultError&) {
    r.acs_defined = false;
  }
  return r;
}

std::string FormatEvalCsv(const EvalReport& r) {
  std::string out = "metric,value\n";
  auto row = [&](const char* name, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", name, v);
    out += buf;
  };
  row("utterances", static_cast<double>(r.utterances));
  row("labeled_utterances", static_cast<double>(r.labeled));
  row("f0_rmse_hz", r.tts.f0_rmse_hz);
  row("mcd_db", r.tts.mcd_db);
  row("vuv_error_rate", r.tts.vuv_error_rate);
  row("f0_corr", r.tts.f0_corr);
  row("tts_mel_mse", r.tts_mel_mse);
  row("vc_mel_mse", r.vc_mel_mse);
  row("s_acs", r.acs_defined ? r.acs.s_acs : kNaN);
  row("d_acs", r.acs_defined ? r.acs.d_acs : kNaN);
  row("acs_ratio", r.acs_defined ? r.acs.ratio : kNaN);
  row("phoneme_rep_distance", r.phoneme_rep_distance);
  row("pair_code_agreement", r.pair_code_agreement);
  row("cross_speaker_same_phoneme_agreement", r.cross_speaker_same_phoneme);
  row("within_speaker_diff_phoneme_agreement", r.within_speaker_diff_phoneme);
  return out;
}

std::string FormatEmbeddingCsv(const std::vector<UtteranceRecord>& records,
                               const std::vector<std::pair<std::string, Tensor>>& embeddings) {
  if (records.size() != embeddings.size()) {
    throw DimensionError("embedding csv: record and embedding counts differ");
  }
  std::string out = "utterance_id,speaker_id";
  const std::size_t d = embeddings.empty() ? 0 : embeddings[0].second.size();
  for (std::size_t k = 0; k < d; ++k) out += ",e" + std::to_string(k);
  out += '\n';
  char buf[32];
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += records[i].id + ',' + records[i].speaker_id;
    for (double v : embeddings[i].second.data()) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace unifyspeech
