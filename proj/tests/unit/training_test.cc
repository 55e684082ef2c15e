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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "experiments.h"
#include "unifyspeech/errors.h"
#include "unifyspeech/ops.h"
#include "unifyspeech/training.h"

namespace unifyspeech {
namespace {

TrainConfig Tiny(TrainMode mode = TrainMode::kFull) {
  TrainConfig c;
  c.model.d_model = 16;
  c.model.ffn_hidden = 16;
  c.model.text_blocks = 1;
  c.model.content_blocks = 1;
  c.model.decoder_blocks = 1;
  c.model.codebook_size = 32;
  c.model.dropout = 0.0;
  c.batch_paired = 2;
  c.batch_unpaired = 2;
  c.max_steps = 5;
  c.early_stop = false;
  c.mode = mode;
  return ResolveMode(c);
}

Corpus TinyCorpus() {
  SyntheticOptions o;
  o.seed = 21;
  o.n_speakers = 3;
  o.utts_per_speaker = 3;
  o.labeled_fraction = 2.0 / 3.0;
  o.test_speakers = 2;
  o.test_utts_per_speaker = 2;
  return GenerateCorpus(o);
}

std::vector<const UtteranceRecord*> Labeled(const std::vector<UtteranceRecord>& rs, std::size_t n) {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : rs) {
    if (r.labeled && out.size() < n) out.push_back(&r);
  }
  return out;
}

std::vector<const UtteranceRecord*> Unlabeled(const std::vector<UtteranceRecord>& rs, std::size_t n) {
  std::vector<const UtteranceRecord*> out;
  for (const auto& r : rs) {
    if (!r.labeled && out.size() < n) out.push_back(&r);
  }
  return out;
}

StepContext Eval() {
  StepContext ctx;
  ctx.training = false;
  return ctx;
}

TEST(Losses, TotalIsSumOfWeightedFragments) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto paired = Labeled(corpus.train, 2);
  const auto speech = Unlabeled(corpus.train, 2);
  const TtsFragment tts = TtsStep(model, paired, Eval());
  const PairFragment pair = PairStep(model, paired, Eval());
  const VcFragment vc = VcStep(model, speech, Eval());
  const LossWeights w;
  const LossTerms terms = CombineLosses(w, &tts, &pair, &vc);
  const double expected = w.mel * tts.mel.item() + w.pitch * tts.pitch_ce.item() +
                          w.duration * tts.duration.item() + w.pair * pair.pair.item() +
                          w.vc * (w.mel * vc.mel.item() + w.pitch * vc.pitch_ce.item()) +
                          w.vq_aux * (tts.vq_aux.item() + pair.vq_aux.item() + vc.vq_aux.item());
  EXPECT_NEAR(terms.total.item(), expected, 1e-12);
  EXPECT_NEAR(terms.report.total, terms.total.item(), 0.0);
  const LossReport& r = terms.report;
  EXPECT_EQ(r.tts_loss(), r.l_tts_rec + r.l_pair);
  EXPECT_EQ(r.l_vc_rec, w.mel * r.vc_mel + w.pitch * r.vc_pitch_ce);
  for (double v : {r.l_tts_rec, r.l_pair, r.l_duration, r.l_vc_rec, r.l_vq_aux, r.total}) {
    EXPECT_GE(v, 0.0);
  }
}

TEST(Losses, ZeroPitchWeightDropsPitchExactly) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto paired = Labeled(corpus.train, 2);
  const TtsFragment tts = TtsStep(model, paired, Eval());
  LossWeights w;
  w.pitch = 0.0;
  const LossTerms terms = CombineLosses(w, &tts, nullptr, nullptr);
  EXPECT_EQ(terms.report.l_tts_rec, tts.mel.item());
}

TEST(Losses, BatchOfTwoIsMeanOfSingles) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto paired = Labeled(corpus.train, 2);
  const TtsFragment both = TtsStep(model, paired, Eval());
  const std::vector<const UtteranceRecord*> a{paired[0]}, b{paired[1]};
  const TtsFragment fa = TtsStep(model, a, Eval()), fb = TtsStep(model, b, Eval());
  EXPECT_NEAR(both.mel.item(), 0.5 * (fa.mel.item() + fb.mel.item()), 1e-12);
  EXPECT_NEAR(both.duration.item(), 0.5 * (fa.duration.item() + fb.duration.item()), 1e-12);
  EXPECT_NEAR(both.pitch_ce.item(), 0.5 * (fa.pitch_ce.item() + fb.pitch_ce.item()), 1e-12);
}

TEST(Losses, MissingDurationsIsDataError) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto speech = Unlabeled(corpus.train, 1);
  ASSERT_EQ(speech.size(), 1u);
  EXPECT_THROW(TtsStep(model, speech, Eval()), DataError);
  EXPECT_THROW(PairStep(model, speech, Eval()), DataError);
}

TEST(Losses, VcStepTouchesNoTextTensors) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto speech = Labeled(corpus.train, 2);
  StepContext ctx;
  const VcFragment vc = VcStep(model, speech, ctx);
  Add(vc.mel, vc.vq_aux).Backward();
  for (const std::string& name : model.params().NamesWithPrefix("text_encoder.")) {
    EXPECT_FALSE(model.params().Get(name).has_grad()) << name;
  }
  for (const QuantizedContent& q : vc.quantized) EXPECT_EQ(q.source, &model.codebook());
}

TEST(Losses, SamePairedOutputsGiveZeroPairLoss) {
  const Corpus corpus = TinyCorpus();
  UnifySpeechModel model(Tiny().model);
  const auto paired = Labeled(corpus.train, 1);
  const PairFragment pair = PairStep(model, paired, Eval());
  EXPECT_GE(pair.pair.item(), 0.0);
  EXPECT_EQ(PairLoss(pair.text[0], pair.text[0]).item(), 0.0);
}

TEST(Losses, NoVqMatchesFullWhenQuantizationIsIdentity) {
  const Corpus corpus = TinyCorpus();
  const auto paired = Labeled(corpus.train, 1);
  TrainConfig full = Tiny(), novq = Tiny(TrainMode::kNoVq);
  full.model.codebook_size = 128;
  novq.model.codebook_size = 128;
  UnifySpeechModel a(full.model), b(novq.model);
  // Make every text-content row of the batch a codebook entry.
  const UtteranceRecord& r = *paired[0];
  const Tensor content = a.TextContent(r.phonemes, r.durations, ForwardContext{});
  ASSERT_LE(content.rows(), 128u);
  std::span<double> entries = a.mutable_codebook().mutable_entries().mutable_data();
  std::copy(content.data().begin(), content.data().end(), entries.begin());
  const TtsFragment fa = TtsStep(a, paired, Eval()), fb = TtsStep(b, paired, Eval());
  EXPECT_EQ(fa.mel.item(), fb.mel.item());
  EXPECT_EQ(fa.pitch_ce.item(), fb.pitch_ce.item());
}

TEST(Trainer, ModesRouteTheRightTerms) {
  const Corpus corpus = TinyCorpus();
  const auto paired = Labeled(corpus.train, 2);
  const auto speech = Unlabeled(corpus.train, 2);
  {
    Trainer t(Tiny(TrainMode::kTtsOnly));
    const LossReport r = t.JointStep(paired, speech);
    EXPECT_GT(r.l_tts_rec, 0.0);
    EXPECT_EQ(r.l_vc_rec, 0.0);
    EXPECT_EQ(r.l_pair, 0.0);
  }
  {
    Trainer t(Tiny(TrainMode::kVcOnly));
    const LossReport r = t.JointStep(paired, speech);
    EXPECT_EQ(r.l_tts_rec, 0.0);
    EXPECT_GT(r.l_vc_rec, 0.0);
  }
  {
    Trainer t(Tiny(TrainMode::kNoVq));
    EXPECT_FALSE(t.model().config().use_vq);
    const LossReport r = t.JointStep(paired, speech);
    EXPECT_EQ(r.l_vq_aux, 0.0);
    EXPECT_GT(r.l_pair, 0.0);
  }
}

TEST(Trainer, NonFiniteTotalAbortsWithCheckpointPointer) {
  const Corpus corpus = TinyCorpus();
  const auto paired = Labeled(corpus.train, 2);
  Trainer t(Tiny());
  t.JointStep(paired, paired);
  const std::string name = t.model().params().NamesWithPrefix("decoder.output").front();
  Tensor p = t.model().params().Get(name);
  p.mutable_data()[0] = std::numeric_limits<double>::quiet_NaN();
  t.set_last_checkpoint("/tmp/last.ckpt");
  try {
    t.JointStep(paired, paired);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("/tmp/last.ckpt"), std::string::npos) << e.what();
  }
  EXPECT_EQ(t.step(), 1u);
}

TEST(Trainer, EmptyCorpusIsDataError) {
  Trainer t(Tiny());
  EXPECT_THROW(t.Train({}), DataError);
}

TEST(Trainer, LearningRateDecaysPerEpoch) {
  const Corpus corpus = TinyCorpus();
  TrainConfig c = Tiny();
  c.epoch_steps = 2;
  c.max_steps = 5;
  Trainer t(c);
  const TrainResult r = t.Train(corpus.train);
  ASSERT_EQ(r.trace.size(), 5u);
  EXPECT_EQ(r.trace[0].lr, c.lr_init);
  EXPECT_EQ(r.trace[1].lr, c.lr_init);
  EXPECT_DOUBLE_EQ(r.trace[2].lr, c.lr_init * c.lr_decay);
  EXPECT_DOUBLE_EQ(r.trace[4].lr, c.lr_init * c.lr_decay * c.lr_decay);
}

TEST(Trainer, LossDecreases) {
  const Corpus corpus = TinyCorpus();
  TrainConfig c = Tiny();
  c.max_steps = 60;
  c.lr_decay = 1.0;
  Trainer t(c);
  const TrainResult r = t.Train(corpus.train);
  EXPECT_LT(r.trace.back().total, r.trace.front().total);
}

TEST(Trainer, PlateauStopsEarly) {
  const Corpus corpus = TinyCorpus();
  TrainConfig c = Tiny();
  c.max_steps = 100000;
  c.lr_init = 1e-12;
  c.early_stop = true;
  c.plateau_epochs = 2;
  Trainer t(c);
  const TrainResult r = t.Train(corpus.train);
  EXPECT_TRUE(r.stopped_on_plateau);
  EXPECT_LT(r.steps, 100u);
}

TEST(Trainer, UnusedCodebookEntriesStayBitwiseStable) {
  const Corpus corpus = TinyCorpus();
  const auto paired = Labeled(corpus.train, 2);
  Trainer t(Tiny());
  t.JointStep(paired, paired);
  const Codebook& book = t.model().codebook();
  const std::vector<double> before(book.entries().data().begin(), book.entries().data().end());
  const std::vector<std::int64_t> usage_before = book.usage();
  t.JointStep(paired, paired);
  const std::size_t d = book.dim();
  std::size_t stable = 0;
  for (std::size_t j = 0; j < book.size(); ++j) {
    const bool used = book.usage()[j] > usage_before[j];
    if (used) continue;
    ++stable;
    for (std::size_t k = 0; k < d; ++k) EXPECT_EQ(book.entries().data()[j * d + k], before[j * d + k]);
  }
  EXPECT_GT(stable, 0u);
}

TEST(Trainer, SharedParameterContract) { EXPECT_EQ(testing::CheckSharedParameters(), ""); }

TEST(Trainer, DeterministicTraces) { EXPECT_EQ(testing::CheckDeterminism(6), ""); }

TEST(Trace, CsvRowsRoundTripDoubles) {
  LossReport r;
  r.step = 3;
  r.total = 0.1 + 0.2;
  const std::string row = TraceCsvRow(r);
  const std::string header = TraceCsvHeader();
  EXPECT_NE(row.find("0.30000000000000004"), std::string::npos);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','),
            std::count(row.begin(), row.end(), ','));
}

}  // namespace
}  // namespace unifyspeech
