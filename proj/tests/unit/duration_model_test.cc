#include "bytesing/duration/model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "bytesing/common/error.h"
#include "support/grad_check.h"
#include "support/utterance_builder.h"

namespace bytesing::duration {
namespace {

using testing::make_utterance;

DurationModelConfig small_config() {
  DurationModelConfig cfg;
  cfg.num_layers = 2;
  cfg.hidden_size = 16;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 4;
  cfg.max_epochs = 0;
  cfg.seed = 3;
  return cfg;
}

// Labels every two-phoneme syllable 30% / 70% of its note frames.
frontend::UtteranceScore labelled(frontend::UtteranceScore utt) {
  for (auto& syl : utt.syllables) {
    const int total = static_cast<int>(std::lround(syl.note.duration_sec / kHopSec));
    if (syl.phonemes.size() == 2) {
      const int first = static_cast<int>(std::lround(0.3 * total));
      syl.phonemes[0].allocated_frames = first;
      syl.phonemes[1].allocated_frames = total - first;
    } else {
      syl.phonemes[0].allocated_frames = total;
    }
  }
  return utt;
}

std::vector<frontend::UtteranceScore> toy_corpus() {
  const std::vector<std::string> pinyin = {"shuai", "ma", "an", "zhong", "li", "xiang",
                                           "bo", "e", "qing", "ge"};
  const double notes[] = {0.25, 0.5, 0.75, 0.375, 1.0, 0.3};
  std::vector<frontend::UtteranceScore> corpus;
  for (int u = 0; u < 8; ++u) {
    std::vector<std::pair<std::string, double>> syl;
    for (int i = 0; i < 6; ++i) {
      syl.emplace_back(pinyin[(u * 3 + i) % pinyin.size()], notes[(u + 2 * i) % 6]);
      if (i == 3 && u % 2 == 0) syl.emplace_back("sil", 0.2);
    }
    corpus.push_back(labelled(make_utterance(syl, "toy" + std::to_string(u))));
  }
  return corpus;
}

TEST(DurationModelTest, GradientCheckThreePhonemes) {
  DurationModelConfig cfg = small_config();
  cfg.hidden_size = 4;
  DurationModel model(cfg);
  const auto utt = labelled(make_utterance({{"shuai", 0.5}, {"an", 0.25}}));
  model.set_stats(frontend::fit_duration_stats({utt}));
  const Matrix x = frontend::build_duration_inputs(utt, model.stats());
  const auto frames = frontend::allocated_frames(utt);
  const auto mask = trainable_mask(utt);
  const auto errors = testing::check_gradients(model.parameters(), [&](bool with_backward) {
    nn::Tape tape;
    const nn::Var loss = duration_loss(tape, model, x, frames, mask);
    if (with_backward) tape.backward(loss);
    return loss.scalar();
  });
  for (const auto& e : errors) EXPECT_LT(e.rel_error, 1e-4) << e.name;
}

TEST(DurationModelTest, OutputLengthAndPositivity) {
  DurationModel model(small_config());
  for (int n : {1, 2, 17}) {
    Matrix x = Matrix::Random(n, frontend::duration_input_dim());
    const auto out = predict_durations(model, x);
    ASSERT_EQ(out.size(), static_cast<std::size_t>(n));
    for (double v : out) EXPECT_GT(v, 0.0);
  }
  EXPECT_THROW(predict_durations(model, Matrix::Zero(3, 5)), ShapeError);
}

TEST(DurationModelTest, EmptyDatasetIsAnError) {
  DurationModel model(small_config());
  EXPECT_THROW(train_duration(model, {}), ValidationError);
}

TEST(DurationModelTest, OverfitsSingleUtterance) {
  DurationModelConfig cfg = small_config();
  cfg.max_epochs = 500;
  cfg.batch_size = 1;
  DurationModel model(cfg);
  const auto corpus = toy_corpus();
  const auto result = train_duration(model, {corpus[0]});
  EXPECT_LT(result.final_loss, 1e-3);
}

TEST(DurationModelTest, LearnsThirtySeventySplit) {
  DurationModelConfig cfg = small_config();
  cfg.max_epochs = 300;
  DurationModel model(cfg);
  const auto corpus = toy_corpus();
  train_duration(model, corpus);

  int within_ratio = 0, within_frame = 0, total = 0;
  for (const auto& utt : corpus) {
    const auto raw = predict_durations(
        model, frontend::build_duration_inputs(utt, model.stats()));
    const auto target = frontend::allocated_frames(utt);
    const auto mask = trainable_mask(utt);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!mask[i]) continue;
      const double frames = raw[i] / kHopSec;
      ++total;
      if (std::abs(frames - target[i]) <= 0.1 * target[i]) ++within_ratio;
      if (std::abs(frames - target[i]) <= 1.0) ++within_frame;
    }
  }
  EXPECT_EQ(within_ratio, total);
  EXPECT_GE(within_frame, 0.95 * total);
}

TEST(DurationModelTest, PredictUtteranceRespectsNotes) {
  DurationModel model(small_config());
  const auto utt = make_utterance({{"shuai", 0.5}, {"sil", 0.2}, {"an", 0.3}});
  model.set_stats(frontend::fit_duration_stats({utt}));
  const auto pred = predict_utterance(model, utt);
  ASSERT_EQ(pred.frames.size(), 4u);
  EXPECT_EQ(pred.frames[0] + pred.frames[1], 40);
  EXPECT_EQ(pred.frames[2], 16);
  EXPECT_EQ(pred.frames[3], 24);
  EXPECT_NEAR(pred.constrained_sec[0] + pred.constrained_sec[1], 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(pred.raw_sec[2], 0.2);
  auto copy = utt;
  apply_prediction(copy, pred);
  EXPECT_EQ(frontend::allocated_frames(copy), pred.frames);
}

TEST(DurationModelTest, CheckpointRoundTrip) {
  DurationModel model(small_config());
  const auto utt = make_utterance({{"shuai", 0.5}, {"an", 0.3}});
  model.set_stats(frontend::ZStats{0.4, 0.1});
  const auto path = std::filesystem::temp_directory_path() / "bytesing_duration_test.bsck";
  model.save(path);
  const DurationModel loaded = DurationModel::load(path);
  EXPECT_NEAR(loaded.stats().mean, 0.4, 1e-7);
  const Matrix x = frontend::build_duration_inputs(utt, model.stats());
  const auto a = predict_durations(model, x);
  const auto b = predict_durations(loaded, x);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-5 * a[i]);
  std::filesystem::remove(path);
}

TEST(DurationModelTest, TrainingIsDeterministic) {
  DurationModelConfig cfg = small_config();
  cfg.max_epochs = 5;
  const auto corpus = toy_corpus();
  DurationModel a(cfg), b(cfg);
  EXPECT_EQ(train_duration(a, corpus).final_loss, train_duration(b, corpus).final_loss);
}

}  // namespace
}  // namespace bytesing::duration
