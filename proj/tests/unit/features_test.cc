#include "bytesing/frontend/features.h"

#include <gtest/gtest.h>

#include <random>

#include "bytesing/common/error.h"
#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/phoneme_set.h"
#include "bytesing/frontend/pitch.h"

namespace bytesing::frontend {
namespace {

UtteranceScore utterance(const std::vector<std::pair<std::string, double>>& syllables) {
  UtteranceScore utt;
  utt.utterance_id = "t";
  for (const auto& [pinyin, seconds] : syllables) {
    SyllableEvent s;
    s.pinyin = pinyin;
    s.tone = 4;
    s.note.pitch_name = "C4";
    s.note.midi_number = 60;
    s.note.duration_sec = seconds;
    s.phonemes = phonemize(pinyin, 4, Lexicon::builtin());
    for (auto& p : s.phonemes) p.note_duration_sec = seconds;
    utt.syllables.push_back(s);
  }
  return utt;
}

void set_frames(UtteranceScore& utt, const std::vector<int>& frames) {
  std::size_t i = 0;
  for (auto& s : utt.syllables) {
    for (auto& p : s.phonemes) p.allocated_frames = frames.at(i++);
  }
}

TEST(DurationInputsTest, ShuaiGivesTwoRowsWithNoteDuration) {
  const auto utt = utterance({{"shuai", 0.625}});
  const Matrix x = build_duration_inputs(utt, ZStats{0.0, 1.0});
  ASSERT_EQ(x.rows(), 2);
  ASSERT_EQ(x.cols(), duration_input_dim());
  const int du_col = num_phonemes() + kNumPhonemeTypes;
  EXPECT_DOUBLE_EQ(x(0, du_col), 0.625);
  EXPECT_DOUBLE_EQ(x(1, du_col), 0.625);
  EXPECT_DOUBLE_EQ(x(0, phoneme_id("sh")), 1.0);
  EXPECT_DOUBLE_EQ(x(1, phoneme_id("uai")), 1.0);
  EXPECT_DOUBLE_EQ(x(0, num_phonemes() + static_cast<int>(PhonemeType::kInitial)), 1.0);
  EXPECT_DOUBLE_EQ(x.row(0).head(num_phonemes()).sum(), 1.0);
}

TEST(DurationInputsTest, ShapeAndErrors) {
  const auto utt = utterance({{"shuai", 0.5}, {"an", 0.25}, {"zhong", 1.0}});
  EXPECT_EQ(build_duration_inputs(utt, ZStats{}).rows(), 5);
  EXPECT_EQ(duration_input_dim(), 61 + 4 + 1);
  EXPECT_THROW(build_duration_inputs(utt, std::nullopt), ConfigError);
  EXPECT_THROW(build_duration_inputs(UtteranceScore{}, ZStats{}), ValidationError);
}

TEST(DurationInputsTest, ZNormalisationUsesStats) {
  const auto utt = utterance({{"an", 0.5}, {"an", 1.5}});
  const ZStats stats = fit_duration_stats({utt});
  EXPECT_DOUBLE_EQ(stats.mean, 1.0);
  EXPECT_DOUBLE_EQ(stats.stddev, 0.5);
  const Matrix x = build_duration_inputs(utt, stats);
  EXPECT_DOUBLE_EQ(x(0, duration_input_dim() - 1), -1.0);
  EXPECT_DOUBLE_EQ(x(1, duration_input_dim() - 1), 1.0);
}

TEST(AcousticInputsTest, FourFrameRamp) {
  auto utt = utterance({{"an", 0.05}});
  set_frames(utt, {4});
  const AcousticInput x = build_acoustic_inputs(utt);
  ASSERT_EQ(x.num_frames(), 4);
  const double adv[] = {0.0, 1.0 / 3, 2.0 / 3, 1.0};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(x.po(i, 0), adv[i], 1e-15);
    EXPECT_NEAR(x.po(i, 1), 1.0 - adv[i], 1e-15);
    EXPECT_DOUBLE_EQ(x.po(i, 2), 0.0);
  }
}

TEST(AcousticInputsTest, FramesSumAndIds) {
  auto utt = utterance({{"shuai", 0.0625}});
  set_frames(utt, {2, 3});
  const AcousticInput x = build_acoustic_inputs(utt);
  EXPECT_EQ(x.num_frames(), 5);
  EXPECT_EQ(x.ph_ids, (std::vector<int>{phoneme_id("sh"), phoneme_id("sh"),
                                        phoneme_id("uai"), phoneme_id("uai"),
                                        phoneme_id("uai")}));
  for (int id : x.pi_ids) EXPECT_EQ(id, pitch_token(60));
  for (int t : x.tone_ids) EXPECT_EQ(t, 4);
  EXPECT_DOUBLE_EQ(x.po(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(x.po(4, 2), 1.0);
}

TEST(AcousticInputsTest, DegenerateSingleFrame) {
  auto utt = utterance({{"an", 0.0125}});
  set_frames(utt, {1});
  const AcousticInput x = build_acoustic_inputs(utt);
  ASSERT_EQ(x.num_frames(), 1);
  EXPECT_DOUBLE_EQ(x.po(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(x.po(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(x.po(0, 2), 0.0);
}

TEST(AcousticInputsTest, ZeroFramesRejected) {
  auto utt = utterance({{"shuai", 0.1}});
  set_frames(utt, {3, 0});
  EXPECT_THROW(build_acoustic_inputs(utt), ValidationError);
}

TEST(AcousticInputsTest, RandomUtterancesKeepInvariants) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> frames(1, 30);
  const std::vector<std::string> pool = {"shuai", "an", "zhong", "ma", "yi", "er"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<std::string, double>> syl;
    const int n = 1 + trial % 7;
    for (int i = 0; i < n; ++i) syl.emplace_back(pool[(trial + i) % pool.size()], 0.5);
    auto utt = utterance(syl);
    std::vector<int> f(utt.num_phonemes());
    int total = 0;
    for (auto& v : f) total += (v = frames(rng));
    set_frames(utt, f);
    const AcousticInput x = build_acoustic_inputs(utt);
    ASSERT_EQ(x.num_frames(), total);
    EXPECT_GE(x.po.minCoeff(), 0.0);
    EXPECT_LE(x.po.maxCoeff(), 1.0);
    int row = 0;
    for (int len : f) {
      for (int i = 0; i < len; ++i, ++row) {
        EXPECT_DOUBLE_EQ(x.po(row, 1), 1.0 - x.po(row, 0));
        if (i > 0) EXPECT_GE(x.po(row, 0), x.po(row - 1, 0));
      }
    }
  }
}

}  // namespace
}  // namespace bytesing::frontend
