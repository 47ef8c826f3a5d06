#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "bytesing/common/error.h"
#include "bytesing/eval/mel.h"
#include "bytesing/vocoder/model.h"
#include "bytesing/nn/optimizer.h"
#include "bytesing/vocoder/train.h"
#include "support/grad_check.h"
#include "support/vocoder_fixture.h"

namespace bytesing::vocoder {
namespace {

using nn::Var;
using testing::tiny_vocoder_config;

const double kLn256 = std::log(256.0);

Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void perturb(nn::ParameterStore& store, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  for (nn::Parameter* p : store.all()) {
    p->value += random_matrix(rng, p->value.rows(), p->value.cols(), scale);
  }
}

std::vector<std::int16_t> random_pcm(std::mt19937_64& rng, std::size_t n, int amp) {
  std::uniform_int_distribution<int> u(-amp, amp);
  std::vector<std::int16_t> out(n);
  for (auto& s : out) s = static_cast<std::int16_t>(u(rng));
  return out;
}

TEST(SampleSplitTest, Examples) {
  EXPECT_EQ(split_sample(0), (CoarseFine{0, 0}));
  EXPECT_EQ(split_sample(65535), (CoarseFine{255, 255}));
  EXPECT_EQ(split_sample(43981), (CoarseFine{171, 205}));
  EXPECT_EQ(combine_sample(0, 0), 0);
  EXPECT_EQ(combine_sample(255, 255), 65535);
  EXPECT_EQ(combine_sample(171, 205), 43981);
}

TEST(SampleSplitTest, OutOfRangeThrows) {
  EXPECT_THROW(split_sample(-1), ValidationError);
  EXPECT_THROW(split_sample(65536), ValidationError);
  EXPECT_THROW(combine_sample(256, 0), ValidationError);
  EXPECT_THROW(combine_sample(0, -1), ValidationError);
}

TEST(SampleSplitTest, ExhaustiveRoundTrip) {
  for (int s = 0; s < 65536; ++s) {
    const CoarseFine cf = split_sample(s);
    ASSERT_EQ(cf.coarse * 256 + cf.fine, s);
    ASSERT_EQ(combine_sample(cf.coarse, cf.fine), s);
  }
  for (int c = 0; c < 256; ++c) {
    for (int f = 0; f < 256; ++f) ASSERT_EQ(split_sample(combine_sample(c, f)), (CoarseFine{c, f}));
  }
}

TEST(SampleSplitTest, SignedOffsetCode) {
  EXPECT_EQ(to_unsigned(-32768), 0);
  EXPECT_EQ(to_unsigned(32767), 65535);
  EXPECT_EQ(to_signed(32768), 0);
  EXPECT_DOUBLE_EQ(scale_class(0), -1.0);
  EXPECT_DOUBLE_EQ(scale_class(255), 1.0);
}

TEST(ConvBlockTest, ZeroConvIsPureScaling) {
  nn::ParameterStore store;
  nn::Rng rng(1);
  ConvBlock block(store, "b", 4, 3, 2, rng);
  for (nn::Parameter* p : store.all()) p->value.setZero();
  std::mt19937_64 gen(2);
  const Matrix x = random_matrix(gen, 8, 4);
  nn::Tape tape(false);
  const Matrix y = block(tape, tape.constant(x)).value();
  EXPECT_LT((y - x * 0.7071067811865476).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConvBlockTest, ZeroGateHalvesTheLinearPart) {
  nn::ParameterStore store;
  nn::Rng rng(1);
  ConvBlock block(store, "b", 3, 1, 1, rng);
  // Kernel 1: linear half is the identity, gate half is zero (its init).
  block.conv().weight().value.leftCols(3) = Matrix::Identity(3, 3);
  std::mt19937_64 gen(3);
  const Matrix x = random_matrix(gen, 5, 3);
  nn::Tape tape(false);
  const Matrix y = block(tape, tape.constant(x)).value();
  EXPECT_LT((y - (x + 0.5 * x) * std::sqrt(0.5)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ConvBlockTest, GradientMatchesFiniteDifferences) {
  nn::ParameterStore store;
  nn::Rng rng(4);
  ConvBlock block(store, "b", 4, 3, 2, rng);
  perturb(store, 5, 0.3);
  std::mt19937_64 gen(6);
  const Matrix x = random_matrix(gen, 8, 4);
  const Matrix probe = random_matrix(gen, 8, 4);
  const auto errors = testing::check_gradients(store, [&](bool backward) {
    nn::Tape tape(backward);
    const Var y = block(tape, tape.constant(x));
    const Var loss = nn::sum(nn::mul(y, tape.constant(probe)));
    if (backward) tape.backward(loss);
    return loss.scalar();
  });
  for (const auto& e : errors) EXPECT_LT(e.rel_error, 1e-4) << e.name;
}

TEST(ConditionTest, ReceptiveFieldArithmetic) {
  VocoderConfig c;
  c.conv_kernel = 3;
  c.num_conv_blocks = 4;
  EXPECT_EQ(c.receptive_field(), 31);
  c.num_conv_blocks = 6;
  EXPECT_EQ(c.receptive_field(), 127);
}

TEST(ConditionTest, LengthPreserved) {
  WaveRnn model(tiny_vocoder_config(8, 4, 5));
  std::mt19937_64 gen(7);
  nn::Tape tape(false);
  for (Index t : {1, 3, 10}) {
    EXPECT_EQ(model.encode_condition(tape, random_matrix(gen, t, 5)).rows(), t);
  }
}

TEST(ConditionTest, PerturbationStaysInsideReceptiveField) {
  VocoderConfig c = tiny_vocoder_config(8, 4, 5);
  c.num_conv_blocks = 4;
  WaveRnn model(c);
  perturb(model.parameters(), 8, 0.2);
  std::mt19937_64 gen(9);
  const Matrix mel = random_matrix(gen, 48, 5);
  Matrix bumped = mel;
  const Index j = 24;
  bumped.row(j).array() += 1.0;
  nn::Tape tape(false);
  const Matrix a = model.encode_condition(tape, mel).value();
  const Matrix b = model.encode_condition(tape, bumped).value();
  const Index half = (c.receptive_field() - 1) / 2;
  for (Index t = 0; t < a.rows(); ++t) {
    const double diff = (a.row(t) - b.row(t)).cwiseAbs().maxCoeff();
    if (std::abs(t - j) > half) {
      EXPECT_EQ(diff, 0.0) << "frame " << t;
    }
  }
  EXPECT_GT((a.row(j - half) - b.row(j - half)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((a.row(j + half) - b.row(j + half)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ConditionTest, NonFiniteMelThrows) {
  WaveRnn model(tiny_vocoder_config(8, 4, 5));
  Matrix mel = Matrix::Zero(3, 5);
  mel(1, 2) = std::numeric_limits<double>::quiet_NaN();
  nn::Tape tape(false);
  EXPECT_THROW(model.encode_condition(tape, mel), NumericError);
}

TEST(UpsampleTest, RepeatsEachFrame) {
  Matrix cond(2, 2);
  cond << 1, 2, 3, 4;
  const Matrix up = upsample_condition(cond, 3);
  ASSERT_EQ(up.rows(), 6);
  for (Index n = 0; n < 6; ++n) EXPECT_EQ(up.row(n), cond.row(n / 3)) << n;
  EXPECT_THROW(upsample_condition(cond, 0), ValidationError);
}

TEST(WaveRnnStepTest, DistributionsAreNormalisedAndStartUniform) {
  VocoderConfig c = tiny_vocoder_config(8, 4, 5);
  WaveRnn model(c);
  nn::Tape tape(false);
  const auto b = model.bind(tape);
  std::mt19937_64 gen(10);
  const Var prev = tape.constant(Matrix::Constant(3, 2, 0.1));
  const Var bias = tape.constant(random_matrix(gen, 3, 3 * c.gru_size));
  const Var h = tape.constant(Matrix::Zero(3, c.gru_size));
  const StepOutput out = model.step(b, prev, bias, h, {0, 128, 255});
  for (const Var* logits : {&out.coarse_logits, &out.fine_logits}) {
    const Matrix p = nn::softmax_rows(*logits).value();
    ASSERT_EQ(p.cols(), 256);
    for (Index r = 0; r < p.rows(); ++r) {
      EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-6);
      EXPECT_NEAR(p.row(r).maxCoeff(), 1.0 / 256.0, 1e-15);
      EXPECT_NEAR(p.row(r).minCoeff(), 1.0 / 256.0, 1e-15);
    }
  }
  const double ce = nn::softmax_cross_entropy(out.coarse_logits, {7, 100, 200}).scalar();
  EXPECT_NEAR(ce, kLn256, 1e-12);
}

TEST(WaveRnnStepTest, TrainedDistributionsStillSumToOne) {
  VocoderConfig c = tiny_vocoder_config(8, 4, 5);
  WaveRnn model(c);
  perturb(model.parameters(), 11, 0.5);
  nn::Tape tape(false);
  const auto b = model.bind(tape);
  std::mt19937_64 gen(12);
  const StepOutput out =
      model.step(b, tape.constant(random_matrix(gen, 4, 2)),
                 tape.constant(random_matrix(gen, 4, 3 * c.gru_size)),
                 tape.constant(random_matrix(gen, 4, c.gru_size, 0.5)), {3, 9, 27, 81});
  for (const Var* logits : {&out.coarse_logits, &out.fine_logits}) {
    const Matrix p = nn::softmax_rows(*logits).value();
    EXPECT_GE(p.minCoeff(), 0.0);
    for (Index r = 0; r < p.rows(); ++r) EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-6);
  }
}

TEST(WaveRnnStepTest, GradientMatchesFiniteDifferences) {
  VocoderConfig c = tiny_vocoder_config(4, 3, 3);
  c.head_size = 5;
  c.coarse_embed_dim = 2;
  WaveRnn model(c);
  perturb(model.parameters(), 13, 0.3);
  std::mt19937_64 gen(14);
  const Matrix prev = random_matrix(gen, 2, 2, 0.5);
  const Matrix bias = random_matrix(gen, 2, 3 * c.gru_size);
  const Matrix h0 = random_matrix(gen, 2, c.gru_size, 0.5);
  const auto errors = testing::check_gradients(model.parameters(), [&](bool backward) {
    nn::Tape tape(backward);
    const auto b = model.bind(tape);
    const StepOutput s1 = model.step(b, tape.constant(prev), tape.constant(bias),
                                     tape.constant(h0), {40, 200});
    const StepOutput s2 =
        model.step(b, tape.constant(prev.reverse()), tape.constant(bias), s1.hidden, {41, 199});
    const Var loss = nn::add(
        nn::add(nn::softmax_cross_entropy(s1.coarse_logits, {40, 200}),
                nn::softmax_cross_entropy(s1.fine_logits, {17, 3})),
        nn::add(nn::softmax_cross_entropy(s2.coarse_logits, {41, 199}),
                nn::softmax_cross_entropy(s2.fine_logits, {90, 250})));
    if (backward) tape.backward(loss);
    return loss.scalar();
  });
  for (const auto& e : errors) EXPECT_LT(e.rel_error, 1e-4) << e.name;
}

TEST(WaveRnnStepTest, WindowLossGradientMatchesFiniteDifferences) {
  VocoderConfig c = tiny_vocoder_config(3, 3, 3);
  c.head_size = 4;
  c.coarse_embed_dim = 2;
  c.condition_channels = 2;
  WaveRnn model(c);
  perturb(model.parameters(), 15, 0.3);
  std::mt19937_64 gen(16);
  const std::vector<VocoderExample> data = {
      make_example("a", random_matrix(gen, 4, 3), random_pcm(gen, 12, 9000), 3)};
  const std::vector<Window> windows = {{0, 0, 2}, {0, 2, 2}};
  const auto errors = testing::check_gradients(model.parameters(), [&](bool backward) {
    nn::Tape tape(backward);
    const Var loss = window_loss(tape, model, data, windows);
    if (backward) tape.backward(loss);
    return loss.scalar();
  });
  for (const auto& e : errors) EXPECT_LT(e.rel_error, 1e-4) << e.name;
}

TEST(WaveRnnLossTest, ZeroInitHeadsGiveTwoLn256) {
  VocoderConfig c = tiny_vocoder_config(8, 10, 5);
  WaveRnn model(c);
  std::mt19937_64 gen(17);
  const auto ex = make_example("a", random_matrix(gen, 6, 5), random_pcm(gen, 60, 20000), 10);
  EXPECT_NEAR(model.clip_loss(ex.mel, ex.pcm), 2.0 * kLn256, 1e-6);
  nn::Tape tape(false);
  EXPECT_NEAR(window_loss(tape, model, {ex}, tile_windows({ex}, 3)).scalar(), 2.0 * kLn256,
              1e-6);
}

TEST(WaveRnnLossTest, TapeAndRawPathsAgree) {
  VocoderConfig c = tiny_vocoder_config(6, 10, 5);
  WaveRnn model(c);
  perturb(model.parameters(), 18, 0.2);
  std::mt19937_64 gen(19);
  const auto ex = make_example("a", random_matrix(gen, 7, 5), random_pcm(gen, 70, 15000), 10);
  nn::Tape tape(false);
  const double tape_loss = window_loss(tape, model, {ex}, {Window{0, 0, 7}}).scalar();
  EXPECT_NEAR(model.clip_loss(ex.mel, ex.pcm), tape_loss, 1e-10);
}

TEST(WaveRnnLossTest, CarriedStateMatchesOneLongWindow) {
  VocoderConfig c = tiny_vocoder_config(6, 10, 5);
  WaveRnn model(c);
  perturb(model.parameters(), 20, 0.2);
  std::mt19937_64 gen(21);
  const auto ex = make_example("a", random_matrix(gen, 6, 5), random_pcm(gen, 60, 15000), 10);
  Matrix h;
  double total = 0.0;
  for (int s = 0; s < 6; s += 2) {
    nn::Tape tape(false);
    const Matrix start = s == 0 ? Matrix::Zero(1, c.gru_size) : h;
    total += window_loss(tape, model, {ex}, {Window{0, s, 2}}, &start, &h).scalar() / 3.0;
  }
  EXPECT_NEAR(total, model.clip_loss(ex.mel, ex.pcm), 1e-10);
}

TEST(GenerateTest, LengthRangeAndDeterminism) {
  VocoderConfig c = tiny_vocoder_config(8, 300, 5);
  WaveRnn model(c);
  perturb(model.parameters(), 22, 0.3);
  std::mt19937_64 gen(23);
  const Matrix mel = random_matrix(gen, 4, 5);
  const auto a = model.generate(mel, GenerateMode::kSample, 5);
  ASSERT_EQ(a.size(), 1200u);
  for (double v : a) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_EQ(a, model.generate(mel, GenerateMode::kSample, 5));
  EXPECT_NE(a, model.generate(mel, GenerateMode::kSample, 6));
  EXPECT_EQ(model.generate(mel, GenerateMode::kArgmax, 1),
            model.generate(mel, GenerateMode::kArgmax, 2));
}

TEST(GenerateTest, NonFiniteStateReportsSampleIndex) {
  WaveRnn model(tiny_vocoder_config(4, 5, 3));
  model.parameters().get("rnn.w_hh").value(0, 0) = std::numeric_limits<double>::infinity();
  model.parameters().get("rnn.b_hh").value.setConstant(std::numeric_limits<double>::infinity());
  try {
    model.generate(Matrix::Zero(2, 3), GenerateMode::kArgmax, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 0);
  }
}

TEST(GenerateTest, CheckpointRoundTrip) {
  VocoderConfig c = tiny_vocoder_config(6, 8, 4);
  WaveRnn model(c);
  perturb(model.parameters(), 24, 0.3);
  model.set_mel_stats(RowVector::Constant(4, -2.0), RowVector::Constant(4, 1.5));
  const auto path = std::filesystem::temp_directory_path() / "bytesing_vocoder.bstf";
  model.save(path);
  const WaveRnn loaded = WaveRnn::load(path);
  std::filesystem::remove(path);
  std::mt19937_64 gen(25);
  const Matrix mel = random_matrix(gen, 3, 4);
  const auto a = model.generate(mel, GenerateMode::kArgmax, 0);
  const auto b = loaded.generate(mel, GenerateMode::kArgmax, 0);
  // Parameters are stored as float32.
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += std::abs(a[i] - b[i]) < 1e-3;
  EXPECT_GT(same, a.size() * 9 / 10);
  EXPECT_EQ(loaded.mel_mean()(0), -2.0);
}

TEST(ExampleTest, MismatchBeyondOneFrameThrows) {
  const Matrix mel = Matrix::Zero(10, 4);
  EXPECT_THROW(make_example("x", mel, std::vector<std::int16_t>(80 * 12), 80), ValidationError);
  EXPECT_THROW(make_example("x", mel, std::vector<std::int16_t>(80 * 8), 80), ValidationError);
  const auto longer = make_example("x", mel, std::vector<std::int16_t>(80 * 11 - 5), 80);
  EXPECT_EQ(longer.mel.rows(), 10);
  EXPECT_EQ(longer.pcm.size(), 800u);
  const auto shorter = make_example("x", mel, std::vector<std::int16_t>(80 * 9 - 5), 80);
  EXPECT_EQ(shorter.mel.rows(), 9);
  EXPECT_EQ(shorter.pcm.size(), 720u);
}

TEST(ExampleTest, WindowsTileAndSampleInsideClips) {
  const std::vector<VocoderExample> data = {
      make_example("a", Matrix::Zero(7, 2), std::vector<std::int16_t>(70), 10),
      make_example("b", Matrix::Zero(3, 2), std::vector<std::int16_t>(30), 10)};
  const auto tiles = tile_windows(data, 3);
  ASSERT_EQ(tiles.size(), 3u);
  EXPECT_EQ(tiles[1].start_frame, 3);
  EXPECT_EQ(tiles[2].example, 1u);
  nn::Rng rng(1);
  for (const auto& w : sample_windows(data, 200, 3, rng)) {
    EXPECT_LE(w.start_frame + w.frames, data[w.example].mel.rows());
  }
  EXPECT_THROW(sample_windows(data, 1, 8, rng), ValidationError);
}

std::vector<VocoderExample> tone_clips(const std::vector<std::vector<double>>& patterns,
                                       int segment, bool swap_audio) {
  std::vector<std::vector<double>> waves;
  for (const auto& p : patterns) waves.push_back(testing::tone_sequence(p, segment, 0.2));
  std::vector<VocoderExample> out;
  for (std::size_t i = 0; i < waves.size(); ++i) {
    const auto& audio = waves[swap_audio ? waves.size() - 1 - i : i];
    out.push_back(make_example("clip" + std::to_string(i), eval::extract_mel(waves[i]),
                               testing::to_pcm(audio), kHopSamples));
  }
  return out;
}

TEST(VocoderTrainTest, LossDecreasesOverFirstHundredSteps) {
  VocoderConfig c = tiny_vocoder_config(16, kHopSamples, kNumMels);
  WaveRnn model(c);
  auto data = tone_clips({{220, 330, 262, 392}}, 600, false);
  const auto windows = tile_windows(data, 8);
  // Full-batch objective so each update is judged on the same data.
  nn::Adam adam(model.parameters(), nn::AdamConfig{.learning_rate = c.learning_rate});
  double last = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 100; ++step) {
    nn::Tape tape;
    const Var loss = window_loss(tape, model, data, windows);
    ASSERT_LT(loss.scalar(), last) << "step " << step;
    last = loss.scalar();
    tape.backward(loss);
    adam.step();
  }
}

TEST(VocoderTrainTest, SameSeedSameLossCurve) {
  VocoderConfig c = tiny_vocoder_config(8, kHopSamples, kNumMels);
  c.train_steps = 5;
  const auto data = tone_clips({{220, 330}}, 600, false);
  WaveRnn a(c);
  WaveRnn b(c);
  EXPECT_EQ(train_vocoder(a, data).step_losses, train_vocoder(b, data).step_losses);
}

TEST(VocoderTrainTest, MatchedPairsBeatShuffledPairs) {
  VocoderConfig c = tiny_vocoder_config(32, kHopSamples, kNumMels);
  c.batch_size = 4;
  c.window_frames = 1;
  c.learning_rate = 3e-3;
  c.train_steps = 150;
  const std::vector<std::vector<double>> patterns = {{220, 392, 220, 392, 220, 392, 220, 392},
                                                     {392, 392, 220, 220, 392, 392, 220, 220}};
  const auto matched = tone_clips(patterns, 600, false);
  const auto shuffled = tone_clips(patterns, 600, true);
  WaveRnn m(c);
  WaveRnn s(c);
  const double matched_loss = train_vocoder(m, matched).final_loss;
  const double shuffled_loss = train_vocoder(s, shuffled).final_loss;
  EXPECT_LT(matched_loss, shuffled_loss);
}

}  // namespace
}  // namespace bytesing::vocoder
