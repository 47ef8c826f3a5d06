#include "bytesing/acoustic/model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "bytesing/acoustic/train.h"
#include "bytesing/common/error.h"
#include "support/acoustic_fixture.h"
#include "support/grad_check.h"

namespace bytesing::acoustic {
namespace {

using testing::make_acoustic_input;
using testing::tiny_acoustic_config;
using nn::Var;

TEST(AcousticEmbedTest, DefaultWidthIs323) {
  AcousticModel model(AcousticConfig{});
  nn::Tape tape(false);
  const auto x = make_acoustic_input({{"a", 60, 5}});
  EXPECT_EQ(model.embed_inputs(tape, x).cols(), 323);
  EXPECT_EQ(model.embed_inputs(tape, x).rows(), 5);
}

TEST(AcousticEmbedTest, ToneAddsColumnsAndLookupIsPositionFree) {
  AcousticConfig cfg = tiny_acoustic_config(8, 8);
  cfg.use_tone = true;
  AcousticModel model(cfg);
  nn::Tape tape(false);
  const auto x = make_acoustic_input({{"a", 60, 3}, {"b", 62, 2}, {"a", 60, 3}});
  const Matrix e = model.embed_inputs(tape, x).value();
  EXPECT_EQ(e.cols(), cfg.ph_embed_dim + cfg.pi_embed_dim + 3 + cfg.tone_embed_dim);
  const Index ph = cfg.ph_embed_dim + cfg.pi_embed_dim;
  EXPECT_TRUE(e.row(0).head(ph).isApprox(e.row(5).head(ph)));
}

TEST(AcousticEmbedTest, OutOfRangeIdThrows) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  nn::Tape tape(false);
  auto x = make_acoustic_input({{"a", 60, 2}});
  x.pi_ids[1] = 500;
  EXPECT_THROW(model.embed_inputs(tape, x), ShapeError);
}

TEST(AcousticEncodeTest, DownsampleLengths) {
  AcousticConfig cfg = tiny_acoustic_config(8, 8);
  const auto x = make_acoustic_input({{"a", 60, 40}});
  for (int f : {1, 2, 3}) {
    cfg.downsample_factor = f;
    AcousticModel model(cfg);
    nn::Tape tape(false);
    EXPECT_EQ(model.encode(tape, model.embed_inputs(tape, x)).rows(), (40 + f - 1) / f);
  }
}

TEST(AcousticEncodeTest, ShortInputIsPadded) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  nn::Tape tape(false);
  EXPECT_EQ(model.encode(tape, tape.constant(Matrix::Ones(1, model.config().input_dim())))
                .rows(),
            1);
}

TEST(AcousticEncodeTest, ConstantInputGivesIdenticalInteriorRows) {
  AcousticModel model(tiny_acoustic_config(8, 16));
  nn::Tape tape(false);
  const int t = 160;
  Matrix row = Matrix::Random(1, model.config().input_dim());
  const Matrix h = model.encode(tape, tape.constant(row.replicate(t, 1))).value();
  for (int i = 61; i < 100; ++i) {
    EXPECT_LT((h.row(i) - h.row(60)).cwiseAbs().maxCoeff(), 1e-5) << "row " << i;
  }
}

TEST(GmmAttentionTest, SingleMixturePeaksAtMean) {
  nn::ParameterStore store;
  nn::Rng rng(1);
  GmmAttention att(store, "att", 3, 1, 0.5, 1.0, rng);
  store.get("att.proj.weight").value.setZero();
  Matrix& bias = store.get("att.proj.bias").value;
  bias(0, 1) = std::log(std::expm1(1.0));  // delta = 1
  bias(0, 2) = std::log(std::expm1(0.5));  // sigma = 1
  nn::Tape tape(false);
  const Var memory = tape.constant(Matrix::Ones(11, 4));
  const GmmAttentionState state{tape.constant(Matrix::Constant(1, 1, 4.0))};
  const auto st = att.step(att.bind(tape), tape.constant(Matrix::Zero(1, 3)), state, memory);
  EXPECT_NEAR(st.kappa.scalar(), 5.0, 1e-12);
  EXPECT_NEAR(st.sigma.scalar(), 1.0, 1e-12);
  Index arg = 0;
  st.alpha.value().row(0).maxCoeff(&arg);
  EXPECT_EQ(arg, 5);
}

TEST(GmmAttentionTest, RandomQueriesStayNormalisedAndMonotone) {
  nn::ParameterStore store;
  nn::Rng rng(2);
  GmmAttention att(store, "att", 6, 5, 0.5, 2.0, rng);
  store.get("att.proj.weight").value *= 30.0;  // exercise large deltas
  nn::Tape tape(false);
  const Var memory = tape.constant(Matrix::Random(37, 4));
  const auto bound = att.bind(tape);
  GmmAttentionState state = att.initial_state(tape);
  for (int t = 0; t < 100; ++t) {
    const auto st = att.step(bound, tape.constant(Matrix::Random(1, 6) * 3.0), state, memory);
    EXPECT_NEAR(st.alpha.value().sum(), 1.0, 1e-5);
    EXPECT_GE(st.alpha.value().minCoeff(), 0.0);
    EXPECT_TRUE((st.kappa.value().array() >= state.kappa.value().array()).all());
    state.kappa = st.kappa;
  }
}

TEST(AcousticDecoderTest, StepCountAndTruncation) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  const auto x = make_acoustic_input({{"a", 60, 41}});
  const auto out = synthesize_mel(model, x, 1);
  EXPECT_EQ(model.decoder_steps(41), 21);
  EXPECT_EQ(model.decoder_steps(100), 50);
  EXPECT_EQ(out.trace.steps(), 21);
  EXPECT_EQ(out.mel.rows(), 41);
  EXPECT_EQ(out.mel.cols(), 8);
}

TEST(AcousticDecoderTest, HardAlignmentVariantUsesDiagonal) {
  AcousticConfig cfg = tiny_acoustic_config(8, 8);
  cfg.use_attention = false;
  AcousticModel model(cfg);
  const auto out = synthesize_mel(model, make_acoustic_input({{"a", 60, 9}}), 1);
  ASSERT_EQ(out.trace.steps(), 5);
  for (int t = 0; t < 5; ++t) {
    EXPECT_DOUBLE_EQ(out.trace.alpha(t, std::min(2 * t, 8)), 1.0);
    EXPECT_DOUBLE_EQ(out.trace.alpha.row(t).sum(), 1.0);
  }
  EXPECT_DOUBLE_EQ(out.trace.mean_diagonal_deviation(), 0.0);
  EXPECT_FALSE(model.parameters().contains("decoder.attention.proj.weight"));
}

TEST(AcousticDecoderTest, NonFiniteActivationsAbortWithStep) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  model.parameters().get("decoder.projection.bias").value(0, 0) =
      std::numeric_limits<double>::quiet_NaN();
  try {
    synthesize_mel(model, make_acoustic_input({{"a", 60, 6}}), 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.index(), 0);
  }
}

TEST(PostnetTest, ZeroInitIsIdentityForAnyLength) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  for (int t : {1, 7, 100}) {
    nn::Tape tape(false);
    const Var pre = tape.constant(Matrix::Random(t, 8));
    const Var residual = model.postnet(tape, pre);
    EXPECT_EQ(residual.rows(), t);
    EXPECT_EQ(residual.cols(), 8);
    const Matrix post = nn::add(pre, residual).value();
    EXPECT_TRUE(post == pre.value());
  }
}

TEST(PostnetTest, ResidualGradientMatchesFiniteDifferences) {
  AcousticModel model(tiny_acoustic_config(6, 8));
  nn::Rng rng(3);
  for (auto* p : model.parameters().all()) {
    if (p->name().rfind("postnet.", 0) == 0) p->value = nn::uniform_init(p->value.rows(), p->value.cols(), 0.5, rng);
  }
  const Matrix pre = Matrix::Random(7, 6);
  const Matrix probe = Matrix::Random(7, 6);
  nn::ParameterStore& store = model.parameters();
  auto errors = testing::check_gradients(store, [&](bool with_backward) {
    nn::Tape tape;
    const Var r = model.postnet(tape, tape.constant(pre));
    const Var loss = nn::sum(nn::mul(r, tape.constant(probe)));
    if (with_backward) tape.backward(loss);
    return loss.scalar();
  });
  for (const auto& e : errors) {
    if (e.name.rfind("postnet.", 0) == 0) {
      EXPECT_LT(e.rel_error, 1e-4) << e.name;
    }
  }
}

TEST(AcousticLossTest, Examples) {
  nn::Tape tape(false);
  const Matrix target = Matrix::Random(4, 80);
  const Var t = tape.constant(target);
  EXPECT_DOUBLE_EQ(acoustic_loss(t, t, t).scalar(), 0.0);
  const Var shifted = tape.constant((target.array() + 1.0).matrix());
  EXPECT_NEAR(acoustic_loss(shifted, t, t).scalar(), 1.0, 1e-12);
  EXPECT_THROW(acoustic_loss(tape.constant(Matrix::Zero(3, 80)), t, t), ShapeError);
}

TEST(AcousticLossTest, MatchesReferenceOnRandomTriples) {
  nn::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix pre = nn::uniform_init(6, 80, 3.0, rng);  // 2 x 3 x 80 flattened
    const Matrix post = nn::uniform_init(6, 80, 3.0, rng);
    const Matrix target = nn::uniform_init(6, 80, 3.0, rng);
    double a = 0.0, b = 0.0;
    for (Index i = 0; i < pre.rows(); ++i) {
      for (Index j = 0; j < pre.cols(); ++j) {
        a += (pre(i, j) - target(i, j)) * (pre(i, j) - target(i, j));
        b += (post(i, j) - target(i, j)) * (post(i, j) - target(i, j));
      }
    }
    const double reference = a / 480.0 + b / 480.0;
    nn::Tape tape(false);
    EXPECT_NEAR(acoustic_loss(tape.constant(pre), tape.constant(post), tape.constant(target))
                    .scalar(),
                reference, 1e-12);
  }
}

double full_path_max_error(AcousticConfig cfg) {
  AcousticModel model(cfg);
  nn::Rng init(4);
  // Give the zero-initialised post-net output layer weights so every
  // path carries gradient.
  model.parameters().get("postnet." + std::to_string(cfg.postnet_layers - 1) + ".weight").value =
      nn::uniform_init(cfg.postnet_kernel * cfg.postnet_channels, cfg.mel_dim, 0.3, init);
  // The go frame is zero, so zero pre-net biases would sit on the ReLU kink.
  for (std::size_t l = 0; l < cfg.decoder_prenet.size(); ++l) {
    model.parameters().get("decoder.prenet." + std::to_string(l) + ".bias").value.setConstant(0.2);
  }
  const auto x = make_acoustic_input({{"sh", 60, 2}, {"uai", 62, 4}});
  const Matrix target = testing::synthetic_mel(x, cfg.mel_dim);
  model.set_mel_stats(MelStats::fit({target}));
  const auto errors = testing::check_gradients(model.parameters(), [&](bool with_backward) {
    nn::Tape tape;
    nn::Rng rng(11);
    const DecoderOutput out = model.forward(tape, x, target, rng);
    const Var loss = acoustic_loss(out.pre_mel, out.post_mel, tape.constant(target));
    if (with_backward) tape.backward(loss);
    return loss.scalar();
  });
  double worst = 0.0;
  for (const auto& e : errors) {
    EXPECT_LT(e.rel_error, 1e-4) << e.name;
    worst = std::max(worst, e.rel_error);
  }
  return worst;
}

TEST(AcousticGradientTest, FullPathWithAttention) {
  full_path_max_error(tiny_acoustic_config(8, 8));
}

TEST(AcousticGradientTest, FullPathHardAlignmentWithTone) {
  AcousticConfig cfg = tiny_acoustic_config(8, 8);
  cfg.use_attention = false;
  cfg.use_tone = true;
  cfg.downsample_factor = 2;
  full_path_max_error(cfg);
}

TEST(AcousticTrainTest, TeacherForcedLossIsDeterministic) {
  AcousticModel model(tiny_acoustic_config(16, 8));
  const auto ex = testing::toy_acoustic_example(16);
  model.set_mel_stats(MelStats::fit({ex.mel}));
  EXPECT_EQ(evaluate_teacher_forced(model, ex, 3).loss, evaluate_teacher_forced(model, ex, 3).loss);
}

TEST(AcousticTrainTest, OverfitsOneUtterance) {
  AcousticConfig cfg = tiny_acoustic_config(kNumMels, 32);
  cfg.learning_rate = 3e-3;
  cfg.max_epochs = 300;
  cfg.batch_size = 1;
  AcousticModel model(cfg);
  const auto ex = testing::toy_acoustic_example(kNumMels);
  const auto result = train_acoustic(model, {ex});
  EXPECT_LT(result.final_pre_l2, 0.05);
  const auto score = evaluate_teacher_forced(model, ex, cfg.seed);
  EXPECT_LT(score.trace.mean_diagonal_deviation(), 3.0);
}

TEST(AcousticTrainTest, CheckpointRoundTrip) {
  AcousticModel model(tiny_acoustic_config(8, 8));
  const auto ex = testing::toy_acoustic_example(8);
  model.set_mel_stats(MelStats::fit({ex.mel}));
  const auto path = std::filesystem::temp_directory_path() / "bytesing_acoustic_test.bsck";
  model.save(path);
  const AcousticModel loaded = AcousticModel::load(path);
  const Matrix a = synthesize_mel(model, ex.input, 9).mel;
  const Matrix b = synthesize_mel(loaded, ex.input, 9).mel;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-3);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bytesing::acoustic
