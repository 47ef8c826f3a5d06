#include "bytesing/nn/ops.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "bytesing/common/error.h"
#include "support/grad_check.h"

namespace bytesing::nn {
namespace {

using testing::check_gradients;
using testing::max_rel_error;

constexpr double kTol = 1e-5;

class OpsGradTest : public ::testing::Test {
 protected:
  Parameter& param(const std::string& name, Index rows, Index cols, double limit = 1.0) {
    return store_.add(name, uniform_init(rows, cols, limit, rng_));
  }

  // Reduces an arbitrary output to a scalar with fixed random weights so
  // every output element contributes a distinct gradient.
  Var project(Tape& tape, const Var& y) {
    auto it = probes_.find(y.rows() * 1000 + y.cols());
    if (it == probes_.end()) {
      it = probes_.emplace(y.rows() * 1000 + y.cols(),
                           uniform_init(y.rows(), y.cols(), 1.0, rng_)).first;
    }
    return sum(mul(y, tape.constant(it->second)));
  }

  double check(const std::function<Var(Tape&)>& build) {
    auto errors = check_gradients(store_, [&](bool with_backward) {
      Tape tape;
      Var loss = build(tape);
      if (with_backward) tape.backward(loss);
      return loss.scalar();
    });
    for (const auto& e : errors) {
      EXPECT_GT(e.analytic_norm, 0.0) << e.name << " received no gradient";
    }
    return max_rel_error(errors);
  }

  ParameterStore store_;
  Rng rng_{17};
  std::map<Index, Matrix> probes_;
};

TEST_F(OpsGradTest, MatmulAddBroadcast) {
  auto& a = param("a", 4, 3);
  auto& b = param("b", 3, 5);
  auto& c = param("c", 1, 5);
  EXPECT_LT(check([&](Tape& t) {
              return project(t, add(matmul(t.param(a), t.param(b)), t.param(c)));
            }),
            kTol);
}

TEST_F(OpsGradTest, ElementwiseChain) {
  auto& a = param("a", 3, 4);
  auto& b = param("b", 3, 4);
  EXPECT_LT(check([&](Tape& t) {
              Var x = t.param(a), y = t.param(b);
              Var z = mul(tanh(x), sigmoid(y));
              z = add(z, softplus(sub(x, y)));
              z = add_scalar(scale(z, 1.7), 0.3);
              return project(t, z);
            }),
            kTol);
}

TEST_F(OpsGradTest, Relu) {
  auto& a = param("a", 5, 5);
  // Keep entries away from the kink.
  for (Index i = 0; i < a.value.size(); ++i) {
    double& v = a.value.data()[i];
    if (std::abs(v) < 0.05) v = 0.3;
  }
  EXPECT_LT(check([&](Tape& t) { return project(t, relu(t.param(a))); }), kTol);
}

TEST_F(OpsGradTest, ConcatSliceReshapeGather) {
  auto& a = param("a", 4, 3);
  auto& b = param("b", 4, 2);
  auto& c = param("c", 2, 5);
  EXPECT_LT(check([&](Tape& t) {
              Var ab = concat_cols({t.param(a), t.param(b)});  // 4x5
              Var abc = concat_rows({ab, t.param(c)});           // 6x5
              Var s = slice_cols(slice_rows(abc, 1, 4), 1, 3);   // 4x3
              Var r = reshape(s, 2, 6);
              Var g = gather_rows(abc, {5, 0, 0, 3});
              return add(project(t, r), project(t, g));
            }),
            kTol);
}

TEST_F(OpsGradTest, Conv1dWithDilation) {
  auto& x = param("x", 9, 3);
  auto& w = param("w", 3 * 3, 4);
  auto& b = param("b", 1, 4);
  EXPECT_LT(check([&](Tape& t) {
              return project(t, conv1d(t.param(x), t.param(w), t.param(b), 3, 2));
            }),
            kTol);
}

TEST_F(OpsGradTest, Conv1dEvenKernel) {
  auto& x = param("x", 7, 2);
  auto& w = param("w", 4 * 2, 3);
  auto& b = param("b", 1, 3);
  EXPECT_LT(check([&](Tape& t) {
              return project(t, conv1d(t.param(x), t.param(w), t.param(b), 4, 1));
            }),
            kTol);
}

TEST_F(OpsGradTest, MaxPool) {
  auto& x = param("x", 8, 3);
  EXPECT_LT(check([&](Tape& t) { return project(t, max_pool_time(t.param(x), 2)); }),
            kTol);
}

TEST_F(OpsGradTest, Losses) {
  auto& a = param("a", 4, 6);
  auto& b = param("b", 4, 6);
  EXPECT_LT(check([&](Tape& t) {
              Var l1 = mse(t.param(a), t.param(b));
              Var l2 = softmax_cross_entropy(t.param(a), {0, 5, 2, 2});
              Var l3 = project(t, softmax_rows(t.param(b)));
              return add(add(l1, l2), add(l3, mean(t.param(a))));
            }),
            kTol);
}

TEST_F(OpsGradTest, GruCell) {
  const Index b = 2, in = 3, h = 4;
  auto& x = param("x", b, in);
  auto& w_ih = param("w_ih", in, 3 * h);
  auto& h0 = param("h0", b, h);
  auto& w_hh = param("w_hh", h, 3 * h);
  auto& b_hh = param("b_hh", 1, 3 * h);
  EXPECT_LT(check([&](Tape& t) {
              Var xp = matmul(t.param(x), t.param(w_ih));
              Var h1 = gru_cell(xp, t.param(h0), t.param(w_hh), t.param(b_hh));
              Var h2 = gru_cell(xp, h1, t.param(w_hh), t.param(b_hh));
              return project(t, h2);
            }),
            kTol);
}

TEST_F(OpsGradTest, LstmCell) {
  const Index b = 2, in = 3, h = 3;
  auto& x = param("x", b, in);
  auto& w_ih = param("w_ih", in, 4 * h);
  auto& h0 = param("h0", b, h);
  auto& c0 = param("c0", b, h);
  auto& w_hh = param("w_hh", h, 4 * h);
  auto& b_hh = param("b_hh", 1, 4 * h);
  EXPECT_LT(check([&](Tape& t) {
              Var xp = matmul(t.param(x), t.param(w_ih));
              Var hc = lstm_cell(xp, t.param(h0), t.param(c0), t.param(w_hh),
                                 t.param(b_hh));
              Var hc2 = lstm_cell(xp, slice_cols(hc, 0, h), slice_cols(hc, h, h),
                                  t.param(w_hh), t.param(b_hh));
              return project(t, hc2);
            }),
            kTol);
}

TEST_F(OpsGradTest, GmmAttention) {
  auto& logits = param("logits", 1, 3);
  auto& kappa = param("kappa", 1, 3);
  auto& sigma = param("sigma", 1, 3);
  kappa.value << 1.0, 3.5, 5.0;
  sigma.value << 0.8, 1.5, 2.0;
  EXPECT_LT(check([&](Tape& t) {
              return project(t, gmm_attention_weights(t.param(logits), t.param(kappa),
                                                      t.param(sigma), 7));
            }),
            kTol);
}

TEST(OpsValueTest, GmmWeightsMatchDirectFormula) {
  Tape tape(false);
  Matrix w(1, 2), k(1, 2), s(1, 2);
  w << 0.2, -0.4;
  k << 1.5, 4.0;
  s << 1.0, 0.7;
  const Matrix got =
      gmm_attention_weights(tape.constant(w), tape.constant(k), tape.constant(s), 6)
          .value();
  const double z = std::exp(0.2) + std::exp(-0.4);
  std::vector<double> dens(6);
  double total = 0.0;
  for (int j = 0; j < 6; ++j) {
    for (int m = 0; m < 2; ++m) {
      const double pi = std::exp(w(0, m)) / z;
      dens[j] += pi / (s(0, m) * std::sqrt(2 * M_PI)) *
                 std::exp(-(j - k(0, m)) * (j - k(0, m)) / (2 * s(0, m) * s(0, m)));
    }
    total += dens[j];
  }
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(got(0, j), dens[j] / total, 1e-12);
}

TEST(OpsValueTest, Conv1dMatchesDirectSum) {
  Tape tape(false);
  Rng rng(3);
  const Matrix x = uniform_init(6, 2, 1.0, rng);
  const Matrix w = uniform_init(3 * 2, 2, 1.0, rng);
  const Matrix b = uniform_init(1, 2, 1.0, rng);
  const Matrix y = conv1d(tape.constant(x), tape.constant(w), tape.constant(b), 3, 2).value();
  for (int t = 0; t < 6; ++t) {
    for (int o = 0; o < 2; ++o) {
      double acc = b(0, o);
      for (int k = 0; k < 3; ++k) {
        const int src = t + 2 * k - 2;
        if (src < 0 || src >= 6) continue;
        for (int c = 0; c < 2; ++c) acc += x(src, c) * w(k * 2 + c, o);
      }
      EXPECT_NEAR(y(t, o), acc, 1e-12);
    }
  }
}

TEST(OpsValueTest, SoftmaxCrossEntropyOfUniformIsLogK) {
  Tape tape(false);
  const Var l = softmax_cross_entropy(tape.constant(Matrix::Zero(3, 256)), {0, 7, 255});
  EXPECT_NEAR(l.scalar(), std::log(256.0), 1e-12);
}

TEST(OpsValueTest, ShapeMismatchThrows) {
  Tape tape(false);
  EXPECT_THROW(matmul(tape.constant(Matrix::Zero(2, 3)), tape.constant(Matrix::Zero(2, 3))),
               ShapeError);
  EXPECT_THROW(add(tape.constant(Matrix::Zero(2, 3)), tape.constant(Matrix::Zero(2, 2))),
               ShapeError);
}

}  // namespace
}  // namespace bytesing::nn
