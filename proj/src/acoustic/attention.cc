#include "bytesing/acoustic/attention.h"

#include <cmath>

#include "bytesing/common/error.h"

namespace bytesing::acoustic {

using nn::Var;

std::vector<double> AttentionTrace::centroids() const {
  std::vector<double> out(static_cast<std::size_t>(alpha.rows()));
  for (Index t = 0; t < alpha.rows(); ++t) {
    double c = 0.0;
    for (Index j = 0; j < alpha.cols(); ++j) c += static_cast<double>(j) * alpha(t, j);
    out[static_cast<std::size_t>(t)] = c;
  }
  return out;
}

double AttentionTrace::mean_diagonal_deviation() const {
  const auto c = centroids();
  if (c.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t t = 0; t < c.size(); ++t) {
    total += std::abs(c[t] - static_cast<double>(t) * reduction / downsample);
  }
  return total / static_cast<double>(c.size());
}

namespace {

// Inverse of softplus for y > 0.
double softplus_inverse(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

}  // namespace

GmmAttention::GmmAttention(nn::ParameterStore& store, const std::string& name,
                           Index query_dim, int mixtures, double sigma_min,
                           double initial_step, nn::Rng& rng)
    : proj_(store, name + ".proj", query_dim, 3 * mixtures, rng),
      mixtures_(mixtures),
      sigma_min_(sigma_min),
      initial_step_(initial_step) {
  if (mixtures < 1) throw ConfigError("attention needs at least one mixture");
  if (!(initial_step > 0.0)) throw ConfigError("attention step must be positive");
  // Small weights so the untrained means follow the bias.
  proj_.weight().value *= 0.1;
  auto bias = proj_.bias().value.row(0);
  bias.segment(mixtures, mixtures).setConstant(softplus_inverse(initial_step));
  bias.segment(2 * mixtures, mixtures).setConstant(softplus_inverse(1.0));
}

GmmAttentionState GmmAttention::initial_state(nn::Tape& tape) const {
  return GmmAttentionState{tape.constant(Matrix::Constant(1, mixtures_, -initial_step_))};
}

GmmAttentionStep GmmAttention::step(const Bound& bound, const Var& query,
                                    const GmmAttentionState& state,
                                    const Var& memory) const {
  if (memory.rows() < 1) throw ShapeError("attention memory is empty");
  const Var params = nn::Linear::apply(bound.proj, query);
  const Var w_hat = nn::slice_cols(params, 0, mixtures_);
  const Var delta = nn::softplus(nn::slice_cols(params, mixtures_, mixtures_));
  const Var sigma =
      nn::add_scalar(nn::softplus(nn::slice_cols(params, 2 * mixtures_, mixtures_)),
                     sigma_min_);
  GmmAttentionStep out;
  out.kappa = nn::add(state.kappa, delta);
  out.sigma = sigma;
  out.weights = nn::softmax_rows(w_hat);
  out.alpha = nn::gmm_attention_weights(w_hat, out.kappa, sigma, memory.rows());
  out.context = nn::matmul(out.alpha, memory);
  return out;
}

}  // namespace bytesing::acoustic
