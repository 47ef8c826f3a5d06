#ifndef BYTESING_ACOUSTIC_ATTENTION_H_
#define BYTESING_ACOUSTIC_ATTENTION_H_

#include <vector>

#include "bytesing/common/matrix.h"
#include "bytesing/nn/layers.h"

namespace bytesing::acoustic {

// One row per decoder step.
struct AttentionTrace {
  Matrix alpha;    // steps x memory length
  Matrix kappa;    // steps x mixtures (hard alignment: steps x 1 index)
  Matrix sigma;    // steps x mixtures
  Matrix weights;  // steps x mixtures
  int reduction = 1;
  int downsample = 1;

  Index steps() const { return alpha.rows(); }
  // sum_j j * alpha_t(j) per step.
  std::vector<double> centroids() const;
  // Mean |centroid_t - t * reduction / downsample| over steps.
  double mean_diagonal_deviation() const;
};

struct GmmAttentionState {
  nn::Var kappa;  // 1 x M
};

struct GmmAttentionStep {
  nn::Var context;  // 1 x memory dim
  nn::Var alpha;    // 1 x memory length
  nn::Var kappa;
  nn::Var sigma;
  nn::Var weights;  // softmax(w_hat)
};

// Normalised GMM attention. A linear layer on the query yields
// (w_hat, delta_hat, sigma_hat) per mixture:
//   kappa_t = kappa_{t-1} + softplus(delta_hat)
//   sigma_t = softplus(sigma_hat) + sigma_min
//   alpha_t(j) ∝ sum_k softmax(w_hat)_k N(j; kappa_k, sigma_k^2)
class GmmAttention {
 public:
  GmmAttention() = default;
  // `initial_step` sets the delta bias so the untrained means advance by
  // that many memory positions per step.
  GmmAttention(nn::ParameterStore& store, const std::string& name, Index query_dim,
               int mixtures, double sigma_min, double initial_step, nn::Rng& rng);

  // kappa_{-1} = -initial_step, so step t starts centred on t * initial_step.
  GmmAttentionState initial_state(nn::Tape& tape) const;

  struct Bound {
    nn::Linear::Bound proj;
  };
  Bound bind(nn::Tape& tape) const { return Bound{proj_.bind(tape)}; }

  GmmAttentionStep step(const Bound& bound, const nn::Var& query,
                        const GmmAttentionState& state, const nn::Var& memory) const;

  int mixtures() const { return mixtures_; }

 private:
  nn::Linear proj_;
  int mixtures_ = 1;
  double sigma_min_ = 0.5;
  double initial_step_ = 1.0;
};

}  // namespace bytesing::acoustic

#endif  // BYTESING_ACOUSTIC_ATTENTION_H_
