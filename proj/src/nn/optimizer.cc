#include "bytesing/nn/optimizer.h"

#include <cmath>

namespace bytesing::nn {

Adam::Adam(ParameterStore& store, AdamConfig config)
    : params_(store.all()), config_(config) {
  for (const Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

double global_grad_norm(const ParameterStore& store) {
  double sq = 0.0;
  for (const Parameter* p : store.all()) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

double Adam::step() {
  double sq = 0.0;
  for (const Parameter* p : params_) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  const double clip = (config_.clip_norm > 0.0 && norm > config_.clip_norm)
                          ? config_.clip_norm / norm
                          : 1.0;
  ++steps_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const double lr = config_.learning_rate * std::sqrt(bc2) / bc1;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    const Matrix g = p.grad * clip;
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseAbs2();
    p.value.array() -= lr * m_[i].array() / (v_[i].array().sqrt() + config_.epsilon);
    p.grad.setZero();
  }
  return norm;
}

}  // namespace bytesing::nn
