#include "bytesing/nn/autograd.h"

#include <cmath>

#include "bytesing/common/error.h"

namespace bytesing::nn {

Parameter::Parameter(std::string name, Matrix init)
    : value(std::move(init)), name_(std::move(name)) {
  grad = Matrix::Zero(value.rows(), value.cols());
}

Parameter& ParameterStore::add(const std::string& name, Matrix init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw LookupError("no parameter named '" + name + "'");
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

bool ParameterStore::contains(const std::string& name) const {
  return index_.count(name) != 0;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

std::size_t ParameterStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(Parameter& p) {
  Node n;
  n.param = &p;
  n.needs_grad = record_;
  return push(std::move(n));
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs,
                 Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& v : inputs) {
      if (nodes_[v.id()].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
    if (n.needs_grad) n.backward = std::move(backward);
  }
  return push(std::move(n));
}

Var Tape::record(Matrix value, const std::vector<Var>& inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& v : inputs) {
      if (nodes_[v.id()].needs_grad) {
        n.needs_grad = true;
        break;
      }
    }
    if (n.needs_grad) n.backward = std::move(backward);
  }
  return push(std::move(n));
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::accumulate(int id, const Matrix& g) {
  if (!nodes_[id].needs_grad) return;
  grad(id) += g;
}

void Tape::backward(const Var& loss) {
  if (!record_) throw ConfigError("backward() on a non-recording tape");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ShapeError("backward() needs a scalar loss");
  }
  grad(loss.id())(0, 0) += 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.param) {
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

Matrix uniform_init(Index rows, Index cols, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix glorot_init(Index rows, Index cols, Rng& rng) {
  return uniform_init(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)),
                      rng);
}

}  // namespace bytesing::nn
