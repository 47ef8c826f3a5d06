#include "bytesing/nn/ops.h"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "bytesing/common/error.h"

namespace bytesing::nn {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

double softplus_scalar(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
Matrix map(const Matrix& m, F f) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.size(); ++i) out.data()[i] = f(m.data()[i]);
  return out;
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()));
  }
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {a, b},
                  [ia, ib](Tape& t, const Matrix& g) {
                    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
                    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
                  });
}

Var add(const Var& a, const Var& b) {
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (bv.rows() == 1 && av.rows() != 1 && bv.cols() == av.cols()) {
    Matrix out = av.rowwise() + bv.row(0);
    return t.record(std::move(out), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
      t.accumulate(ia, g);
      if (t.needs_grad(ib)) t.grad(ib) += g.colwise().sum();
    });
  }
  require_same_shape(av, bv, "add");
  return t.record(av + bv, {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    if (t.needs_grad(ib)) t.grad(ib) -= g;
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {a, b},
                  [ia, ib](Tape& t, const Matrix& g) {
                    if (t.needs_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
                    if (t.needs_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
                  });
}

Var scale(const Var& a, double s) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value() * s, {a},
                  [ia, s](Tape& t, const Matrix& g) { t.accumulate(ia, g * s); });
}

Var add_scalar(const Var& a, double s) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().array() + s, {a},
                  [ia](Tape& t, const Matrix& g) { t.accumulate(ia, g); });
}

Var dropout(const Var& a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  if (rate >= 1.0) throw ShapeError("dropout rate must be below 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  const double scale_kept = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale_kept : 0.0;
  return mul(a, a.tape().constant(std::move(mask)));
}

Var tanh(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().array().tanh().matrix(), {a},
                  [ia](Tape& t, const Matrix& g) {
                    const auto y = t.value(ia).array().tanh();
                    t.grad(ia).array() += g.array() * (1.0 - y.square());
                  });
}

Var sigmoid(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  Matrix y = map(a.value(), sigmoid_scalar);
  return t.record(std::move(y), {a}, [ia](Tape& t, const Matrix& g) {
    const Matrix s = map(t.value(ia), sigmoid_scalar);
    t.grad(ia).array() += g.array() * s.array() * (1.0 - s.array());
  });
}

Var relu(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().cwiseMax(0.0), {a}, [ia](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    t.grad(ia).array() += (x.array() > 0.0).select(g.array(), 0.0);
  });
}

Var softplus(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(map(a.value(), softplus_scalar), {a}, [ia](Tape& t, const Matrix& g) {
    const Matrix s = map(t.value(ia), sigmoid_scalar);
    t.grad(ia).array() += g.array() * s.array();
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Tape& t = parts[0].tape();
  const Index rows = parts[0].rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> layout;
  Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    layout.emplace_back(p.id(), c);
    c += p.cols();
  }
  return t.record(std::move(out), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, offset] : layout) {
      if (t.needs_grad(id)) {
        Matrix& gi = t.grad(id);
        gi += g.middleCols(offset, gi.cols());
      }
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = parts[0].tape();
  const Index cols = parts[0].cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw ShapeError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Index>> layout;
  Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    layout.emplace_back(p.id(), r);
    r += p.rows();
  }
  return t.record(std::move(out), parts, [layout](Tape& t, const Matrix& g) {
    for (const auto& [id, offset] : layout) {
      if (t.needs_grad(id)) {
        Matrix& gi = t.grad(id);
        gi += g.middleRows(offset, gi.rows());
      }
    }
  });
}

Var slice_cols(const Var& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols()) {
    throw ShapeError("slice_cols: range out of bounds");
  }
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().middleCols(begin, count), {a},
                  [ia, begin, count](Tape& t, const Matrix& g) {
                    t.grad(ia).middleCols(begin, count) += g;
                  });
}

Var slice_rows(const Var& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw ShapeError("slice_rows: range out of bounds");
  }
  Tape& t = a.tape();
  const int ia = a.id();
  return t.record(a.value().middleRows(begin, count), {a},
                  [ia, begin, count](Tape& t, const Matrix& g) {
                    t.grad(ia).middleRows(begin, count) += g;
                  });
}

Var reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.value().size()) throw ShapeError("reshape: size mismatch");
  Tape& t = a.tape();
  const int ia = a.id();
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return t.record(std::move(out), {a}, [ia](Tape& t, const Matrix& g) {
    Matrix& gi = t.grad(ia);
    Eigen::Map<Matrix>(gi.data(), g.rows(), g.cols()) += g;
  });
}

Var gather_rows(const Var& a, const std::vector<int>& rows) {
  Tape& t = a.tape();
  const Matrix& av = a.value();
  Matrix out(static_cast<Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(rows[i]) +
                       " out of range " + std::to_string(av.rows()));
    }
    out.row(static_cast<Index>(i)) = av.row(rows[i]);
  }
  const int ia = a.id();
  return t.record(std::move(out), {a}, [ia, rows](Tape& t, const Matrix& g) {
    Matrix& gi = t.grad(ia);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      gi.row(rows[i]) += g.row(static_cast<Index>(i));
    }
  });
}

namespace {

// Fills cols (T x kernel*Cin) with the zero-padded, dilated input windows.
Matrix im2col(const Matrix& x, int kernel, int dilation) {
  const Index steps = x.rows();
  const Index cin = x.cols();
  const int pad_left = dilation * (kernel - 1) / 2;
  Matrix cols = Matrix::Zero(steps, kernel * cin);
  for (Index s = 0; s < steps; ++s) {
    for (int k = 0; k < kernel; ++k) {
      const Index src = s + k * dilation - pad_left;
      if (src >= 0 && src < steps) cols.block(s, k * cin, 1, cin) = x.row(src);
    }
  }
  return cols;
}

}  // namespace

Var conv1d(const Var& x, const Var& w, const Var& b, int kernel, int dilation) {
  const Index cin = x.cols();
  if (kernel < 1 || dilation < 1) throw ShapeError("conv1d: bad kernel/dilation");
  if (w.rows() != kernel * cin) {
    throw ShapeError("conv1d: weight rows " + std::to_string(w.rows()) +
                     " != kernel*Cin " + std::to_string(kernel * cin));
  }
  if (b.rows() != 1 || b.cols() != w.cols()) throw ShapeError("conv1d: bad bias");
  Tape& t = x.tape();
  Matrix cols = im2col(x.value(), kernel, dilation);
  Matrix out = cols * w.value();
  out.rowwise() += b.value().row(0);
  const int ix = x.id(), iw = w.id(), ib = b.id();
  return t.record(std::move(out), {x, w, b},
                  [ix, iw, ib, kernel, dilation](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(ix);
    if (t.needs_grad(iw)) {
      t.grad(iw).noalias() += im2col(xv, kernel, dilation).transpose() * g;
    }
    if (t.needs_grad(ib)) t.grad(ib) += g.colwise().sum();
    if (t.needs_grad(ix)) {
      const Matrix dcols = g * t.value(iw).transpose();
      Matrix& gx = t.grad(ix);
      const Index steps = xv.rows();
      const Index cin = xv.cols();
      const int pad_left = dilation * (kernel - 1) / 2;
      for (Index s = 0; s < steps; ++s) {
        for (int k = 0; k < kernel; ++k) {
          const Index src = s + k * dilation - pad_left;
          if (src >= 0 && src < steps) gx.row(src) += dcols.block(s, k * cin, 1, cin);
        }
      }
    }
  });
}

Var max_pool_time(const Var& x, int width) {
  if (width < 1) throw ShapeError("max_pool_time: width must be >= 1");
  Tape& t = x.tape();
  const Matrix& xv = x.value();
  const Index steps = xv.rows();
  Matrix out(steps, xv.cols());
  auto argmax = std::make_shared<std::vector<Index>>(xv.size());
  for (Index s = 0; s < steps; ++s) {
    for (Index c = 0; c < xv.cols(); ++c) {
      Index best = s;
      for (Index j = s + 1; j < std::min(steps, s + width); ++j) {
        if (xv(j, c) > xv(best, c)) best = j;
      }
      out(s, c) = xv(best, c);
      (*argmax)[s * xv.cols() + c] = best;
    }
  }
  const int ix = x.id();
  return t.record(std::move(out), {x}, [ix, argmax](Tape& t, const Matrix& g) {
    Matrix& gx = t.grad(ix);
    for (Index s = 0; s < g.rows(); ++s) {
      for (Index c = 0; c < g.cols(); ++c) {
        gx((*argmax)[s * g.cols() + c], c) += g(s, c);
      }
    }
  });
}

Var sum(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return t.record(std::move(out), {a}, [ia](Tape& t, const Matrix& g) {
    t.grad(ia).array() += g(0, 0);
  });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var mse(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mse");
  Tape& t = a.tape();
  const int ia = a.id(), ib = b.id();
  const double n = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = (a.value() - b.value()).squaredNorm() / n;
  return t.record(std::move(out), {a, b}, [ia, ib, n](Tape& t, const Matrix& g) {
    const Matrix d = (t.value(ia) - t.value(ib)) * (2.0 * g(0, 0) / n);
    t.accumulate(ia, d);
    if (t.needs_grad(ib)) t.grad(ib) -= d;
  });
}

namespace {

Matrix softmax_matrix(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    p.row(r) = (logits.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

}  // namespace

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& targets) {
  const Matrix& z = logits.value();
  if (static_cast<Index>(targets.size()) != z.rows()) {
    throw ShapeError("softmax_cross_entropy: target count mismatch");
  }
  Tape& t = logits.tape();
  double loss = 0.0;
  for (Index r = 0; r < z.rows(); ++r) {
    const int k = targets[static_cast<std::size_t>(r)];
    if (k < 0 || k >= z.cols()) throw ShapeError("softmax_cross_entropy: bad target");
    const double m = z.row(r).maxCoeff();
    const double lse = m + std::log((z.row(r).array() - m).exp().sum());
    loss += lse - z(r, k);
  }
  const double rows = static_cast<double>(z.rows());
  Matrix out(1, 1);
  out(0, 0) = loss / rows;
  const int il = logits.id();
  return t.record(std::move(out), {logits},
                  [il, targets, rows](Tape& t, const Matrix& g) {
    Matrix p = softmax_matrix(t.value(il));
    for (Index r = 0; r < p.rows(); ++r) p(r, targets[static_cast<std::size_t>(r)]) -= 1.0;
    t.grad(il) += p * (g(0, 0) / rows);
  });
}

Var softmax_rows(const Var& a) {
  Tape& t = a.tape();
  const int ia = a.id();
  Matrix p = softmax_matrix(a.value());
  auto probs = std::make_shared<Matrix>(p);
  return t.record(std::move(p), {a}, [ia, probs](Tape& t, const Matrix& g) {
    const Matrix& y = *probs;
    Matrix d = y.cwiseProduct(g);
    for (Index r = 0; r < y.rows(); ++r) {
      d.row(r) -= y.row(r) * d.row(r).sum();
    }
    t.grad(ia) += d;
  });
}

Var gru_cell(const Var& xp, const Var& h, const Var& w_hh, const Var& b_hh) {
  const Matrix& hv = h.value();
  const Index hidden = hv.cols();
  if (xp.cols() != 3 * hidden || w_hh.rows() != hidden || w_hh.cols() != 3 * hidden ||
      xp.rows() != hv.rows()) {
    throw ShapeError("gru_cell: inconsistent shapes");
  }
  struct Cache {
    Matrix r, z, n, hp_n;
  };
  auto cache = std::make_shared<Cache>();
  Matrix hp = hv * w_hh.value();
  hp.rowwise() += b_hh.value().row(0);
  const Matrix& x = xp.value();
  cache->r = map(x.leftCols(hidden) + hp.leftCols(hidden), sigmoid_scalar);
  cache->z = map(x.middleCols(hidden, hidden) + hp.middleCols(hidden, hidden),
                 sigmoid_scalar);
  cache->hp_n = hp.rightCols(hidden);
  cache->n = (x.rightCols(hidden) + cache->r.cwiseProduct(cache->hp_n)).array().tanh();
  Matrix out = (1.0 - cache->z.array()) * cache->n.array() + cache->z.array() * hv.array();

  Tape& t = xp.tape();
  const int ix = xp.id(), ih = h.id(), iw = w_hh.id(), ib = b_hh.id();
  return t.record(std::move(out), {xp, h, w_hh, b_hh},
                  [ix, ih, iw, ib, hidden, cache](Tape& t, const Matrix& g) {
    const Cache& c = *cache;
    const Matrix& hv = t.value(ih);
    const Index batch = g.rows();
    const Matrix dn_pre =
        (g.array() * (1.0 - c.z.array()) * (1.0 - c.n.array().square())).matrix();
    const Matrix dz_pre = (g.array() * (hv.array() - c.n.array()) * c.z.array() *
                           (1.0 - c.z.array())).matrix();
    const Matrix dr_pre = (dn_pre.array() * c.hp_n.array() * c.r.array() *
                           (1.0 - c.r.array())).matrix();
    Matrix dhp(batch, 3 * hidden);
    dhp.leftCols(hidden) = dr_pre;
    dhp.middleCols(hidden, hidden) = dz_pre;
    dhp.rightCols(hidden) = dn_pre.cwiseProduct(c.r);
    if (t.needs_grad(ix)) {
      Matrix& gx = t.grad(ix);
      gx.leftCols(hidden) += dr_pre;
      gx.middleCols(hidden, hidden) += dz_pre;
      gx.rightCols(hidden) += dn_pre;
    }
    if (t.needs_grad(iw)) t.grad(iw).noalias() += hv.transpose() * dhp;
    if (t.needs_grad(ib)) t.grad(ib) += dhp.colwise().sum();
    if (t.needs_grad(ih)) {
      Matrix& gh = t.grad(ih);
      gh += g.cwiseProduct(c.z);
      gh.noalias() += dhp * t.value(iw).transpose();
    }
  });
}

Var lstm_cell(const Var& xp, const Var& h, const Var& c, const Var& w_hh,
              const Var& b_hh) {
  const Matrix& hv = h.value();
  const Index hidden = hv.cols();
  if (xp.cols() != 4 * hidden || c.cols() != hidden || w_hh.rows() != hidden ||
      w_hh.cols() != 4 * hidden || xp.rows() != hv.rows()) {
    throw ShapeError("lstm_cell: inconsistent shapes");
  }
  struct Cache {
    Matrix i, f, gg, o, tanh_c;
  };
  auto cache = std::make_shared<Cache>();
  Matrix pre = xp.value() + hv * w_hh.value();
  pre.rowwise() += b_hh.value().row(0);
  cache->i = map(pre.leftCols(hidden), sigmoid_scalar);
  cache->f = map(pre.middleCols(hidden, hidden), sigmoid_scalar);
  cache->gg = pre.middleCols(2 * hidden, hidden).array().tanh();
  cache->o = map(pre.rightCols(hidden), sigmoid_scalar);
  const Matrix c_new =
      cache->f.cwiseProduct(c.value()) + cache->i.cwiseProduct(cache->gg);
  cache->tanh_c = c_new.array().tanh();
  Matrix out(hv.rows(), 2 * hidden);
  out.leftCols(hidden) = cache->o.cwiseProduct(cache->tanh_c);
  out.rightCols(hidden) = c_new;

  Tape& t = xp.tape();
  const int ix = xp.id(), ih = h.id(), ic = c.id(), iw = w_hh.id(), ib = b_hh.id();
  return t.record(std::move(out), {xp, h, c, w_hh, b_hh},
                  [ix, ih, ic, iw, ib, hidden, cache](Tape& t, const Matrix& g) {
    const Cache& k = *cache;
    const Matrix dh = g.leftCols(hidden);
    const Matrix dc = g.rightCols(hidden) +
                      (dh.array() * k.o.array() * (1.0 - k.tanh_c.array().square()))
                          .matrix();
    Matrix dpre(g.rows(), 4 * hidden);
    dpre.leftCols(hidden) =
        (dc.array() * k.gg.array() * k.i.array() * (1.0 - k.i.array())).matrix();
    dpre.middleCols(hidden, hidden) =
        (dc.array() * t.value(ic).array() * k.f.array() * (1.0 - k.f.array())).matrix();
    dpre.middleCols(2 * hidden, hidden) =
        (dc.array() * k.i.array() * (1.0 - k.gg.array().square())).matrix();
    dpre.rightCols(hidden) = (dh.array() * k.tanh_c.array() * k.o.array() *
                              (1.0 - k.o.array())).matrix();
    t.accumulate(ix, dpre);
    if (t.needs_grad(ic)) t.grad(ic) += dc.cwiseProduct(k.f);
    if (t.needs_grad(iw)) t.grad(iw).noalias() += t.value(ih).transpose() * dpre;
    if (t.needs_grad(ib)) t.grad(ib) += dpre.colwise().sum();
    if (t.needs_grad(ih)) t.grad(ih).noalias() += dpre * t.value(iw).transpose();
  });
}

Var gmm_attention_weights(const Var& logits, const Var& kappa, const Var& sigma,
                          Index length) {
  const Index mixtures = logits.cols();
  if (logits.rows() != 1 || kappa.rows() != 1 || sigma.rows() != 1 ||
      kappa.cols() != mixtures || sigma.cols() != mixtures || length < 1) {
    throw ShapeError("gmm_attention_weights: expects 1 x M inputs and length >= 1");
  }
  const RowVector lw = [&] {
    const RowVector& z = logits.value().row(0);
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    return RowVector(z.array() - lse);
  }();
  const RowVector& mu = kappa.value().row(0);
  const RowVector& sd = sigma.value().row(0);
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);

  // a(j, k): log of mixture component k's weighted density at position j.
  auto components = std::make_shared<Matrix>(length, mixtures);
  Matrix& a = *components;
  for (Index j = 0; j < length; ++j) {
    for (Index k = 0; k < mixtures; ++k) {
      const double d = (static_cast<double>(j) - mu(k)) / sd(k);
      a(j, k) = lw(k) - std::log(sd(k)) - half_log_2pi - 0.5 * d * d;
    }
  }
  RowVector log_density(length);
  for (Index j = 0; j < length; ++j) {
    const double m = a.row(j).maxCoeff();
    log_density(j) = m + std::log((a.row(j).array() - m).exp().sum());
  }
  const double m = log_density.maxCoeff();
  Matrix alpha(1, length);
  alpha.row(0) = (log_density.array() - m).exp();
  alpha /= alpha.sum();

  Tape& t = logits.tape();
  const int il = logits.id(), ik = kappa.id(), is = sigma.id();
  auto alpha_keep = std::make_shared<RowVector>(alpha.row(0));
  auto log_density_keep = std::make_shared<RowVector>(log_density);
  return t.record(std::move(alpha), {logits, kappa, sigma},
                  [il, ik, is, components, alpha_keep, log_density_keep](
                      Tape& t, const Matrix& g) {
    const Matrix& a = *components;
    const RowVector& al = *alpha_keep;
    const Index length = a.rows();
    const Index mixtures = a.cols();
    const RowVector& mu = t.value(ik).row(0);
    const RowVector& sd = t.value(is).row(0);
    const double dot = al.dot(g.row(0));
    RowVector d_lw = RowVector::Zero(mixtures);
    RowVector d_mu = RowVector::Zero(mixtures);
    RowVector d_sd = RowVector::Zero(mixtures);
    for (Index j = 0; j < length; ++j) {
      const double dz = al(j) * (g(0, j) - dot);
      if (dz == 0.0) continue;
      for (Index k = 0; k < mixtures; ++k) {
        const double da = dz * std::exp(a(j, k) - (*log_density_keep)(j));
        const double diff = static_cast<double>(j) - mu(k);
        const double inv_var = 1.0 / (sd(k) * sd(k));
        d_lw(k) += da;
        d_mu(k) += da * diff * inv_var;
        d_sd(k) += da * (-1.0 / sd(k) + diff * diff * inv_var / sd(k));
      }
    }
    if (t.needs_grad(il)) {
      const RowVector& z = t.value(il).row(0);
      const double zm = z.maxCoeff();
      RowVector w = (z.array() - zm).exp();
      w /= w.sum();
      t.grad(il).row(0) += d_lw - w * d_lw.sum();
    }
    if (t.needs_grad(ik)) t.grad(ik).row(0) += d_mu;
    if (t.needs_grad(is)) t.grad(is).row(0) += d_sd;
  });
}

}  // namespace bytesing::nn
