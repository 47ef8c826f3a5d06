#ifndef BYTESING_NN_OPS_H_
#define BYTESING_NN_OPS_H_

#include <vector>

#include "bytesing/nn/autograd.h"

namespace bytesing::nn {

// Differentiable ops. Sequences are (time x channels); batched recurrent
// steps are (batch x channels).

Var matmul(const Var& a, const Var& b);
// b is either the same shape as a or a 1 x C row broadcast over a's rows.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);

Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var softplus(const Var& a);

// Inverted dropout: zeroes each element with probability `rate` and scales
// survivors by 1 / (1 - rate). The mask comes from `rng`.
Var dropout(const Var& a, double rate, Rng& rng);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Index begin, Index count);
Var slice_rows(const Var& a, Index begin, Index count);
// Row-major reinterpretation; rows * cols must equal a.size().
Var reshape(const Var& a, Index rows, Index cols);
// out[i] = a[rows[i]]; gradients scatter-add back.
Var gather_rows(const Var& a, const std::vector<int>& rows);

// 1-D convolution over time with symmetric zero padding ("same" length).
// x: T x Cin, w: (kernel * Cin) x Cout, b: 1 x Cout. Row block k of w
// multiplies x[t + k*dilation - pad_left].
Var conv1d(const Var& x, const Var& w, const Var& b, int kernel, int dilation = 1);
// Stride-1 max pooling over [t, t + width), clipped at the end; keeps T.
Var max_pool_time(const Var& x, int width);

Var sum(const Var& a);
Var mean(const Var& a);
// mean((a - b)^2) over all elements.
Var mse(const Var& a, const Var& b);
// Mean over rows of -log softmax(logits)[row, target[row]].
Var softmax_cross_entropy(const Var& logits, const std::vector<int>& targets);
Var softmax_rows(const Var& a);

// Fused GRU cell, gate order (r, z, n):
//   r = s(xp_r + hp_r), z = s(xp_z + hp_z), n = tanh(xp_n + r * hp_n)
//   h' = (1 - z) * n + z * h,   hp = h w_hh + b_hh
// xp already holds the input projection (plus any extra bias terms).
Var gru_cell(const Var& xp, const Var& h, const Var& w_hh, const Var& b_hh);

// Fused LSTM cell, gate order (i, f, g, o). Returns [h' | c'] (B x 2H).
Var lstm_cell(const Var& xp, const Var& h, const Var& c, const Var& w_hh,
              const Var& b_hh);

// Normalised Gaussian-mixture attention weights over positions 0..length-1.
// logits, kappa and sigma are 1 x M. The mixture density
//   sum_k softmax(logits)_k N(j; kappa_k, sigma_k^2)
// is renormalised over j (computed in the log domain), so each row sums to 1.
Var gmm_attention_weights(const Var& logits, const Var& kappa, const Var& sigma,
                          Index length);

}  // namespace bytesing::nn

#endif  // BYTESING_NN_OPS_H_
