#include "bytesing/acoustic/model.h"

#include <cmath>

#include "bytesing/common/error.h"
#include "bytesing/frontend/phoneme_set.h"
#include "bytesing/frontend/pitch.h"
#include "bytesing/nn/checkpoint.h"

namespace bytesing::acoustic {

using nn::Tape;
using nn::Var;

MelStats MelStats::identity(int mel_dim) {
  return MelStats{RowVector::Zero(mel_dim), RowVector::Ones(mel_dim)};
}

MelStats MelStats::fit(const std::vector<Matrix>& mels) {
  if (mels.empty()) throw ValidationError("no mel spectrograms to fit statistics on");
  const Index dim = mels.front().cols();
  RowVector sum = RowVector::Zero(dim);
  RowVector sum_sq = RowVector::Zero(dim);
  double n = 0.0;
  for (const Matrix& m : mels) {
    if (m.cols() != dim) throw ShapeError("mel spectrograms disagree on bin count");
    sum += m.colwise().sum();
    sum_sq += m.array().square().matrix().colwise().sum();
    n += static_cast<double>(m.rows());
  }
  MelStats s;
  s.mean = sum / n;
  const RowVector var = sum_sq / n - s.mean.cwiseProduct(s.mean);
  s.stddev = var.unaryExpr([](double v) { return v > 1e-6 ? std::sqrt(v) : 1.0; });
  return s;
}

AcousticModel::AcousticModel(const AcousticConfig& config)
    : config_(config), mel_stats_(MelStats::identity(config.mel_dim)) {
  config_.validate();
  const AcousticConfig& c = config_;
  nn::Rng rng(c.seed);

  ph_embed_ = nn::Embedding(store_, "embed.ph", frontend::num_phonemes(), c.ph_embed_dim, rng);
  pi_embed_ = nn::Embedding(store_, "embed.pi", frontend::kNumPitchTokens, c.pi_embed_dim, rng);
  if (c.use_tone) tone_embed_ = nn::Embedding(store_, "embed.tone", 5, c.tone_embed_dim, rng);

  Index in = c.input_dim();
  for (std::size_t l = 0; l < c.prenet_kernels.size(); ++l) {
    prenet_.emplace_back(store_, "prenet." + std::to_string(l), in, c.prenet_channels,
                         c.prenet_kernels[l], 1, rng);
    in = c.prenet_channels;
  }
  for (int k = 1; k <= c.cbhg_bank_size; ++k) {
    bank_.emplace_back(store_, "cbhg.bank." + std::to_string(k), c.prenet_channels,
                       c.cbhg_bank_channels, k, 1, rng);
  }
  proj1_ = nn::Conv1d(store_, "cbhg.proj1", c.cbhg_bank_size * c.cbhg_bank_channels,
                      c.prenet_channels, 3, 1, rng);
  proj2_ = nn::Conv1d(store_, "cbhg.proj2", c.prenet_channels, c.prenet_channels, 3, 1, rng);
  highway_in_ = nn::Linear(store_, "cbhg.highway_in", c.prenet_channels, c.cbhg_highway_size, rng);
  for (int l = 0; l < c.cbhg_highway_layers; ++l) {
    highways_.emplace_back(store_, "cbhg.highway." + std::to_string(l), c.cbhg_highway_size, rng);
  }
  gru_fwd_ = nn::Gru(store_, "cbhg.gru.fwd", c.cbhg_highway_size, c.cbhg_gru_size, rng);
  gru_bwd_ = nn::Gru(store_, "cbhg.gru.bwd", c.cbhg_highway_size, c.cbhg_gru_size, rng);

  in = c.reduction * c.mel_dim;
  for (std::size_t l = 0; l < c.decoder_prenet.size(); ++l) {
    dec_prenet_.emplace_back(store_, "decoder.prenet." + std::to_string(l), in,
                             c.decoder_prenet[l], rng);
    in = c.decoder_prenet[l];
  }
  const Index mem = c.memory_dim();
  attention_rnn_ = nn::Gru(store_, "decoder.attention_rnn", in + mem, c.attention_rnn_size, rng);
  if (c.use_attention) {
    attention_ = GmmAttention(store_, "decoder.attention", c.attention_rnn_size,
                              c.num_mixtures, c.sigma_min,
                              static_cast<double>(c.reduction) / c.downsample_factor, rng);
  }
  decoder_rnn_ = nn::Gru(store_, "decoder.decoder_rnn", c.attention_rnn_size + mem,
                         c.decoder_rnn_size, rng);
  projection_ = nn::Linear(store_, "decoder.projection", c.decoder_rnn_size + mem,
                           c.reduction * c.mel_dim, rng);

  in = c.mel_dim;
  for (int l = 0; l < c.postnet_layers; ++l) {
    const Index out = l + 1 == c.postnet_layers ? c.mel_dim : c.postnet_channels;
    postnet_.emplace_back(store_, "postnet." + std::to_string(l), in, out, c.postnet_kernel,
                          1, rng);
    in = out;
  }
  // Initial residual is exactly zero.
  postnet_.back().weight().value.setZero();
  postnet_.back().bias().value.setZero();
}

void AcousticModel::set_mel_stats(const MelStats& stats) {
  if (stats.mean.size() != config_.mel_dim || stats.stddev.size() != config_.mel_dim) {
    throw ShapeError("mel statistics do not match mel_dim");
  }
  mel_stats_ = stats;
}

int AcousticModel::decoder_steps(int num_frames) const {
  return (num_frames + config_.reduction - 1) / config_.reduction;
}

Var AcousticModel::embed_inputs(Tape& tape, const frontend::AcousticInput& x) const {
  const auto t = static_cast<Index>(x.ph_ids.size());
  if (t == 0) throw ValidationError("acoustic input is empty");
  if (static_cast<Index>(x.pi_ids.size()) != t || x.po.rows() != t || x.po.cols() != 3 ||
      static_cast<Index>(x.tone_ids.size()) != t) {
    throw ShapeError("acoustic input streams disagree on length");
  }
  std::vector<Var> parts = {ph_embed_(tape, x.ph_ids), pi_embed_(tape, x.pi_ids),
                            tape.constant(x.po)};
  if (config_.use_tone) parts.push_back(tone_embed_(tape, x.tone_ids));
  return nn::concat_cols(parts);
}

Var AcousticModel::encode(Tape& tape, const Var& frames) const {
  if (frames.rows() < 1) throw ValidationError("encoder input is empty");
  Var h = frames;
  for (std::size_t l = 0; l < prenet_.size(); ++l) {
    const Var y = nn::relu(prenet_[l](tape, h));
    h = l == 0 ? y : nn::add(h, y);
  }
  std::vector<Var> bank;
  bank.reserve(bank_.size());
  for (const auto& conv : bank_) bank.push_back(nn::relu(conv(tape, h)));
  Var y = nn::max_pool_time(nn::concat_cols(bank), 2);
  y = nn::relu(proj1_(tape, y));
  y = nn::add(proj2_(tape, y), h);
  y = highway_in_(tape, y);
  for (const auto& hw : highways_) y = hw(tape, y);
  Var memory = nn::concat_cols({gru_fwd_.run(tape, y, false), gru_bwd_.run(tape, y, true)});
  const int f = config_.downsample_factor;
  if (f > 1) {
    std::vector<int> rows;
    for (Index r = 0; r < memory.rows(); r += f) rows.push_back(static_cast<int>(r));
    memory = nn::gather_rows(memory, rows);
  }
  return memory;
}

Var AcousticModel::postnet(Tape& tape, const Var& pre_mel) const {
  const Index t = pre_mel.rows();
  Matrix inv_std = mel_stats_.stddev.cwiseInverse().replicate(t, 1);
  Var h = nn::mul(nn::add(pre_mel, tape.constant(Matrix(-mel_stats_.mean))),
                  tape.constant(std::move(inv_std)));
  for (std::size_t l = 0; l < postnet_.size(); ++l) {
    h = postnet_[l](tape, h);
    if (l + 1 < postnet_.size()) h = nn::tanh(h);
  }
  return nn::mul(h, tape.constant(mel_stats_.stddev.replicate(t, 1)));
}

struct AcousticModel::DecoderBound {
  std::vector<nn::Linear::Bound> prenet;
  nn::Gru::Bound attention_rnn;
  GmmAttention::Bound attention;
  nn::Gru::Bound decoder_rnn;
  nn::Linear::Bound projection;
};

DecoderOutput AcousticModel::decode(Tape& tape, const Var& memory, int num_frames,
                                    const Matrix* teacher, nn::Rng& rng) const {
  const AcousticConfig& c = config_;
  const int r = c.reduction;
  const int steps = decoder_steps(num_frames);
  const Index mem_len = memory.rows();

  DecoderBound b;
  for (const auto& layer : dec_prenet_) b.prenet.push_back(layer.bind(tape));
  b.attention_rnn = attention_rnn_.bind(tape);
  if (c.use_attention) b.attention = attention_.bind(tape);
  b.decoder_rnn = decoder_rnn_.bind(tape);
  b.projection = projection_.bind(tape);

  // Teacher frames in normalised units.
  Matrix teacher_norm;
  if (teacher != nullptr) {
    teacher_norm = (teacher->rowwise() - mel_stats_.mean).array().rowwise() /
                   mel_stats_.stddev.array();
  }

  Var h_att = tape.constant(Matrix::Zero(1, c.attention_rnn_size));
  Var h_dec = tape.constant(Matrix::Zero(1, c.decoder_rnn_size));
  Var context = tape.constant(Matrix::Zero(1, c.memory_dim()));
  GmmAttentionState att_state;
  if (c.use_attention) att_state = attention_.initial_state(tape);
  Var prev = tape.constant(Matrix::Zero(1, r * c.mel_dim));

  DecoderOutput out;
  AttentionTrace& trace = out.trace;
  trace.reduction = r;
  trace.downsample = c.downsample_factor;
  const int mix = c.use_attention ? c.num_mixtures : 1;
  trace.alpha = Matrix::Zero(steps, mem_len);
  trace.kappa = Matrix::Zero(steps, mix);
  trace.sigma = Matrix::Zero(steps, mix);
  trace.weights = Matrix::Zero(steps, mix);

  std::vector<Var> frames;
  frames.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    if (teacher != nullptr && t > 0) {
      Matrix flat(1, r * c.mel_dim);
      for (int k = 0; k < r; ++k) {
        flat.block(0, k * c.mel_dim, 1, c.mel_dim) = teacher_norm.row((t - 1) * r + k);
      }
      prev = tape.constant(std::move(flat));
    }
    Var p = prev;
    for (const auto& layer : b.prenet) {
      p = nn::dropout(nn::relu(nn::Linear::apply(layer, p)), c.prenet_dropout, rng);
    }
    h_att = nn::Gru::step(b.attention_rnn, nn::concat_cols({p, context}), h_att);

    if (c.use_attention) {
      const GmmAttentionStep st = attention_.step(b.attention, h_att, att_state, memory);
      att_state.kappa = st.kappa;
      context = st.context;
      trace.alpha.row(t) = st.alpha.value();
      trace.kappa.row(t) = st.kappa.value();
      trace.sigma.row(t) = st.sigma.value();
      trace.weights.row(t) = st.weights.value();
    } else {
      // Hard alignment on the duration-expanded grid.
      const Index idx = std::min<Index>(
          static_cast<Index>(t) * r / c.downsample_factor, mem_len - 1);
      context = nn::slice_rows(memory, idx, 1);
      trace.alpha(t, idx) = 1.0;
      trace.kappa(t, 0) = static_cast<double>(idx);
      trace.weights(t, 0) = 1.0;
    }

    h_dec = nn::Gru::step(b.decoder_rnn, nn::concat_cols({h_att, context}), h_dec);
    const Var y = nn::Linear::apply(b.projection, nn::concat_cols({h_dec, context}));
    if (!tape.recording() && !y.value().allFinite()) {
      throw NumericError("non-finite decoder output", t);
    }
    frames.push_back(nn::reshape(y, r, c.mel_dim));
    if (teacher == nullptr) prev = y;
  }

  const Var norm = nn::slice_rows(nn::concat_rows(frames), 0, num_frames);
  out.pre_mel = nn::add(nn::mul(norm, tape.constant(mel_stats_.stddev.replicate(num_frames, 1))),
                        tape.constant(mel_stats_.mean));
  out.post_mel = nn::add(out.pre_mel, postnet(tape, out.pre_mel));
  return out;
}

DecoderOutput AcousticModel::forward(Tape& tape, const frontend::AcousticInput& x,
                                     const Matrix& target_mel, nn::Rng& rng) const {
  if (target_mel.rows() != x.num_frames() || target_mel.cols() != config_.mel_dim) {
    throw ShapeError("target mel is " + std::to_string(target_mel.rows()) + "x" +
                     std::to_string(target_mel.cols()) + ", expected " +
                     std::to_string(x.num_frames()) + "x" + std::to_string(config_.mel_dim));
  }
  const Var memory = encode(tape, embed_inputs(tape, x));
  return decode(tape, memory, x.num_frames(), &target_mel, rng);
}

DecoderOutput AcousticModel::synthesize(Tape& tape, const frontend::AcousticInput& x,
                                        nn::Rng& rng) const {
  const Var memory = encode(tape, embed_inputs(tape, x));
  return decode(tape, memory, x.num_frames(), nullptr, rng);
}

void AcousticModel::save(const std::filesystem::path& path) const {
  nn::Checkpoint ck;
  ck.kind = "acoustic";
  ck.config_text = config_.to_config().to_text();
  nn::store_parameters(store_, ck);
  ck.tensors["stats/mel_mean"] = Tensor::from_matrix(mel_stats_.mean);
  ck.tensors["stats/mel_std"] = Tensor::from_matrix(mel_stats_.stddev);
  nn::save_checkpoint(path, ck);
}

AcousticModel AcousticModel::load(const std::filesystem::path& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "acoustic") {
    throw ConfigError(path.string() + " holds a '" + ck.kind +
                      "' checkpoint, expected 'acoustic'");
  }
  AcousticModel model(AcousticConfig::from_config(KeyValueConfig::parse(ck.config_text)));
  nn::restore_parameters(model.store_, ck);
  const auto mean = ck.tensors.find("stats/mel_mean");
  const auto stddev = ck.tensors.find("stats/mel_std");
  if (mean == ck.tensors.end() || stddev == ck.tensors.end()) {
    throw LookupError("checkpoint lacks mel statistics");
  }
  model.set_mel_stats(MelStats{mean->second.to_matrix(), stddev->second.to_matrix()});
  return model;
}

Var acoustic_loss(const Var& pre_mel, const Var& post_mel, const Var& target) {
  return nn::add(nn::mse(pre_mel, target), nn::mse(post_mel, target));
}

MelSynthesis synthesize_mel(const AcousticModel& model, const frontend::AcousticInput& x,
                            std::uint64_t seed) {
  Tape tape(false);
  nn::Rng rng(seed);
  DecoderOutput out = model.synthesize(tape, x, rng);
  return MelSynthesis{out.post_mel.value(), std::move(out.trace)};
}

}  // namespace bytesing::acoustic
