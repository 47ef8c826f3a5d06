#include "bytesing/vocoder/model.h"

#include <cmath>

#include "bytesing/common/error.h"
#include "bytesing/nn/checkpoint.h"

namespace bytesing::vocoder {

using nn::Tape;
using nn::Var;

namespace {

// Fixed gain on the projected condition. Without it Adam grows the gate
// biases fast enough to saturate the GRU before it learns the waveform.
constexpr double kConditionScale = 0.01;

}  // namespace

Matrix upsample_condition(const Matrix& cond, int hop) {
  if (hop < 1) throw ValidationError("hop must be >= 1");
  Matrix out(cond.rows() * hop, cond.cols());
  for (Index t = 0; t < cond.rows(); ++t) {
    out.middleRows(t * hop, hop) = cond.row(t).replicate(hop, 1);
  }
  return out;
}

ConvBlock::ConvBlock(nn::ParameterStore& store, const std::string& name, Index channels,
                     int kernel, int dilation, nn::Rng& rng)
    : conv_(store, name, channels, 2 * channels, kernel, dilation, rng),
      channels_(channels) {
  conv_.weight().value.rightCols(channels).setZero();
}

Var ConvBlock::operator()(Tape& tape, const Var& x) const {
  const Var ab = conv_(tape, x);
  const Var glu = nn::mul(nn::slice_cols(ab, 0, channels_),
                          nn::sigmoid(nn::slice_cols(ab, channels_, channels_)));
  return nn::scale(nn::add(x, glu), std::sqrt(0.5));
}

WaveRnn::WaveRnn(const VocoderConfig& config)
    : config_(config),
      mel_mean_(RowVector::Zero(config.mel_dim)),
      mel_std_(RowVector::Ones(config.mel_dim)) {
  config_.validate();
  const VocoderConfig& c = config_;
  nn::Rng rng(c.seed);
  const Index h = c.gru_size;
  cond_in_ = nn::Linear(store_, "cond.in", c.mel_dim, c.condition_channels, rng);
  for (int i = 0; i < c.num_conv_blocks; ++i) {
    blocks_.emplace_back(store_, "cond.block." + std::to_string(i), c.condition_channels,
                         c.conv_kernel, 1 << i, rng);
  }
  cond_proj_ = nn::Linear(store_, "cond.proj", c.condition_channels, 3 * h, rng);

  w_ih_ = &store_.add("rnn.w_ih", nn::glorot_init(2, 3 * h, rng));
  b_ih_ = &store_.add("rnn.b_ih", Matrix::Zero(1, 3 * h));
  w_hh_ = &store_.add("rnn.w_hh",
                      nn::uniform_init(h, 3 * h, 1.0 / std::sqrt(static_cast<double>(h)), rng));
  b_hh_ = &store_.add("rnn.b_hh", Matrix::Zero(1, 3 * h));

  coarse1_ = nn::Linear(store_, "coarse.hidden", h, c.head_size, rng);
  coarse2_ = nn::Linear(store_, "coarse.out", c.head_size, kNumClasses, rng);
  coarse_embed_ = &store_.add(
      "fine.coarse_embed",
      nn::uniform_init(kNumClasses, c.coarse_embed_dim,
                       std::sqrt(3.0 / static_cast<double>(c.coarse_embed_dim)), rng));
  fine1_ = nn::Linear(store_, "fine.hidden", h + c.coarse_embed_dim + 1, c.head_size, rng);
  fine2_ = nn::Linear(store_, "fine.out", c.head_size, kNumClasses, rng);
  // Zero output layers: both softmaxes start uniform.
  coarse2_.weight().value.setZero();
  fine2_.weight().value.setZero();
}

void WaveRnn::set_mel_stats(const RowVector& mean, const RowVector& stddev) {
  if (mean.size() != config_.mel_dim || stddev.size() != config_.mel_dim) {
    throw ShapeError("vocoder mel statistics do not match mel_dim");
  }
  mel_mean_ = mean;
  mel_std_ = stddev;
}

Var WaveRnn::encode_condition(Tape& tape, const Matrix& mel) const {
  if (mel.cols() != config_.mel_dim) {
    throw ShapeError("vocoder expects " + std::to_string(config_.mel_dim) +
                     " mel bins, got " + std::to_string(mel.cols()));
  }
  if (!mel.allFinite()) throw NumericError("non-finite mel input", 0);
  const Matrix norm = (mel.rowwise() - mel_mean_).array().rowwise() / mel_std_.array();
  Var x = cond_in_(tape, tape.constant(norm));
  for (const auto& block : blocks_) x = block(tape, x);
  return x;
}

Var WaveRnn::condition_bias(Tape& tape, const Var& cond) const {
  return nn::scale(cond_proj_(tape, cond), kConditionScale);
}

WaveRnn::Bound WaveRnn::bind(Tape& tape) const {
  Bound b;
  b.w_ih = tape.param(*w_ih_);
  b.b_ih = tape.param(*b_ih_);
  b.w_hh = tape.param(*w_hh_);
  b.b_hh = tape.param(*b_hh_);
  b.coarse1 = coarse1_.bind(tape);
  b.coarse2 = coarse2_.bind(tape);
  b.fine1 = fine1_.bind(tape);
  b.fine2 = fine2_.bind(tape);
  b.coarse_embed = tape.param(*coarse_embed_);
  return b;
}

Var WaveRnn::coarse_logits(const Bound& b, const Var& hidden) const {
  return nn::Linear::apply(b.coarse2, nn::relu(nn::Linear::apply(b.coarse1, hidden)));
}

Var WaveRnn::fine_logits(const Bound& b, const Var& hidden,
                         const std::vector<int>& coarse) const {
  if (static_cast<Index>(coarse.size()) != hidden.rows()) {
    throw ShapeError("one coarse value per hidden row is required");
  }
  Matrix scaled(hidden.rows(), 1);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    if (coarse[i] < 0 || coarse[i] >= kNumClasses) {
      throw ShapeError("coarse class " + std::to_string(coarse[i]) + " out of range");
    }
    scaled(static_cast<Index>(i), 0) = scale_class(coarse[i]);
  }
  Tape& tape = hidden.tape();
  const Var in = nn::concat_cols(
      {hidden, nn::gather_rows(b.coarse_embed, coarse), tape.constant(std::move(scaled))});
  return nn::Linear::apply(b.fine2, nn::relu(nn::Linear::apply(b.fine1, in)));
}

StepOutput WaveRnn::step(const Bound& b, const Var& prev, const Var& cond_bias,
                         const Var& hidden, const std::vector<int>& coarse) const {
  const Var xp = nn::add(nn::add(nn::matmul(prev, b.w_ih), b.b_ih), cond_bias);
  StepOutput out;
  out.hidden = nn::gru_cell(xp, hidden, b.w_hh, b.b_hh);
  out.coarse_logits = coarse_logits(b, out.hidden);
  out.fine_logits = fine_logits(b, out.hidden, coarse);
  return out;
}

namespace {

// Tape-free copy of the sample network for long sequential loops.
class RawSampleNet {
 public:
  RawSampleNet(const nn::ParameterStore& store, Index hidden)
      : w_ih_(store.get("rnn.w_ih").value),
        b_ih_(store.get("rnn.b_ih").value),
        w_hh_(store.get("rnn.w_hh").value),
        b_hh_(store.get("rnn.b_hh").value),
        c1w_(store.get("coarse.hidden.weight").value),
        c1b_(store.get("coarse.hidden.bias").value),
        c2w_(store.get("coarse.out.weight").value),
        c2b_(store.get("coarse.out.bias").value),
        embed_(store.get("fine.coarse_embed").value),
        f1w_(store.get("fine.hidden.weight").value),
        f1b_(store.get("fine.hidden.bias").value),
        f2w_(store.get("fine.out.weight").value),
        f2b_(store.get("fine.out.bias").value),
        h_(hidden) {
    fine_in_.resize(1, h_ + embed_.cols() + 1);
  }

  void gru(RowVector& h, int prev_coarse, int prev_fine, const RowVector& cond_bias) const {
    RowVector xp = scale_class(prev_coarse) * w_ih_.row(0) +
                   scale_class(prev_fine) * w_ih_.row(1) + b_ih_ + cond_bias;
    const RowVector hp = h * w_hh_ + b_hh_;
    for (Index j = 0; j < h_; ++j) {
      const double r = sigmoid(xp(j) + hp(j));
      const double z = sigmoid(xp(h_ + j) + hp(h_ + j));
      const double n = std::tanh(xp(2 * h_ + j) + r * hp(2 * h_ + j));
      h(j) = (1.0 - z) * n + z * h(j);
    }
  }

  RowVector coarse_logits(const RowVector& h) const {
    const RowVector a = (h * c1w_ + c1b_).cwiseMax(0.0);
    return a * c2w_ + c2b_;
  }

  RowVector fine_logits(const RowVector& h, int coarse) {
    fine_in_.leftCols(h_) = h;
    fine_in_.middleCols(h_, embed_.cols()) = embed_.row(coarse);
    fine_in_(0, fine_in_.cols() - 1) = scale_class(coarse);
    const RowVector a = (fine_in_ * f1w_ + f1b_).cwiseMax(0.0);
    return a * f2w_ + f2b_;
  }

 private:
  static double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  const Matrix& w_ih_;
  const Matrix& b_ih_;
  const Matrix& w_hh_;
  const Matrix& b_hh_;
  const Matrix& c1w_;
  const Matrix& c1b_;
  const Matrix& c2w_;
  const Matrix& c2b_;
  const Matrix& embed_;
  const Matrix& f1w_;
  const Matrix& f1b_;
  const Matrix& f2w_;
  const Matrix& f2b_;
  Index h_;
  RowVector fine_in_;
};

// -log softmax(logits)[target]
double nll(const RowVector& logits, int target) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits(target);
}

int choose(const RowVector& logits, GenerateMode mode, nn::Rng& rng) {
  Index best = 0;
  const double m = logits.maxCoeff(&best);
  if (mode == GenerateMode::kArgmax) return static_cast<int>(best);
  const Eigen::ArrayXd p = (logits.array() - m).exp();
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * p.sum();
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

Matrix frame_biases(const WaveRnn& model, const Matrix& mel) {
  Tape tape(false);
  return model.condition_bias(tape, model.encode_condition(tape, mel)).value();
}

}  // namespace

double WaveRnn::clip_loss(const Matrix& mel, const std::vector<std::int16_t>& pcm) const {
  const Matrix bias = frame_biases(*this, mel);
  const Index usable = std::min<Index>(static_cast<Index>(pcm.size()), bias.rows() * config_.hop);
  if (usable == 0) throw ValidationError("clip has no samples to score");
  RawSampleNet net(store_, config_.gru_size);
  RowVector h = RowVector::Zero(config_.gru_size);
  int prev_c = 128, prev_f = 0;
  double total = 0.0;
  for (Index n = 0; n < usable; ++n) {
    net.gru(h, prev_c, prev_f, bias.row(n / config_.hop));
    const CoarseFine cf = split_sample(to_unsigned(pcm[static_cast<std::size_t>(n)]));
    total += nll(net.coarse_logits(h), cf.coarse) + nll(net.fine_logits(h, cf.coarse), cf.fine);
    prev_c = cf.coarse;
    prev_f = cf.fine;
  }
  return total / static_cast<double>(usable);
}

std::vector<double> WaveRnn::generate(const Matrix& mel, GenerateMode mode,
                                      std::uint64_t seed) const {
  const Matrix bias = frame_biases(*this, mel);
  const Index total = bias.rows() * config_.hop;
  RawSampleNet net(store_, config_.gru_size);
  nn::Rng rng(seed);
  RowVector h = RowVector::Zero(config_.gru_size);
  int prev_c = 128, prev_f = 0;
  std::vector<double> out(static_cast<std::size_t>(total));
  for (Index n = 0; n < total; ++n) {
    net.gru(h, prev_c, prev_f, bias.row(n / config_.hop));
    if (!h.allFinite()) throw NumericError("non-finite vocoder state", static_cast<long>(n));
    const int c = choose(net.coarse_logits(h), mode, rng);
    const int f = choose(net.fine_logits(h, c), mode, rng);
    out[static_cast<std::size_t>(n)] = static_cast<double>(to_signed(combine_sample(c, f))) / 32768.0;
    prev_c = c;
    prev_f = f;
  }
  return out;
}

void WaveRnn::save(const std::filesystem::path& path) const {
  nn::Checkpoint ck;
  ck.kind = "vocoder";
  ck.config_text = config_.to_config().to_text();
  nn::store_parameters(store_, ck);
  ck.tensors["stats/mel_mean"] = Tensor::from_matrix(mel_mean_);
  ck.tensors["stats/mel_std"] = Tensor::from_matrix(mel_std_);
  nn::save_checkpoint(path, ck);
}

WaveRnn WaveRnn::load(const std::filesystem::path& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "vocoder") {
    throw ConfigError(path.string() + " holds a '" + ck.kind +
                      "' checkpoint, expected 'vocoder'");
  }
  WaveRnn model(VocoderConfig::from_config(KeyValueConfig::parse(ck.config_text)));
  nn::restore_parameters(model.store_, ck);
  const auto mean = ck.tensors.find("stats/mel_mean");
  const auto stddev = ck.tensors.find("stats/mel_std");
  if (mean == ck.tensors.end() || stddev == ck.tensors.end()) {
    throw LookupError("checkpoint lacks mel statistics");
  }
  model.set_mel_stats(mean->second.to_matrix(), stddev->second.to_matrix());
  return model;
}

}  // namespace bytesing::vocoder
