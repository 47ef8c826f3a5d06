#ifndef BYTESING_VOCODER_MODEL_H_
#define BYTESING_VOCODER_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bytesing/common/matrix.h"
#include "bytesing/nn/layers.h"
#include "bytesing/vocoder/config.h"
#include "bytesing/vocoder/sample.h"

namespace bytesing::vocoder {

// Each row of `cond` repeated `hop` times.
Matrix upsample_condition(const Matrix& cond, int hop);

// One dilated GLU block over a (time x channels) sequence:
//   [a | b] = conv(x),  y = (x + a * sigmoid(b)) * sqrt(0.5)
class ConvBlock {
 public:
  ConvBlock() = default;
  // The gate half starts at zero, so sigmoid(b) = 0.5 initially.
  ConvBlock(nn::ParameterStore& store, const std::string& name, Index channels,
            int kernel, int dilation, nn::Rng& rng);
  nn::Var operator()(nn::Tape& tape, const nn::Var& x) const;
  nn::Conv1d& conv() { return conv_; }
  int dilation() const { return conv_.dilation(); }

 private:
  nn::Conv1d conv_;
  Index channels_ = 0;
};

struct StepOutput {
  nn::Var hidden;         // B x H
  nn::Var coarse_logits;  // B x 256
  nn::Var fine_logits;    // B x 256
};

enum class GenerateMode { kSample, kArgmax };

// Frame-rate condition network plus a single-layer GRU sample network with
// dual softmax heads. The GRU input is (prev coarse, prev fine) scaled to
// [-1, 1]; the condition enters through a learned projection added to the
// GRU input bias. The fine head also sees the current coarse value.
class WaveRnn {
 public:
  explicit WaveRnn(const VocoderConfig& config);

  const VocoderConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  // Per-bin normalisation applied to the mel before the condition network.
  void set_mel_stats(const RowVector& mean, const RowVector& stddev);
  const RowVector& mel_mean() const { return mel_mean_; }
  const RowVector& mel_std() const { return mel_std_; }

  // T x mel -> T x condition_channels.
  nn::Var encode_condition(nn::Tape& tape, const Matrix& mel) const;
  // T x condition_channels -> T x 3H bias rows.
  nn::Var condition_bias(nn::Tape& tape, const nn::Var& cond) const;

  struct Bound {
    nn::Var w_ih, b_ih, w_hh, b_hh;
    nn::Linear::Bound coarse1, coarse2, fine1, fine2;
    nn::Var coarse_embed;
  };
  Bound bind(nn::Tape& tape) const;

  // One batched step. prev: B x 2 scaled (coarse, fine) of the previous
  // sample; cond_bias: B x 3H; coarse: current coarse class per row, fed to
  // the fine head.
  StepOutput step(const Bound& b, const nn::Var& prev, const nn::Var& cond_bias,
                  const nn::Var& hidden, const std::vector<int>& coarse) const;

  // Heads applied to many hidden rows at once.
  nn::Var coarse_logits(const Bound& b, const nn::Var& hidden) const;
  nn::Var fine_logits(const Bound& b, const nn::Var& hidden,
                      const std::vector<int>& coarse) const;

  // Teacher-forced mean (coarse + fine) cross-entropy in nats per sample
  // over the whole clip, starting from a zero state.
  double clip_loss(const Matrix& mel, const std::vector<std::int16_t>& pcm) const;

  // Sequential generation of mel.rows() * hop samples in [-1, 1).
  // Throws NumericError with the sample index on a non-finite state.
  std::vector<double> generate(const Matrix& mel, GenerateMode mode,
                               std::uint64_t seed) const;

  void save(const std::filesystem::path& path) const;
  static WaveRnn load(const std::filesystem::path& path);

  const std::vector<ConvBlock>& blocks() const { return blocks_; }

 private:
  VocoderConfig config_;
  nn::ParameterStore store_;
  RowVector mel_mean_;
  RowVector mel_std_;

  nn::Linear cond_in_;
  std::vector<ConvBlock> blocks_;
  nn::Linear cond_proj_;

  nn::Parameter* w_ih_ = nullptr;
  nn::Parameter* b_ih_ = nullptr;
  nn::Parameter* w_hh_ = nullptr;
  nn::Parameter* b_hh_ = nullptr;
  nn::Linear coarse1_, coarse2_;
  nn::Linear fine1_, fine2_;
  nn::Parameter* coarse_embed_ = nullptr;
};

}  // namespace bytesing::vocoder

#endif  // BYTESING_VOCODER_MODEL_H_
