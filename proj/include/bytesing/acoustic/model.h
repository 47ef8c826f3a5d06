#ifndef BYTESING_ACOUSTIC_MODEL_H_
#define BYTESING_ACOUSTIC_MODEL_H_

#include <filesystem>
#include <vector>

#include "bytesing/acoustic/attention.h"
#include "bytesing/acoustic/config.h"
#include "bytesing/frontend/features.h"
#include "bytesing/nn/layers.h"

namespace bytesing::acoustic {

// Per-bin statistics used to normalise decoder inputs and outputs.
struct MelStats {
  RowVector mean;
  RowVector stddev;
  static MelStats identity(int mel_dim);
  static MelStats fit(const std::vector<Matrix>& mels);
};

struct DecoderOutput {
  nn::Var pre_mel;   // T x mel
  nn::Var post_mel;  // T x mel
  AttentionTrace trace;
};

// Frame-level X_A -> log-mel. The decoder emits `reduction` frames per step
// and runs ceil(T / reduction) steps; there is no stop token.
class AcousticModel {
 public:
  explicit AcousticModel(const AcousticConfig& config);

  const AcousticConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const MelStats& mel_stats() const { return mel_stats_; }
  void set_mel_stats(const MelStats& stats);

  // T x input_dim(): [ph embedding | pitch embedding | po | tone embedding].
  nn::Var embed_inputs(nn::Tape& tape, const frontend::AcousticInput& x) const;
  // Memory H with ceil(T / downsample_factor) rows.
  nn::Var encode(nn::Tape& tape, const nn::Var& frames) const;
  nn::Var postnet(nn::Tape& tape, const nn::Var& pre_mel) const;

  // Teacher forcing: step t is fed target frames [(t-1)r, tr) (zeros at t=0).
  // Dropout masks are drawn from `rng`.
  DecoderOutput forward(nn::Tape& tape, const frontend::AcousticInput& x,
                        const Matrix& target_mel, nn::Rng& rng) const;

  // Free-running decoding of exactly num_frames() frames.
  DecoderOutput synthesize(nn::Tape& tape, const frontend::AcousticInput& x,
                           nn::Rng& rng) const;

  void save(const std::filesystem::path& path) const;
  static AcousticModel load(const std::filesystem::path& path);

  // Number of decoder steps for T output frames.
  int decoder_steps(int num_frames) const;

  const GmmAttention& attention() const { return attention_; }

 private:
  struct DecoderBound;
  DecoderOutput decode(nn::Tape& tape, const nn::Var& memory, int num_frames,
                       const Matrix* teacher, nn::Rng& rng) const;

  AcousticConfig config_;
  nn::ParameterStore store_;
  MelStats mel_stats_;

  nn::Embedding ph_embed_;
  nn::Embedding pi_embed_;
  nn::Embedding tone_embed_;

  std::vector<nn::Conv1d> prenet_;
  std::vector<nn::Conv1d> bank_;
  nn::Conv1d proj1_;
  nn::Conv1d proj2_;
  nn::Linear highway_in_;
  std::vector<nn::Highway> highways_;
  nn::Gru gru_fwd_;
  nn::Gru gru_bwd_;

  std::vector<nn::Linear> dec_prenet_;
  nn::Gru attention_rnn_;
  GmmAttention attention_;
  nn::Gru decoder_rnn_;
  nn::Linear projection_;

  std::vector<nn::Conv1d> postnet_;
};

// MSE(pre, target) + MSE(post, target), each a mean over all elements.
nn::Var acoustic_loss(const nn::Var& pre_mel, const nn::Var& post_mel,
                      const nn::Var& target);

struct MelSynthesis {
  Matrix mel;
  AttentionTrace trace;
};

// Decodes with a non-recording tape; dropout masks come from `seed`.
// Throws NumericError naming the first non-finite decoder step.
MelSynthesis synthesize_mel(const AcousticModel& model, const frontend::AcousticInput& x,
                            std::uint64_t seed);

}  // namespace bytesing::acoustic

#endif  // BYTESING_ACOUSTIC_MODEL_H_
