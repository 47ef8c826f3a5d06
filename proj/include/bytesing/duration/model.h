#ifndef BYTESING_DURATION_MODEL_H_
#define BYTESING_DURATION_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/config.h"
#include "bytesing/frontend/features.h"
#include "bytesing/frontend/score.h"
#include "bytesing/nn/layers.h"

namespace bytesing::duration {

struct DurationModelConfig {
  int num_layers = 2;
  int hidden_size = 128;  // per direction
  double learning_rate = 1e-3;
  int batch_size = 8;
  int max_epochs = 100;
  std::uint64_t seed = 1;

  // Keys under "duration.".
  static DurationModelConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
  void validate() const;
};

struct DurationPrediction {
  std::vector<double> raw_sec;
  std::vector<double> constrained_sec;
  std::vector<int> frames;
};

// Stacked bidirectional LSTM regressor over X_D rows. The output is the log
// of the phoneme's frame count.
class DurationModel {
 public:
  explicit DurationModel(const DurationModelConfig& config);

  const DurationModelConfig& config() const { return config_; }
  nn::ParameterStore& parameters() { return store_; }
  const frontend::ZStats& stats() const { return stats_; }
  void set_stats(const frontend::ZStats& stats) { stats_ = stats; }

  // x: N x duration_input_dim() -> N x 1 log frames.
  nn::Var forward(nn::Tape& tape, const Matrix& x) const;

  void save(const std::filesystem::path& path) const;
  static DurationModel load(const std::filesystem::path& path);

  nn::Linear& output_layer() { return output_; }

 private:
  DurationModelConfig config_;
  nn::ParameterStore store_;
  std::vector<nn::Lstm> forward_layers_;
  std::vector<nn::Lstm> backward_layers_;
  nn::Linear output_;
  frontend::ZStats stats_;
};

// Phonemes of silence syllables carry no duration target.
std::vector<bool> trainable_mask(const frontend::UtteranceScore& utt);

// Mean squared error in log-frame space over rows where mask is set.
// Returns a 1x1 zero constant when nothing is masked in.
nn::Var duration_loss(nn::Tape& tape, const DurationModel& model, const Matrix& x,
                      const std::vector<int>& frames, const std::vector<bool>& mask);

struct DurationTrainResult {
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

// Utterances must carry allocated_frames (from labels) for every phoneme.
// Fits z-stats on the data, then runs Adam for config().max_epochs epochs.
DurationTrainResult train_duration(DurationModel& model,
                                   const std::vector<frontend::UtteranceScore>& data,
                                   const EpochCallback& on_epoch = {});

// exp(prediction) frames converted to seconds; x must already be
// normalised with the model's stats.
std::vector<double> predict_durations(const DurationModel& model, const Matrix& x,
                                      double hop_sec = kHopSec);

// Full path for one utterance: predict, constrain, quantize. Silence
// phonemes take their note duration without running the network.
DurationPrediction predict_utterance(const DurationModel& model,
                                     const frontend::UtteranceScore& utt,
                                     double hop_sec = kHopSec);

// Writes allocated_sec/allocated_frames into the utterance.
void apply_prediction(frontend::UtteranceScore& utt, const DurationPrediction& pred);

}  // namespace bytesing::duration

#endif  // BYTESING_DURATION_MODEL_H_
