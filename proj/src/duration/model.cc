#include "bytesing/duration/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"
#include "bytesing/duration/postprocess.h"
#include "bytesing/nn/checkpoint.h"
#include "bytesing/nn/optimizer.h"

namespace bytesing::duration {

using frontend::UtteranceScore;
using nn::Tape;
using nn::Var;

DurationModelConfig DurationModelConfig::from_config(const KeyValueConfig& cfg) {
  DurationModelConfig c;
  c.num_layers = cfg.get_int("duration.num_layers", c.num_layers);
  c.hidden_size = cfg.get_int("duration.hidden_size", c.hidden_size);
  c.learning_rate = cfg.get_double("duration.learning_rate", c.learning_rate);
  c.batch_size = cfg.get_int("duration.batch_size", c.batch_size);
  c.max_epochs = cfg.get_int("duration.max_epochs", c.max_epochs);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("duration.seed", static_cast<int>(c.seed)));
  c.validate();
  return c;
}

KeyValueConfig DurationModelConfig::to_config() const {
  KeyValueConfig cfg;
  cfg.set("duration.num_layers", std::to_string(num_layers));
  cfg.set("duration.hidden_size", std::to_string(hidden_size));
  cfg.set("duration.learning_rate", fmt::format("{}", learning_rate));
  cfg.set("duration.batch_size", std::to_string(batch_size));
  cfg.set("duration.max_epochs", std::to_string(max_epochs));
  cfg.set("duration.seed", std::to_string(seed));
  return cfg;
}

void DurationModelConfig::validate() const {
  if (num_layers < 1) throw ConfigError("duration.num_layers must be >= 1");
  if (hidden_size < 1) throw ConfigError("duration.hidden_size must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("duration.learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("duration.batch_size must be >= 1");
  if (max_epochs < 0) throw ConfigError("duration.max_epochs must be >= 0");
}

DurationModel::DurationModel(const DurationModelConfig& config) : config_(config) {
  config_.validate();
  nn::Rng rng(config_.seed);
  Index in = frontend::duration_input_dim();
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::string name = "lstm" + std::to_string(l);
    forward_layers_.emplace_back(store_, name + ".fwd", in, config_.hidden_size, rng);
    backward_layers_.emplace_back(store_, name + ".bwd", in, config_.hidden_size, rng);
    in = 2 * config_.hidden_size;
  }
  output_ = nn::Linear(store_, "out", in, 1, rng);
}

Var DurationModel::forward(Tape& tape, const Matrix& x) const {
  if (x.cols() != frontend::duration_input_dim()) {
    throw ShapeError("duration input has " + std::to_string(x.cols()) +
                     " columns, expected " +
                     std::to_string(frontend::duration_input_dim()));
  }
  Var h = tape.constant(x);
  for (std::size_t l = 0; l < forward_layers_.size(); ++l) {
    h = nn::concat_cols({forward_layers_[l].run(tape, h, false),
                         backward_layers_[l].run(tape, h, true)});
  }
  return output_(tape, h);
}

void DurationModel::save(const std::filesystem::path& path) const {
  nn::Checkpoint ck;
  ck.kind = "duration";
  ck.config_text = config_.to_config().to_text();
  nn::store_parameters(store_, ck);
  Matrix stats(1, 2);
  stats << stats_.mean, stats_.stddev;
  ck.tensors["stats/du"] = Tensor::from_matrix(stats);
  nn::save_checkpoint(path, ck);
}

DurationModel DurationModel::load(const std::filesystem::path& path) {
  const nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.kind != "duration") {
    throw ConfigError(path.string() + " holds a '" + ck.kind +
                      "' checkpoint, expected 'duration'");
  }
  DurationModel model(DurationModelConfig::from_config(KeyValueConfig::parse(ck.config_text)));
  nn::restore_parameters(model.store_, ck);
  const auto it = ck.tensors.find("stats/du");
  if (it == ck.tensors.end()) throw LookupError("checkpoint lacks duration stats");
  const Matrix stats = it->second.to_matrix();
  model.stats_ = frontend::ZStats{stats(0, 0), stats(0, 1)};
  return model;
}

std::vector<bool> trainable_mask(const UtteranceScore& utt) {
  std::vector<bool> mask;
  for (const auto& syl : utt.syllables) {
    for (const auto& ph : syl.phonemes) {
      mask.push_back(!syl.is_silence() && ph.tp != frontend::PhonemeType::kSilence);
    }
  }
  return mask;
}

namespace {

// Sum of masked squared errors; `count` receives the number of rows used.
Var masked_sq_error(Tape& tape, const DurationModel& model, const Matrix& x,
                    const std::vector<int>& frames, const std::vector<bool>& mask,
                    int& count) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (frames.size() != n || mask.size() != n) {
    throw ShapeError("duration targets do not match the input rows");
  }
  Matrix target = Matrix::Zero(x.rows(), 1);
  Matrix weight = Matrix::Zero(x.rows(), 1);
  count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (frames[i] < 1) {
      throw ValidationError("duration target below one frame at phoneme " +
                            std::to_string(i));
    }
    target(static_cast<Index>(i), 0) = std::log(static_cast<double>(frames[i]));
    weight(static_cast<Index>(i), 0) = 1.0;
    ++count;
  }
  const Var diff = nn::sub(model.forward(tape, x), tape.constant(target));
  return nn::sum(nn::mul(nn::mul(diff, diff), tape.constant(weight)));
}

}  // namespace

Var duration_loss(Tape& tape, const DurationModel& model, const Matrix& x,
                  const std::vector<int>& frames, const std::vector<bool>& mask) {
  int count = 0;
  const Var sq = masked_sq_error(tape, model, x, frames, mask, count);
  if (count == 0) return tape.constant(Matrix::Zero(1, 1));
  return nn::scale(sq, 1.0 / count);
}

DurationTrainResult train_duration(DurationModel& model,
                                   const std::vector<UtteranceScore>& data,
                                   const EpochCallback& on_epoch) {
  if (data.empty()) throw ValidationError("duration training set is empty");
  const DurationModelConfig& cfg = model.config();

  model.set_stats(frontend::fit_duration_stats(data));
  struct Example {
    const UtteranceScore* utt;
    Matrix x;
    std::vector<int> frames;
    std::vector<bool> mask;
    int count = 0;
  };
  std::vector<Example> examples;
  double log_sum = 0.0;
  int log_count = 0;
  for (const auto& utt : data) {
    Example ex{&utt, frontend::build_duration_inputs(utt, model.stats()),
               frontend::allocated_frames(utt), trainable_mask(utt)};
    for (std::size_t i = 0; i < ex.mask.size(); ++i) {
      if (!ex.mask[i]) continue;
      if (ex.frames[i] < 1) {
        throw ValidationError("utterance '" + utt.utterance_id +
                              "' has a phoneme with no frames");
      }
      log_sum += std::log(static_cast<double>(ex.frames[i]));
      ++ex.count;
    }
    log_count += ex.count;
    if (ex.count > 0) examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw ValidationError("duration training set has no sung phonemes");
  // Start the regressor at the corpus mean.
  model.output_layer().bias().value(0, 0) = log_sum / log_count;

  nn::Adam adam(model.parameters(), nn::AdamConfig{.learning_rate = cfg.learning_rate});
  nn::Rng rng(cfg.seed + 7919);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  DurationTrainResult result;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sq = 0.0;
    int epoch_count = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      int batch_count = 0;
      for (std::size_t i = start; i < end; ++i) batch_count += examples[order[i]].count;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = examples[order[i]];
        Tape tape;
        int count = 0;
        const Var sq = masked_sq_error(tape, model, ex.x, ex.frames, ex.mask, count);
        if (!std::isfinite(sq.scalar())) {
          throw NumericError("non-finite duration loss on '" + ex.utt->utterance_id +
                                 "' in epoch " + std::to_string(epoch),
                             static_cast<long>(order[i]));
        }
        epoch_sq += sq.scalar();
        epoch_count += count;
        tape.backward(nn::scale(sq, 1.0 / batch_count));
      }
      adam.step();
    }
    const double loss = epoch_sq / epoch_count;
    result.epoch_losses.push_back(loss);
    spdlog::debug("duration epoch {} loss {:.6f}", epoch, loss);
    if (on_epoch) on_epoch(epoch, loss);
  }

  // Final loss with the trained parameters.
  double sq_total = 0.0;
  for (const Example& ex : examples) {
    Tape tape(false);
    int count = 0;
    sq_total += masked_sq_error(tape, model, ex.x, ex.frames, ex.mask, count).scalar();
  }
  result.final_loss = sq_total / log_count;
  if (!std::isfinite(result.final_loss)) {
    throw NumericError("non-finite final duration loss", cfg.max_epochs);
  }
  spdlog::info("duration training done: {} epochs, loss {:.6f}", cfg.max_epochs,
               result.final_loss);
  return result;
}

std::vector<double> predict_durations(const DurationModel& model, const Matrix& x,
                                      double hop_sec) {
  Tape tape(false);
  const Matrix y = model.forward(tape, x).value();
  std::vector<double> out(static_cast<std::size_t>(y.rows()));
  for (Index i = 0; i < y.rows(); ++i) out[static_cast<std::size_t>(i)] = std::exp(y(i, 0)) * hop_sec;
  return out;
}

DurationPrediction predict_utterance(const DurationModel& model, const UtteranceScore& utt,
                                     double hop_sec) {
  DurationPrediction pred;
  pred.raw_sec = predict_durations(
      model, frontend::build_duration_inputs(utt, model.stats()), hop_sec);
  std::size_t k = 0;
  for (const auto& syl : utt.syllables) {
    for (std::size_t i = 0; i < syl.phonemes.size(); ++i, ++k) {
      if (syl.is_silence()) pred.raw_sec[k] = syl.note.duration_sec;
    }
  }
  pred.constrained_sec = constrain_to_notes(pred.raw_sec, utt);
  pred.frames = quantize_to_frames(pred.constrained_sec, utt, hop_sec);
  return pred;
}

void apply_prediction(UtteranceScore& utt, const DurationPrediction& pred) {
  if (pred.frames.size() != utt.num_phonemes() ||
      pred.constrained_sec.size() != utt.num_phonemes()) {
    throw ShapeError("prediction does not match utterance '" + utt.utterance_id + "'");
  }
  std::size_t k = 0;
  for (auto& syl : utt.syllables) {
    for (auto& ph : syl.phonemes) {
      ph.allocated_sec = pred.constrained_sec[k];
      ph.allocated_frames = pred.frames[k];
      ++k;
    }
  }
}

}  // namespace bytesing::duration
