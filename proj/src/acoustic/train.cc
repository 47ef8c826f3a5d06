#include "bytesing/acoustic/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"
#include "bytesing/nn/optimizer.h"

namespace bytesing::acoustic {

using nn::Tape;
using nn::Var;

AcousticTrainResult train_acoustic(AcousticModel& model,
                                   const std::vector<AcousticExample>& data,
                                   const AcousticEpochCallback& on_epoch) {
  if (data.empty()) throw ValidationError("acoustic training set is empty");
  const AcousticConfig& cfg = model.config();
  std::vector<Matrix> mels;
  for (const auto& ex : data) {
    if (ex.mel.rows() != ex.input.num_frames()) {
      throw ShapeError("example '" + ex.id + "' has " + std::to_string(ex.mel.rows()) +
                       " mel frames for " + std::to_string(ex.input.num_frames()) +
                       " input frames");
    }
    mels.push_back(ex.mel);
  }
  model.set_mel_stats(MelStats::fit(mels));

  nn::Adam adam(model.parameters(), nn::AdamConfig{.learning_rate = cfg.learning_rate});
  nn::Rng rng(cfg.seed + 104729);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  AcousticTrainResult result;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const double weight = 1.0 / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const AcousticExample& ex = data[order[i]];
        Tape tape;
        const DecoderOutput out = model.forward(tape, ex.input, ex.mel, rng);
        const Var loss = acoustic_loss(out.pre_mel, out.post_mel, tape.constant(ex.mel));
        if (!std::isfinite(loss.scalar())) {
          throw NumericError("non-finite acoustic loss on '" + ex.id + "' in epoch " +
                                 std::to_string(epoch),
                             static_cast<long>(order[i]));
        }
        epoch_loss += loss.scalar();
        tape.backward(nn::scale(loss, weight));
      }
      adam.step();
    }
    epoch_loss /= static_cast<double>(data.size());
    result.epoch_losses.push_back(epoch_loss);
    spdlog::debug("acoustic epoch {} loss {:.6f}", epoch, epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }

  for (const auto& ex : data) {
    const TeacherForcedScore s = evaluate_teacher_forced(model, ex, cfg.seed);
    result.final_loss += s.loss / static_cast<double>(data.size());
    result.final_pre_l2 += s.pre_l2 / static_cast<double>(data.size());
  }
  spdlog::info("acoustic training done: {} epochs, loss {:.6f}, pre-net L2 {:.6f}",
               cfg.max_epochs, result.final_loss, result.final_pre_l2);
  return result;
}

TeacherForcedScore evaluate_teacher_forced(const AcousticModel& model,
                                           const AcousticExample& example,
                                           std::uint64_t seed) {
  Tape tape(false);
  nn::Rng rng(seed);
  DecoderOutput out = model.forward(tape, example.input, example.mel, rng);
  const Var target = tape.constant(example.mel);
  TeacherForcedScore s;
  s.loss = acoustic_loss(out.pre_mel, out.post_mel, target).scalar();
  s.pre_l2 = nn::mse(out.pre_mel, target).scalar();
  s.trace = std::move(out.trace);
  return s;
}

}  // namespace bytesing::acoustic
