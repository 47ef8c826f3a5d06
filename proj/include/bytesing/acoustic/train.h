#ifndef BYTESING_ACOUSTIC_TRAIN_H_
#define BYTESING_ACOUSTIC_TRAIN_H_

#include <functional>
#include <string>
#include <vector>

#include "bytesing/acoustic/model.h"

namespace bytesing::acoustic {

struct AcousticExample {
  std::string id;
  frontend::AcousticInput input;
  Matrix mel;  // num_frames x mel_dim
};

struct AcousticTrainResult {
  double final_loss = 0.0;    // dual loss, teacher forced
  double final_pre_l2 = 0.0;  // mean squared error per bin before the post-net
  std::vector<double> epoch_losses;
};

using AcousticEpochCallback = std::function<void(int epoch, double loss)>;

// Fits mel statistics on the data, then teacher-forced Adam training for
// config().max_epochs epochs. Gradients are summed over a batch of
// utterances before each update.
AcousticTrainResult train_acoustic(AcousticModel& model,
                                   const std::vector<AcousticExample>& data,
                                   const AcousticEpochCallback& on_epoch = {});

// Teacher-forced dual loss and pre-net L2 with a fixed dropout seed.
struct TeacherForcedScore {
  double loss = 0.0;
  double pre_l2 = 0.0;
  AttentionTrace trace;
};
TeacherForcedScore evaluate_teacher_forced(const AcousticModel& model,
                                           const AcousticExample& example,
                                           std::uint64_t seed);

}  // namespace bytesing::acoustic

#endif  // BYTESING_ACOUSTIC_TRAIN_H_
