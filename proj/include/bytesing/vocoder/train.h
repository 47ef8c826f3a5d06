#ifndef BYTESING_VOCODER_TRAIN_H_
#define BYTESING_VOCODER_TRAIN_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bytesing/vocoder/model.h"

namespace bytesing::vocoder {

struct VocoderExample {
  std::string id;
  Matrix mel;                      // frames x mel_dim
  std::vector<std::int16_t> pcm;   // frames * hop samples after alignment
};

// Checks that the mel and audio agree to within one frame, then truncates
// both to the shorter frame count (audio is zero-padded to whole frames).
VocoderExample make_example(std::string id, const Matrix& mel,
                            const std::vector<std::int16_t>& pcm, int hop);

struct Window {
  std::size_t example = 0;
  int start_frame = 0;
  int frames = 0;
};

// Consecutive windows covering every example.
std::vector<Window> tile_windows(const std::vector<VocoderExample>& data, int frames);
// `count` windows at uniformly random positions (examples weighted by length).
std::vector<Window> sample_windows(const std::vector<VocoderExample>& data, int count,
                                   int frames, nn::Rng& rng);

// Teacher-forced mean (coarse + fine) cross-entropy in nats per sample over
// a batch of windows of equal length. `initial_hidden` (B x H) defaults to
// zeros; the last hidden rows are written to `final_hidden` when given.
nn::Var window_loss(nn::Tape& tape, const WaveRnn& model,
                    const std::vector<VocoderExample>& data,
                    const std::vector<Window>& windows,
                    const Matrix* initial_hidden = nullptr,
                    Matrix* final_hidden = nullptr);

struct VocoderTrainResult {
  std::vector<double> step_losses;
  double final_loss = 0.0;  // mean clip_loss over the data
};

using VocoderStepCallback = std::function<void(int step, double loss)>;

// Fits mel statistics, then config().train_steps Adam updates. Each of the
// batch_size streams walks through a clip window by window, carrying its
// hidden state (truncated backpropagation through time), and jumps to the
// start of a random clip with a zero state when it runs out.
VocoderTrainResult train_vocoder(WaveRnn& model, const std::vector<VocoderExample>& data,
                                 const VocoderStepCallback& on_step = {});

}  // namespace bytesing::vocoder

#endif  // BYTESING_VOCODER_TRAIN_H_
