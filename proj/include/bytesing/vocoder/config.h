#ifndef BYTESING_VOCODER_CONFIG_H_
#define BYTESING_VOCODER_CONFIG_H_

#include <cstdint>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/config.h"

namespace bytesing::vocoder {

struct VocoderConfig {
  int gru_size = 512;
  int num_conv_blocks = 6;  // dilation 2^i for block i
  int conv_kernel = 3;
  int condition_channels = 128;
  int head_size = 256;
  int coarse_embed_dim = 16;
  int hop = kHopSamples;
  int mel_dim = kNumMels;

  double learning_rate = 1e-3;
  int batch_size = 8;      // windows per update
  int window_frames = 4;   // window length in frames
  int train_steps = 2000;
  std::uint64_t seed = 1;

  // Keys under "vocoder.".
  static VocoderConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
  void validate() const;

  // Condition-network receptive field in frames.
  int receptive_field() const;
};

}  // namespace bytesing::vocoder

#endif  // BYTESING_VOCODER_CONFIG_H_
