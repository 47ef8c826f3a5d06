#ifndef BYTESING_ACOUSTIC_CONFIG_H_
#define BYTESING_ACOUSTIC_CONFIG_H_

#include <cstdint>
#include <vector>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/config.h"

namespace bytesing::acoustic {

struct AcousticConfig {
  int ph_embed_dim = 256;
  int pi_embed_dim = 64;
  int tone_embed_dim = 16;
  bool use_tone = false;

  std::vector<int> prenet_kernels = {3, 5, 5};
  int prenet_channels = 256;

  int cbhg_bank_size = 8;
  int cbhg_bank_channels = 128;
  int cbhg_highway_layers = 4;
  int cbhg_highway_size = 128;
  int cbhg_gru_size = 128;  // per direction

  int downsample_factor = 1;

  bool use_attention = true;
  int num_mixtures = 5;
  double sigma_min = 0.5;

  int reduction = 2;
  std::vector<int> decoder_prenet = {256, 256};
  double prenet_dropout = 0.5;
  int attention_rnn_size = 256;
  int decoder_rnn_size = 512;

  int postnet_layers = 5;
  int postnet_channels = 512;
  int postnet_kernel = 5;

  int mel_dim = kNumMels;

  double learning_rate = 1e-3;
  int batch_size = 4;
  int max_epochs = 100;
  std::uint64_t seed = 1;

  // Keys under "acoustic.".
  static AcousticConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
  void validate() const;

  int input_dim() const;
  int memory_dim() const { return 2 * cbhg_gru_size; }
};

}  // namespace bytesing::acoustic

#endif  // BYTESING_ACOUSTIC_CONFIG_H_
