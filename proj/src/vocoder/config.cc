#include "bytesing/vocoder/config.h"

#include <spdlog/fmt/fmt.h>

#include "bytesing/common/error.h"

namespace bytesing::vocoder {

namespace {

std::string key(const char* name) { return std::string("vocoder.") + name; }

}  // namespace

VocoderConfig VocoderConfig::from_config(const KeyValueConfig& cfg) {
  VocoderConfig c;
  c.gru_size = cfg.get_int(key("gru_size"), c.gru_size);
  c.num_conv_blocks = cfg.get_int(key("num_conv_blocks"), c.num_conv_blocks);
  c.conv_kernel = cfg.get_int(key("conv_kernel"), c.conv_kernel);
  c.condition_channels = cfg.get_int(key("condition_channels"), c.condition_channels);
  c.head_size = cfg.get_int(key("head_size"), c.head_size);
  c.coarse_embed_dim = cfg.get_int(key("coarse_embed_dim"), c.coarse_embed_dim);
  c.hop = cfg.get_int(key("hop"), c.hop);
  c.mel_dim = cfg.get_int(key("mel_dim"), c.mel_dim);
  c.learning_rate = cfg.get_double(key("learning_rate"), c.learning_rate);
  c.batch_size = cfg.get_int(key("batch_size"), c.batch_size);
  c.window_frames = cfg.get_int(key("window_frames"), c.window_frames);
  c.train_steps = cfg.get_int(key("train_steps"), c.train_steps);
  c.seed = static_cast<std::uint64_t>(cfg.get_int(key("seed"), static_cast<int>(c.seed)));
  c.validate();
  return c;
}

KeyValueConfig VocoderConfig::to_config() const {
  KeyValueConfig cfg;
  cfg.set(key("gru_size"), std::to_string(gru_size));
  cfg.set(key("num_conv_blocks"), std::to_string(num_conv_blocks));
  cfg.set(key("conv_kernel"), std::to_string(conv_kernel));
  cfg.set(key("condition_channels"), std::to_string(condition_channels));
  cfg.set(key("head_size"), std::to_string(head_size));
  cfg.set(key("coarse_embed_dim"), std::to_string(coarse_embed_dim));
  cfg.set(key("hop"), std::to_string(hop));
  cfg.set(key("mel_dim"), std::to_string(mel_dim));
  cfg.set(key("learning_rate"), fmt::format("{}", learning_rate));
  cfg.set(key("batch_size"), std::to_string(batch_size));
  cfg.set(key("window_frames"), std::to_string(window_frames));
  cfg.set(key("train_steps"), std::to_string(train_steps));
  cfg.set(key("seed"), std::to_string(seed));
  return cfg;
}

void VocoderConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(key(name) + " must be >= 1");
  };
  positive(gru_size, "gru_size");
  if (num_conv_blocks < 0) throw ConfigError(key("num_conv_blocks") + " must be >= 0");
  if (num_conv_blocks > 16) throw ConfigError(key("num_conv_blocks") + " must be <= 16");
  positive(conv_kernel, "conv_kernel");
  positive(condition_channels, "condition_channels");
  positive(head_size, "head_size");
  positive(coarse_embed_dim, "coarse_embed_dim");
  positive(hop, "hop");
  positive(mel_dim, "mel_dim");
  if (!(learning_rate > 0.0)) throw ConfigError(key("learning_rate") + " must be > 0");
  positive(batch_size, "batch_size");
  positive(window_frames, "window_frames");
  if (train_steps < 0) throw ConfigError(key("train_steps") + " must be >= 0");
}

int VocoderConfig::receptive_field() const {
  int span = 0;
  for (int i = 0; i < num_conv_blocks; ++i) span += (conv_kernel - 1) * (1 << i);
  return 1 + span;
}

}  // namespace bytesing::vocoder
