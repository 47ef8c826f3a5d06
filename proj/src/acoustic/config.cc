#include "bytesing/acoustic/config.h"

#include <spdlog/fmt/fmt.h>

#include "bytesing/common/error.h"

namespace bytesing::acoustic {

namespace {

constexpr const char* kPrefix = "acoustic.";

std::string key(const char* name) { return std::string(kPrefix) + name; }

}  // namespace

AcousticConfig AcousticConfig::from_config(const KeyValueConfig& cfg) {
  AcousticConfig c;
  c.ph_embed_dim = cfg.get_int(key("ph_embed_dim"), c.ph_embed_dim);
  c.pi_embed_dim = cfg.get_int(key("pi_embed_dim"), c.pi_embed_dim);
  c.tone_embed_dim = cfg.get_int(key("tone_embed_dim"), c.tone_embed_dim);
  c.use_tone = cfg.get_bool(key("use_tone"), c.use_tone);
  c.prenet_kernels = cfg.get_int_list(key("prenet_kernels"), c.prenet_kernels);
  c.prenet_channels = cfg.get_int(key("prenet_channels"), c.prenet_channels);
  c.cbhg_bank_size = cfg.get_int(key("cbhg_bank_size"), c.cbhg_bank_size);
  c.cbhg_bank_channels = cfg.get_int(key("cbhg_bank_channels"), c.cbhg_bank_channels);
  c.cbhg_highway_layers = cfg.get_int(key("cbhg_highway_layers"), c.cbhg_highway_layers);
  c.cbhg_highway_size = cfg.get_int(key("cbhg_highway_size"), c.cbhg_highway_size);
  c.cbhg_gru_size = cfg.get_int(key("cbhg_gru_size"), c.cbhg_gru_size);
  c.downsample_factor = cfg.get_int(key("downsample_factor"), c.downsample_factor);
  c.use_attention = cfg.get_bool(key("use_attention"), c.use_attention);
  c.num_mixtures = cfg.get_int(key("num_mixtures"), c.num_mixtures);
  c.sigma_min = cfg.get_double(key("sigma_min"), c.sigma_min);
  c.reduction = cfg.get_int(key("reduction"), c.reduction);
  c.decoder_prenet = cfg.get_int_list(key("decoder_prenet"), c.decoder_prenet);
  c.prenet_dropout = cfg.get_double(key("prenet_dropout"), c.prenet_dropout);
  c.attention_rnn_size = cfg.get_int(key("attention_rnn_size"), c.attention_rnn_size);
  c.decoder_rnn_size = cfg.get_int(key("decoder_rnn_size"), c.decoder_rnn_size);
  c.postnet_layers = cfg.get_int(key("postnet_layers"), c.postnet_layers);
  c.postnet_channels = cfg.get_int(key("postnet_channels"), c.postnet_channels);
  c.postnet_kernel = cfg.get_int(key("postnet_kernel"), c.postnet_kernel);
  c.mel_dim = cfg.get_int(key("mel_dim"), c.mel_dim);
  c.learning_rate = cfg.get_double(key("learning_rate"), c.learning_rate);
  c.batch_size = cfg.get_int(key("batch_size"), c.batch_size);
  c.max_epochs = cfg.get_int(key("max_epochs"), c.max_epochs);
  c.seed = static_cast<std::uint64_t>(cfg.get_int(key("seed"), static_cast<int>(c.seed)));
  c.validate();
  return c;
}

KeyValueConfig AcousticConfig::to_config() const {
  KeyValueConfig cfg;
  auto set = [&](const char* name, const std::string& value) { cfg.set(key(name), value); };
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  set("ph_embed_dim", std::to_string(ph_embed_dim));
  set("pi_embed_dim", std::to_string(pi_embed_dim));
  set("tone_embed_dim", std::to_string(tone_embed_dim));
  set("use_tone", b(use_tone));
  set("prenet_kernels", join_ints(prenet_kernels));
  set("prenet_channels", std::to_string(prenet_channels));
  set("cbhg_bank_size", std::to_string(cbhg_bank_size));
  set("cbhg_bank_channels", std::to_string(cbhg_bank_channels));
  set("cbhg_highway_layers", std::to_string(cbhg_highway_layers));
  set("cbhg_highway_size", std::to_string(cbhg_highway_size));
  set("cbhg_gru_size", std::to_string(cbhg_gru_size));
  set("downsample_factor", std::to_string(downsample_factor));
  set("use_attention", b(use_attention));
  set("num_mixtures", std::to_string(num_mixtures));
  set("sigma_min", fmt::format("{}", sigma_min));
  set("reduction", std::to_string(reduction));
  set("decoder_prenet", join_ints(decoder_prenet));
  set("prenet_dropout", fmt::format("{}", prenet_dropout));
  set("attention_rnn_size", std::to_string(attention_rnn_size));
  set("decoder_rnn_size", std::to_string(decoder_rnn_size));
  set("postnet_layers", std::to_string(postnet_layers));
  set("postnet_channels", std::to_string(postnet_channels));
  set("postnet_kernel", std::to_string(postnet_kernel));
  set("mel_dim", std::to_string(mel_dim));
  set("learning_rate", fmt::format("{}", learning_rate));
  set("batch_size", std::to_string(batch_size));
  set("max_epochs", std::to_string(max_epochs));
  set("seed", std::to_string(seed));
  return cfg;
}

void AcousticConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(key(name) + " must be >= 1");
  };
  positive(ph_embed_dim, "ph_embed_dim");
  positive(pi_embed_dim, "pi_embed_dim");
  if (use_tone) positive(tone_embed_dim, "tone_embed_dim");
  if (prenet_kernels.empty()) throw ConfigError(key("prenet_kernels") + " is empty");
  for (int k : prenet_kernels) positive(k, "prenet_kernels");
  positive(prenet_channels, "prenet_channels");
  positive(cbhg_bank_size, "cbhg_bank_size");
  positive(cbhg_bank_channels, "cbhg_bank_channels");
  if (cbhg_highway_layers < 0) throw ConfigError(key("cbhg_highway_layers") + " must be >= 0");
  positive(cbhg_highway_size, "cbhg_highway_size");
  positive(cbhg_gru_size, "cbhg_gru_size");
  positive(downsample_factor, "downsample_factor");
  positive(num_mixtures, "num_mixtures");
  if (!(sigma_min > 0.0)) throw ConfigError(key("sigma_min") + " must be > 0");
  positive(reduction, "reduction");
  if (decoder_prenet.empty()) throw ConfigError(key("decoder_prenet") + " is empty");
  for (int d : decoder_prenet) positive(d, "decoder_prenet");
  if (prenet_dropout < 0.0 || prenet_dropout >= 1.0) {
    throw ConfigError(key("prenet_dropout") + " must be in [0, 1)");
  }
  positive(attention_rnn_size, "attention_rnn_size");
  positive(decoder_rnn_size, "decoder_rnn_size");
  positive(postnet_layers, "postnet_layers");
  positive(postnet_channels, "postnet_channels");
  positive(postnet_kernel, "postnet_kernel");
  positive(mel_dim, "mel_dim");
  if (!(learning_rate > 0.0)) throw ConfigError(key("learning_rate") + " must be > 0");
  positive(batch_size, "batch_size");
  if (max_epochs < 0) throw ConfigError(key("max_epochs") + " must be >= 0");
}

int AcousticConfig::input_dim() const {
  return ph_embed_dim + pi_embed_dim + 3 + (use_tone ? tone_embed_dim : 0);
}

}  // namespace bytesing::acoustic
