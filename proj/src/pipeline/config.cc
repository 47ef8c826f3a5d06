#include "bytesing/pipeline/config.h"

#include <spdlog/fmt/fmt.h>

#include "bytesing/common/error.h"

namespace bytesing::pipeline {

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kDuration:
      return "duration";
    case Stage::kAcoustic:
      return "acoustic";
    case Stage::kVocoder:
      return "vocoder";
  }
  return "unknown";
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& cfg) {
  PipelineConfig c;
  c.source = cfg;
  c.corpus_dir = cfg.get_string("paths.corpus", c.corpus_dir.string());
  c.work_dir = cfg.get_string("paths.workdir", c.work_dir.string());
  c.sample_rate = cfg.get_int("audio.sample_rate", c.sample_rate);
  c.hop = cfg.get_int("audio.hop", c.hop);
  c.rest_threshold_sec = cfg.get_double("frontend.rest_threshold", c.rest_threshold_sec);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("pipeline.seed", static_cast<int>(c.seed)));
  c.duration = duration::DurationModelConfig::from_config(cfg);
  c.acoustic = acoustic::AcousticConfig::from_config(cfg);
  c.vocoder = vocoder::VocoderConfig::from_config(cfg);
  c.toy = ToyCorpusSpec::from_config(cfg);
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  return from_config(KeyValueConfig::load(path));
}

KeyValueConfig PipelineConfig::to_config() const {
  KeyValueConfig out;
  out.set("paths.corpus", corpus_dir.string());
  out.set("paths.workdir", work_dir.string());
  out.set("audio.sample_rate", std::to_string(sample_rate));
  out.set("audio.hop", std::to_string(hop));
  out.set("frontend.rest_threshold", fmt::format("{}", rest_threshold_sec));
  out.set("pipeline.seed", std::to_string(seed));
  for (const KeyValueConfig& part :
       {duration.to_config(), acoustic.to_config(), vocoder.to_config(), toy.to_config()}) {
    for (const auto& [k, v] : part.entries()) out.set(k, v);
  }
  for (Stage s : {Stage::kDuration, Stage::kAcoustic, Stage::kVocoder}) {
    const std::string key = "paths." + stage_name(s) + "_checkpoint";
    if (auto v = source.find(key)) out.set(key, *v);
  }
  return out;
}

void PipelineConfig::validate() const {
  if (sample_rate != kSampleRate) {
    throw ConfigError("audio.sample_rate must be " + std::to_string(kSampleRate) + ", got " +
                      std::to_string(sample_rate));
  }
  if (hop != kHopSamples) {
    throw ConfigError("audio.hop must be " + std::to_string(kHopSamples) + ", got " +
                      std::to_string(hop));
  }
  if (vocoder.hop != hop) {
    throw ConfigError("vocoder.hop (" + std::to_string(vocoder.hop) +
                      ") disagrees with audio.hop (" + std::to_string(hop) + ")");
  }
  if (acoustic.mel_dim != kNumMels || vocoder.mel_dim != kNumMels) {
    throw ConfigError("acoustic.mel_dim and vocoder.mel_dim must both be " +
                      std::to_string(kNumMels) + " for the pipeline");
  }
  if (!(rest_threshold_sec > 0.0)) throw ConfigError("frontend.rest_threshold must be > 0");
}

std::filesystem::path PipelineConfig::checkpoint(Stage stage) const {
  const std::string name = stage_name(stage);
  if (auto v = source.find("paths." + name + "_checkpoint")) return *v;
  // The no-attention variant trains side by side with the default one.
  if (stage == Stage::kAcoustic && !acoustic.use_attention) {
    return work_dir / "checkpoints" / "acoustic_noattn.bsck";
  }
  return work_dir / "checkpoints" / (name + ".bsck");
}

void check_config_echo(const std::string& stage, const KeyValueConfig& checkpoint_config,
                       const KeyValueConfig& explicit_config,
                       const KeyValueConfig& canonical_config) {
  std::string conflicts;
  for (const auto& [key, stored] : checkpoint_config.entries()) {
    if (!explicit_config.has(key)) continue;
    const auto wanted = canonical_config.find(key);
    if (wanted && *wanted != stored) {
      conflicts += " " + key + "=" + *wanted + " (checkpoint " + stored + ")";
    }
  }
  if (!conflicts.empty()) {
    throw ConfigError(stage + " checkpoint was trained with a different config:" + conflicts);
  }
}

}  // namespace bytesing::pipeline
