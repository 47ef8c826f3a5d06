#ifndef BYTESING_PIPELINE_CONFIG_H_
#define BYTESING_PIPELINE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "bytesing/acoustic/config.h"
#include "bytesing/common/config.h"
#include "bytesing/duration/model.h"
#include "bytesing/pipeline/toy_corpus.h"
#include "bytesing/vocoder/config.h"

namespace bytesing::pipeline {

enum class Stage { kDuration, kAcoustic, kVocoder };

std::string stage_name(Stage stage);

// One key=value file drives every stage:
//   paths.corpus, paths.workdir, paths.<stage>_checkpoint
//   audio.sample_rate, audio.hop (fixed at 24000 / 300)
//   frontend.rest_threshold
//   pipeline.seed
//   duration.*, acoustic.*, vocoder.*, toy.*
struct PipelineConfig {
  std::filesystem::path corpus_dir = "corpus";
  std::filesystem::path work_dir = "work";
  int sample_rate = kSampleRate;
  int hop = kHopSamples;
  double rest_threshold_sec = 0.5;
  std::uint64_t seed = 1;

  duration::DurationModelConfig duration;
  acoustic::AcousticConfig acoustic;
  vocoder::VocoderConfig vocoder;
  ToyCorpusSpec toy;

  // The entries as written, used to detect conflicts with checkpoints.
  KeyValueConfig source;

  static PipelineConfig from_config(const KeyValueConfig& cfg);
  static PipelineConfig load(const std::filesystem::path& path);
  KeyValueConfig to_config() const;
  // Hop, sample rate and mel width must agree across stages.
  void validate() const;

  std::filesystem::path checkpoint(Stage stage) const;
};

// Throws ConfigError naming every key that the config sets explicitly and
// that differs from the checkpoint's embedded value. Both sides are
// canonicalised through `canonical` first.
void check_config_echo(const std::string& stage, const KeyValueConfig& checkpoint_config,
                       const KeyValueConfig& explicit_config,
                       const KeyValueConfig& canonical_config);

}  // namespace bytesing::pipeline

#endif  // BYTESING_PIPELINE_CONFIG_H_
