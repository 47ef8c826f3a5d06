#ifndef BYTESING_PIPELINE_STAGES_H_
#define BYTESING_PIPELINE_STAGES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "bytesing/acoustic/model.h"
#include "bytesing/acoustic/train.h"
#include "bytesing/duration/model.h"
#include "bytesing/eval/f0.h"
#include "bytesing/eval/metrics.h"
#include "bytesing/pipeline/config.h"
#include "bytesing/pipeline/prepare.h"
#include "bytesing/vocoder/model.h"
#include "bytesing/vocoder/train.h"

namespace bytesing::pipeline {

// Each trainer reads the prepared corpus under cfg.work_dir, writes the
// checkpoint to cfg.checkpoint(stage) and the loss curve to
// <work_dir>/logs/<checkpoint stem>_loss.tsv.
duration::DurationTrainResult run_train_duration(const PipelineConfig& cfg);
acoustic::AcousticTrainResult run_train_acoustic(const PipelineConfig& cfg);
vocoder::VocoderTrainResult run_train_vocoder(const PipelineConfig& cfg);

// Throws IoError naming the stage when its checkpoint is missing.
duration::DurationModel load_duration_stage(const PipelineConfig& cfg);
acoustic::AcousticModel load_acoustic_stage(const PipelineConfig& cfg);
vocoder::WaveRnn load_vocoder_stage(const PipelineConfig& cfg);

struct SynthesisResult {
  std::vector<double> audio;  // empty when no vocoder was loaded
  std::vector<frontend::UtteranceScore> utterances;  // with predicted frames
  std::vector<Matrix> mels;
  std::vector<acoustic::AttentionTrace> traces;
  double score_seconds = 0.0;  // sum of every note and rest
};

// Score -> segment -> duration prediction and constraints -> acoustic model
// -> vocoder. Utterance audio is placed at its offset in the song; rests
// between utterances are silent, so the output spans the whole score.
class Synthesizer {
 public:
  // The vocoder is optional so mel-only synthesis works without it.
  Synthesizer(const PipelineConfig& cfg, bool load_vocoder = true);

  SynthesisResult run(const frontend::MusicScore& score,
                      vocoder::GenerateMode mode = vocoder::GenerateMode::kSample,
                      std::uint64_t seed = 1) const;

  const acoustic::AcousticModel& acoustic_model() const { return acoustic_; }

 private:
  PipelineConfig cfg_;
  duration::DurationModel duration_;
  acoustic::AcousticModel acoustic_;
  std::optional<vocoder::WaveRnn> vocoder_;
};

// Compares two WAV files or two BSTF mel files (by extension). Waveforms
// whose frame counts differ by one are cut to the shorter; larger
// differences are an error. Mel input yields no F0 metrics.
eval::MetricReport evaluate_files(const std::filesystem::path& ref,
                                  const std::filesystem::path& hyp);

}  // namespace bytesing::pipeline

#endif  // BYTESING_PIPELINE_STAGES_H_
