#include "bytesing/pipeline/stages.h"

#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"
#include "bytesing/common/tensor_file.h"
#include "bytesing/common/wav.h"
#include "bytesing/eval/mel.h"
#include "bytesing/frontend/features.h"
#include "bytesing/frontend/segment.h"

namespace bytesing::pipeline {

namespace fs = std::filesystem;

namespace {

class LossLog {
 public:
  LossLog(const PipelineConfig& cfg, Stage stage) {
    fs::create_directories(cfg.work_dir / "logs");
    // Named after the checkpoint so the two acoustic variants keep separate logs.
    path_ = cfg.work_dir / "logs" / (cfg.checkpoint(stage).stem().string() + "_loss.tsv");
    out_.open(path_);
    if (!out_) throw IoError("cannot write '" + path_.string() + "'");
    out_.precision(9);
  }
  void add(int step, double loss) { out_ << step << '\t' << loss << '\n'; }

 private:
  fs::path path_;
  std::ofstream out_;
};

fs::path prepare_checkpoint_dir(const PipelineConfig& cfg, Stage stage) {
  const fs::path path = cfg.checkpoint(stage);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

void require_checkpoint(const PipelineConfig& cfg, Stage stage) {
  if (!fs::exists(cfg.checkpoint(stage))) {
    throw IoError(stage_name(stage) + " checkpoint not found at '" +
                  cfg.checkpoint(stage).string() + "'; run train-" + stage_name(stage) +
                  " first");
  }
}

}  // namespace

duration::DurationTrainResult run_train_duration(const PipelineConfig& cfg) {
  std::vector<frontend::UtteranceScore> data;
  for (auto& p : load_prepared_corpus(cfg.work_dir)) data.push_back(std::move(p.score));
  duration::DurationModel model(cfg.duration);
  LossLog log(cfg, Stage::kDuration);
  const auto result = duration::train_duration(
      model, data, [&](int epoch, double loss) { log.add(epoch, loss); });
  model.save(prepare_checkpoint_dir(cfg, Stage::kDuration));
  return result;
}

acoustic::AcousticTrainResult run_train_acoustic(const PipelineConfig& cfg) {
  std::vector<acoustic::AcousticExample> data;
  for (auto& p : load_prepared_corpus(cfg.work_dir)) {
    data.push_back(acoustic::AcousticExample{p.row.id, std::move(p.input), std::move(p.mel)});
  }
  acoustic::AcousticModel model(cfg.acoustic);
  LossLog log(cfg, Stage::kAcoustic);
  const auto result = acoustic::train_acoustic(
      model, data, [&](int epoch, double loss) { log.add(epoch, loss); });
  model.save(prepare_checkpoint_dir(cfg, Stage::kAcoustic));
  return result;
}

vocoder::VocoderTrainResult run_train_vocoder(const PipelineConfig& cfg) {
  std::vector<vocoder::VocoderExample> data;
  for (auto& p : load_prepared_corpus(cfg.work_dir)) {
    data.push_back(vocoder::make_example(p.row.id, p.mel, p.pcm, cfg.hop));
  }
  vocoder::WaveRnn model(cfg.vocoder);
  LossLog log(cfg, Stage::kVocoder);
  const auto result = vocoder::train_vocoder(
      model, data, [&](int step, double loss) { log.add(step, loss); });
  model.save(prepare_checkpoint_dir(cfg, Stage::kVocoder));
  return result;
}

duration::DurationModel load_duration_stage(const PipelineConfig& cfg) {
  require_checkpoint(cfg, Stage::kDuration);
  auto model = duration::DurationModel::load(cfg.checkpoint(Stage::kDuration));
  check_config_echo("duration", model.config().to_config(), cfg.source,
                    cfg.duration.to_config());
  return model;
}

acoustic::AcousticModel load_acoustic_stage(const PipelineConfig& cfg) {
  require_checkpoint(cfg, Stage::kAcoustic);
  auto model = acoustic::AcousticModel::load(cfg.checkpoint(Stage::kAcoustic));
  check_config_echo("acoustic", model.config().to_config(), cfg.source,
                    cfg.acoustic.to_config());
  return model;
}

vocoder::WaveRnn load_vocoder_stage(const PipelineConfig& cfg) {
  require_checkpoint(cfg, Stage::kVocoder);
  auto model = vocoder::WaveRnn::load(cfg.checkpoint(Stage::kVocoder));
  check_config_echo("vocoder", model.config().to_config(), cfg.source,
                    cfg.vocoder.to_config());
  return model;
}

Synthesizer::Synthesizer(const PipelineConfig& cfg, bool load_vocoder)
    : cfg_(cfg), duration_(load_duration_stage(cfg)), acoustic_(load_acoustic_stage(cfg)) {
  if (load_vocoder) vocoder_.emplace(load_vocoder_stage(cfg));
}

SynthesisResult Synthesizer::run(const frontend::MusicScore& score, vocoder::GenerateMode mode,
                                 std::uint64_t seed) const {
  SynthesisResult out;
  long total_samples = 0;
  for (const auto& n : score.notes) {
    out.score_seconds += n.duration_sec;
    total_samples += std::lround(n.duration_sec * cfg_.sample_rate);
  }
  out.utterances = frontend::segment_utterances(score, cfg_.rest_threshold_sec, "synth");
  if (vocoder_) out.audio.assign(static_cast<std::size_t>(total_samples), 0.0);
  std::uint64_t utt_seed = seed;
  for (auto& utt : out.utterances) {
    duration::apply_prediction(utt, duration::predict_utterance(duration_, utt, kHopSec));
    const auto x = frontend::build_acoustic_inputs(utt);
    auto mel = acoustic::synthesize_mel(acoustic_, x, utt_seed);
    if (vocoder_) {
      const auto wave = vocoder_->generate(mel.mel, mode, utt_seed);
      const long start = std::lround(utt.start_sec * cfg_.sample_rate);
      const long end = std::min(
          total_samples, std::lround((utt.start_sec + utt.total_seconds()) * cfg_.sample_rate));
      for (long n = start; n < end && n - start < static_cast<long>(wave.size()); ++n) {
        out.audio[static_cast<std::size_t>(n)] = wave[static_cast<std::size_t>(n - start)];
      }
    }
    out.mels.push_back(std::move(mel.mel));
    out.traces.push_back(std::move(mel.trace));
    ++utt_seed;
  }
  return out;
}

eval::MetricReport evaluate_files(const fs::path& ref, const fs::path& hyp) {
  const auto ext = ref.extension().string();
  if (hyp.extension().string() != ext) {
    throw ValidationError("evaluate needs two files of the same kind");
  }
  if (ext == ".bstf") {
    eval::MetricReport report;
    report.msd_db =
        eval::msd_db(load_tensor(ref).to_matrix(), load_tensor(hyp).to_matrix());
    return report;
  }
  if (ext != ".wav") throw ValidationError("evaluate expects .wav or .bstf files");
  auto a = read_wav(ref).samples;
  auto b = read_wav(hyp).samples;
  const long fa = frames_for_samples(static_cast<long>(a.size()));
  const long fb = frames_for_samples(static_cast<long>(b.size()));
  if (std::abs(fa - fb) > 1) {
    throw ValidationError("waveforms differ by " + std::to_string(std::abs(fa - fb)) +
                          " frames; evaluate does not time-warp");
  }
  const std::size_t n = std::min(a.size(), b.size());
  a.resize(n);
  b.resize(n);
  return eval::evaluate_waves(a, b);
}

}  // namespace bytesing::pipeline
