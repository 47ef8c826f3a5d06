// Command-line driver for every pipeline stage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"
#include "bytesing/common/tensor_file.h"
#include "bytesing/common/wav.h"
#include "bytesing/eval/alignment.h"
#include "bytesing/eval/f0.h"
#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/musicxml.h"
#include "bytesing/pipeline/config.h"
#include "bytesing/pipeline/prepare.h"
#include "bytesing/pipeline/stages.h"
#include "bytesing/pipeline/toy_corpus.h"

namespace fs = std::filesystem;
using namespace bytesing;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  bool use_attention = true;
  std::vector<CLI::Option*> use_attention_opts;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  cmd->add_option("--set", opts.overrides, "override one config key (key=value)");
}

void add_attention_flag(CLI::App* cmd, CommonOptions& opts) {
  opts.use_attention_opts.push_back(cmd->add_flag(
      "--use-attention,!--no-attention", opts.use_attention,
      "acoustic model variant; --use-attention=false selects the hard-alignment decoder"));
}

pipeline::PipelineConfig load_config(const CommonOptions& opts) {
  KeyValueConfig kv;
  if (!opts.config_path.empty()) kv = KeyValueConfig::load(opts.config_path);
  for (const auto& item : opts.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects key=value, got '" + item + "'");
    }
    kv.set(item.substr(0, eq), item.substr(eq + 1));
  }
  for (const CLI::Option* opt : opts.use_attention_opts) {
    if (opt->count() > 0) kv.set("acoustic.use_attention", opts.use_attention ? "true" : "false");
  }
  return pipeline::PipelineConfig::from_config(kv);
}

vocoder::GenerateMode parse_mode(const std::string& mode) {
  if (mode == "sample") return vocoder::GenerateMode::kSample;
  if (mode == "argmax") return vocoder::GenerateMode::kArgmax;
  throw ConfigError("--mode must be sample or argmax, got '" + mode + "'");
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void write_trace_csv(const fs::path& dir, const std::string& id,
                     const acoustic::AttentionTrace& trace) {
  if (trace.alpha.size() == 0) return;
  eval::write_matrix_csv((dir / (id + ".alpha.csv")).string(), trace.alpha);
}

int run_gen_toy(const CommonOptions& opts, const std::string& out_dir) {
  const auto cfg = load_config(opts);
  const fs::path dir = out_dir.empty() ? cfg.corpus_dir : fs::path(out_dir);
  const auto names = pipeline::write_toy_corpus(cfg.toy, dir);
  print_json({{"corpus", dir.string()}, {"songs", names}});
  return 0;
}

int run_prepare(const CommonOptions& opts) {
  const auto cfg = load_config(opts);
  const auto report =
      pipeline::prepare_corpus(cfg.corpus_dir, cfg.work_dir, cfg.rest_threshold_sec);
  int flagged = 0;
  for (const auto& r : report.rows) flagged += r.status == pipeline::kStatusFlagged;
  for (const auto& f : report.failures) spdlog::warn("prepare: {}", f);
  print_json({{"utterances", report.rows.size()},
              {"flagged", flagged},
              {"failures", report.failures},
              {"manifest", (cfg.work_dir / "manifest.tsv").string()}});
  return 0;
}

int run_train(const CommonOptions& opts, pipeline::Stage stage) {
  const auto cfg = load_config(opts);
  nlohmann::json out = {{"stage", pipeline::stage_name(stage)},
                        {"checkpoint", cfg.checkpoint(stage).string()}};
  switch (stage) {
    case pipeline::Stage::kDuration: {
      const auto r = pipeline::run_train_duration(cfg);
      out["final_loss"] = r.epoch_losses.empty() ? 0.0 : r.epoch_losses.back();
      break;
    }
    case pipeline::Stage::kAcoustic: {
      const auto r = pipeline::run_train_acoustic(cfg);
      out["final_loss"] = r.epoch_losses.empty() ? 0.0 : r.epoch_losses.back();
      break;
    }
    case pipeline::Stage::kVocoder: {
      const auto r = pipeline::run_train_vocoder(cfg);
      out["final_loss"] = r.step_losses.empty() ? 0.0 : r.step_losses.back();
      break;
    }
  }
  print_json(out);
  return 0;
}

struct SynthOptions {
  std::string score;
  std::string out;
  std::string mel_dir;
  std::string mode = "sample";
  std::uint64_t seed = 1;
  bool mel_only = false;
};

int run_synth(const CommonOptions& opts, const SynthOptions& so) {
  const auto cfg = load_config(opts);
  if (so.out.empty() && !so.mel_only) throw ConfigError("synth needs --out or --mel-only");
  const auto score = frontend::load_musicxml(so.score, frontend::Lexicon::builtin());
  const pipeline::Synthesizer synth(cfg, !so.mel_only);
  const auto result = synth.run(score, parse_mode(so.mode), so.seed);

  const fs::path mel_dir = so.mel_dir.empty()
                               ? cfg.work_dir / "synth" / fs::path(so.score).stem()
                               : fs::path(so.mel_dir);
  fs::create_directories(mel_dir);
  std::vector<std::string> mel_files;
  for (std::size_t i = 0; i < result.mels.size(); ++i) {
    const std::string& id = result.utterances[i].utterance_id;
    const fs::path p = mel_dir / (id + ".mel.bstf");
    save_tensor(p, Tensor::from_matrix(result.mels[i]));
    write_trace_csv(mel_dir, id, result.traces[i]);
    mel_files.push_back(p.string());
  }
  nlohmann::json out = {{"score_seconds", result.score_seconds}, {"mels", mel_files}};
  if (!so.mel_only) {
    write_wav(so.out, Waveform{cfg.sample_rate, result.audio});
    out["wav"] = so.out;
    out["samples"] = result.audio.size();
  }
  print_json(out);
  return 0;
}

int run_vocode(const CommonOptions& opts, const std::string& mel_path, const std::string& out,
               const std::string& mode, std::uint64_t seed) {
  const auto cfg = load_config(opts);
  const auto model = pipeline::load_vocoder_stage(cfg);
  const Matrix mel = load_tensor(mel_path).to_matrix();
  write_wav(out, Waveform{cfg.sample_rate, model.generate(mel, parse_mode(mode), seed)});
  print_json({{"wav", out}, {"frames", mel.rows()}});
  return 0;
}

int run_eval(const std::string& ref, const std::string& hyp, const std::string& json_out,
             const std::string& f0_csv) {
  const auto report = pipeline::evaluate_files(ref, hyp);
  const std::string text = report.to_json();
  if (!json_out.empty()) {
    std::ofstream f(json_out);
    if (!f) throw IoError("cannot write '" + json_out + "'");
    f << text << '\n';
  }
  if (!f0_csv.empty()) {
    // Overlay of both contours; 0 marks an unvoiced frame.
    const auto a = eval::extract_f0(read_wav(ref).samples);
    const auto b = eval::extract_f0(read_wav(hyp).samples);
    std::ofstream f(f0_csv);
    if (!f) throw IoError("cannot write '" + f0_csv + "'");
    f << "frame,ref_hz,hyp_hz\n";
    for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t) {
      f << t << ',' << (a.voiced[t] ? a.f0_hz[t] : 0.0) << ','
        << (b.voiced[t] ? b.f0_hz[t] : 0.0) << '\n';
    }
  }
  std::cout << text << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bytesing: score-to-singing pipeline"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  CommonOptions opts;

  auto* gen = app.add_subcommand("gen-toy", "write the synthetic toy corpus");
  add_common(gen, opts);
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory (default paths.corpus)");

  auto* prep = app.add_subcommand("prepare", "extract features and manifests");
  add_common(prep, opts);

  auto* tdur = app.add_subcommand("train-duration", "train the duration model");
  add_common(tdur, opts);
  auto* tac = app.add_subcommand("train-acoustic", "train the acoustic model");
  add_common(tac, opts);
  add_attention_flag(tac, opts);
  auto* tvoc = app.add_subcommand("train-vocoder", "train the vocoder");
  add_common(tvoc, opts);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "synthesize a MusicXML score");
  add_common(synth, opts);
  add_attention_flag(synth, opts);
  synth->add_option("--score", so.score, "MusicXML file")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", so.out, "output WAV");
  synth->add_option("--mel-dir", so.mel_dir, "where per-utterance mels are written");
  synth->add_option("--mode", so.mode, "vocoder sampling: sample|argmax");
  synth->add_option("--seed", so.seed, "generation seed");
  synth->add_flag("--mel-only", so.mel_only, "stop after the acoustic model");

  std::string voc_mel;
  std::string voc_out;
  std::string voc_mode = "sample";
  std::uint64_t voc_seed = 1;
  auto* vocode = app.add_subcommand("vocode", "run the vocoder on a BSTF mel");
  add_common(vocode, opts);
  vocode->add_option("--mel", voc_mel, "T x 80 mel tensor")->required()->check(CLI::ExistingFile);
  vocode->add_option("--out", voc_out, "output WAV")->required();
  vocode->add_option("--mode", voc_mode, "sample|argmax");
  vocode->add_option("--seed", voc_seed, "generation seed");

  std::string ref;
  std::string hyp;
  std::string json_out;
  std::string f0_csv;
  auto* ev = app.add_subcommand("eval", "compare two WAVs or two mel tensors");
  ev->add_option("--config", opts.config_path, "accepted for symmetry; unused");
  ev->add_option("--ref", ref, "reference")->required()->check(CLI::ExistingFile);
  ev->add_option("--hyp", hyp, "hypothesis")->required()->check(CLI::ExistingFile);
  ev->add_option("--json", json_out, "also write the report here");
  ev->add_option("--f0-csv", f0_csv, "write both F0 contours (WAV input only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spdlog::set_default_logger(spdlog::stderr_color_mt("bytesing"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "gen-toy") return run_gen_toy(opts, gen_out);
    if (command == "prepare") return run_prepare(opts);
    if (command == "train-duration") return run_train(opts, pipeline::Stage::kDuration);
    if (command == "train-acoustic") return run_train(opts, pipeline::Stage::kAcoustic);
    if (command == "train-vocoder") return run_train(opts, pipeline::Stage::kVocoder);
    if (command == "synth") return run_synth(opts, so);
    if (command == "vocode") return run_vocode(opts, voc_mel, voc_out, voc_mode, voc_seed);
    if (command == "eval") return run_eval(ref, hyp, json_out, f0_csv);
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", e.kind()}, {"command", command}, {"message", e.what()}}
                     .dump()
              << '\n';
    return e.kind() == "config" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"command", command},
                                {"message", e.what()}}
                     .dump()
              << '\n';
    return 1;
  }
  return 1;
}
