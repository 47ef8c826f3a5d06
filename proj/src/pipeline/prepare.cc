#include "bytesing/pipeline/prepare.h"

#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/error.h"
#include "bytesing/common/tensor_file.h"
#include "bytesing/common/wav.h"
#include "bytesing/eval/mel.h"
#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/musicxml.h"
#include "bytesing/frontend/phoneme_set.h"
#include "bytesing/frontend/segment.h"

namespace bytesing::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestHeader =
    "id\tsong\tstart_sample\tnum_samples\tnum_phonemes\tlabel_frames\tmel_frames\tstatus";

fs::path feature_path(const fs::path& work_dir, const std::string& id, const char* kind) {
  return work_dir / "features" / (id + "." + kind);
}

json note_to_json(const frontend::NoteEvent& n) {
  return json{{"pitch", n.pitch_name},  {"midi", n.midi_number},
              {"beats_num", n.beats.num}, {"beats_den", n.beats.den},
              {"seconds", n.duration_sec}, {"rest", n.is_rest},
              {"lyric", n.lyric}};
}

frontend::NoteEvent note_from_json(const json& j) {
  frontend::NoteEvent n;
  n.pitch_name = j.at("pitch").get<std::string>();
  n.midi_number = j.at("midi").get<int>();
  n.beats = frontend::Beats{j.at("beats_num").get<std::int64_t>(),
                            j.at("beats_den").get<std::int64_t>()};
  n.duration_sec = j.at("seconds").get<double>();
  n.is_rest = j.at("rest").get<bool>();
  n.lyric = j.at("lyric").get<std::string>();
  return n;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

bool label_matches(const frontend::PhonemeEvent& ph, const std::string& label) {
  if (ph.tp == frontend::PhonemeType::kSilence) {
    return label == frontend::kRest || label == frontend::kSil;
  }
  return ph.ph == label;
}

}  // namespace

void write_manifest(const fs::path& path, const std::vector<ManifestRow>& rows) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    out << r.id << '\t' << r.song << '\t' << r.start_sample << '\t' << r.num_samples << '\t'
        << r.num_phonemes << '\t' << r.label_frames << '\t' << r.mel_frames << '\t' << r.status
        << '\n';
  }
  write_text(path, out.str());
}

std::vector<ManifestRow> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != kManifestHeader) throw ParseError(path.string() + ": unexpected header", 1);
  std::vector<ManifestRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream f(line);
    ManifestRow r;
    if (!(f >> r.id >> r.song >> r.start_sample >> r.num_samples >> r.num_phonemes >>
          r.label_frames >> r.mel_frames >> r.status)) {
      throw ParseError(path.string() + ": bad manifest row", line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string utterance_to_json(const frontend::UtteranceScore& utt) {
  json j;
  j["utterance_id"] = utt.utterance_id;
  j["tempo_bpm"] = utt.tempo_bpm;
  j["start_sec"] = utt.start_sec;
  j["syllables"] = json::array();
  for (const auto& syl : utt.syllables) {
    json s{{"pinyin", syl.pinyin}, {"tone", syl.tone}, {"note", note_to_json(syl.note)}};
    s["phonemes"] = json::array();
    for (const auto& ph : syl.phonemes) {
      s["phonemes"].push_back(json{{"ph", ph.ph},
                                   {"type", std::string(frontend::phoneme_type_name(ph.tp))},
                                   {"tone", ph.tone},
                                   {"note_seconds", ph.note_duration_sec},
                                   {"allocated_seconds", ph.allocated_sec},
                                   {"allocated_frames", ph.allocated_frames}});
    }
    j["syllables"].push_back(std::move(s));
  }
  return j.dump(1);
}

frontend::UtteranceScore utterance_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    frontend::UtteranceScore utt;
    utt.utterance_id = j.at("utterance_id").get<std::string>();
    utt.tempo_bpm = j.at("tempo_bpm").get<double>();
    utt.start_sec = j.at("start_sec").get<double>();
    for (const auto& s : j.at("syllables")) {
      frontend::SyllableEvent syl;
      syl.pinyin = s.at("pinyin").get<std::string>();
      syl.tone = s.at("tone").get<int>();
      syl.note = note_from_json(s.at("note"));
      for (const auto& p : s.at("phonemes")) {
        frontend::PhonemeEvent ph;
        ph.ph = p.at("ph").get<std::string>();
        ph.tp = frontend::phoneme_type_from_name(p.at("type").get<std::string>());
        ph.tone = p.at("tone").get<int>();
        ph.note_duration_sec = p.at("note_seconds").get<double>();
        ph.allocated_sec = p.at("allocated_seconds").get<double>();
        ph.allocated_frames = p.at("allocated_frames").get<int>();
        syl.phonemes.push_back(std::move(ph));
      }
      utt.syllables.push_back(std::move(syl));
    }
    return utt;
  } catch (const json::exception& e) {
    throw ParseError(std::string("utterance json: ") + e.what(), 0);
  }
}

std::vector<frontend::UtteranceScore> label_utterances(const frontend::MusicScore& score,
                                                       const std::vector<LabelSpan>& labels,
                                                       double rest_threshold_sec,
                                                       const std::string& id_prefix) {
  auto utterances = frontend::segment_utterances(score, rest_threshold_sec, id_prefix);
  for (auto& utt : utterances) {
    const long utt_start = std::lround(utt.start_sec * kSampleRate);
    auto frame_of = [&](long sample) {
      return std::lround(static_cast<double>(sample - utt_start) / kHopSamples);
    };
    double syl_start = utt.start_sec;
    for (auto& syl : utt.syllables) {
      const double syl_end = syl_start + syl.note.duration_sec;
      const long lo = std::lround(syl_start * kSampleRate);
      const long hi = std::lround(syl_end * kSampleRate);
      std::vector<const LabelSpan*> spans;
      for (const auto& l : labels) {
        if (l.start >= lo && l.start < hi) spans.push_back(&l);
      }
      if (spans.size() != syl.phonemes.size()) {
        throw ValidationError(utt.utterance_id + ": syllable '" + syl.pinyin + "' at " +
                              std::to_string(syl_start) + " s has " +
                              std::to_string(spans.size()) + " labels for " +
                              std::to_string(syl.phonemes.size()) + " phonemes");
      }
      for (std::size_t k = 0; k < spans.size(); ++k) {
        auto& ph = syl.phonemes[k];
        if (!label_matches(ph, spans[k]->ph)) {
          throw ValidationError(utt.utterance_id + ": label '" + spans[k]->ph +
                                "' where the score has '" + ph.ph + "'");
        }
        ph.allocated_frames = static_cast<int>(frame_of(spans[k]->end) - frame_of(spans[k]->start));
        if (ph.allocated_frames < 1) {
          throw ValidationError(utt.utterance_id + ": phoneme '" + ph.ph +
                                "' is shorter than one frame");
        }
        ph.allocated_sec = ph.allocated_frames * kHopSec;
      }
      syl_start = syl_end;
    }
  }
  return utterances;
}

namespace {

// Truncates whichever of (labels, mel) is one frame longer.
void reconcile_frames(frontend::UtteranceScore& utt, Matrix& mel, int& label_frames) {
  if (mel.rows() > label_frames) {
    mel.conservativeResize(label_frames, Eigen::NoChange);
    return;
  }
  while (label_frames > mel.rows()) {
    // Take the excess from the last phoneme that can spare a frame.
    bool taken = false;
    for (auto syl = utt.syllables.rbegin(); syl != utt.syllables.rend() && !taken; ++syl) {
      for (auto ph = syl->phonemes.rbegin(); ph != syl->phonemes.rend(); ++ph) {
        if (ph->allocated_frames > 1) {
          --ph->allocated_frames;
          ph->allocated_sec = ph->allocated_frames * kHopSec;
          taken = true;
          break;
        }
      }
    }
    if (!taken) throw ValidationError(utt.utterance_id + ": cannot shorten labels");
    --label_frames;
  }
}

}  // namespace

PrepareReport prepare_corpus(const fs::path& corpus_dir, const fs::path& work_dir,
                             double rest_threshold_sec) {
  if (!fs::is_directory(corpus_dir)) {
    throw IoError("corpus directory '" + corpus_dir.string() + "' does not exist");
  }
  fs::create_directories(work_dir / "features");
  std::map<std::string, std::set<std::string>> parts;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    const auto ext = entry.path().extension().string();
    if (ext == ".xml" || ext == ".wav" || ext == ".lab") {
      parts[entry.path().stem().string()].insert(ext);
    }
  }

  PrepareReport report;
  for (const auto& [song, exts] : parts) {
    for (const char* need : {".xml", ".wav", ".lab"}) {
      if (!exts.count(need)) report.failures.push_back(song + ": missing " + need);
    }
    if (exts.size() != 3) continue;
    std::vector<frontend::UtteranceScore> utts;
    Waveform wave;
    try {
      const auto score = frontend::load_musicxml(corpus_dir / (song + ".xml"),
                                                 frontend::Lexicon::builtin());
      utts = label_utterances(score, read_labels(corpus_dir / (song + ".lab")),
                              rest_threshold_sec, song);
      wave = read_wav(corpus_dir / (song + ".wav"));
      if (wave.sample_rate != kSampleRate) {
        throw ValidationError("sample rate " + std::to_string(wave.sample_rate) +
                              " != " + std::to_string(kSampleRate));
      }
    } catch (const Error& e) {
      report.failures.push_back(song + ": " + e.what());
      continue;
    }

    for (auto& utt : utts) {
      ManifestRow row;
      row.id = utt.utterance_id;
      row.song = song;
      row.start_sample = std::lround(utt.start_sec * kSampleRate);
      const long end = std::lround((utt.start_sec + utt.total_seconds()) * kSampleRate);
      row.num_samples = std::min<long>(end, static_cast<long>(wave.samples.size())) -
                        row.start_sample;
      row.num_phonemes = static_cast<int>(utt.num_phonemes());
      if (row.num_samples <= 0) {
        report.failures.push_back(row.id + ": no audio");
        continue;
      }
      const std::vector<double> audio(wave.samples.begin() + row.start_sample,
                                      wave.samples.begin() + row.start_sample + row.num_samples);
      Matrix mel = eval::extract_mel(audio);
      row.mel_frames = static_cast<int>(mel.rows());
      int label_frames = 0;
      for (int f : frontend::allocated_frames(utt)) label_frames += f;
      if (std::abs(row.mel_frames - label_frames) >= 2) {
        row.status = kStatusFlagged;
        report.failures.push_back(row.id + ": " + std::to_string(row.mel_frames) +
                                  " mel frames vs " + std::to_string(label_frames) +
                                  " label frames");
      } else {
        reconcile_frames(utt, mel, label_frames);
      }
      row.label_frames = label_frames;

      std::vector<std::int32_t> pcm;
      pcm.reserve(static_cast<std::size_t>(label_frames) * kHopSamples);
      for (std::size_t i = 0; i < static_cast<std::size_t>(label_frames) * kHopSamples; ++i) {
        pcm.push_back(i < audio.size() ? quantize_pcm16(audio[i]) : 0);
      }
      write_text(feature_path(work_dir, row.id, "utt.json"), utterance_to_json(utt));
      save_tensor(feature_path(work_dir, row.id, "mel.bstf"), Tensor::from_matrix(mel));
      save_tensor(feature_path(work_dir, row.id, "pcm.bstf"), Tensor::from_ints(pcm));
      const auto frames = frontend::allocated_frames(utt);
      save_tensor(feature_path(work_dir, row.id, "dur.bstf"),
                  Tensor::from_ints(std::vector<std::int32_t>(frames.begin(), frames.end())));
      if (row.status == kStatusOk) {
        const frontend::AcousticInput x = frontend::build_acoustic_inputs(utt);
        std::vector<std::int32_t> ids;
        for (int t = 0; t < x.num_frames(); ++t) {
          ids.push_back(x.ph_ids[static_cast<std::size_t>(t)]);
          ids.push_back(x.pi_ids[static_cast<std::size_t>(t)]);
          ids.push_back(x.tone_ids[static_cast<std::size_t>(t)]);
        }
        save_tensor(feature_path(work_dir, row.id, "xa.bstf"),
                    Tensor::from_ints(ids, {static_cast<std::uint32_t>(x.num_frames()), 3}));
        save_tensor(feature_path(work_dir, row.id, "po.bstf"), Tensor::from_matrix(x.po));
      }
      report.rows.push_back(std::move(row));
    }
  }

  write_manifest(work_dir / "manifest.tsv", report.rows);
  std::ostringstream failures;
  for (const auto& f : report.failures) failures << f << '\n';
  write_text(work_dir / "prepare_failures.txt", failures.str());
  for (const auto& f : report.failures) spdlog::warn("prepare: {}", f);
  spdlog::info("prepare: {} utterances, {} problems", report.rows.size(),
               report.failures.size());
  return report;
}

PreparedUtterance load_prepared(const fs::path& work_dir, const ManifestRow& row) {
  PreparedUtterance p;
  p.row = row;
  p.score = utterance_from_json(read_text(feature_path(work_dir, row.id, "utt.json")));
  p.input = frontend::build_acoustic_inputs(p.score);
  p.mel = load_tensor(feature_path(work_dir, row.id, "mel.bstf")).to_matrix();
  for (std::int32_t s : load_tensor(feature_path(work_dir, row.id, "pcm.bstf")).to_ints()) {
    p.pcm.push_back(static_cast<std::int16_t>(s));
  }
  if (p.mel.rows() != p.input.num_frames()) {
    throw ValidationError(row.id + ": mel has " + std::to_string(p.mel.rows()) +
                          " frames but the labels give " + std::to_string(p.input.num_frames()));
  }
  return p;
}

std::vector<PreparedUtterance> load_prepared_corpus(const fs::path& work_dir) {
  std::vector<PreparedUtterance> out;
  for (const auto& row : read_manifest(work_dir / "manifest.tsv")) {
    if (row.status == kStatusOk) out.push_back(load_prepared(work_dir, row));
  }
  if (out.empty()) throw ValidationError("no usable utterances in '" + work_dir.string() + "'");
  return out;
}

}  // namespace bytesing::pipeline
