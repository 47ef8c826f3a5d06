#include "bytesing/frontend/score.h"

#include <numeric>

#include <nlohmann/json.hpp>

#include "bytesing/common/error.h"

namespace bytesing::frontend {

using nlohmann::json;

Beats Beats::from_divisions(std::int64_t duration, std::int64_t divisions) {
  if (divisions <= 0) throw ValidationError("divisions must be positive");
  if (duration <= 0) throw ValidationError("note duration must be positive");
  const std::int64_t g = std::gcd(duration, divisions);
  return Beats{duration / g, divisions / g};
}

std::size_t UtteranceScore::num_phonemes() const {
  std::size_t n = 0;
  for (const auto& s : syllables) n += s.phonemes.size();
  return n;
}

double UtteranceScore::total_seconds() const {
  double t = 0.0;
  for (const auto& s : syllables) t += s.note.duration_sec;
  return t;
}

namespace {

json note_json(const NoteEvent& n) {
  return json{{"pitch", n.pitch_name},      {"midi", n.midi_number},
              {"beats_num", n.beats.num},   {"beats_den", n.beats.den},
              {"duration_sec", n.duration_sec}, {"rest", n.is_rest},
              {"lyric", n.lyric}};
}

NoteEvent note_from(const json& j) {
  NoteEvent n;
  n.pitch_name = j.at("pitch").get<std::string>();
  n.midi_number = j.at("midi").get<int>();
  n.beats = Beats{j.at("beats_num").get<std::int64_t>(),
                  j.at("beats_den").get<std::int64_t>()};
  n.duration_sec = j.at("duration_sec").get<double>();
  n.is_rest = j.at("rest").get<bool>();
  n.lyric = j.at("lyric").get<std::string>();
  return n;
}

}  // namespace

std::string score_to_json(const MusicScore& score) {
  json j;
  j["title"] = score.title;
  j["tempo_bpm"] = score.tempo_bpm;
  j["notes"] = json::array();
  for (const auto& n : score.notes) j["notes"].push_back(note_json(n));
  j["syllables"] = json::array();
  for (const auto& s : score.syllables) {
    json js{{"pinyin", s.pinyin}, {"tone", s.tone}, {"note", note_json(s.note)}};
    js["phonemes"] = json::array();
    for (const auto& p : s.phonemes) {
      js["phonemes"].push_back(
          json{{"ph", p.ph},
               {"tp", std::string(phoneme_type_name(p.tp))},
               {"tone", p.tone},
               {"note_duration_sec", p.note_duration_sec},
               {"allocated_sec", p.allocated_sec},
               {"allocated_frames", p.allocated_frames}});
    }
    j["syllables"].push_back(std::move(js));
  }
  // max_digits10 round-trips doubles exactly.
  return j.dump(1);
}

MusicScore score_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("score json: ") + e.what(), 0);
  }
  MusicScore score;
  score.title = j.at("title").get<std::string>();
  score.tempo_bpm = j.at("tempo_bpm").get<double>();
  for (const auto& jn : j.at("notes")) score.notes.push_back(note_from(jn));
  for (const auto& js : j.at("syllables")) {
    SyllableEvent s;
    s.pinyin = js.at("pinyin").get<std::string>();
    s.tone = js.at("tone").get<int>();
    s.note = note_from(js.at("note"));
    for (const auto& jp : js.at("phonemes")) {
      PhonemeEvent p;
      p.ph = jp.at("ph").get<std::string>();
      p.tp = phoneme_type_from_name(jp.at("tp").get<std::string>());
      p.tone = jp.at("tone").get<int>();
      p.note_duration_sec = jp.at("note_duration_sec").get<double>();
      p.allocated_sec = jp.at("allocated_sec").get<double>();
      p.allocated_frames = jp.at("allocated_frames").get<int>();
      s.phonemes.push_back(std::move(p));
    }
    score.syllables.push_back(std::move(s));
  }
  return score;
}

}  // namespace bytesing::frontend
