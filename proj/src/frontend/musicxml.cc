#include "bytesing/frontend/musicxml.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "bytesing/common/error.h"
#include "bytesing/frontend/pitch.h"

namespace bytesing::frontend {
namespace {

namespace pt = boost::property_tree;

std::string note_where(int measure, int note_in_measure) {
  return "measure " + std::to_string(measure) + ", note " +
         std::to_string(note_in_measure);
}

bool is_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

std::optional<double> tempo_of(const pt::ptree& node) {
  if (auto t = node.get_optional<double>("<xmlattr>.tempo")) return *t;
  return std::nullopt;
}

// Tempo from <direction>: prefers <sound tempo>, else a metronome marking.
std::optional<double> direction_tempo(const pt::ptree& direction) {
  if (auto sound = direction.get_child_optional("sound")) {
    if (auto t = tempo_of(*sound)) return t;
  }
  for (const auto& [tag, child] : direction) {
    if (tag != "direction-type") continue;
    auto metronome = child.get_child_optional("metronome");
    if (!metronome) continue;
    auto per_minute = metronome->get_optional<double>("per-minute");
    if (!per_minute) continue;
    const std::string unit = metronome->get("beat-unit", std::string("quarter"));
    double quarters = 1.0;
    if (unit == "half") quarters = 2.0;
    else if (unit == "eighth") quarters = 0.5;
    else if (unit == "whole") quarters = 4.0;
    else if (unit != "quarter") {
      throw ValidationError("unsupported metronome beat-unit '" + unit + "'");
    }
    if (metronome->get_child_optional("beat-unit-dot")) quarters *= 1.5;
    return *per_minute * quarters;
  }
  return std::nullopt;
}

struct RawNote {
  NoteEvent event;
  std::int64_t duration = 0;
  std::int64_t divisions = 0;
  std::string where;
};

SyllableEvent make_syllable(const NoteEvent& note, const std::string& where,
                            const Lexicon& lexicon, const HanziLexicon* hanzi) {
  std::string lyric = note.lyric;
  if (!is_ascii(lyric)) {
    const std::string* reading = hanzi ? hanzi->find(lyric) : nullptr;
    if (reading == nullptr) {
      throw LookupError(where + ": lyric '" + lyric +
                        "' is not tone-numbered pinyin and has no hanzi reading");
    }
    lyric = *reading;
  }
  const ToneSyllable ts = split_tone(lyric);
  SyllableEvent syl;
  syl.pinyin = ts.pinyin;
  syl.tone = ts.tone;
  syl.note = note;
  syl.phonemes = phonemize(ts.pinyin, ts.tone, lexicon);
  for (auto& p : syl.phonemes) p.note_duration_sec = note.duration_sec;
  return syl;
}

}  // namespace

MusicScore parse_musicxml(std::string_view document, const Lexicon& lexicon,
                          const HanziLexicon* hanzi) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed MusicXML: " + e.message(),
                     static_cast<int>(e.line()));
  }

  auto root = tree.get_child_optional("score-partwise");
  if (!root) throw ValidationError("expected a <score-partwise> document");

  MusicScore score;
  score.title = root->get("work.work-title", root->get("movement-title", std::string()));

  const pt::ptree* part = nullptr;
  for (const auto& [tag, child] : *root) {
    if (tag != "part") continue;
    if (part != nullptr) throw ValidationError("only single-part scores are supported");
    part = &child;
  }
  if (part == nullptr) throw ValidationError("score has no <part>");

  std::optional<double> tempo;
  auto set_tempo = [&](double t, const std::string& where) {
    if (!(t > 0.0)) throw ValidationError(where + ": tempo must be positive");
    if (tempo && std::abs(*tempo - t) > 1e-9) {
      throw ValidationError(where + ": tempo changes are not supported");
    }
    tempo = t;
  };

  std::vector<RawNote> raw;
  std::int64_t divisions = 0;
  int measure_no = 0;
  for (const auto& [mtag, measure] : *part) {
    if (mtag != "measure") continue;
    ++measure_no;
    int note_no = 0;
    for (const auto& [tag, node] : measure) {
      const std::string where_m = "measure " + std::to_string(measure_no);
      if (tag == "attributes") {
        if (auto d = node.get_optional<std::int64_t>("divisions")) {
          if (*d <= 0) throw ValidationError(where_m + ": divisions must be positive");
          divisions = *d;
        }
      } else if (tag == "direction") {
        if (auto t = direction_tempo(node)) set_tempo(*t, where_m);
      } else if (tag == "sound") {
        if (auto t = tempo_of(node)) set_tempo(*t, where_m);
      } else if (tag == "backup" || tag == "forward") {
        throw ValidationError(where_m + ": multiple voices are not supported");
      } else if (tag == "note") {
        ++note_no;
        const std::string where = note_where(measure_no, note_no);
        if (node.get_child_optional("chord")) {
          throw ValidationError(where + ": chords are not supported");
        }
        if (node.get_child_optional("grace")) {
          throw ValidationError(where + ": grace notes are not supported");
        }
        bool tied = node.get_child_optional("tie").has_value();
        if (auto notations = node.get_child_optional("notations")) {
          tied = tied || notations->get_child_optional("tied").has_value();
        }
        if (tied) throw ValidationError(where + ": ties are not supported");
        if (divisions == 0) {
          throw ValidationError(where + ": note appears before <divisions>");
        }
        auto duration = node.get_optional<std::int64_t>("duration");
        if (!duration || *duration <= 0) {
          throw ValidationError(where + ": note needs a positive <duration>");
        }

        RawNote rn;
        rn.where = where;
        rn.duration = *duration;
        rn.divisions = divisions;
        NoteEvent& ev = rn.event;
        const bool is_rest = node.get_child_optional("rest").has_value();
        auto pitch = node.get_child_optional("pitch");
        if (is_rest) {
          ev.is_rest = true;
          ev.midi_number = kRestMidi;
          ev.pitch_name = std::string(kRestName);
        } else if (pitch) {
          const std::string step = pitch->get("step", std::string());
          auto octave = pitch->get_optional<int>("octave");
          const double alter = pitch->get("alter", 0.0);
          if (step.size() != 1 || !octave) {
            throw ValidationError(where + ": pitch needs <step> and <octave>");
          }
          if (alter != std::round(alter)) {
            throw ValidationError(where + ": microtonal <alter> is not supported");
          }
          ev.midi_number = midi_from_step(step[0], static_cast<int>(alter), *octave);
          ev.pitch_name = pitch_name(ev.midi_number);
        } else {
          throw ValidationError(where + ": note has neither <pitch> nor <rest>");
        }
        for (const auto& [ltag, lyric] : node) {
          if (ltag == "lyric") {
            ev.lyric = lyric.get("text", std::string());
            break;
          }
        }
        if (!ev.is_rest && ev.lyric.empty()) {
          throw ValidationError(where + ": sung note has no lyric syllable");
        }
        raw.push_back(std::move(rn));
      }
    }
  }

  score.tempo_bpm = tempo.value_or(kDefaultTempoBpm);
  for (auto& rn : raw) {
    rn.event.beats = Beats::from_divisions(rn.duration, rn.divisions);
    rn.event.duration_sec = seconds_from_beats(rn.event.beats, score.tempo_bpm);
    score.notes.push_back(rn.event);
    if (!rn.event.is_rest) {
      score.syllables.push_back(make_syllable(rn.event, rn.where, lexicon, hanzi));
    }
  }
  if (score.notes.empty()) throw ValidationError("score contains no notes");
  return score;
}

MusicScore load_musicxml(const std::filesystem::path& path, const Lexicon& lexicon,
                         const HanziLexicon* hanzi) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_musicxml(buffer.str(), lexicon, hanzi);
}

std::string write_musicxml(const MusicScore& score, int divisions) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<score-partwise version=\"3.1\">\n";
  if (!score.title.empty()) {
    out << "  <work><work-title>" << score.title << "</work-title></work>\n";
  }
  out << "  <part-list><score-part id=\"P1\"><part-name>Voice</part-name>"
         "</score-part></part-list>\n"
      << "  <part id=\"P1\">\n    <measure number=\"1\">\n"
      << "      <attributes><divisions>" << divisions << "</divisions></attributes>\n"
      << std::setprecision(12)
      << "      <direction><sound tempo=\"" << score.tempo_bpm << "\"/></direction>\n";
  static constexpr char kSteps[12] = {'C', 'C', 'D', 'D', 'E', 'F',
                                      'F', 'G', 'G', 'A', 'A', 'B'};
  static constexpr bool kSharp[12] = {false, true,  false, true,  false, false,
                                      true,  false, true,  false, true,  false};
  for (const auto& n : score.notes) {
    const std::int64_t scaled = n.beats.num * divisions;
    if (scaled % n.beats.den != 0) {
      throw ValidationError("note beats not representable with divisions=" +
                            std::to_string(divisions));
    }
    out << "      <note>";
    if (n.is_rest) {
      out << "<rest/>";
    } else {
      const int pc = n.midi_number % 12;
      out << "<pitch><step>" << kSteps[pc] << "</step>";
      if (kSharp[pc]) out << "<alter>1</alter>";
      out << "<octave>" << n.midi_number / 12 - 1 << "</octave></pitch>";
    }
    out << "<duration>" << scaled / n.beats.den << "</duration>";
    if (!n.is_rest) out << "<lyric><text>" << n.lyric << "</text></lyric>";
    out << "</note>\n";
  }
  out << "    </measure>\n  </part>\n</score-partwise>\n";
  return out.str();
}

}  // namespace bytesing::frontend
