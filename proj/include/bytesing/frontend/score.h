#ifndef BYTESING_FRONTEND_SCORE_H_
#define BYTESING_FRONTEND_SCORE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bytesing/frontend/phoneme_set.h"

namespace bytesing::frontend {

// Exact rational beat count (quarter-note units).
struct Beats {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Beats from_divisions(std::int64_t duration, std::int64_t divisions);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Beats&) const = default;
};

inline double seconds_from_beats(const Beats& beats, double tempo_bpm) {
  return 60.0 * beats.value() / tempo_bpm;
}

struct NoteEvent {
  std::string pitch_name;  // "C4", "A#3" or "rest"
  int midi_number = -1;    // kRestMidi for rests
  Beats beats;
  double duration_sec = 0.0;
  bool is_rest = false;
  std::string lyric;       // raw lyric text as written in the score

  bool operator==(const NoteEvent&) const = default;
};

struct PhonemeEvent {
  std::string ph;
  PhonemeType tp = PhonemeType::kFinal;
  int tone = 0;
  double note_duration_sec = 0.0;
  double allocated_sec = 0.0;  // set by the duration stage
  int allocated_frames = 0;    // set by the duration stage

  bool operator==(const PhonemeEvent&) const = default;
};

struct SyllableEvent {
  std::string pinyin;  // without tone digit; "sil" for interior rests
  int tone = 0;        // 0 = neutral
  NoteEvent note;
  std::vector<PhonemeEvent> phonemes;

  bool is_silence() const { return note.is_rest; }
  bool operator==(const SyllableEvent&) const = default;
};

struct MusicScore {
  std::string title;
  double tempo_bpm = 120.0;
  std::vector<NoteEvent> notes;          // every note and rest, score order
  std::vector<SyllableEvent> syllables;  // one per sung note, score order

  bool operator==(const MusicScore&) const = default;
};

struct UtteranceScore {
  std::string utterance_id;
  double tempo_bpm = 120.0;
  double start_sec = 0.0;  // offset of the first note within the song
  std::vector<SyllableEvent> syllables;

  std::size_t num_phonemes() const;
  double total_seconds() const;
  bool operator==(const UtteranceScore&) const = default;
};

// Internal JSON score format used for caching parsed scores.
std::string score_to_json(const MusicScore& score);
MusicScore score_from_json(const std::string& text);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_SCORE_H_
