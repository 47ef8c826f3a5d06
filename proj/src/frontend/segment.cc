#include "bytesing/frontend/segment.h"

#include <cstdio>

#include "bytesing/common/error.h"

namespace bytesing::frontend {

SyllableEvent make_silence_syllable(const NoteEvent& rest) {
  SyllableEvent syl;
  syl.pinyin = std::string(kSil);
  syl.tone = 0;
  syl.note = rest;
  syl.phonemes.push_back(PhonemeEvent{.ph = std::string(kSil),
                                      .tp = PhonemeType::kSilence,
                                      .tone = 0,
                                      .note_duration_sec = rest.duration_sec});
  return syl;
}

std::vector<UtteranceScore> segment_utterances(const MusicScore& score,
                                               double rest_threshold_sec,
                                               const std::string& id_prefix) {
  if (!(rest_threshold_sec > 0.0)) {
    throw ValidationError("rest threshold must be positive");
  }
  if (score.notes.empty()) throw ValidationError("cannot segment an empty score");

  std::vector<UtteranceScore> out;
  UtteranceScore current;
  double clock = 0.0;
  std::size_t next_syllable = 0;

  auto flush = [&]() {
    while (!current.syllables.empty() && current.syllables.back().is_silence()) {
      current.syllables.pop_back();
    }
    if (!current.syllables.empty()) {
      char id[32];
      std::snprintf(id, sizeof(id), "_u%03zu", out.size());
      current.utterance_id = id_prefix + id;
      current.tempo_bpm = score.tempo_bpm;
      out.push_back(std::move(current));
    }
    current = UtteranceScore{};
  };

  for (const NoteEvent& note : score.notes) {
    if (note.is_rest) {
      if (note.duration_sec >= rest_threshold_sec) {
        flush();
      } else if (!current.syllables.empty()) {
        current.syllables.push_back(make_silence_syllable(note));
      }
    } else {
      if (next_syllable >= score.syllables.size()) {
        throw ValidationError("score has fewer syllables than sung notes");
      }
      if (current.syllables.empty()) current.start_sec = clock;
      current.syllables.push_back(score.syllables[next_syllable++]);
    }
    clock += note.duration_sec;
  }
  flush();
  return out;
}

}  // namespace bytesing::frontend
