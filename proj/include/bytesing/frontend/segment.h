#ifndef BYTESING_FRONTEND_SEGMENT_H_
#define BYTESING_FRONTEND_SEGMENT_H_

#include <string>
#include <vector>

#include "bytesing/frontend/score.h"

namespace bytesing::frontend {

inline constexpr double kDefaultRestThresholdSec = 0.5;

// Splits a song at every rest lasting at least `rest_threshold_sec`. Rests at
// utterance boundaries are dropped; shorter interior rests become a single
// `sil` syllable carrying the rest pitch token. A score holding only rests
// yields an empty vector. Utterance ids are `<id_prefix>_uNNN`.
std::vector<UtteranceScore> segment_utterances(
    const MusicScore& score, double rest_threshold_sec = kDefaultRestThresholdSec,
    const std::string& id_prefix = "utt");

SyllableEvent make_silence_syllable(const NoteEvent& rest);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_SEGMENT_H_
