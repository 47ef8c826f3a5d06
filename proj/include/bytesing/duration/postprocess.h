#ifndef BYTESING_DURATION_POSTPROCESS_H_
#define BYTESING_DURATION_POSTPROCESS_H_

#include <vector>

#include "bytesing/common/audio_params.h"
#include "bytesing/frontend/score.h"

namespace bytesing::duration {

// Rescales raw per-phoneme seconds so each syllable sums to its note
// duration. Silence syllables take the note duration verbatim. A syllable
// whose raw values sum to zero is split uniformly (with a warning).
std::vector<double> constrain_to_notes(const std::vector<double>& raw_sec,
                                       const frontend::UtteranceScore& utt);

// Integer frames for one syllable: `total` frames shared in proportion to
// `seconds` by largest remainder (ties go to the later phoneme), then every
// phoneme is raised to one frame by taking from the longest sibling.
// `total` is raised to seconds.size() if smaller.
std::vector<int> quantize_syllable(const std::vector<double>& seconds, int total);

// Per syllable, total = round(note_sec / hop_sec).
std::vector<int> quantize_to_frames(const std::vector<double>& constrained_sec,
                                    const frontend::UtteranceScore& utt,
                                    double hop_sec = kHopSec);

}  // namespace bytesing::duration

#endif  // BYTESING_DURATION_POSTPROCESS_H_
