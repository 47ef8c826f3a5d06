#ifndef BYTESING_FRONTEND_FEATURES_H_
#define BYTESING_FRONTEND_FEATURES_H_

#include <optional>
#include <vector>

#include "bytesing/common/matrix.h"
#include "bytesing/frontend/score.h"

namespace bytesing::frontend {

// z-normalisation statistics of the note-duration feature.
struct ZStats {
  double mean = 0.0;
  double stddev = 1.0;
};

// Width of one duration-model input row: one-hot Ph, one-hot Tp, Du.
int duration_input_dim();

ZStats fit_duration_stats(const std::vector<UtteranceScore>& utterances);

// Phoneme-level duration-model input, one row per phoneme. The Du column
// holds the z-normalised note duration. Throws ConfigError without stats
// and ValidationError for an empty utterance.
Matrix build_duration_inputs(const UtteranceScore& utt,
                             const std::optional<ZStats>& stats);

// Frame-level acoustic input. po columns: advancement within the phoneme,
// reserve (1 - advancement), and phoneme position within the utterance.
struct AcousticInput {
  std::vector<int> ph_ids;
  std::vector<int> pi_ids;
  std::vector<int> tone_ids;
  Matrix po;  // T x 3

  int num_frames() const { return static_cast<int>(ph_ids.size()); }
};

// Expands each phoneme over its allocated_frames. Throws ValidationError if
// any phoneme has fewer than one frame.
AcousticInput build_acoustic_inputs(const UtteranceScore& utt);

// Concatenated allocated_frames of every phoneme, in order.
std::vector<int> allocated_frames(const UtteranceScore& utt);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_FEATURES_H_
