#include "bytesing/frontend/features.h"

#include <cmath>

#include "bytesing/common/error.h"
#include "bytesing/frontend/phoneme_set.h"
#include "bytesing/frontend/pitch.h"

namespace bytesing::frontend {

int duration_input_dim() { return num_phonemes() + kNumPhonemeTypes + 1; }

ZStats fit_duration_stats(const std::vector<UtteranceScore>& utterances) {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& utt : utterances) {
    for (const auto& syl : utt.syllables) {
      for (const auto& ph : syl.phonemes) {
        sum += ph.note_duration_sec;
        sum_sq += ph.note_duration_sec * ph.note_duration_sec;
        ++n;
      }
    }
  }
  if (n == 0) throw ValidationError("no phonemes to fit duration statistics");
  ZStats stats;
  stats.mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - stats.mean * stats.mean;
  // A corpus of equal note lengths has zero spread; keep the feature finite.
  stats.stddev = var > 1e-12 ? std::sqrt(var) : 1.0;
  return stats;
}

Matrix build_duration_inputs(const UtteranceScore& utt,
                             const std::optional<ZStats>& stats) {
  if (!stats) {
    throw ConfigError("duration inputs need normalisation statistics");
  }
  const auto n = static_cast<Index>(utt.num_phonemes());
  if (n == 0) throw ValidationError("utterance '" + utt.utterance_id + "' is empty");
  const int ph_count = num_phonemes();
  Matrix x = Matrix::Zero(n, duration_input_dim());
  Index row = 0;
  for (const auto& syl : utt.syllables) {
    for (const auto& ph : syl.phonemes) {
      x(row, phoneme_id(ph.ph)) = 1.0;
      x(row, ph_count + static_cast<int>(ph.tp)) = 1.0;
      x(row, ph_count + kNumPhonemeTypes) =
          (ph.note_duration_sec - stats->mean) / stats->stddev;
      ++row;
    }
  }
  return x;
}

std::vector<int> allocated_frames(const UtteranceScore& utt) {
  std::vector<int> frames;
  for (const auto& syl : utt.syllables) {
    for (const auto& ph : syl.phonemes) frames.push_back(ph.allocated_frames);
  }
  return frames;
}

AcousticInput build_acoustic_inputs(const UtteranceScore& utt) {
  const std::size_t num_ph = utt.num_phonemes();
  if (num_ph == 0) {
    throw ValidationError("utterance '" + utt.utterance_id + "' is empty");
  }
  std::size_t total = 0;
  for (const auto& syl : utt.syllables) {
    for (const auto& ph : syl.phonemes) {
      if (ph.allocated_frames < 1) {
        throw ValidationError("phoneme '" + ph.ph + "' in '" + utt.utterance_id +
                              "' has fewer than one allocated frame");
      }
      total += static_cast<std::size_t>(ph.allocated_frames);
    }
  }

  AcousticInput x;
  x.ph_ids.reserve(total);
  x.pi_ids.reserve(total);
  x.tone_ids.reserve(total);
  x.po.resize(static_cast<Index>(total), 3);
  Index row = 0;
  std::size_t k = 0;
  for (const auto& syl : utt.syllables) {
    const int pi = pitch_token(syl.note.is_rest ? kRestMidi : syl.note.midi_number);
    for (const auto& ph : syl.phonemes) {
      const int id = phoneme_id(ph.ph);
      const int n = ph.allocated_frames;
      const double position =
          num_ph > 1 ? static_cast<double>(k) / static_cast<double>(num_ph - 1) : 0.0;
      for (int i = 0; i < n; ++i) {
        const double advance = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        x.ph_ids.push_back(id);
        x.pi_ids.push_back(pi);
        x.tone_ids.push_back(ph.tone);
        x.po(row, 0) = advance;
        x.po(row, 1) = 1.0 - advance;
        x.po(row, 2) = position;
        ++row;
      }
      ++k;
    }
  }
  return x;
}

}  // namespace bytesing::frontend
