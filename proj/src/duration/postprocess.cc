#include "bytesing/duration/postprocess.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "bytesing/common/error.h"

namespace bytesing::duration {
namespace {

void check_alignment(std::size_t n, const frontend::UtteranceScore& utt) {
  if (n != utt.num_phonemes()) {
    throw ShapeError("utterance '" + utt.utterance_id + "' has " +
                     std::to_string(utt.num_phonemes()) + " phonemes but " +
                     std::to_string(n) + " durations were given");
  }
}

}  // namespace

std::vector<double> constrain_to_notes(const std::vector<double>& raw_sec,
                                       const frontend::UtteranceScore& utt) {
  check_alignment(raw_sec.size(), utt);
  std::vector<double> out(raw_sec.size());
  std::size_t k = 0;
  for (const auto& syl : utt.syllables) {
    const std::size_t n = syl.phonemes.size();
    const double note = syl.note.duration_sec;
    if (syl.is_silence() || n == 1) {
      for (std::size_t i = 0; i < n; ++i) out[k + i] = note / static_cast<double>(n);
      k += n;
      continue;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(raw_sec[k + i] >= 0.0) || !std::isfinite(raw_sec[k + i])) {
        throw NumericError("raw duration must be finite and non-negative",
                           static_cast<long>(k + i));
      }
      total += raw_sec[k + i];
    }
    if (total <= 0.0) {
      spdlog::warn("syllable '{}' in '{}': raw durations sum to zero, splitting uniformly",
                   syl.pinyin, utt.utterance_id);
      for (std::size_t i = 0; i < n; ++i) out[k + i] = note / static_cast<double>(n);
    } else {
      for (std::size_t i = 0; i < n; ++i) out[k + i] = raw_sec[k + i] * (note / total);
    }
    k += n;
  }
  return out;
}

std::vector<int> quantize_syllable(const std::vector<double>& seconds, int total) {
  const std::size_t n = seconds.size();
  if (n == 0) return {};
  total = std::max(total, static_cast<int>(n));
  double sum = std::accumulate(seconds.begin(), seconds.end(), 0.0);
  std::vector<double> share(n);
  for (std::size_t i = 0; i < n; ++i) {
    share[i] = sum > 0.0 ? total * seconds[i] / sum : static_cast<double>(total) / n;
  }

  std::vector<int> frames(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    frames[i] = static_cast<int>(std::floor(share[i]));
    assigned += frames[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ra = share[a] - std::floor(share[a]);
    const double rb = share[b] - std::floor(share[b]);
    if (ra != rb) return ra > rb;
    return a > b;
  });
  for (std::size_t j = 0; assigned < total; ++j) {
    ++frames[order[j % n]];
    ++assigned;
  }

  for (std::size_t i = 0; i < n; ++i) {
    while (frames[i] < 1) {
      std::size_t longest = 0;
      for (std::size_t j = 1; j < n; ++j) {
        if (frames[j] >= frames[longest]) longest = j;
      }
      --frames[longest];
      ++frames[i];
    }
  }
  return frames;
}

std::vector<int> quantize_to_frames(const std::vector<double>& constrained_sec,
                                    const frontend::UtteranceScore& utt,
                                    double hop_sec) {
  if (!(hop_sec > 0.0)) throw ValidationError("hop must be positive");
  check_alignment(constrained_sec.size(), utt);
  std::vector<int> out;
  out.reserve(constrained_sec.size());
  std::size_t k = 0;
  for (const auto& syl : utt.syllables) {
    const std::size_t n = syl.phonemes.size();
    const int total = static_cast<int>(std::lround(syl.note.duration_sec / hop_sec));
    if (total < static_cast<int>(n)) {
      spdlog::info("syllable '{}' in '{}' is shorter than {} frames; using the minimum",
                   syl.pinyin, utt.utterance_id, n);
    }
    const std::vector<double> seconds(constrained_sec.begin() + static_cast<long>(k),
                                      constrained_sec.begin() + static_cast<long>(k + n));
    for (int f : quantize_syllable(seconds, total)) out.push_back(f);
    k += n;
  }
  return out;
}

}  // namespace bytesing::duration
