#include "bytesing/eval/f0.h"

#include <algorithm>
#include <cmath>

#include "bytesing/common/audio_params.h"

namespace bytesing::eval {

std::size_t F0Track::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

namespace {

// Inclusive lag range for the search band.
const int kTauMin = static_cast<int>(std::floor(kSampleRate / kF0Max));
const int kTauMax = static_cast<int>(std::ceil(kSampleRate / kF0Min));

// Returns 0 for unvoiced.
double analyse_frame(const std::vector<double>& seg, const YinOptions& opt,
                     std::vector<double>& diff, std::vector<double>& raw) {
  const int w = opt.integration_window;
  double energy = 0.0;
  for (int j = 0; j < w + kTauMax; ++j) energy += seg[static_cast<std::size_t>(j)] * seg[static_cast<std::size_t>(j)];
  if (energy / (w + kTauMax) < opt.silence_power) return 0.0;

  // Cumulative-mean-normalised difference function.
  diff[0] = 1.0;
  double running = 0.0;
  for (int tau = 1; tau <= kTauMax + 1; ++tau) {
    double d = 0.0;
    for (int j = 0; j < w; ++j) {
      const double e = seg[static_cast<std::size_t>(j)] - seg[static_cast<std::size_t>(j + tau)];
      d += e * e;
    }
    raw[static_cast<std::size_t>(tau)] = d;
    running += d;
    diff[static_cast<std::size_t>(tau)] = running > 0.0 ? d * tau / running : 1.0;
  }

  int best = -1;
  for (int tau = kTauMin; tau <= kTauMax; ++tau) {
    if (diff[static_cast<std::size_t>(tau)] < opt.threshold) {
      while (tau + 1 <= kTauMax &&
             diff[static_cast<std::size_t>(tau + 1)] < diff[static_cast<std::size_t>(tau)]) {
        ++tau;
      }
      best = tau;
      break;
    }
  }
  if (best < 0) return 0.0;

  // The dip is located on the normalised curve but refined on the raw
  // difference, which is less biased at short lags.
  double refined = best;
  const double a = raw[static_cast<std::size_t>(best - 1)];
  const double b = raw[static_cast<std::size_t>(best)];
  const double c = raw[static_cast<std::size_t>(best + 1)];
  const double denom = a - 2.0 * b + c;
  if (denom > 0.0) refined += std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
  const double f0 = kSampleRate / refined;
  return f0 >= kF0Min && f0 <= kF0Max ? f0 : 0.0;
}

}  // namespace

F0Track extract_f0(const std::vector<double>& wave, const YinOptions& options) {
  F0Track track;
  if (wave.empty()) return track;
  const auto len = static_cast<long>(wave.size());
  const long frames = frames_for_samples(len);
  const int span = options.integration_window + kTauMax + 2;
  std::vector<double> seg(static_cast<std::size_t>(span));
  std::vector<double> diff(static_cast<std::size_t>(kTauMax + 2));
  std::vector<double> raw(diff.size());
  track.voiced.resize(static_cast<std::size_t>(frames));
  track.f0_hz.resize(static_cast<std::size_t>(frames));
  for (long t = 0; t < frames; ++t) {
    const long start = t * kHopSamples - span / 2;
    for (int i = 0; i < span; ++i) {
      const long n = start + i;
      seg[static_cast<std::size_t>(i)] = n >= 0 && n < len ? wave[static_cast<std::size_t>(n)] : 0.0;
    }
    const double f0 = analyse_frame(seg, options, diff, raw);
    track.voiced[static_cast<std::size_t>(t)] = f0 > 0.0;
    track.f0_hz[static_cast<std::size_t>(t)] = f0;
  }
  return track;
}

}  // namespace bytesing::eval
