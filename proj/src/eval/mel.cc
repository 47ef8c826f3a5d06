#include "bytesing/eval/mel.h"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "bytesing/common/error.h"

namespace bytesing::eval {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int num_mels, int fft_size, int sample_rate, double fmin, double fmax) {
  const int bins = fft_size / 2 + 1;
  const double lo = hz_to_mel(fmin);
  const double hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(num_mels + 2));
  for (int i = 0; i < num_mels + 2; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (num_mels + 1));
  }
  Matrix fb = Matrix::Zero(num_mels, bins);
  for (int m = 0; m < num_mels; ++m) {
    const double left = edges[static_cast<std::size_t>(m)];
    const double centre = edges[static_cast<std::size_t>(m + 1)];
    const double right = edges[static_cast<std::size_t>(m + 2)];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > left && f <= centre) {
        w = (f - left) / (centre - left);
      } else if (f > centre && f < right) {
        w = (right - f) / (right - centre);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

struct MelExtractor::Fft {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

MelExtractor::MelExtractor()
    : fft_(std::make_unique<Fft>()), filterbank_(mel_filterbank()) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fft_->in = fftw_alloc_real(kFftSize);
  fft_->out = fftw_alloc_complex(kFftSize / 2 + 1);
  fft_->plan = fftw_plan_dft_r2c_1d(kFftSize, fft_->in, fft_->out, FFTW_ESTIMATE);
  window_.resize(kWindowSamples);
  // Periodic Hann.
  for (int i = 0; i < kWindowSamples; ++i) {
    window_[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kWindowSamples);
  }
}

MelExtractor::~MelExtractor() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fft_->plan);
  fftw_free(fft_->in);
  fftw_free(fft_->out);
}

Matrix MelExtractor::operator()(const std::vector<double>& wave) const {
  if (wave.empty()) throw ValidationError("cannot extract mel from empty audio");
  const auto len = static_cast<long>(wave.size());
  const long frames = frames_for_samples(len);
  const int bins = kFftSize / 2 + 1;
  Matrix mel(frames, filterbank_.rows());
  RowVector power(bins);
  for (long t = 0; t < frames; ++t) {
    const long start = t * kHopSamples - kWindowSamples / 2;
    for (int i = 0; i < kFftSize; ++i) fft_->in[i] = 0.0;
    for (int i = 0; i < kWindowSamples; ++i) {
      const long n = start + i;
      if (n >= 0 && n < len) fft_->in[i] = wave[static_cast<std::size_t>(n)] * window_[static_cast<std::size_t>(i)];
    }
    fftw_execute(fft_->plan);
    for (int k = 0; k < bins; ++k) {
      power(k) = fft_->out[k][0] * fft_->out[k][0] + fft_->out[k][1] * fft_->out[k][1];
    }
    const RowVector bands = power * filterbank_.transpose();
    for (Index m = 0; m < bands.size(); ++m) {
      mel(t, m) = std::max(kLogMelFloor, std::log(std::max(bands(m), 1e-300)));
    }
  }
  return mel;
}

Matrix extract_mel(const std::vector<double>& wave) {
  thread_local MelExtractor extractor;
  return extractor(wave);
}

}  // namespace bytesing::eval
