#ifndef BYTESING_EVAL_MEL_H_
#define BYTESING_EVAL_MEL_H_

#include <memory>
#include <vector>

#include "bytesing/common/audio_params.h"
#include "bytesing/common/matrix.h"

namespace bytesing::eval {

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// num_mels x (fft_size / 2 + 1) triangular filters on the HTK mel scale,
// peak weight 1, no area normalisation.
Matrix mel_filterbank(int num_mels = kNumMels, int fft_size = kFftSize,
                      int sample_rate = kSampleRate, double fmin = kMelFmin,
                      double fmax = kMelFmax);

// Log-mel analysis: Hann window of kWindowSamples centred on t * hop with
// zero padding outside the signal, FFT of kFftSize, power spectrum, mel
// filterbank, natural log clamped at kLogMelFloor. ceil(len / hop) frames.
class MelExtractor {
 public:
  MelExtractor();
  ~MelExtractor();
  MelExtractor(const MelExtractor&) = delete;
  MelExtractor& operator=(const MelExtractor&) = delete;

  // Throws ValidationError on empty input.
  Matrix operator()(const std::vector<double>& wave) const;

  const Matrix& filterbank() const { return filterbank_; }

 private:
  struct Fft;
  std::unique_ptr<Fft> fft_;
  Matrix filterbank_;
  std::vector<double> window_;
};

// Convenience wrapper around a shared extractor.
Matrix extract_mel(const std::vector<double>& wave);

}  // namespace bytesing::eval

#endif  // BYTESING_EVAL_MEL_H_
