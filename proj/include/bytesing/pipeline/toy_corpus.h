#ifndef BYTESING_PIPELINE_TOY_CORPUS_H_
#define BYTESING_PIPELINE_TOY_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bytesing/common/config.h"
#include "bytesing/frontend/score.h"

namespace bytesing::pipeline {

struct ToyCorpusSpec {
  int num_songs = 8;
  int notes_per_song = 12;  // sung notes; a long rest splits each song in two
  // Every sixteenth note is a whole number of 300-sample hops at these tempos.
  std::vector<int> tempos = {60, 75, 80, 100, 120, 150};
  int min_midi = 55;
  int max_midi = 74;
  double vibrato_cents = 5.0;
  double vibrato_hz = 5.5;
  std::uint64_t seed = 7;

  // Keys under "toy.".
  static ToyCorpusSpec from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
  void validate() const;
};

// One phoneme (or rest) span in samples, [start, end).
struct LabelSpan {
  long start = 0;
  long end = 0;
  std::string ph;  // "rest" for rests
  bool operator==(const LabelSpan&) const = default;
};

// Tab-separated `start<TAB>end<TAB>phoneme`, sample units.
void write_labels(const std::filesystem::path& path, const std::vector<LabelSpan>& labels);
std::vector<LabelSpan> read_labels(const std::filesystem::path& path);

struct ToySong {
  std::string name;         // "song00"
  frontend::MusicScore score;
  std::string musicxml;
  std::vector<double> audio;  // 24 kHz
  std::vector<LabelSpan> labels;
};

// Frames of an initial consonant before capping to the note.
int toy_initial_frames(std::string_view initial);

// (F1, F2, F3) in Hz for the vowel nucleus of a final; voiced initials use
// a nasal/liquid table.
std::array<double, 3> toy_formants(std::string_view phoneme);

// Vibrato rate for a note: the nearest whole number of cycles (at least one)
// to spec.vibrato_hz, so log-F0 averages to the note pitch exactly.
double toy_vibrato_rate(double note_sec, const ToyCorpusSpec& spec);
// Instantaneous frequency `t` seconds into a note with base pitch `f0`.
double toy_vibrato_hz(double f0, double t, double note_sec, const ToyCorpusSpec& spec);

// Deterministic in (spec, index).
ToySong generate_toy_song(const ToyCorpusSpec& spec, int index);

// Writes <name>.xml, <name>.wav and <name>.lab for every song.
std::vector<std::string> write_toy_corpus(const ToyCorpusSpec& spec,
                                          const std::filesystem::path& dir);

}  // namespace bytesing::pipeline

#endif  // BYTESING_PIPELINE_TOY_CORPUS_H_
