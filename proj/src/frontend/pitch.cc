#include "bytesing/frontend/pitch.h"

#include <array>
#include <cctype>
#include <cmath>

#include "bytesing/common/error.h"

namespace bytesing::frontend {
namespace {

constexpr std::array<const char*, 12> kSharpNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

int step_semitone(char step) {
  switch (step) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default:
      throw ValidationError(std::string("invalid pitch step '") + step + "'");
  }
}

void check_range(int midi) {
  if (midi < kMinMidi || midi > kMaxMidi) {
    throw ValidationError("pitch MIDI " + std::to_string(midi) +
                          " outside vocabulary C0..B8");
  }
}

}  // namespace

int midi_from_step(char step, int alter, int octave) {
  const int midi = 12 * (octave + 1) + step_semitone(step) + alter;
  check_range(midi);
  return midi;
}

std::string pitch_name(int midi) {
  if (midi == kRestMidi) return std::string(kRestName);
  check_range(midi);
  return std::string(kSharpNames[midi % 12]) + std::to_string(midi / 12 - 1);
}

int midi_from_name(std::string_view name) {
  if (name == kRestName) return kRestMidi;
  if (name.size() < 2) {
    throw ValidationError("invalid pitch name '" + std::string(name) + "'");
  }
  const char step = static_cast<char>(std::toupper(name[0]));
  std::size_t pos = 1;
  int alter = 0;
  while (pos < name.size() && (name[pos] == '#' || name[pos] == 'b')) {
    alter += name[pos] == '#' ? 1 : -1;
    ++pos;
  }
  const std::string octave_text(name.substr(pos));
  if (octave_text.empty() ||
      octave_text.find_first_not_of("-0123456789") != std::string::npos) {
    throw ValidationError("invalid pitch name '" + std::string(name) + "'");
  }
  return midi_from_step(step, alter, std::stoi(octave_text));
}

int pitch_token(int midi) {
  if (midi == kRestMidi) return kRestPitchToken;
  check_range(midi);
  return midi - kMinMidi;
}

double midi_to_hz(double midi) { return 440.0 * std::pow(2.0, (midi - 69.0) / 12.0); }

}  // namespace bytesing::frontend
