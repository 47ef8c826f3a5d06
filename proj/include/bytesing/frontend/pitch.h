#ifndef BYTESING_FRONTEND_PITCH_H_
#define BYTESING_FRONTEND_PITCH_H_

#include <string>
#include <string_view>

namespace bytesing::frontend {

// Categorical pitch vocabulary: C0..B8 (MIDI 12..119) plus one rest token.
inline constexpr int kMinMidi = 12;
inline constexpr int kMaxMidi = 119;
inline constexpr int kRestMidi = -1;
inline constexpr int kNumPitchTokens = kMaxMidi - kMinMidi + 2;  // 109
inline constexpr int kRestPitchToken = kNumPitchTokens - 1;
inline constexpr std::string_view kRestName = "rest";

// step in {C,D,E,F,G,A,B}, alter in semitones, C4 = 60. Throws
// ValidationError if the result falls outside the vocabulary.
int midi_from_step(char step, int alter, int octave);

// Sharp spelling, e.g. 61 -> "C#4".
std::string pitch_name(int midi);
// Accepts sharps or flats ("Db4" == "C#4") and "rest".
int midi_from_name(std::string_view name);

int pitch_token(int midi);  // rest (kRestMidi) -> kRestPitchToken
double midi_to_hz(double midi);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_PITCH_H_
