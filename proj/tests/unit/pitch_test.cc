#include "bytesing/frontend/pitch.h"

#include <gtest/gtest.h>

#include "bytesing/common/error.h"

namespace bytesing::frontend {
namespace {

TEST(PitchTest, MiddleCIsSixty) {
  EXPECT_EQ(midi_from_step('C', 0, 4), 60);
  EXPECT_EQ(pitch_name(60), "C4");
  EXPECT_DOUBLE_EQ(midi_to_hz(69), 440.0);
}

TEST(PitchTest, FlatsNormaliseToSharps) {
  EXPECT_EQ(pitch_name(midi_from_step('B', -1, 3)), "A#3");
  EXPECT_EQ(midi_from_name("Db4"), midi_from_name("C#4"));
  EXPECT_EQ(midi_from_name("rest"), kRestMidi);
}

TEST(PitchTest, VocabularyCoversC0ToB8PlusRest) {
  EXPECT_EQ(kNumPitchTokens, 109);
  EXPECT_EQ(pitch_token(midi_from_name("C0")), 0);
  EXPECT_EQ(pitch_token(midi_from_name("B8")), 107);
  EXPECT_EQ(pitch_token(kRestMidi), kRestPitchToken);
  EXPECT_THROW(midi_from_step('B', 1, 8), ValidationError);
  EXPECT_THROW(midi_from_step('C', -1, 0), ValidationError);
}

TEST(PitchTest, NameRoundTripsOverVocabulary) {
  for (int m = kMinMidi; m <= kMaxMidi; ++m) {
    EXPECT_EQ(midi_from_name(pitch_name(m)), m);
  }
}

}  // namespace
}  // namespace bytesing::frontend
