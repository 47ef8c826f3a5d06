#include "bytesing/frontend/segment.h"

#include <gtest/gtest.h>

#include "bytesing/common/error.h"
#include "bytesing/frontend/musicxml.h"
#include "support/twinkle8_fixture.h"

namespace bytesing::frontend {
namespace {

NoteEvent sung(const std::string& lyric, double seconds) {
  NoteEvent n;
  n.pitch_name = "A4";
  n.midi_number = 69;
  n.beats = Beats{1, 1};
  n.duration_sec = seconds;
  n.lyric = lyric;
  return n;
}

NoteEvent rest(double seconds) {
  NoteEvent n;
  n.pitch_name = "rest";
  n.midi_number = -1;
  n.beats = Beats{1, 1};
  n.duration_sec = seconds;
  n.is_rest = true;
  return n;
}

MusicScore make_score(const std::vector<NoteEvent>& notes) {
  MusicScore score;
  score.notes = notes;
  for (const auto& n : notes) {
    if (n.is_rest) continue;
    SyllableEvent s;
    s.pinyin = n.lyric;
    s.note = n;
    s.phonemes = phonemize(n.lyric, 1, Lexicon::builtin());
    score.syllables.push_back(s);
  }
  return score;
}

TEST(SegmentTest, LongRestSplits) {
  auto utts = segment_utterances(
      make_score({sung("a", 0.5), sung("ba", 0.5), rest(0.8), sung("ma", 0.5)}), 0.5);
  ASSERT_EQ(utts.size(), 2u);
  EXPECT_EQ(utts[0].syllables.size(), 2u);
  EXPECT_EQ(utts[1].syllables.size(), 1u);
  EXPECT_EQ(utts[1].syllables[0].pinyin, "ma");
  EXPECT_DOUBLE_EQ(utts[1].start_sec, 1.8);
}

TEST(SegmentTest, ShortInteriorRestBecomesSil) {
  auto utts =
      segment_utterances(make_score({sung("a", 0.5), rest(0.2), sung("ba", 0.5)}), 0.5);
  ASSERT_EQ(utts.size(), 1u);
  ASSERT_EQ(utts[0].syllables.size(), 3u);
  const auto& sil = utts[0].syllables[1];
  EXPECT_TRUE(sil.is_silence());
  ASSERT_EQ(sil.phonemes.size(), 1u);
  EXPECT_EQ(sil.phonemes[0].ph, "sil");
  EXPECT_EQ(sil.phonemes[0].tp, PhonemeType::kSilence);
}

TEST(SegmentTest, BoundaryRestsAreDropped) {
  auto utts = segment_utterances(
      make_score({rest(0.2), sung("a", 0.5), rest(0.3)}), 0.5, "song");
  ASSERT_EQ(utts.size(), 1u);
  EXPECT_EQ(utts[0].syllables.size(), 1u);
  EXPECT_EQ(utts[0].utterance_id, "song_u000");
  EXPECT_DOUBLE_EQ(utts[0].start_sec, 0.2);
}

TEST(SegmentTest, OnlyRestsGiveEmptyResult) {
  EXPECT_TRUE(segment_utterances(make_score({rest(1.0), rest(0.1)}), 0.5).empty());
}

TEST(SegmentTest, GoldenGivesTwoUtterancesOfFourNotes) {
  const MusicScore score = load_musicxml(testing::twinkle8_path(), Lexicon::builtin());
  auto utts = segment_utterances(score, 0.5, "twinkle8");
  ASSERT_EQ(utts.size(), 2u);
  EXPECT_EQ(utts[0].syllables.size(), 4u);
  EXPECT_EQ(utts[1].syllables.size(), 4u);
  EXPECT_DOUBLE_EQ(utts[1].start_sec, 4 * 0.625 + 1.25);
  // Concatenation preserves note order.
  std::vector<NoteEvent> sung_notes;
  for (const auto& u : utts) {
    for (const auto& s : u.syllables) sung_notes.push_back(s.note);
  }
  std::vector<NoteEvent> expected;
  for (const auto& n : score.notes) {
    if (!n.is_rest) expected.push_back(n);
  }
  EXPECT_EQ(sung_notes, expected);
  for (const auto& u : utts) {
    double beats = 0.0;
    for (const auto& s : u.syllables) beats += s.note.beats.value();
    EXPECT_NEAR(u.total_seconds(), 60.0 / u.tempo_bpm * beats, 1e-6);
  }
}

TEST(SegmentTest, RejectsNonPositiveThreshold) {
  EXPECT_THROW(segment_utterances(make_score({sung("a", 0.5)}), 0.0), ValidationError);
}

}  // namespace
}  // namespace bytesing::frontend
