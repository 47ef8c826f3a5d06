#ifndef BYTESING_FRONTEND_MUSICXML_H_
#define BYTESING_FRONTEND_MUSICXML_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "bytesing/frontend/lexicon.h"
#include "bytesing/frontend/score.h"

namespace bytesing::frontend {

inline constexpr double kDefaultTempoBpm = 120.0;

// Reads the score-partwise subset described in docs/musicxml-subset.md:
// one part, one voice, no ties/chords/grace notes, a single tempo. Lyrics
// are tone-numbered pinyin, or hanzi when `hanzi` is given.
//
// Throws ParseError (with line) for malformed XML, ValidationError for
// subset violations, LookupError for lyrics missing from the lexicons.
MusicScore parse_musicxml(std::string_view document, const Lexicon& lexicon,
                          const HanziLexicon* hanzi = nullptr);
MusicScore load_musicxml(const std::filesystem::path& path,
                         const Lexicon& lexicon,
                         const HanziLexicon* hanzi = nullptr);

// Writes a score back in the same subset. Every note's beat count must be
// representable with `divisions` per quarter.
std::string write_musicxml(const MusicScore& score, int divisions = 480);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_MUSICXML_H_
