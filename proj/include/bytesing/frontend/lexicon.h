#ifndef BYTESING_FRONTEND_LEXICON_H_
#define BYTESING_FRONTEND_LEXICON_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bytesing/frontend/score.h"

namespace bytesing::frontend {

struct LexiconEntry {
  std::string initial;  // empty for zero-initial syllables
  std::string final;
};

// pinyin -> (initial?, final), read from `pinyin<TAB>initial<TAB>final`.
class Lexicon {
 public:
  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);
  // Lexicon shipped in data/, located at build time.
  static const Lexicon& builtin();

  const LexiconEntry* find(std::string_view pinyin) const;
  const std::map<std::string, LexiconEntry, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, LexiconEntry, std::less<>> entries_;
};

// Optional hanzi -> pinyin pre-pass; keeps only the first listed reading.
class HanziLexicon {
 public:
  static HanziLexicon parse(std::istream& in);
  static HanziLexicon load(const std::filesystem::path& path);
  static const HanziLexicon& builtin();

  // Returns tone-numbered pinyin, or nullptr when absent.
  const std::string* find(std::string_view hanzi) const;

 private:
  std::map<std::string, std::string, std::less<>> first_choice_;
};

struct ToneSyllable {
  std::string pinyin;
  int tone = 0;
};

// "shuai4" -> {"shuai", 4}. A missing digit or 5 means neutral tone (0).
// "lü"/"lu:" spellings are folded to "lv".
ToneSyllable split_tone(std::string_view lyric);

// Decomposes one syllable into (initial, final) or (final as zero-initial);
// the tone is attached to every phoneme. Throws LookupError naming the
// syllable when it is not in the lexicon.
std::vector<PhonemeEvent> phonemize(std::string_view pinyin, int tone,
                                    const Lexicon& lexicon);

std::filesystem::path data_dir();

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_LEXICON_H_
