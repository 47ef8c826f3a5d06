#include "bytesing/frontend/lexicon.h"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bytesing/common/error.h"

#ifndef BYTESING_DATA_DIR
#define BYTESING_DATA_DIR "data"
#endif

namespace bytesing::frontend {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::string cur;
  for (char c : line) {
    if (c == '\t') {
      cols.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cols.push_back(cur);
  return cols;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("BYTESING_DATA_DIR")) return env;
  return BYTESING_DATA_DIR;
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 || cols[0].empty() || cols[2].empty()) {
      throw ParseError("lexicon: expected pinyin<TAB>initial<TAB>final", line_no);
    }
    if (!cols[1].empty() && !is_initial(cols[1])) {
      throw ParseError("lexicon: unknown initial '" + cols[1] + "'", line_no);
    }
    if (!is_final(cols[2])) {
      throw ParseError("lexicon: unknown final '" + cols[2] + "'", line_no);
    }
    lex.entries_[cols[0]] = LexiconEntry{cols[1], cols[2]};
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  return parse(in);
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = load(data_dir() / "pinyin_lexicon.tsv");
  return lex;
}

const LexiconEntry* Lexicon::find(std::string_view pinyin) const {
  auto it = entries_.find(pinyin);
  return it == entries_.end() ? nullptr : &it->second;
}

HanziLexicon HanziLexicon::parse(std::istream& in) {
  HanziLexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_tabs(line);
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw ParseError("hanzi lexicon: expected hanzi<TAB>pinyin[,pinyin...]",
                       line_no);
    }
    lex.first_choice_.emplace(cols[0], cols[1].substr(0, cols[1].find(',')));
  }
  return lex;
}

HanziLexicon HanziLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open hanzi lexicon " + path.string());
  return parse(in);
}

const HanziLexicon& HanziLexicon::builtin() {
  static const HanziLexicon lex = load(data_dir() / "hanzi_pinyin.tsv");
  return lex;
}

const std::string* HanziLexicon::find(std::string_view hanzi) const {
  auto it = first_choice_.find(hanzi);
  return it == first_choice_.end() ? nullptr : &it->second;
}

ToneSyllable split_tone(std::string_view lyric) {
  std::string text;
  for (char c : lyric) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  text = replace_all(text, "\xc3\xbc", "v");  // ü
  text = replace_all(text, "u:", "v");
  ToneSyllable out;
  if (!text.empty() && std::isdigit(static_cast<unsigned char>(text.back()))) {
    const int digit = text.back() - '0';
    if (digit > 5) {
      throw ValidationError("invalid tone digit in lyric '" + std::string(lyric) + "'");
    }
    out.tone = digit == 5 ? 0 : digit;
    text.pop_back();
  }
  out.pinyin = std::move(text);
  return out;
}

std::vector<PhonemeEvent> phonemize(std::string_view pinyin, int tone,
                                    const Lexicon& lexicon) {
  if (tone < 0 || tone > 4) {
    throw ValidationError("tone must be in 0..4, got " + std::to_string(tone));
  }
  const LexiconEntry* entry = lexicon.find(pinyin);
  if (entry == nullptr) {
    throw LookupError("pinyin syllable '" + std::string(pinyin) +
                      "' is not in the lexicon");
  }
  std::vector<PhonemeEvent> out;
  if (entry->initial.empty()) {
    out.push_back(PhonemeEvent{.ph = entry->final, .tp = PhonemeType::kZeroInitial,
                               .tone = tone});
  } else {
    out.push_back(PhonemeEvent{.ph = entry->initial, .tp = PhonemeType::kInitial,
                               .tone = tone});
    out.push_back(PhonemeEvent{.ph = entry->final, .tp = PhonemeType::kFinal,
                               .tone = tone});
  }
  return out;
}

}  // namespace bytesing::frontend
