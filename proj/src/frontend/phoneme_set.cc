#include "bytesing/frontend/phoneme_set.h"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "bytesing/common/error.h"

namespace bytesing::frontend {
namespace {

constexpr std::array<std::string_view, 21> kInitials = {
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h",
    "j", "q", "x", "zh", "ch", "sh", "r", "z", "c", "s"};

constexpr std::array<std::string_view, 38> kFinals = {
    "a",    "o",    "e",    "ai",  "ei",  "ao",  "ou",   "an",
    "en",   "ang",  "eng",  "ong", "er",  "i",   "ia",   "ie",
    "iao",  "iou",  "ian",  "in",  "iang", "ing", "iong", "u",
    "ua",   "uo",   "uai",  "uei", "uan", "uen", "uang", "ueng",
    "v",    "ve",   "van",  "vn",  "ii",  "iii"};

struct Inventory {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> ids;

  Inventory() {
    tokens.emplace_back(kSil);
    tokens.emplace_back(kRest);
    for (auto s : kInitials) tokens.emplace_back(s);
    for (auto s : kFinals) tokens.emplace_back(s);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      ids.emplace(tokens[i], static_cast<int>(i));
    }
  }
};

const Inventory& inventory() {
  static const Inventory inv;
  return inv;
}

}  // namespace

std::string_view phoneme_type_name(PhonemeType tp) {
  switch (tp) {
    case PhonemeType::kInitial: return "initial";
    case PhonemeType::kFinal: return "final";
    case PhonemeType::kZeroInitial: return "zero-initial";
    case PhonemeType::kSilence: return "silence";
  }
  return "unknown";
}

PhonemeType phoneme_type_from_name(std::string_view name) {
  for (int i = 0; i < kNumPhonemeTypes; ++i) {
    const auto tp = static_cast<PhonemeType>(i);
    if (phoneme_type_name(tp) == name) return tp;
  }
  throw LookupError("unknown phoneme type '" + std::string(name) + "'");
}

const std::vector<std::string>& phoneme_inventory() { return inventory().tokens; }

int num_phonemes() { return static_cast<int>(inventory().tokens.size()); }

int phoneme_id(std::string_view ph) {
  const auto& ids = inventory().ids;
  auto it = ids.find(std::string(ph));
  if (it == ids.end()) {
    throw LookupError("phoneme '" + std::string(ph) + "' is not in the inventory");
  }
  return it->second;
}

bool is_initial(std::string_view ph) {
  return std::find(kInitials.begin(), kInitials.end(), ph) != kInitials.end();
}

bool is_final(std::string_view ph) {
  return std::find(kFinals.begin(), kFinals.end(), ph) != kFinals.end();
}

}  // namespace bytesing::frontend
