#ifndef BYTESING_FRONTEND_PHONEME_SET_H_
#define BYTESING_FRONTEND_PHONEME_SET_H_

#include <string>
#include <string_view>
#include <vector>

namespace bytesing::frontend {

enum class PhonemeType { kInitial = 0, kFinal = 1, kZeroInitial = 2, kSilence = 3 };
inline constexpr int kNumPhonemeTypes = 4;

std::string_view phoneme_type_name(PhonemeType tp);
PhonemeType phoneme_type_from_name(std::string_view name);

inline constexpr std::string_view kSil = "sil";
inline constexpr std::string_view kRest = "rest";

// Fixed Mandarin inventory: {sil, rest}, 21 initials, 38 finals.
// Finals use full forms (iou, uei, uen); "ii" is the apical vowel after
// z/c/s, "iii" the retroflex one after zh/ch/sh/r, "v" is the umlaut u.
const std::vector<std::string>& phoneme_inventory();
int num_phonemes();
// Throws LookupError for tokens outside the inventory.
int phoneme_id(std::string_view ph);
bool is_initial(std::string_view ph);
bool is_final(std::string_view ph);

}  // namespace bytesing::frontend

#endif  // BYTESING_FRONTEND_PHONEME_SET_H_
