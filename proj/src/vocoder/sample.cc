#include "bytesing/vocoder/sample.h"

#include <string>

#include "bytesing/common/error.h"

namespace bytesing::vocoder {

CoarseFine split_sample(int s) {
  if (s < 0 || s > 65535) {
    throw ValidationError("sample " + std::to_string(s) + " is outside [0, 65535]");
  }
  return CoarseFine{s / 256, s % 256};
}

int combine_sample(int coarse, int fine) {
  if (coarse < 0 || coarse > 255 || fine < 0 || fine > 255) {
    throw ValidationError("coarse/fine (" + std::to_string(coarse) + ", " +
                          std::to_string(fine) + ") outside [0, 255]");
  }
  return coarse * 256 + fine;
}

}  // namespace bytesing::vocoder
