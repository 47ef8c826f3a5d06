#ifndef BYTESING_NN_CHECKPOINT_H_
#define BYTESING_NN_CHECKPOINT_H_

#include <filesystem>
#include <map>
#include <string>

#include "bytesing/common/tensor_file.h"
#include "bytesing/nn/autograd.h"

namespace bytesing::nn {

// Checkpoint container (see docs/formats.md):
//   "BSCK" | u32 version | str kind | str config | u32 count |
//   count x (str name | BSTF tensor)
// where str is u32 byte length followed by UTF-8 bytes.
struct Checkpoint {
  std::string kind;         // "duration", "acoustic" or "vocoder"
  std::string config_text;  // key = value echo of the model config
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Parameters are stored as "param/<name>" f32 tensors.
void store_parameters(const ParameterStore& store, Checkpoint& ckpt);
// Throws ShapeError/LookupError when names or shapes disagree.
void restore_parameters(ParameterStore& store, const Checkpoint& ckpt);

}  // namespace bytesing::nn

#endif  // BYTESING_NN_CHECKPOINT_H_
