#ifndef BYTESING_COMMON_TENSOR_FILE_H_
#define BYTESING_COMMON_TENSOR_FILE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bytesing/common/matrix.h"

namespace bytesing {

// BSTF tensor container:
//   "BSTF" | u8 dtype (0 = f32, 1 = i32) | u32 rank | u32 dims[rank] | payload
// All integers and the payload are little-endian; payload is row-major.
enum class DType : std::uint8_t { kF32 = 0, kI32 = 1 };

struct Tensor {
  DType dtype = DType::kF32;
  std::vector<std::uint32_t> dims;
  std::vector<float> f32;
  std::vector<std::int32_t> i32;

  std::size_t num_elements() const;

  static Tensor from_matrix(const Matrix& m);
  static Tensor from_ints(const std::vector<std::int32_t>& values);
  static Tensor from_ints(const std::vector<std::int32_t>& values,
                          std::vector<std::uint32_t> dims);
  // Rank-1 tensors become a single row; rank-2 map directly.
  Matrix to_matrix() const;
  std::vector<std::int32_t> to_ints() const;

  bool operator==(const Tensor&) const = default;
};

void write_tensor(std::ostream& out, const Tensor& tensor);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace bytesing

#endif  // BYTESING_COMMON_TENSOR_FILE_H_
