#include "bytesing/common/tensor_file.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "bytesing/common/error.h"

namespace bytesing {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'S', 'T', 'F'};
constexpr std::uint32_t kMaxRank = 8;

static_assert(std::endian::native == std::endian::little,
              "BSTF I/O assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("truncated BSTF header");
  return v;
}

}  // namespace

std::size_t Tensor::num_elements() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor Tensor::from_matrix(const Matrix& m) {
  Tensor t;
  t.dtype = DType::kF32;
  t.dims = {static_cast<std::uint32_t>(m.rows()),
            static_cast<std::uint32_t>(m.cols())};
  t.f32.resize(m.size());
  for (Index i = 0; i < m.size(); ++i) t.f32[i] = static_cast<float>(m.data()[i]);
  return t;
}

Tensor Tensor::from_ints(const std::vector<std::int32_t>& values) {
  return from_ints(values, {static_cast<std::uint32_t>(values.size())});
}

Tensor Tensor::from_ints(const std::vector<std::int32_t>& values,
                         std::vector<std::uint32_t> dims) {
  Tensor t;
  t.dtype = DType::kI32;
  t.dims = std::move(dims);
  if (t.num_elements() != values.size()) {
    throw ShapeError("int tensor dims do not match value count");
  }
  t.i32 = values;
  return t;
}

Matrix Tensor::to_matrix() const {
  if (dims.empty() || dims.size() > 2) {
    throw ShapeError("to_matrix needs a rank-1 or rank-2 tensor, got rank " +
                     std::to_string(dims.size()));
  }
  const Index rows = dims.size() == 2 ? dims[0] : 1;
  const Index cols = dims.size() == 2 ? dims[1] : dims[0];
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) {
    m.data()[i] = dtype == DType::kF32 ? static_cast<double>(f32[i])
                                       : static_cast<double>(i32[i]);
  }
  return m;
}

std::vector<std::int32_t> Tensor::to_ints() const {
  if (dtype != DType::kI32) throw ShapeError("tensor is not i32");
  return i32;
}

void write_tensor(std::ostream& out, const Tensor& tensor) {
  if (tensor.dims.size() > kMaxRank) throw ShapeError("tensor rank too large");
  out.write(kMagic.data(), kMagic.size());
  const auto code = static_cast<std::uint8_t>(tensor.dtype);
  out.write(reinterpret_cast<const char*>(&code), 1);
  write_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) write_u32(out, d);
  const std::size_t n = tensor.num_elements();
  if (tensor.dtype == DType::kF32) {
    if (tensor.f32.size() != n) throw ShapeError("f32 payload size mismatch");
    out.write(reinterpret_cast<const char*>(tensor.f32.data()),
              static_cast<std::streamsize>(n * sizeof(float)));
  } else {
    if (tensor.i32.size() != n) throw ShapeError("i32 payload size mismatch");
    out.write(reinterpret_cast<const char*>(tensor.i32.data()),
              static_cast<std::streamsize>(n * sizeof(std::int32_t)));
  }
  if (!out) throw IoError("failed writing BSTF tensor");
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("bad BSTF magic");
  std::uint8_t code = 0;
  in.read(reinterpret_cast<char*>(&code), 1);
  if (!in || code > 1) throw IoError("bad BSTF dtype code");
  Tensor t;
  t.dtype = static_cast<DType>(code);
  const std::uint32_t rank = read_u32(in);
  if (rank > kMaxRank) throw IoError("BSTF rank too large");
  t.dims.resize(rank);
  for (auto& d : t.dims) d = read_u32(in);
  const std::size_t n = t.num_elements();
  if (t.dtype == DType::kF32) {
    t.f32.resize(n);
    in.read(reinterpret_cast<char*>(t.f32.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
  } else {
    t.i32.resize(n);
    in.read(reinterpret_cast<char*>(t.i32.data()),
            static_cast<std::streamsize>(n * sizeof(std::int32_t)));
  }
  if (!in) throw IoError("truncated BSTF payload");
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(out, tensor);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace bytesing
