#include "bytesing/nn/checkpoint.h"

#include <array>
#include <fstream>

#include "bytesing/common/error.h"

namespace bytesing::nn {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kParamPrefix = "param/";

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("truncated checkpoint");
  return v;
}

void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_str(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("truncated checkpoint string");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kVersion);
  write_str(out, ckpt.kind);
  write_str(out, ckpt.config_text);
  write_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, tensor] : ckpt.tensors) {
    write_str(out, name);
    write_tensor(out, tensor);
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(path.string() + ": not a checkpoint");
  if (read_u32(in) != kVersion) throw IoError(path.string() + ": unsupported version");
  Checkpoint ckpt;
  ckpt.kind = read_str(in);
  ckpt.config_text = read_str(in);
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = read_str(in);
    ckpt.tensors.emplace(std::move(name), read_tensor(in));
  }
  return ckpt;
}

void store_parameters(const ParameterStore& store, Checkpoint& ckpt) {
  for (const Parameter* p : store.all()) {
    ckpt.tensors[kParamPrefix + p->name()] = Tensor::from_matrix(p->value);
  }
}

void restore_parameters(ParameterStore& store, const Checkpoint& ckpt) {
  for (Parameter* p : store.all()) {
    auto it = ckpt.tensors.find(kParamPrefix + p->name());
    if (it == ckpt.tensors.end()) {
      throw LookupError("checkpoint lacks parameter '" + p->name() + "'");
    }
    Matrix m = it->second.to_matrix();
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols()) {
      throw ShapeError("checkpoint parameter '" + p->name() + "' has shape " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    p->value = std::move(m);
  }
}

}  // namespace bytesing::nn
