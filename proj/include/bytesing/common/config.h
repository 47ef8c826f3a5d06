#ifndef BYTESING_COMMON_CONFIG_H_
#define BYTESING_COMMON_CONFIG_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bytesing {

// Plain-text `section.key = value` configuration. Lines starting with '#'
// are comments. Keys are kept sorted so `to_text()` is canonical.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;

  void set(const std::string& key, const std::string& value);

  // Entries whose key starts with `prefix + "."`, prefix kept.
  KeyValueConfig section(const std::string& prefix) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string to_text() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::string join_ints(const std::vector<int>& values);

}  // namespace bytesing

#endif  // BYTESING_COMMON_CONFIG_H_
