#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace sacl::cli {

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

// Resolved key/value settings of one subcommand. Values come from the
// defaults, then an optional config file, then command-line flags.
class RunConfig {
 public:
  explicit RunConfig(std::vector<KeySpec> keys);

  const std::vector<KeySpec>& keys() const noexcept { return keys_; }
  bool known(const std::string& key) const;
  // Throws ConfigError for keys outside the spec.
  void set(const std::string& key, const std::string& value);
  // `key = value` lines; '#' starts a comment. Unknown keys are rejected.
  void merge_file(const std::filesystem::path& path);

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;

  // Sorted `key = value` lines.
  std::string render() const;

 private:
  std::vector<KeySpec> keys_;
  std::map<std::string, std::string> values_;
};

std::string normalize_key(std::string key);

}  // namespace sacl::cli
