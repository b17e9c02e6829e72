#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pireg/harness.hpp"

namespace pireg {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every accepted key in file order; see docs/config.md.
const std::vector<ConfigKey>& config_schema();

// Flat key = value configuration. Keys are validated against the schema,
// values are kept as text and parsed on access.
class Config {
 public:
  Config();

  void set(std::string_view key, std::string value);
  const std::string& get(std::string_view key) const;
  bool has_key(std::string_view key) const;

  // Overwrites keys with a named preset ("burgers", "vorticity").
  void apply_preset(std::string_view name);

  // Parses "key = value" lines. '#' starts a comment line; artifact.* keys
  // (checksums appended to manifests) are skipped.
  static std::vector<std::pair<std::string, std::string>> parse_entries(std::string_view text);

  // preset < file < flags. The preset is taken from paper_defaults in flags,
  // else in the file.
  static Config resolve(const std::vector<std::pair<std::string, std::string>>& file_entries,
                        const std::vector<std::pair<std::string, std::string>>& flag_entries);

  std::string serialize() const;

  double get_double(std::string_view key) const;
  long long get_int(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  std::vector<int> get_int_list(std::string_view key) const;
  std::vector<std::string> get_list(std::string_view key) const;
  Range get_range(std::string_view key) const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Typed views used by the commands.
TrainConfig train_config_from(const Config& cfg, const Dataset& ds);
SearchSpace search_space_from(const Config& cfg);
std::vector<Method> methods_from(const Config& cfg);

}  // namespace pireg
