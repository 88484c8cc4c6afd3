#pragma once

#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <optional>
#include "bsafe/core.hpp"

namespace bsafe::cli {

Json load_json_file(const std::filesystem::path& path);
std::vector<double> parse_real_list(const std::string& s);

// Numeric CSV; an optional header row is detected and returned in `names`.
CovariateSet read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* names = nullptr);

// Flags that override entries of a command's config section.
class Overrides {
 public:
  enum class Kind { text, integer, real, real_list, flag };

  // `key` may name a nested entry as "outer.inner".
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, Kind kind, const std::string& help);
  bool given(const std::string& key) const;
  void apply(Json& section) const;

 private:
  struct Entry {
    std::string key;
    Kind kind;
    std::string value;
    bool set = false;
    CLI::Option* opt = nullptr;
  };
  std::deque<Entry> entries_;
};

// Section from a --config file: accepts a full run record
// {"version", "command", "seed", "config"} or a bare section. The file's
// seed, if any, is stored in `seed`.
Json section_from_file(const std::filesystem::path& path, const std::string& command, std::optional<std::uint64_t>& seed);

// Copies `from` into `into`, rejecting keys that `into` does not declare.
void merge_known(Json& into, const Json& from, const std::string& where);

}  // namespace bsafe::cli
