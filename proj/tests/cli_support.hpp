#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bsafe/cli.hpp"
#include "bsafe/rng.hpp"

namespace bsafe::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Relative path -> contents of every file below dir.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

// Runs `command` into dir/first, reruns it from dir/first/run.json into
// dir/second, and reports whether both trees are byte-identical.
inline bool reruns_identically(const std::vector<std::string>& command, const std::vector<std::string>& flags,
                               const std::filesystem::path& dir, std::string* why = nullptr) {
  std::vector<std::string> first = command;
  first.insert(first.end(), flags.begin(), flags.end());
  first.insert(first.end(), {"--out", (dir / "first").string()});
  const auto a = run_cli(first);
  if (a.code != 0) {
    if (why) *why = "first run failed: " + a.err;
    return false;
  }
  std::vector<std::string> second = command;
  second.insert(second.end(), {"--config", (dir / "first" / "run.json").string(), "--out", (dir / "second").string()});
  const auto b = run_cli(second);
  if (b.code != 0) {
    if (why) *why = "rerun failed: " + b.err;
    return false;
  }
  const auto sa = snapshot(dir / "first"), sb = snapshot(dir / "second");
  if (sa != sb) {
    if (why)
      for (const auto& [k, v] : sa)
        if (!sb.count(k) || sb.at(k) != v) *why = "differs: " + k;
    return false;
  }
  // Stdout may name the output directory; compare with it masked.
  auto mask = [](std::string s, const std::string& path) {
    for (std::size_t at; (at = s.find(path)) != std::string::npos;) s.replace(at, path.size(), "<out>");
    return s;
  };
  if (mask(a.out, (dir / "first").string()) != mask(b.out, (dir / "second").string())) {
    if (why) *why = "stdout differs";
    return false;
  }
  return true;
}

// Scenario-like dataset with columns x1,x2,d,y.
inline void write_toy_dataset(const std::filesystem::path& path, std::size_t n, std::uint64_t seed, int covariates = 2) {
  Rng rng(seed);
  std::ofstream f(path);
  for (int j = 1; j <= covariates; ++j) f << 'x' << j << ',';
  f << "d,y\n";
  f.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    std::vector<double> x(static_cast<std::size_t>(covariates));
    for (auto& v : x) s += (v = 2.0 * uniform01(rng) - 1.0);
    const int d = uniform01(rng) < 0.5 ? 1 : 0;
    const double y = s + d * (x[0] > 0 ? 1.0 : -1.0) + 0.5 * (uniform01(rng) - 0.5);
    for (double v : x) f << v << ',';
    f << d << ',' << y << '\n';
  }
}

// Twenty raw scores in [1, 5], a decision in 0..4 and an outcome.
inline void write_hes_dataset(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::ofstream f(path);
  for (int j = 1; j <= 20; ++j) f << 's' << j << ',';
  f << "d,y\n";
  f.precision(17);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int j = 0; j < 20; ++j) {
      const double v = 1.0 + 4.0 * uniform01(rng);
      mean += v / 20.0;
      f << v << ',';
    }
    const int d = static_cast<int>(uniform_index(rng, 5));
    f << d << ',' << mean - 0.3 * d + (uniform01(rng) - 0.5) << '\n';
  }
}

}  // namespace bsafe::testing
