#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "bsafe/error.hpp"
#include "bsafe/gp_posterior.hpp"

namespace bsafe::gp {

namespace {

constexpr char kMagic[8] = {'B', 'S', 'D', 'R', 'A', 'W', 'S', '1'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError("truncated binary draw file");
  return v;
}

}  // namespace

void write_draws_csv(std::ostream& out, const PosteriorDrawSet& draws) {
  out << "# seed=" << draws.seed() << " baseline=";
  for (std::size_t i = 0; i < draws.n_units(); ++i) out << (i ? "," : "") << draws.baseline_decisions()[i];
  out << '\n' << "unit,decision,draw,tau\n" << std::setprecision(17);
  for (std::size_t i = 0; i < draws.n_units(); ++i)
    for (int k = 0; k < draws.k_decisions(); ++k)
      for (std::size_t m = 0; m < draws.n_draws(); ++m) out << i << ',' << k << ',' << m << ',' << draws.at(i, k, m) << '\n';
}

PosteriorDrawSet read_draws_csv(std::istream& in) {
  std::string line;
  std::uint64_t seed = 0;
  std::vector<int> baseline;
  bool have_meta = false;
  while (std::getline(in, line)) {
    if (line.rfind("# seed=", 0) == 0) {
      auto sp = line.find(" baseline=");
      if (sp == std::string::npos) throw ParseError("draw file: malformed metadata line");
      seed = std::stoull(line.substr(7, sp - 7));
      std::stringstream ss(line.substr(sp + 10));
      std::string tok;
      while (std::getline(ss, tok, ',')) baseline.push_back(std::stoi(tok));
      have_meta = true;
    } else if (line.rfind("unit,", 0) == 0) {
      break;
    }
  }
  if (!have_meta) throw ParseError("draw file: missing '# seed=... baseline=...' line");
  struct Row {
    std::size_t i;
    int k;
    std::size_t m;
    double tau;
  };
  std::vector<Row> rows;
  std::size_t max_i = 0, max_m = 0;
  int max_k = 0;
  long row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++row_no;
    Row r{};
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(line);
    if (!(ss >> r.i >> c1 >> r.k >> c2 >> r.m >> c3 >> r.tau) || c1 != ',' || c2 != ',' || c3 != ',')
      throw ParseError("draw file: malformed row " + std::to_string(row_no), row_no);
    max_i = std::max(max_i, r.i);
    max_k = std::max(max_k, r.k);
    max_m = std::max(max_m, r.m);
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError("draw file has no rows");
  if (max_i + 1 != baseline.size()) throw ParseError("draw file: unit count does not match baseline metadata");
  PosteriorDrawSet out(max_i + 1, max_k + 1, max_m + 1, baseline, seed);
  if (rows.size() != out.raw().size()) throw ParseError("draw file: incomplete unit x decision x draw grid");
  for (const auto& r : rows) out.at(r.i, r.k, r.m) = r.tau;
  out.validate();
  return out;
}

void write_draws_binary(std::ostream& out, const PosteriorDrawSet& draws) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, draws.n_units());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(draws.k_decisions()));
  put<std::uint64_t>(out, draws.n_draws());
  put<std::uint64_t>(out, draws.seed());
  for (int b : draws.baseline_decisions()) put<std::int32_t>(out, b);
  out.write(reinterpret_cast<const char*>(draws.raw().data()),
            static_cast<std::streamsize>(draws.raw().size() * sizeof(double)));
}

PosteriorDrawSet read_draws_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError("not a binary draw file (bad magic)");
  const auto n = get<std::uint64_t>(in);
  const auto k = get<std::uint64_t>(in);
  const auto m = get<std::uint64_t>(in);
  const auto seed = get<std::uint64_t>(in);
  std::vector<int> baseline(n);
  for (auto& b : baseline) b = get<std::int32_t>(in);
  PosteriorDrawSet out(n, static_cast<int>(k), m, std::move(baseline), seed);
  for (std::size_t i = 0; i < n; ++i)
    for (int kk = 0; kk < static_cast<int>(k); ++kk)
      for (std::size_t mm = 0; mm < m; ++mm) out.at(i, kk, mm) = get<double>(in);
  out.validate();
  return out;
}

}  // namespace bsafe::gp
