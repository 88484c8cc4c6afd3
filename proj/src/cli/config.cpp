#include "cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "bsafe/error.hpp"

namespace bsafe::cli {

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

namespace {

bool parse_double(const std::string& s, double& v) {
  const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return false;
  const char* first = s.data() + b;
  const char* last = s.data() + e + 1;
  auto [ptr, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split(s, ',')) {
    double v = 0.0;
    if (!parse_double(f, v)) throw UsageError("cannot parse '" + f + "' as a number in list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

CovariateSet read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* names) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  CovariateSet rows;
  std::string line;
  long row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line, ',');
    Covariates x;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      x.push_back(v);
    }
    if (!numeric) {
      if (!first) throw ParseError(path.string() + ": row " + std::to_string(row + 1) + " is not numeric", row);
      if (names) *names = fields;
      first = false;
      continue;
    }
    first = false;
    if (!rows.empty() && x.size() != rows.front().size())
      throw ParseError(path.string() + ": row " + std::to_string(row + 1) + " has " + std::to_string(x.size()) +
                           " fields, expected " + std::to_string(rows.front().size()),
                       row);
    rows.push_back(std::move(x));
    ++row;
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
  return rows;
}

CLI::Option* Overrides::add(CLI::App* app, const std::string& flag, const std::string& key, Kind kind,
                            const std::string& help) {
  entries_.push_back(Entry{key, kind, {}, false, nullptr});
  Entry& e = entries_.back();
  if (kind == Kind::flag)
    e.opt = app->add_flag_callback(flag, [&e] { e.set = true; }, help);
  else
    e.opt = app->add_option_function<std::string>(
        flag,
        [&e](const std::string& v) {
          e.value = v;
          e.set = true;
        },
        help);
  return e.opt;
}

bool Overrides::given(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key && e.set) return true;
  return false;
}

void Overrides::apply(Json& section) const {
  for (const auto& e : entries_) {
    if (!e.set) continue;
    Json* target = &section;
    std::string key = e.key;
    for (auto dot = key.find('.'); dot != std::string::npos; dot = key.find('.')) {
      target = &(*target)[key.substr(0, dot)];
      key = key.substr(dot + 1);
    }
    double v = 0.0;
    switch (e.kind) {
      case Kind::text:
        (*target)[key] = e.value;
        break;
      case Kind::integer:
        if (!parse_double(e.value, v) || v != static_cast<double>(static_cast<long long>(v)))
          throw UsageError("expected an integer for " + e.opt->get_name() + ", got '" + e.value + "'");
        (*target)[key] = static_cast<long long>(v);
        break;
      case Kind::real:
        if (!parse_double(e.value, v))
          throw UsageError("expected a number for " + e.opt->get_name() + ", got '" + e.value + "'");
        (*target)[key] = v;
        break;
      case Kind::real_list:
        (*target)[key] = parse_real_list(e.value);
        break;
      case Kind::flag:
        (*target)[key] = true;
        break;
    }
  }
}

Json section_from_file(const std::filesystem::path& path, const std::string& command,
                       std::optional<std::uint64_t>& seed) {
  const Json j = load_json_file(path);
  if (!j.is_object()) throw UsageError(path.string() + ": config must be a JSON object");
  if (j.contains("config")) {
    for (const auto& [key, _] : j.items())
      if (key != "version" && key != "command" && key != "seed" && key != "config")
        throw UsageError(path.string() + ": unknown key '" + key + "'");
    if (j.contains("command") && j.at("command").get<std::string>() != command)
      throw UsageError(path.string() + " is a '" + j.at("command").get<std::string>() + "' config, not '" + command + "'");
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    return j.at("config");
  }
  Json section = j;
  if (section.contains("seed")) {
    seed = section.at("seed").get<std::uint64_t>();
    section.erase("seed");
  }
  return section;
}

void merge_known(Json& into, const Json& from, const std::string& where) {
  if (!from.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, value] : from.items()) {
    if (!into.contains(key)) throw UsageError("unknown key '" + key + "' in " + where);
    if (into[key].is_object() && value.is_object() && key != "model" && key != "baseline")
      merge_known(into[key], value, where + "." + key);
    else
      into[key] = value;
  }
}

}  // namespace bsafe::cli
