#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include "bsafe/error.hpp"
#include "bsafe/hes.hpp"

namespace bsafe::hes {

using tables::DecisionTable;

std::string to_string(Rounding r) { return r == Rounding::half_up ? "half_up" : "half_down"; }

Rounding rounding_from_string(const std::string& s) {
  if (s == "half_up") return Rounding::half_up;
  if (s == "half_down") return Rounding::half_down;
  throw ValidationError("unknown rounding rule '" + s + "' (expected half_up or half_down)");
}

std::vector<int> round_scores(std::span<const double> x, Rounding rule, int levels) {
  std::vector<int> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 1.0 && x[i] <= levels))
      throw ValidationError("sub-model score " + std::to_string(i + 1) + " = " + std::to_string(x[i]) +
                            " outside [1, " + std::to_string(levels) + "]");
    out[i] = static_cast<int>(rule == Rounding::half_up ? std::floor(x[i] + 0.5) : std::ceil(x[i] - 0.5));
  }
  return out;
}

namespace {

// "x<k>" with 1 <= k <= n, else -1
int raw_index(const std::string& src, int n) {
  if (src.size() < 2 || src[0] != 'x') return -1;
  for (std::size_t i = 1; i < src.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(src[i]))) return -1;
  const int k = std::stoi(src.substr(1));
  return k >= 1 && k <= n ? k - 1 : -1;
}

}  // namespace

HesPipeline::HesPipeline(int n_inputs, std::vector<Node> nodes, std::map<std::string, DecisionTable> tables,
                         Rounding rounding, int levels)
    : n_inputs_(n_inputs), rounding_(rounding), levels_(levels) {
  if (n_inputs_ < 1) throw ValidationError("pipeline needs at least one raw input");
  if (levels_ < 1) throw ValidationError("score levels must be positive");
  if (nodes.empty()) throw ValidationError("pipeline has no nodes");
  for (auto& [name, t] : tables) {
    table_names_.push_back(name);
    tables_.push_back(std::move(t));
  }

  std::map<std::string, std::size_t> by_id;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (nodes[j].id.empty()) throw ValidationError("pipeline node without id");
    if (raw_index(nodes[j].id, n_inputs_) >= 0)
      throw ValidationError("node id '" + nodes[j].id + "' clashes with a raw input name");
    if (!by_id.emplace(nodes[j].id, j).second) throw ValidationError("duplicate node id '" + nodes[j].id + "'");
  }
  // Kahn's algorithm, taking ready nodes in file order
  std::vector<int> pending(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> consumers(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (nodes[j].inputs.empty()) throw ValidationError("node '" + nodes[j].id + "' has no inputs");
    for (const auto& src : nodes[j].inputs) {
      if (raw_index(src, n_inputs_) >= 0) continue;
      auto it = by_id.find(src);
      if (it == by_id.end()) throw ValidationError("node '" + nodes[j].id + "' reads unknown source '" + src + "'");
      ++pending[j];
      consumers[it->second].push_back(j);
    }
  }
  std::vector<std::size_t> sinks;
  for (std::size_t j = 0; j < nodes.size(); ++j)
    if (consumers[j].empty()) sinks.push_back(j);
  if (sinks.size() != 1) throw ValidationError("pipeline must have exactly one sink, found " + std::to_string(sinks.size()));

  std::vector<bool> done(nodes.size(), false);
  while (nodes_.size() < nodes.size()) {
    bool progressed = false;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (done[j] || pending[j] != 0 || j == sinks[0]) continue;
      done[j] = true;
      progressed = true;
      nodes_.push_back(nodes[j]);
      for (std::size_t c : consumers[j]) --pending[c];
      break;
    }
    if (!progressed) {
      if (pending[sinks[0]] == 0 && !done[sinks[0]]) {
        done[sinks[0]] = true;
        nodes_.push_back(nodes[sinks[0]]);
        continue;
      }
      throw ValidationError("pipeline wiring has a cycle");
    }
  }
  compile();
}

void HesPipeline::compile() {
  std::map<std::string, int> position;
  node_table_.clear();
  node_sources_.clear();
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const Node& nd = nodes_[j];
    auto it = std::find(table_names_.begin(), table_names_.end(), nd.table);
    if (it == table_names_.end()) throw ValidationError("node '" + nd.id + "' uses unknown table '" + nd.table + "'");
    const std::size_t slot = static_cast<std::size_t>(it - table_names_.begin());
    const DecisionTable& t = tables_[slot];
    if (t.arity() != nd.inputs.size())
      throw ValidationError("node '" + nd.id + "' has " + std::to_string(nd.inputs.size()) + " inputs but table '" +
                            nd.table + "' has arity " + std::to_string(t.arity()));
    std::vector<int> src;
    for (std::size_t a = 0; a < nd.inputs.size(); ++a) {
      const int raw = raw_index(nd.inputs[a], n_inputs_);
      int card = levels_;
      if (raw >= 0) {
        src.push_back(raw);
      } else {
        const int up = position.at(nd.inputs[a]);
        src.push_back(-(up + 1));
        card = tables_[node_table_[static_cast<std::size_t>(up)]].outputs();
      }
      if (t.sizes()[a] != card)
        throw ValidationError("node '" + nd.id + "' input " + std::to_string(a + 1) + " takes " +
                              std::to_string(card) + " values but table '" + nd.table + "' axis has " +
                              std::to_string(t.sizes()[a]));
    }
    node_table_.push_back(slot);
    node_sources_.push_back(std::move(src));
    position[nd.id] = static_cast<int>(j);
  }
}

std::map<std::string, DecisionTable> HesPipeline::tables() const {
  std::map<std::string, DecisionTable> m;
  for (std::size_t s = 0; s < tables_.size(); ++s) m.emplace(table_names_[s], tables_[s]);
  return m;
}

const DecisionTable& HesPipeline::table(const std::string& name) const {
  auto it = std::find(table_names_.begin(), table_names_.end(), name);
  if (it == table_names_.end()) throw ValidationError("pipeline has no table '" + name + "'");
  return tables_[static_cast<std::size_t>(it - table_names_.begin())];
}

void HesPipeline::set_table(const std::string& name, DecisionTable t) {
  auto it = std::find(table_names_.begin(), table_names_.end(), name);
  if (it == table_names_.end()) throw ValidationError("pipeline has no table '" + name + "'");
  auto& slot = tables_[static_cast<std::size_t>(it - table_names_.begin())];
  if (slot.sizes() != t.sizes() || slot.outputs() != t.outputs())
    throw ValidationError("replacement for table '" + name + "' has a different shape");
  slot = std::move(t);
}

HesPipeline HesPipeline::with_detached_sink(const std::string& name) const {
  if (std::find(table_names_.begin(), table_names_.end(), name) != table_names_.end())
    throw ValidationError("table name '" + name + "' already in use");
  auto t = tables();
  t.emplace(name, sink_table());
  auto nodes = nodes_;
  nodes.back().table = name;
  return HesPipeline(n_inputs_, std::move(nodes), std::move(t), rounding_, levels_);
}

std::vector<int> HesPipeline::wired_inputs() const {
  std::set<int> raw;
  std::vector<bool> reach(nodes_.size(), false);
  reach.back() = true;
  for (std::size_t j = nodes_.size(); j-- > 0;) {
    if (!reach[j]) continue;
    for (int s : node_sources_[j]) {
      if (s >= 0)
        raw.insert(s + 1);
      else
        reach[static_cast<std::size_t>(-s - 1)] = true;
    }
  }
  return {raw.begin(), raw.end()};
}

std::vector<int> HesPipeline::sink_inputs(std::span<const int> scores) const {
  if (scores.size() != static_cast<std::size_t>(n_inputs_))
    throw ValidationError("pipeline expects " + std::to_string(n_inputs_) + " scores, got " +
                          std::to_string(scores.size()));
  std::vector<int> out(nodes_.size());
  std::vector<int> args;
  for (std::size_t j = 0; j + 1 < nodes_.size(); ++j) {
    args.clear();
    for (int s : node_sources_[j]) args.push_back(s >= 0 ? scores[static_cast<std::size_t>(s)] : out[static_cast<std::size_t>(-s - 1)]);
    out[j] = tables_[node_table_[j]](args);
  }
  args.clear();
  for (int s : node_sources_.back()) args.push_back(s >= 0 ? scores[static_cast<std::size_t>(s)] : out[static_cast<std::size_t>(-s - 1)]);
  return args;
}

int HesPipeline::evaluate_rounded(std::span<const int> scores) const {
  const auto args = sink_inputs(scores);
  return tables_[node_table_.back()](args);
}

int HesPipeline::evaluate(std::span<const double> x) const {
  const auto r = round_scores(x, rounding_, levels_);
  return evaluate_rounded(r);
}

Json HesPipeline::wiring_to_json() const {
  Json nodes = Json::array();
  for (const auto& nd : nodes_) nodes.push_back(Json{{"id", nd.id}, {"table", nd.table}, {"inputs", nd.inputs}});
  return Json{{"inputs", n_inputs_}, {"rounding", to_string(rounding_)}, {"levels", levels_}, {"nodes", nodes}};
}

Json HesPipeline::to_json() const {
  Json j = wiring_to_json();
  Json t = Json::object();
  for (std::size_t s = 0; s < tables_.size(); ++s) t[table_names_[s]] = tables::table_to_json(tables_[s]);
  j["tables"] = t;
  return j;
}

HesPipeline pipeline_from_json(const Json& j, const std::filesystem::path& base_dir) {
  for (const auto& [key, _] : j.items())
    if (key != "inputs" && key != "rounding" && key != "levels" && key != "nodes" && key != "tables" &&
        key != "description" && key != "run")
      throw ValidationError("unknown key '" + key + "' in pipeline wiring");
  if (!j.contains("nodes") || !j.contains("tables")) throw ValidationError("pipeline wiring needs 'nodes' and 'tables'");
  std::vector<Node> nodes;
  for (const auto& n : j.at("nodes")) {
    for (const auto& [key, _] : n.items())
      if (key != "id" && key != "table" && key != "inputs")
        throw ValidationError("unknown key '" + key + "' in pipeline node");
    nodes.push_back(Node{n.at("id").get<std::string>(), n.at("table").get<std::string>(),
                         n.at("inputs").get<std::vector<std::string>>()});
  }
  std::map<std::string, DecisionTable> tabs;
  for (const auto& [name, spec] : j.at("tables").items()) {
    if (spec.is_string()) {
      const auto path = base_dir / spec.get<std::string>();
      std::ifstream in(path);
      if (!in) throw ValidationError("cannot open table file " + path.string());
      tabs.emplace(name, tables::read_table_text(in));
    } else {
      tabs.emplace(name, tables::table_from_json(spec));
    }
  }
  return HesPipeline(j.value("inputs", 20), std::move(nodes), std::move(tabs),
                     rounding_from_string(j.value("rounding", std::string("half_up"))), j.value("levels", 5));
}

HesPipeline load_pipeline(const std::filesystem::path& wiring_file) {
  std::ifstream in(wiring_file);
  if (!in) throw ValidationError("cannot open pipeline wiring " + wiring_file.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("pipeline wiring " + wiring_file.string() + ": " + e.what());
  }
  return pipeline_from_json(j, wiring_file.parent_path());
}

Policy pipeline_policy(HesPipeline p) {
  return Policy::table_pipeline(std::make_shared<const PipelineRule>(std::move(p)));
}

std::shared_ptr<const DecisionRule> load_pipeline_rule(const Json& j) {
  return std::make_shared<const PipelineRule>(pipeline_from_json(j));
}

}  // namespace bsafe::hes
