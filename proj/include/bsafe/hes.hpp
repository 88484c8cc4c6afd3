#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsafe/core.hpp"
#include "bsafe/tables.hpp"

namespace bsafe::hes {

enum class Rounding { half_up, half_down };

std::string to_string(Rounding r);
Rounding rounding_from_string(const std::string& s);

// Nearest integer in 1..levels. Throws on inputs outside [1, levels].
std::vector<int> round_scores(std::span<const double> x, Rounding rule = Rounding::half_up, int levels = 5);

// One aggregation node. Sources name either a raw input ("x1".."xN") or
// another node id; `table` names an entry of the pipeline's table map, so
// nodes naming the same table share it.
struct Node {
  std::string id;
  std::string table;
  std::vector<std::string> inputs;
};

class HesPipeline {
 public:
  HesPipeline(int n_inputs, std::vector<Node> nodes, std::map<std::string, tables::DecisionTable> tables,
              Rounding rounding = Rounding::half_up, int levels = 5);

  int n_inputs() const { return n_inputs_; }
  int levels() const { return levels_; }
  Rounding rounding() const { return rounding_; }
  // Topological order; the last node is the sink.
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& sink() const { return nodes_.back(); }
  std::map<std::string, tables::DecisionTable> tables() const;
  const tables::DecisionTable& table(const std::string& name) const;
  const tables::DecisionTable& sink_table() const { return table(sink().table); }
  int output_levels() const { return sink_table().outputs(); }

  // Replaces a table with one of the same shape.
  void set_table(const std::string& name, tables::DecisionTable t);
  // Copy in which the sink reads its own table `name` instead of the shared one.
  HesPipeline with_detached_sink(const std::string& name = "top") const;
  // Raw inputs that reach the sink, 1-based.
  std::vector<int> wired_inputs() const;

  int evaluate(std::span<const double> x) const;
  int evaluate_rounded(std::span<const int> scores) const;
  // The scores fed into the sink table.
  std::vector<int> sink_inputs(std::span<const int> scores) const;

  Json wiring_to_json() const;
  Json to_json() const;  // wiring plus inline tables

 private:
  void compile();

  int n_inputs_;
  std::vector<Node> nodes_;
  std::vector<std::string> table_names_;
  std::vector<tables::DecisionTable> tables_;
  // per node: table slot and sources (>= 0 raw input, < 0 node -(j+1))
  std::vector<std::size_t> node_table_;
  std::vector<std::vector<int>> node_sources_;
  Rounding rounding_;
  int levels_;
};

// Wiring document: {"inputs", "rounding", "levels", "nodes": [{id, table, inputs}]}.
// Tables come either inline under "tables" as JSON objects or as file names of
// plain-text tables resolved against `base_dir`.
HesPipeline pipeline_from_json(const Json& j, const std::filesystem::path& base_dir = {});
HesPipeline load_pipeline(const std::filesystem::path& wiring_file);

// The HES pipeline as a policy: decision = security score - 1.
class PipelineRule : public DecisionRule {
 public:
  explicit PipelineRule(HesPipeline p) : pipeline_(std::move(p)) {}
  int decide(std::span<const double> x) const override { return pipeline_.evaluate(x) - 1; }
  std::size_t dimension() const override { return static_cast<std::size_t>(pipeline_.n_inputs()); }
  Json to_json() const override { return pipeline_.to_json(); }
  const HesPipeline& pipeline() const { return pipeline_; }

 private:
  HesPipeline pipeline_;
};

Policy pipeline_policy(HesPipeline p);
// RuleLoader for policy_from_json.
std::shared_ptr<const DecisionRule> load_pipeline_rule(const Json& j);

// ---------------------------------------------------------------------------
// Partial dependence. `rows` hold the integer inputs of one table.

double pd_function(const tables::DecisionTable& t, const std::vector<std::vector<int>>& rows, std::size_t axis, int v);
// PD values for v = 1..size of the axis.
std::vector<double> pd_curve(const tables::DecisionTable& t, const std::vector<std::vector<int>>& rows,
                             std::size_t axis);
// Sample standard deviation of the PD curve.
double pd_importance(const tables::DecisionTable& t, const std::vector<std::vector<int>>& rows, std::size_t axis);

struct ScaledImportance {
  std::vector<double> values;
  bool degenerate = false;  // zero sum; uniform weights returned
};

ScaledImportance scale_importances(const std::vector<double>& raw);

// Sink-table inputs of every raw row under the pipeline.
std::vector<std::vector<int>> sink_rows(const HesPipeline& p, const CovariateSet& raw);

double pd_function(const HesPipeline& p, const CovariateSet& raw, std::size_t axis, int v);
double pd_importance(const HesPipeline& p, const CovariateSet& raw, std::size_t axis);
ScaledImportance scaled_pd_importance(const HesPipeline& p, const CovariateSet& raw);

// [axis][v-1] of (learned - baseline) / baseline over the sink-table PD curves.
std::vector<std::vector<double>> pd_relative_change(const HesPipeline& baseline, const HesPipeline& learned,
                                                    const CovariateSet& raw);

// End-to-end PD of raw sub-model `index` (1-based) pinned to each of 1..levels.
std::vector<double> submodel_pd_curve(const HesPipeline& p, const CovariateSet& raw, int index);
double submodel_pd_importance(const HesPipeline& p, const CovariateSet& raw, int index);
ScaledImportance scaled_submodel_importance(const HesPipeline& p, const CovariateSet& raw);

}  // namespace bsafe::hes
