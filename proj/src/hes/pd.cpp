#include <cmath>
#include <numeric>

#include "bsafe/error.hpp"
#include "bsafe/hes.hpp"

namespace bsafe::hes {

using tables::DecisionTable;

namespace {

double sample_stdev(const std::vector<double>& v) {
  if (v.size() < 2) throw ValidationError("PD importance needs at least two grid values");
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double pd_function(const DecisionTable& t, const std::vector<std::vector<int>>& rows, std::size_t axis, int v) {
  if (rows.empty()) throw ValidationError("partial dependence needs a nonempty dataset");
  if (axis >= t.arity()) throw ValidationError("PD axis " + std::to_string(axis + 1) + " exceeds table arity");
  if (v < 1 || v > t.sizes()[axis]) throw ValidationError("PD value outside the axis range");
  double sum = 0.0;
  std::vector<int> args;
  for (const auto& r : rows) {
    args = r;
    args.at(axis) = v;
    sum += t(args);
  }
  return sum / static_cast<double>(rows.size());
}

std::vector<double> pd_curve(const DecisionTable& t, const std::vector<std::vector<int>>& rows, std::size_t axis) {
  if (axis >= t.arity()) throw ValidationError("PD axis " + std::to_string(axis + 1) + " exceeds table arity");
  std::vector<double> out;
  for (int v = 1; v <= t.sizes()[axis]; ++v) out.push_back(pd_function(t, rows, axis, v));
  return out;
}

double pd_importance(const DecisionTable& t, const std::vector<std::vector<int>>& rows, std::size_t axis) {
  return sample_stdev(pd_curve(t, rows, axis));
}

ScaledImportance scale_importances(const std::vector<double>& raw) {
  ScaledImportance s;
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (raw.empty()) return s;
  if (!(total > 0.0)) {
    s.degenerate = true;
    s.values.assign(raw.size(), 1.0 / static_cast<double>(raw.size()));
    return s;
  }
  for (double x : raw) s.values.push_back(x / total);
  return s;
}

std::vector<std::vector<int>> sink_rows(const HesPipeline& p, const CovariateSet& raw) {
  std::vector<std::vector<int>> rows;
  rows.reserve(raw.size());
  for (const auto& x : raw) rows.push_back(p.sink_inputs(round_scores(x, p.rounding(), p.levels())));
  return rows;
}

double pd_function(const HesPipeline& p, const CovariateSet& raw, std::size_t axis, int v) {
  return pd_function(p.sink_table(), sink_rows(p, raw), axis, v);
}

double pd_importance(const HesPipeline& p, const CovariateSet& raw, std::size_t axis) {
  return pd_importance(p.sink_table(), sink_rows(p, raw), axis);
}

ScaledImportance scaled_pd_importance(const HesPipeline& p, const CovariateSet& raw) {
  const auto rows = sink_rows(p, raw);
  std::vector<double> imp;
  for (std::size_t a = 0; a < p.sink_table().arity(); ++a) imp.push_back(pd_importance(p.sink_table(), rows, a));
  return scale_importances(imp);
}

std::vector<std::vector<double>> pd_relative_change(const HesPipeline& baseline, const HesPipeline& learned,
                                                    const CovariateSet& raw) {
  if (baseline.sink_table().sizes() != learned.sink_table().sizes())
    throw ValidationError("pipelines have differently shaped sink tables");
  const auto rb = sink_rows(baseline, raw);
  const auto rl = sink_rows(learned, raw);
  std::vector<std::vector<double>> out;
  for (std::size_t a = 0; a < baseline.sink_table().arity(); ++a) {
    const auto cb = pd_curve(baseline.sink_table(), rb, a);
    const auto cl = pd_curve(learned.sink_table(), rl, a);
    std::vector<double> rel(cb.size());
    for (std::size_t v = 0; v < cb.size(); ++v) rel[v] = (cl[v] - cb[v]) / cb[v];
    out.push_back(std::move(rel));
  }
  return out;
}

std::vector<double> submodel_pd_curve(const HesPipeline& p, const CovariateSet& raw, int index) {
  if (raw.empty()) throw ValidationError("partial dependence needs a nonempty dataset");
  if (index < 1 || index > p.n_inputs()) throw ValidationError("sub-model index out of range");
  std::vector<std::vector<int>> rounded;
  for (const auto& x : raw) rounded.push_back(round_scores(x, p.rounding(), p.levels()));
  std::vector<double> out;
  for (int v = 1; v <= p.levels(); ++v) {
    double sum = 0.0;
    for (auto r : rounded) {
      r[static_cast<std::size_t>(index - 1)] = v;
      sum += p.evaluate_rounded(r);
    }
    out.push_back(sum / static_cast<double>(rounded.size()));
  }
  return out;
}

double submodel_pd_importance(const HesPipeline& p, const CovariateSet& raw, int index) {
  return sample_stdev(submodel_pd_curve(p, raw, index));
}

ScaledImportance scaled_submodel_importance(const HesPipeline& p, const CovariateSet& raw) {
  std::vector<double> imp;
  for (int i = 1; i <= p.n_inputs(); ++i) imp.push_back(submodel_pd_importance(p, raw, i));
  return scale_importances(imp);
}

}  // namespace bsafe::hes
