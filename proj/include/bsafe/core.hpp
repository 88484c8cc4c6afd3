#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace bsafe {

using Json = nlohmann::json;
using Covariates = std::vector<double>;
using CovariateSet = std::vector<Covariates>;

enum class OutcomeKind { continuous, binary };

std::string to_string(OutcomeKind kind);
OutcomeKind outcome_kind_from_string(const std::string& s);

struct Unit {
  Covariates covariates;
  int decision = 0;
  double outcome = 0.0;
};

// Observational sample {X_i, D_i, Y_i}. Decisions are 0-based in {0..K-1}.
class Dataset {
 public:
  Dataset(std::vector<Unit> units, int k_decisions, OutcomeKind outcome_kind);

  std::size_t size() const { return units_.size(); }
  std::size_t dimension() const { return dimension_; }
  int k_decisions() const { return k_decisions_; }
  OutcomeKind outcome_kind() const { return outcome_kind_; }
  const std::vector<Unit>& units() const { return units_; }
  const Unit& operator[](std::size_t i) const { return units_[i]; }

  CovariateSet covariates() const;

 private:
  std::vector<Unit> units_;
  int k_decisions_;
  OutcomeKind outcome_kind_;
  std::size_t dimension_ = 0;
};

// Column roles for CSV datasets. Empty `covariates` means every column that
// is neither the decision nor the outcome column, in file order.
struct DatasetSchema {
  std::vector<std::string> covariates;
  std::string decision = "d";
  std::string outcome = "y";
  int k_decisions = 2;
  OutcomeKind outcome_kind = OutcomeKind::continuous;
};

Dataset read_dataset_csv(std::istream& in, const DatasetSchema& schema);
Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);
// Writes a header row and one row per unit; reals use 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data, const DatasetSchema& schema);

// ---------------------------------------------------------------------------
// Policies

enum class PolicyKind { per_unit_assignment, linear_threshold, table_pipeline };

std::string to_string(PolicyKind kind);

// Decision per support point. Off-support covariates take the decision of the
// nearest support point (lowest index on ties), which keeps the rule total.
struct PerUnitAssignment {
  CovariateSet support;
  std::vector<int> decisions;
};

// delta(x) = I(a*x1 + b*x2 + c > 0), binary decisions over two covariates.
struct LinearThreshold {
  double a = 0.0;
  double b = 0.0;
  double c = -1.0;
};

// Opaque rule implemented outside core (the HES pipeline policy).
class DecisionRule {
 public:
  virtual ~DecisionRule() = default;
  virtual int decide(std::span<const double> x) const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Json to_json() const = 0;
};

class Policy {
 public:
  using Payload = std::variant<PerUnitAssignment, LinearThreshold, std::shared_ptr<const DecisionRule>>;

  static Policy per_unit(CovariateSet support, std::vector<int> decisions);
  static Policy linear(double a, double b, double c);
  static Policy table_pipeline(std::shared_ptr<const DecisionRule> rule);

  PolicyKind kind() const;
  const Payload& payload() const { return payload_; }

  int apply(std::span<const double> x) const;
  std::vector<int> apply_all(const CovariateSet& xs) const;

 private:
  explicit Policy(Payload p);
  Payload payload_;
  // exact-match index for per-unit assignments
  std::shared_ptr<const std::map<Covariates, int>> index_;
};

int apply_policy(const Policy& policy, std::span<const double> x);

using RuleLoader = std::function<std::shared_ptr<const DecisionRule>(const Json&)>;

Json policy_to_json(const Policy& policy);
// `loader` is required only for table_pipeline documents.
Policy policy_from_json(const Json& j, const RuleLoader& loader = {});

// ---------------------------------------------------------------------------
// Utility u(d, y)

struct UtilitySpec {
  enum class Mode { outcome_identity, custom_table };
  Mode mode = Mode::outcome_identity;
  // (decision, outcome value) -> utility; only binary outcomes are supported.
  std::map<std::pair<int, int>, double> custom;

  // Expected utility of decision k when P(Y=1) = p.
  double expected_binary(int k, double p) const;
  void validate(int k_decisions, OutcomeKind kind) const;
};

Json utility_to_json(const UtilitySpec& u);
UtilitySpec utility_from_json(const Json& j);

// ---------------------------------------------------------------------------

class EmpiricalCovariateDistribution {
 public:
  explicit EmpiricalCovariateDistribution(CovariateSet support);
  EmpiricalCovariateDistribution(CovariateSet support, std::vector<double> weights);

  std::size_t size() const { return support_.size(); }
  const CovariateSet& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }
  bool uniform() const { return uniform_; }

 private:
  CovariateSet support_;
  std::vector<double> weights_;
  bool uniform_ = true;
};

}  // namespace bsafe
