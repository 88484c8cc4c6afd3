#include "bsafe/policy_opt.hpp"

namespace bsafe::policy_opt {

Json result_to_json(const OptimizationResult& r) {
  return Json{{"policy", policy_to_json(r.policy)},
              {"decisions", r.decisions},
              {"posterior_value_gain", r.posterior_value_gain},
              {"pacrisk", r.pacrisk},
              {"epsilon", r.epsilon},
              {"feasible", r.feasible},
              {"certified", r.certified},
              {"duality_gap", r.duality_gap},
              {"diagnostics", r.diagnostics}};
}

}  // namespace bsafe::policy_opt
