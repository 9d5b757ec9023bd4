#include "rsbg/complexity.hpp"

#include <stdexcept>

namespace rsbg {

ComplexityReport complexity_ratio(int k, int n_agents, int horizon) {
  if (k < 1) throw std::invalid_argument("complexity: k must be >= 1");
  if (n_agents < 2) {
    throw std::invalid_argument("complexity: n_agents must be >= 2");
  }
  if (horizon < 1) {
    throw std::invalid_argument("complexity: horizon must be >= 1");
  }
  const long long n = n_agents;
  const long long n_prime = n - 1;
  const long long t = horizon;

  ComplexityReport r;
  r.k = k;
  r.n_agents = n_agents;
  r.horizon = horizon;
  r.sbg = {n_prime * t, n_prime - n_prime * t};
  r.rsbg = {t, n - t};
  r.exact_ratio = {r.sbg.behavior_exponent - r.rsbg.behavior_exponent,
                   r.sbg.hypothesis_exponent - r.rsbg.hypothesis_exponent};
  r.ratio_exponent = t * (n - 1);
  return r;
}

std::string to_string(const PowerTerm& term, int k,
                      const std::string& behavior_symbol) {
  std::string out;
  if (term.behavior_exponent != 0) {
    out = behavior_symbol + "^" + std::to_string(term.behavior_exponent);
  }
  if (k != 1 && term.hypothesis_exponent != 0) {
    if (!out.empty()) out += " * ";
    out += std::to_string(k) + "^" + std::to_string(term.hypothesis_exponent);
  }
  if (out.empty()) out = "1";
  return out;
}

std::string ratio_string(const ComplexityReport& report,
                         const std::string& behavior_symbol) {
  if (report.k == 1) {
    return behavior_symbol + "^" + std::to_string(report.ratio_exponent);
  }
  return "(" + behavior_symbol + "/" + std::to_string(report.k) + ")^" +
         std::to_string(report.ratio_exponent);
}

}  // namespace rsbg
