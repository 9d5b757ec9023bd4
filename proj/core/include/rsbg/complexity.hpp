#pragma once

#include <string>

namespace rsbg {

// A monomial |B|^a * K^b, with |B| the abstract number of samples needed to
// cover the continuous behavior space and K the hypothesis count.
struct PowerTerm {
  long long behavior_exponent = 0;
  long long hypothesis_exponent = 0;
};

// Search sample complexities of planning over a joint hypothesis space for
// horizon t with N agents (N-1 of them modeled):
//   expectation-based search:  |B|^{N'*t} * K^{N' - N'*t},  N' = N - 1
//   per-hypothesis worst case: |B|^{t}    * K^{N - t}
// exact_ratio is the term-by-term quotient of the two. ratio_exponent is the
// closed-form reduction (|B|/K)^{t*(N-1)} obtained when a single agent-count
// symbol is carried through both terms; this is the figure the CLI reports.
struct ComplexityReport {
  int k = 1;
  int n_agents = 2;
  int horizon = 1;
  PowerTerm sbg;
  PowerTerm rsbg;
  PowerTerm exact_ratio;
  long long ratio_exponent = 0;
};

// Throws std::invalid_argument on k < 1, n_agents < 2 or horizon < 1.
ComplexityReport complexity_ratio(int k, int n_agents, int horizon);

// "|B|^a * K^b" with K substituted; drops unit factors (K^b vanishes at K=1).
std::string to_string(const PowerTerm& term, int k,
                      const std::string& behavior_symbol = "|B|");

// "(|B|/K)^e" with K substituted.
std::string ratio_string(const ComplexityReport& report,
                         const std::string& behavior_symbol = "|B|");

}  // namespace rsbg
