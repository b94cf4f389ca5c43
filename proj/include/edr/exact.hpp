#ifndef EDR_EXACT_HPP
#define EDR_EXACT_HPP

#include <string>
#include <vector>

#include "edr/lp.hpp"
#include "edr/model.hpp"
#include "edr/result.hpp"

namespace edr {

// Guessed per-agent critical sets, nonempty subsets of A_i.
struct CriticalStructure {
  std::vector<std::vector<int>> sets;
};

// Hall-type certificate that a distribution admits no decomposition on
// critical sets: the agents in `agents` spend only inside `charities`,
// yet contribute more than those charities receive.
struct DecompositionWitness {
  std::vector<int> agents;
  std::vector<int> charities;
  Rat confined_contribution;  // C_G
  Rat covered_amount;         // d(W) < C_G
};

struct ExtractResult {
  bool feasible = false;
  Decomposition decomposition;
  DecompositionWitness witness;
};

// Decomposition with support(row_i) inside T_{d,i}, via a transportation
// feasibility program on the critical bipartite graph (supplies C_i,
// demands d(x)). Infeasible exactly when d is not an equilibrium
// distribution. Exact arithmetic; requires sum(d) == C_N.
ExtractResult extract_decomposition(const Profile& profile, const Distribution& d);

// Leximin-maximal charity funding vector subject to decomposability over
// the approval sets A_i = {x : v_{i,x} > 0}. Equals the equilibrium
// distribution when weights are binary; on general weights the result is
// returned with a warning (the equivalence is not guaranteed).
EquilibriumResult charity_egalitarian(const Profile& profile);

// Leximin-maximal utility vector subject to decomposability, with the
// distribution canonicalized by a charity-leximin refinement at the
// optimal utility levels. Equals the equilibrium distribution when
// weights are binary.
EquilibriumResult conditional_egalitarian(const Profile& profile);

struct SnapResult {
  bool success = false;
  EquilibriumResult result;
  std::string failure_reason;
};

// Reads the critical structure off a float near-equilibrium at tolerance
// tau (relaxed x10 on retry, up to 3 times), solves the induced exact
// system d_x = u_i * v_{i,x} on guessed critical pairs with inequalities
// elsewhere, and verifies the solution. Exact equilibria pass through
// unchanged.
SnapResult snap_to_rational(const Profile& profile, const Distribution& d_float,
                            double tau = kCriticalTolerance);

// Exact residual max_i d_i(delta)/C_N for an assembled decomposition.
Rat exact_residual(const Profile& profile, const Decomposition& dec);

}  // namespace edr

#endif
