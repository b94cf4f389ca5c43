#ifndef EDR_NASH_HPP
#define EDR_NASH_HPP

#include <vector>

#include "edr/model.hpp"
#include "edr/result.hpp"

namespace edr {

// Computes the equilibrium distribution (the Nash welfare maximizer).
// `dynamics` iterates exact-form best responses round-robin until the
// displacement residual drops below the tolerance; `subgradient` ascends
// Nash welfare with projection onto the scaled simplex and polishes with
// dynamics; `auto` runs dynamics, snaps to rationals and verifies,
// falling back to the exact binary solver when snapping fails on a
// binary-weight profile.
EquilibriumResult solve_equilibrium(const Profile& profile, const SolveConfig& cfg = {});

struct CobbDouglasResult {
  EquilibriumResult equilibrium;
  std::vector<double> log_utilities;  // sum_x v_{i,x} log delta(x), per agent
};

// The equilibrium coincides with the Leontief one for the same values, so
// this delegates to solve_equilibrium and reports the Cobb-Douglas
// utilities alongside.
CobbDouglasResult solve_cobb_douglas_equilibrium(const Profile& profile,
                                                 const SolveConfig& cfg = {});

}  // namespace edr

#endif
