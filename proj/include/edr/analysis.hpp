#ifndef EDR_ANALYSIS_HPP
#define EDR_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "edr/exact.hpp"
#include "edr/model.hpp"
#include "edr/result.hpp"

namespace edr {

struct EquilibriumCheck {
  bool accepted = false;
  Decomposition certificate;     // decomposition on critical sets, when accepted
  DecompositionWitness witness;  // exact-mode refutation
  bool has_witness = false;
  std::string detail;
};

// Exact mode: transportation feasibility on the critical bipartite graph.
// Floating mode: snap-and-verify, accepting iff the snapped exact
// equilibrium lies within distance_tol * C_N per charity.
EquilibriumCheck is_equilibrium(const Profile& profile, const Distribution& d, Mode mode,
                                double distance_tol = 1e-6);

struct EfficiencyCheck {
  bool efficient = false;
  int witness_charity = -1;  // funded but critical for nobody
};

EfficiencyCheck is_efficient(const Profile& profile, const Distribution& d,
                             double tau = kCriticalTolerance);

struct LindahlPrices {
  std::vector<std::vector<Rat>> prices;  // p_i(x), n x m
  bool budgets_exhausted = false;        // sum_x p_i(x) d(x) == C_i for all i
  bool unit_column_sums = false;         // sum_i p_i(x) == 1 on funded charities
};

// Personalized prices p_i(x) = delta_i(x)/delta(x) supporting the
// equilibrium as a Lindahl equilibrium. Throws std::invalid_argument on
// unverified input.
LindahlPrices lindahl_prices(const Profile& profile, const EquilibriumResult& eq);

// Sign of Nash(a) - Nash(b) under `profile`, evaluated at 256-bit
// precision; differences below 2^-200 count as ties.
int nash_welfare_compare(const Profile& profile, const Distribution& a,
                         const Distribution& b);

// Test oracle, independent of the solvers: coarse grid search over the
// simplex followed by pairwise coordinate descent down to step
// C_N/resolution. Intended for m <= 4.
Distribution brute_force_nash(const Profile& profile, int resolution);

struct ProbeViolation {
  long trial = 0;
  std::string description;
};

struct ProbeReport {
  std::string property;
  long trials = 0;
  long violations = 0;
  long near_misses = 0;    // inside the float comparison margin
  long inconclusive = 0;   // solver did not converge; no verdict
  double worst_margin = 0.0;  // smallest slack observed across trials
  std::uint64_t seed = 0;
  bool expected_counterexample = false;
  std::vector<ProbeViolation> details;
};

struct ProbeOptions {
  std::optional<Profile> profile;  // fixed instance; otherwise random per trial
  int random_agents = 4;
  int random_charities = 5;
  long trials = 1000;
  std::uint64_t seed = 1;
  double margin_scale = 1e-7;  // float-path margin, times C_N
  int threads = 0;             // 0: EDR_THREADS env or hardware concurrency
};

// Random coalition misreports and contribution decreases; flags a
// violation iff every member weakly gains and one strictly gains in true
// utilities. Also asserts the participation bound
// u_j(P') >= (C+Z)/C * u_j(P) for single-agent contribution raises.
ProbeReport probe_group_strategyproofness(const ProbeOptions& opts);

enum class MonotonicityKind { preference, contribution };

// preference: raising one v_{i,x} cannot decrease delta(x), cannot raise
// agent i's utility, and cannot raise Nash welfare w.r.t. the original
// profile. contribution: raising one C_i cannot decrease any delta(x).
ProbeReport probe_monotonicity(MonotonicityKind kind, const ProbeOptions& opts);

// For nash or power p < 0 specs on binary-weight profiles: random
// decomposable distributions never beat the equilibrium's g-welfare.
// For power p > 0 the pinned two-agent counterexample is reproduced and
// reported with expected_counterexample set.
ProbeReport probe_gwelfare_decomposable(const WelfareSpec& w, long samples,
                                        const ProbeOptions& opts);

// Exact-trace laws: the potential strictly increases on every moving best
// response and stays below its bound, displacements obey the triangle
// inequality, and windowed shifts cover the maximum displacement.
ProbeReport probe_dynamics_laws(const ProbeOptions& opts);

// Shared instance generator for probes and tests.
Profile random_profile(std::mt19937_64& rng, int num_agents, int num_charities,
                       bool binary);

}  // namespace edr

#endif
