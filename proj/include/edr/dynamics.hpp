#ifndef EDR_DYNAMICS_HPP
#define EDR_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edr/model.hpp"

namespace edr {

struct SequenceSpec {
  enum class Kind { round_robin, random_with_bound, explicit_list };
  Kind kind = Kind::round_robin;
  int bound = 0;             // K: max rounds between an agent's turns
  std::vector<int> order;    // explicit list (cycled when shorter than the run)
  std::uint64_t seed = 0;

  static SequenceSpec round_robin();
  static SequenceSpec random_with_bound(int bound, std::uint64_t seed);
  static SequenceSpec explicit_list(std::vector<int> order);
};

// Unique utility-maximizing spend of `budget` against the fixed external
// funding, by water-filling: the level u with
// sum_{x in A_i} max(0, u*v_{i,x} - e(x)) = budget, with spends read off
// the active segments. Exact in rational arithmetic.
std::vector<Rat> best_response(const Profile& profile, int agent,
                               std::span<const Rat> external, const Rat& budget);
std::vector<double> best_response_f(const Profile& profile, int agent,
                                    std::span<const double> external, double budget);

// d_i: half the L1 distance between the agent's current row and her best
// response against everyone else's rows. Zero for all agents iff the
// assembled distribution is in equilibrium.
Rat displacement(const Profile& profile, int agent, const Decomposition& current);
double displacement_f(const Profile& profile, int agent,
                      const std::vector<std::vector<double>>& rows);

// Phi = sum_i sum_{x in A_i} delta_i(x) log(v_{i,x}/delta(x)), 0 log 0 = 0.
double potential(const Profile& profile, const Decomposition& dec);

// Sign of Phi(after) - Phi(before), evaluated in 256-bit arithmetic so
// strict monotonicity along exact traces is decidable.
int potential_compare(const Profile& profile, const Decomposition& before,
                      const Decomposition& after);

// sum_i sum_x delta_i(x) log v_{i,x} + m/e, an upper bound for Phi.
double potential_upper_bound(const Profile& profile, const Decomposition& dec);

struct TraceRound {
  long round = 0;
  int agent = 0;
  std::vector<Rat> played;          // the acting agent's new row / fresh spend
  std::vector<Rat> amounts;         // overall distribution after the round
  Rat shifted;                      // c_t
  double potential = 0.0;
  std::vector<Rat> displacements;   // d_i after the round, all agents
  double residual = 0.0;            // max_i d_i / C_N after the round
};

// Cumulative per-agent spending plus the observation window of recent
// individual donations (acting agent, spend), oldest first.
struct SpendingState {
  std::vector<std::vector<Rat>> cumulative;
  std::vector<long> donations;
  std::vector<std::pair<int, std::vector<Rat>>> window;
};

struct DynamicsTrace {
  Mode mode = Mode::exact;
  std::vector<TraceRound> rounds;
  Decomposition final_decomposition;
  Distribution final_distribution;  // spend mode: per-agent-normalized cumulative
  double final_residual = 0.0;
  bool stopped_on_residual = false;
  SpendingState spending;  // spend mode only
  // Populated only when requested; consecutive states for exact-mode checks.
  std::vector<Decomposition> snapshots;
};

struct RedistributionOptions {
  SequenceSpec sequence;
  long max_rounds = 100000;
  // Stop when max_i d_i <= residual_stop * C_N; <= 0 disables.
  Rat residual_stop = Rat(mpz_class(1), mpz_class(1000000000000));  // 1e-12
  Mode mode = Mode::exact;
  bool record_rounds = true;
  bool record_snapshots = false;
};

// The process of repeated full redistribution: the acting agent replaces
// her entire row with a best response against the others' rows, starting
// from empty rows.
DynamicsTrace run_redistribution(const Profile& profile, const RedistributionOptions& opt);

struct SpendingOptions {
  std::vector<int> order;  // round-robin cycle; empty = profile order
  int window = 0;          // observation window; 0 = n-1 (the paper's assumption)
  Mode mode = Mode::exact;
  bool record_rounds = true;
};

// Round-robin flow process: each turn spends a fresh C_i best-responding
// against the donations in the observation window. The reported
// distribution is cumulative spending normalized by donation counts.
DynamicsTrace run_spending(const Profile& profile, long rounds, const SpendingOptions& opt);

// Expands the spec into concrete acting agents for `rounds` rounds.
std::vector<int> make_sequence(const SequenceSpec& seq, int num_agents, long rounds);

}  // namespace edr

#endif
