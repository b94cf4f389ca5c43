#ifndef EDR_MODEL_HPP
#define EDR_MODEL_HPP

#include <compare>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "edr/rational.hpp"

namespace edr {

enum class Mode { exact, floating };

inline constexpr double kCriticalTolerance = 1e-9;

struct AgentSpec {
  std::string name;
  Rat contribution;         // C_i >= 0
  std::vector<Rat> values;  // v_{i,x} >= 0, aligned with Profile charities
};

// Immutable once constructed; all members validated by the constructor:
// at least one charity and one agent, no negative amounts, every agent
// values at least one charity positively, no duplicate names.
class Profile {
 public:
  Profile(std::vector<std::string> charities, std::vector<AgentSpec> agents);

  int num_charities() const { return static_cast<int>(charities_.size()); }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  const std::vector<std::string>& charities() const { return charities_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }
  const AgentSpec& agent(int i) const { return agents_[i]; }
  const Rat& value(int i, int x) const { return agents_[i].values[x]; }
  double value_f(int i, int x) const { return values_f_[i][x]; }
  double contribution_f(int i) const { return contributions_f_[i]; }
  const Rat& total_contribution() const { return total_; }

  // A_i: indices of charities the agent values positively.
  const std::vector<int>& approved(int i) const { return approved_[i]; }
  // Agents with positive contribution that value x positively.
  const std::vector<int>& active_supporters(int x) const { return supporters_[x]; }

  bool binary_weights() const { return binary_; }
  int charity_index(const std::string& name) const;
  int agent_index(const std::string& name) const;

 private:
  std::vector<std::string> charities_;
  std::vector<AgentSpec> agents_;
  std::vector<std::vector<int>> approved_;
  std::vector<std::vector<int>> supporters_;
  std::vector<std::vector<double>> values_f_;
  std::vector<double> contributions_f_;
  Rat total_;
  bool binary_ = false;
};

// Funding vector over the profile's charities. Exact amounts; in floating
// mode the entries are binary64 values held exactly, and sum/tie checks
// use tolerances instead of equality.
struct Distribution {
  std::vector<Rat> amounts;
  Mode mode = Mode::exact;

  std::vector<double> as_doubles() const;
  Rat total() const;
};

Distribution make_distribution(std::vector<Rat> amounts, Mode mode = Mode::exact);
Distribution distribution_from_doubles(std::span<const double> amounts);

// Per-agent funding rows; column sums assemble a Distribution and row i
// sums to C_i.
struct Decomposition {
  std::vector<std::vector<Rat>> rows;
  Mode mode = Mode::exact;

  std::vector<Rat> column_sums() const;
  Distribution to_distribution() const;
};

// Checks rows >= 0, row sums == C_i and column sums == d (exact mode only).
bool decomposition_consistent(const Profile& profile, const Decomposition& dec,
                              const Distribution& d);

struct WelfareSpec {
  enum class Tag { nash, power, custom };
  Tag tag = Tag::nash;
  double exponent = 0.0;  // power: p != 0, term is sgn(p) * u^p
  std::function<double(double)> g;
  std::function<double(double)> g_prime;

  static WelfareSpec nash_spec();
  static WelfareSpec power_spec(double p);
  static WelfareSpec custom_spec(std::function<double(double)> g,
                                 std::function<double(double)> g_prime);
};

// Multiset of values compared in the leximin order: ascending sort, then
// lexicographic with larger-is-higher at the first difference.
class LeximinKey {
 public:
  explicit LeximinKey(std::vector<Rat> values);
  const std::vector<Rat>& sorted() const { return sorted_; }

 private:
  std::vector<Rat> sorted_;
};

// -1 if a is leximin-lower, 0 if the multisets are equal, +1 if higher.
// Throws std::invalid_argument on length mismatch.
int leximin_compare(const LeximinKey& a, const LeximinKey& b);

// u_i(d) = min over A_i of d(x) / v_{i,x}; exact on the stored amounts.
Rat leontief_utility(const Profile& profile, int agent, const Distribution& d);
Rat leontief_utility(const Profile& profile, int agent, std::span<const Rat> amounts);
double leontief_utility_f(const Profile& profile, int agent, std::span<const double> amounts);

// sum over A_i of v_{i,x} * log d(x); -infinity when an approved charity
// is unfunded.
double cobb_douglas_log_utility(const Profile& profile, int agent, const Distribution& d);

// T_{d,i}: charities attaining the utility minimum. Exact ties in exact
// mode; in floating mode x is critical iff d(x)/v_{i,x} <= (1+tau)*u_i(d).
std::vector<int> critical_set(const Profile& profile, int agent, const Distribution& d,
                              double tau = kCriticalTolerance);
std::vector<int> critical_set(const Profile& profile, int agent, std::span<const Rat> amounts);
std::vector<int> critical_set_f(const Profile& profile, int agent,
                                std::span<const double> amounts,
                                double tau = kCriticalTolerance);

// sum_i C_i log u_i(d), with zero-contribution agents contributing 0
// regardless of their utility.
double nash_welfare(const Profile& profile, const Distribution& d);
double nash_welfare_f(const Profile& profile, std::span<const double> amounts);

// sum_i C_i g(u_i(d)); -infinity when g diverges at some utility (e.g.
// p < 0 at u = 0 with C_i > 0).
double g_welfare(const Profile& profile, const Distribution& d, const WelfareSpec& w);

// Exact variant for integer exponents; nullopt encodes -infinity.
std::optional<Rat> g_welfare_exact(const Profile& profile, const Distribution& d, int p);

// Active agents are those with C_i > 0; active charities those valued by
// some active agent. Solvers run on the reduced profile and re-insert
// zeros afterwards. Requires C_N > 0.
struct ProfileReduction {
  Profile reduced;
  std::vector<int> agent_map;    // reduced index -> original index
  std::vector<int> charity_map;  // reduced index -> original index
};

ProfileReduction reduce_profile(const Profile& profile);

Distribution expand_distribution(const ProfileReduction& red, const Profile& full,
                                 const Distribution& reduced);
Decomposition expand_decomposition(const ProfileReduction& red, const Profile& full,
                                   const Decomposition& reduced);

}  // namespace edr

#endif
