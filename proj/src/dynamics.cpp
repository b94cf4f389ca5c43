#include "edr/dynamics.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

namespace edr {

SequenceSpec SequenceSpec::round_robin() { return SequenceSpec{}; }

SequenceSpec SequenceSpec::random_with_bound(int bound, std::uint64_t seed) {
  SequenceSpec s;
  s.kind = Kind::random_with_bound;
  s.bound = bound;
  s.seed = seed;
  return s;
}

SequenceSpec SequenceSpec::explicit_list(std::vector<int> order) {
  SequenceSpec s;
  s.kind = Kind::explicit_list;
  s.order = std::move(order);
  return s;
}

namespace {

// Water-filling over the agent's approved charities: raise the common
// level u past the sorted breakpoints e(x)/v(x) until the spend exhausts
// the budget.
template <typename T>
std::vector<T> water_fill(const Profile& profile, int agent, std::span<const T> external,
                          const T& budget) {
  const auto& approved = profile.approved(agent);
  std::vector<T> spend(profile.num_charities(), T(0));
  if (budget <= T(0)) return spend;

  struct Item {
    T ratio;
    int charity;
  };
  std::vector<Item> items;
  items.reserve(approved.size());
  for (int x : approved) {
    T v;
    if constexpr (std::is_same_v<T, Rat>)
      v = profile.value(agent, x);
    else
      v = profile.value_f(agent, x);
    items.push_back(Item{external[x] / v, x});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.ratio != b.ratio) return a.ratio < b.ratio;
    return a.charity < b.charity;  // deterministic scan order on ties
  });

  T active_v(0), active_e(0);
  size_t k = 0;
  T level(0);
  while (true) {
    {
      int x = items[k].charity;
      if constexpr (std::is_same_v<T, Rat>)
        active_v += profile.value(agent, x);
      else
        active_v += profile.value_f(agent, x);
      active_e += external[x];
    }
    level = (budget + active_e) / active_v;
    if (k + 1 >= items.size() || level <= items[k + 1].ratio) break;
    ++k;
  }
  for (size_t j = 0; j <= k; ++j) {
    int x = items[j].charity;
    T v;
    if constexpr (std::is_same_v<T, Rat>)
      v = profile.value(agent, x);
    else
      v = profile.value_f(agent, x);
    T amount = level * v - external[x];
    if (amount > T(0)) spend[x] = amount;
  }
  return spend;
}

}  // namespace

std::vector<Rat> best_response(const Profile& profile, int agent,
                               std::span<const Rat> external, const Rat& budget) {
  return water_fill<Rat>(profile, agent, external, budget);
}

std::vector<double> best_response_f(const Profile& profile, int agent,
                                    std::span<const double> external, double budget) {
  return water_fill<double>(profile, agent, external, budget);
}

Rat displacement(const Profile& profile, int agent, const Decomposition& current) {
  std::vector<Rat> external = current.column_sums();
  for (int x = 0; x < profile.num_charities(); ++x)
    external[x] -= current.rows[agent][x];
  std::vector<Rat> br =
      best_response(profile, agent, external, profile.agent(agent).contribution);
  Rat dist = 0;
  for (int x = 0; x < profile.num_charities(); ++x)
    dist += rat_abs(current.rows[agent][x] - br[x]);
  return dist / 2;
}

double displacement_f(const Profile& profile, int agent,
                      const std::vector<std::vector<double>>& rows) {
  const int m = profile.num_charities();
  std::vector<double> external(m, 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(i) == agent) continue;
    for (int x = 0; x < m; ++x) external[x] += rows[i][x];
  }
  std::vector<double> br =
      best_response_f(profile, agent, external, profile.contribution_f(agent));
  double dist = 0.0;
  for (int x = 0; x < m; ++x) dist += std::abs(rows[agent][x] - br[x]);
  return dist / 2.0;
}

double potential(const Profile& profile, const Decomposition& dec) {
  std::vector<Rat> cols = dec.column_sums();
  double phi = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i) {
    for (int x : profile.approved(i)) {
      if (dec.rows[i][x] == 0) continue;
      phi += to_double(dec.rows[i][x]) *
             std::log(profile.value_f(i, x) / to_double(cols[x]));
    }
  }
  return phi;
}

int potential_compare(const Profile& profile, const Decomposition& before,
                      const Decomposition& after) {
  mpfr_t acc, term;
  mpfr_init2(acc, 256);
  mpfr_init2(term, 256);
  mpfr_set_zero(acc, 1);
  auto accumulate = [&](const Decomposition& dec, int sign) {
    std::vector<Rat> cols = dec.column_sums();
    for (int i = 0; i < profile.num_agents(); ++i) {
      for (int x : profile.approved(i)) {
        if (dec.rows[i][x] == 0) continue;
        Rat ratio = profile.value(i, x) / cols[x];
        mpfr_set_q(term, ratio.get_mpq_t(), MPFR_RNDN);
        mpfr_log(term, term, MPFR_RNDN);
        mpfr_mul_q(term, term, dec.rows[i][x].get_mpq_t(), MPFR_RNDN);
        if (sign > 0)
          mpfr_add(acc, acc, term, MPFR_RNDN);
        else
          mpfr_sub(acc, acc, term, MPFR_RNDN);
      }
    }
  };
  accumulate(after, 1);
  accumulate(before, -1);
  int sign;
  if (mpfr_zero_p(acc)) {
    sign = 0;
  } else {
    // Treat anything below the accumulated rounding error as a tie.
    mpfr_t eps;
    mpfr_init2(eps, 64);
    mpfr_set_ui_2exp(eps, 1, -200, MPFR_RNDN);
    sign = (mpfr_cmpabs(acc, eps) <= 0) ? 0 : mpfr_sgn(acc);
    mpfr_clear(eps);
  }
  mpfr_clear(acc);
  mpfr_clear(term);
  return sign;
}

double potential_upper_bound(const Profile& profile, const Decomposition& dec) {
  double bound = 0.0;
  for (int i = 0; i < profile.num_agents(); ++i)
    for (int x : profile.approved(i)) {
      if (dec.rows[i][x] == 0) continue;
      bound += to_double(dec.rows[i][x]) * std::log(profile.value_f(i, x));
    }
  return bound + profile.num_charities() / std::exp(1.0);
}

std::vector<int> make_sequence(const SequenceSpec& seq, int num_agents, long rounds) {
  std::vector<int> out;
  out.reserve(rounds);
  switch (seq.kind) {
    case SequenceSpec::Kind::round_robin: {
      for (long t = 0; t < rounds; ++t) out.push_back(static_cast<int>(t % num_agents));
      break;
    }
    case SequenceSpec::Kind::explicit_list: {
      if (seq.order.empty())
        throw std::invalid_argument("sequence: explicit list is empty");
      for (int i : seq.order)
        if (i < 0 || i >= num_agents)
          throw std::invalid_argument("sequence: agent index out of range");
      for (long t = 0; t < rounds; ++t) out.push_back(seq.order[t % seq.order.size()]);
      if (seq.bound > 0) {
        // The declared bound K must hold along the cycled sequence.
        std::vector<long> last(num_agents, -1);
        long limit = std::min<long>(rounds, 2 * static_cast<long>(seq.order.size()) +
                                                seq.bound + 1);
        for (long t = 0; t < limit; ++t) {
          last[out[t]] = t;
          for (int i = 0; i < num_agents; ++i)
            if (t - last[i] >= seq.bound)
              throw std::invalid_argument("sequence: explicit list violates bound K");
        }
      }
      break;
    }
    case SequenceSpec::Kind::random_with_bound: {
      if (seq.bound < num_agents)
        throw std::invalid_argument("sequence: bound K must be at least n");
      std::mt19937_64 rng(seq.seed);
      std::vector<int> perm(num_agents);
      for (int i = 0; i < num_agents; ++i) perm[i] = i;
      std::shuffle(perm.begin(), perm.end(), rng);
      std::vector<long> last(num_agents);
      for (long t = 0; t < rounds; ++t) {
        int pick;
        if (t < num_agents) {
          pick = perm[t];
        } else {
          // Whoever waited longest is forced once her wait hits K-1; waits
          // are distinct, so this keeps every gap within the bound.
          int longest = 0;
          for (int i = 1; i < num_agents; ++i)
            if (last[i] < last[longest]) longest = i;
          if (t - last[longest] >= seq.bound - 1)
            pick = longest;
          else
            pick = static_cast<int>(rng() % num_agents);
        }
        last[pick] = t;
        out.push_back(pick);
      }
      break;
    }
  }
  return out;
}

namespace {

template <typename T>
T from_rat(const Rat& r) {
  if constexpr (std::is_same_v<T, Rat>)
    return r;
  else
    return to_double(r);
}

Rat to_rat_value(const Rat& v) { return v; }
Rat to_rat_value(double v) { return Rat(v); }

template <typename T>
T abs_value(const T& v) {
  if constexpr (std::is_same_v<T, Rat>)
    return rat_abs(v);
  else
    return std::abs(v);
}

template <typename T>
struct RunState {
  std::vector<std::vector<T>> rows;
  std::vector<T> cols;
};

template <typename T>
DynamicsTrace run_redistribution_impl(const Profile& profile,
                                      const RedistributionOptions& opt) {
  const int n = profile.num_agents();
  const int m = profile.num_charities();
  const Rat total = profile.total_contribution();
  const T total_t = from_rat<T>(total);

  RunState<T> st;
  st.rows.assign(n, std::vector<T>(m, T(0)));
  st.cols.assign(m, T(0));

  std::vector<int> seq = make_sequence(opt.sequence, n, opt.max_rounds);

  DynamicsTrace trace;
  trace.mode = opt.mode;

  // Explicit return type: letting the lambda deduce a gmp expression
  // template would dangle on the local accumulator.
  auto displacement_at = [&](int agent) -> T {
    std::vector<T> external(m);
    for (int x = 0; x < m; ++x) external[x] = st.cols[x] - st.rows[agent][x];
    std::vector<T> br = water_fill<T>(profile, agent, external,
                                      from_rat<T>(profile.agent(agent).contribution));
    T dist(0);
    for (int x = 0; x < m; ++x) dist += abs_value<T>(st.rows[agent][x] - br[x]);
    return dist / T(2);
  };

  auto snapshot = [&]() {
    Decomposition dec;
    dec.mode = opt.mode;
    dec.rows.assign(n, std::vector<Rat>(m));
    for (int i = 0; i < n; ++i)
      for (int x = 0; x < m; ++x) dec.rows[i][x] = to_rat_value(st.rows[i][x]);
    return dec;
  };

  bool stopped = false;
  if (opt.max_rounds == 0) {
    T max_disp(0);
    for (int i = 0; i < n; ++i) {
      T d = displacement_at(i);
      if (d > max_disp) max_disp = d;
    }
    trace.final_residual =
        total == 0 ? 0.0 : to_double(to_rat_value(max_disp)) / to_double(total);
  }
  for (long t = 0; t < opt.max_rounds; ++t) {
    const int agent = seq[t];
    std::vector<T> external(m);
    for (int x = 0; x < m; ++x) external[x] = st.cols[x] - st.rows[agent][x];
    std::vector<T> br = water_fill<T>(profile, agent, external,
                                      from_rat<T>(profile.agent(agent).contribution));
    T shifted(0);
    for (int x = 0; x < m; ++x) shifted += abs_value<T>(st.rows[agent][x] - br[x]);
    shifted = shifted / T(2);
    st.rows[agent] = br;
    for (int x = 0; x < m; ++x) st.cols[x] = external[x] + br[x];

    // Residual after the round; also drives the stop criterion.
    T max_disp(0);
    std::vector<Rat> disps(n);
    for (int i = 0; i < n; ++i) {
      T d = displacement_at(i);
      disps[i] = to_rat_value(d);
      if (d > max_disp) max_disp = d;
    }
    double residual =
        total == 0 ? 0.0 : to_double(to_rat_value(max_disp)) / to_double(total);

    if (opt.record_rounds) {
      TraceRound row;
      row.round = t;
      row.agent = agent;
      row.played.resize(m);
      row.amounts.resize(m);
      for (int x = 0; x < m; ++x) {
        row.played[x] = to_rat_value(br[x]);
        row.amounts[x] = to_rat_value(st.cols[x]);
      }
      row.shifted = to_rat_value(shifted);
      row.displacements = std::move(disps);
      row.residual = residual;
      trace.rounds.push_back(std::move(row));
    }
    if (opt.record_snapshots) trace.snapshots.push_back(snapshot());
    if (opt.record_rounds) {
      Decomposition dec = opt.record_snapshots ? trace.snapshots.back() : snapshot();
      trace.rounds.back().potential = potential(profile, dec);
    }

    trace.final_residual =
        total == 0 ? 0.0 : to_double(to_rat_value(max_disp)) / to_double(total);
    if (opt.residual_stop > 0 && to_rat_value(max_disp) <= opt.residual_stop * total) {
      stopped = true;
      break;
    }
  }

  trace.stopped_on_residual = stopped;
  trace.final_decomposition = snapshot();
  trace.final_distribution = trace.final_decomposition.to_distribution();
  return trace;
}

template <typename T>
DynamicsTrace run_spending_impl(const Profile& profile, long rounds,
                                const SpendingOptions& opt) {
  const int n = profile.num_agents();
  const int m = profile.num_charities();
  const Rat total = profile.total_contribution();
  std::vector<int> order = opt.order;
  if (order.empty()) {
    order.resize(n);
    for (int i = 0; i < n; ++i) order[i] = i;
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("spending: cycle order must list every agent once");
  const int window = opt.window > 0 ? opt.window : n - 1;

  std::vector<std::vector<T>> cumulative(n, std::vector<T>(m, T(0)));
  std::vector<std::vector<T>> last_spend(n, std::vector<T>(m, T(0)));
  std::vector<bool> has_spent(n, false);
  std::vector<long> counts(n, 0);
  std::deque<std::pair<int, std::vector<T>>> recent;  // observation window, oldest first

  DynamicsTrace trace;
  trace.mode = opt.mode;

  auto window_rows = [&]() {
    Decomposition dec;
    dec.mode = opt.mode;
    dec.rows.assign(n, std::vector<Rat>(m, Rat(0)));
    for (int i = 0; i < n; ++i)
      if (has_spent[i])
        for (int x = 0; x < m; ++x) dec.rows[i][x] = to_rat_value(last_spend[i][x]);
    return dec;
  };

  auto normalized = [&]() {
    std::vector<Rat> out(m, Rat(0));
    for (int i = 0; i < n; ++i) {
      if (counts[i] == 0) continue;
      Rat scale(1, static_cast<unsigned long>(counts[i]));
      for (int x = 0; x < m; ++x) out[x] += to_rat_value(cumulative[i][x]) * scale;
    }
    return out;
  };

  for (long t = 0; t < rounds; ++t) {
    const int agent = order[t % n];
    std::vector<T> external(m, T(0));
    for (const auto& [who, spend] : recent)
      for (int x = 0; x < m; ++x) external[x] += spend[x];
    std::vector<T> spend = water_fill<T>(profile, agent, std::span<const T>(external),
                                         from_rat<T>(profile.agent(agent).contribution));

    T shifted(0);
    if (has_spent[agent])
      for (int x = 0; x < m; ++x) shifted += abs_value<T>(last_spend[agent][x] - spend[x]);
    shifted = shifted / T(2);

    for (int x = 0; x < m; ++x) cumulative[agent][x] += spend[x];
    last_spend[agent] = spend;
    has_spent[agent] = true;
    ++counts[agent];
    recent.emplace_back(agent, spend);
    while (static_cast<int>(recent.size()) > window) recent.pop_front();

    if (opt.record_rounds) {
      Decomposition wdec = window_rows();
      TraceRound row;
      row.round = t;
      row.agent = agent;
      row.played.resize(m);
      for (int x = 0; x < m; ++x) row.played[x] = to_rat_value(spend[x]);
      row.amounts = normalized();
      row.shifted = to_rat_value(shifted);
      row.potential = potential(profile, wdec);
      row.displacements.resize(n);
      double max_disp = 0.0;
      for (int i = 0; i < n; ++i) {
        Rat d = displacement(profile, i, wdec);
        row.displacements[i] = d;
        max_disp = std::max(max_disp, to_double(d));
      }
      row.residual = total == 0 ? 0.0 : max_disp / to_double(total);
      trace.rounds.push_back(std::move(row));
    }
  }

  trace.final_decomposition = window_rows();
  trace.final_distribution = make_distribution(normalized(), opt.mode);
  double max_disp = 0.0;
  for (int i = 0; i < n; ++i)
    max_disp =
        std::max(max_disp, to_double(displacement(profile, i, trace.final_decomposition)));
  trace.final_residual = total == 0 ? 0.0 : max_disp / to_double(total);

  trace.spending.cumulative.assign(n, std::vector<Rat>(m));
  for (int i = 0; i < n; ++i)
    for (int x = 0; x < m; ++x)
      trace.spending.cumulative[i][x] = to_rat_value(cumulative[i][x]);
  trace.spending.donations = counts;
  for (const auto& [who, spend] : recent) {
    std::vector<Rat> s(m);
    for (int x = 0; x < m; ++x) s[x] = to_rat_value(spend[x]);
    trace.spending.window.emplace_back(who, std::move(s));
  }
  return trace;
}

}  // namespace

DynamicsTrace run_redistribution(const Profile& profile, const RedistributionOptions& opt) {
  if (opt.mode == Mode::exact) return run_redistribution_impl<Rat>(profile, opt);
  return run_redistribution_impl<double>(profile, opt);
}

DynamicsTrace run_spending(const Profile& profile, long rounds, const SpendingOptions& opt) {
  if (rounds < 0) throw std::invalid_argument("spending: negative round count");
  if (opt.mode == Mode::exact) return run_spending_impl<Rat>(profile, rounds, opt);
  return run_spending_impl<double>(profile, rounds, opt);
}

}  // namespace edr
