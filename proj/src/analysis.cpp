#include "edr/analysis.hpp"

#include <mpfr.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "edr/dynamics.hpp"
#include "edr/nash.hpp"

namespace edr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EDR_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

struct TrialOutcome {
  enum Kind { ok, near_miss, violation, inconclusive } kind = ok;
  double slack = kInf;
  std::string description;
};

template <typename Fn>
ProbeReport run_trials(const char* property, const ProbeOptions& opts, Fn&& fn) {
  ProbeReport report;
  report.property = property;
  report.trials = opts.trials;
  report.seed = opts.seed;
  report.worst_margin = kInf;
  if (opts.trials <= 0) {
    report.trials = 0;
    return report;
  }
  std::vector<TrialOutcome> outcomes(opts.trials);
  std::atomic<long> next{0};
  auto worker = [&]() {
    while (true) {
      long t = next.fetch_add(1);
      if (t >= opts.trials) break;
      std::mt19937_64 rng(splitmix64(opts.seed ^ (0x5851f42d4c957f2dull * (t + 1))));
      try {
        outcomes[t] = fn(t, rng);
      } catch (const std::exception& e) {
        outcomes[t] = TrialOutcome{TrialOutcome::inconclusive, kInf,
                                   std::string("exception: ") + e.what()};
      }
    }
  };
  int threads = std::min<long>(resolve_threads(opts.threads), opts.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (long t = 0; t < opts.trials; ++t) {
    const TrialOutcome& o = outcomes[t];
    report.worst_margin = std::min(report.worst_margin, o.slack);
    switch (o.kind) {
      case TrialOutcome::ok:
        break;
      case TrialOutcome::near_miss:
        ++report.near_misses;
        break;
      case TrialOutcome::violation:
        ++report.violations;
        if (report.details.size() < 20)
          report.details.push_back(ProbeViolation{t, o.description});
        break;
      case TrialOutcome::inconclusive:
        ++report.inconclusive;
        if (report.details.size() < 20)
          report.details.push_back(ProbeViolation{t, o.description});
        break;
    }
  }
  return report;
}

bool solved_ok(const EquilibriumResult& r) {
  return r.mode == Mode::exact || r.converged;
}

Rat comparison_margin(const ProbeOptions& opts, const Profile& p, bool exact) {
  if (exact) return Rat(0);
  return Rat(opts.margin_scale) * p.total_contribution();
}

}  // namespace

Profile random_profile(std::mt19937_64& rng, int num_agents, int num_charities,
                       bool binary) {
  std::vector<std::string> charities;
  for (int x = 0; x < num_charities; ++x) charities.push_back("x" + std::to_string(x));
  std::vector<AgentSpec> agents(num_agents);
  bool any_positive = false;
  for (int i = 0; i < num_agents; ++i) {
    agents[i].name = "a" + std::to_string(i);
    long c = (rng() % 20 == 0) ? 0 : 1 + static_cast<long>(rng() % 100);
    if (c > 0) any_positive = true;
    agents[i].contribution = Rat(static_cast<unsigned long>(c));
    agents[i].values.assign(num_charities, Rat(0));
    int approvals = 0;
    for (int x = 0; x < num_charities; ++x) {
      if (rng() % 2 == 0) continue;
      ++approvals;
      if (binary)
        agents[i].values[x] = 1;
      else
        agents[i].values[x] = rat_frac(1 + static_cast<long>(rng() % 80), 8ul);
    }
    if (approvals == 0) {
      int x = static_cast<int>(rng() % num_charities);
      agents[i].values[x] =
          binary ? Rat(1) : rat_frac(1 + static_cast<long>(rng() % 80), 8ul);
    }
  }
  if (!any_positive) agents[0].contribution = 1;
  return Profile(std::move(charities), std::move(agents));
}

EquilibriumCheck is_equilibrium(const Profile& profile, const Distribution& d, Mode mode,
                                double distance_tol) {
  EquilibriumCheck check;
  const Rat total = d.total();
  if (mode == Mode::exact) {
    if (total != profile.total_contribution())
      throw std::invalid_argument("is_equilibrium: distribution sum mismatch");
    ExtractResult ext = extract_decomposition(profile, d);
    check.accepted = ext.feasible;
    if (ext.feasible) {
      check.certificate = std::move(ext.decomposition);
      check.detail = "decomposition on critical sets found";
    } else {
      check.witness = std::move(ext.witness);
      check.has_witness = true;
      std::ostringstream os;
      os << "agents {";
      for (size_t k = 0; k < check.witness.agents.size(); ++k)
        os << (k ? "," : "") << profile.agent(check.witness.agents[k]).name;
      os << "} contribute " << format_rational(check.witness.confined_contribution)
         << " but their critical charities only absorb "
         << format_rational(check.witness.covered_amount);
      check.detail = os.str();
    }
    return check;
  }

  const double tol_sum = 1e-8 * std::max(1.0, to_double(profile.total_contribution()));
  if (std::abs(to_double(total - profile.total_contribution())) > tol_sum)
    throw std::invalid_argument("is_equilibrium: distribution sum mismatch");
  SnapResult snap = snap_to_rational(profile, d);
  if (!snap.success) {
    check.accepted = false;
    check.detail = "no nearby exact equilibrium: " + snap.failure_reason;
    return check;
  }
  double dist = 0.0;
  for (int x = 0; x < profile.num_charities(); ++x)
    dist = std::max(dist, std::abs(to_double(snap.result.distribution.amounts[x] -
                                            d.amounts[x])));
  double allowed = distance_tol * to_double(profile.total_contribution());
  if (dist <= allowed) {
    check.accepted = true;
    check.certificate = snap.result.decomposition;
    check.detail = "within " + format_double(dist) + " of the exact equilibrium";
  } else {
    check.accepted = false;
    check.detail = "exact equilibrium is " + format_double(dist) +
                   " away per charity (allowed " + format_double(allowed) + ")";
  }
  return check;
}

EfficiencyCheck is_efficient(const Profile& profile, const Distribution& d, double tau) {
  EfficiencyCheck check;
  std::vector<bool> covered(profile.num_charities(), false);
  for (int i = 0; i < profile.num_agents(); ++i)
    for (int x : critical_set(profile, i, d, tau)) covered[x] = true;
  const double fund_eps =
      d.mode == Mode::exact ? 0.0
                            : 1e-12 * std::max(1.0, to_double(profile.total_contribution()));
  for (int x = 0; x < profile.num_charities(); ++x) {
    bool funded = d.mode == Mode::exact ? d.amounts[x] > 0
                                        : to_double(d.amounts[x]) > fund_eps;
    if (funded && !covered[x]) {
      check.efficient = false;
      check.witness_charity = x;
      return check;
    }
  }
  check.efficient = true;
  return check;
}

LindahlPrices lindahl_prices(const Profile& profile, const EquilibriumResult& eq) {
  const int n = profile.num_agents();
  const int m = profile.num_charities();
  if (eq.mode == Mode::exact) {
    if (eq.residual != 0 ||
        !decomposition_consistent(profile, eq.decomposition, eq.distribution))
      throw std::invalid_argument("lindahl_prices: input is not a verified equilibrium");
  } else {
    if (!eq.converged)
      throw std::invalid_argument("lindahl_prices: input did not converge");
  }

  LindahlPrices out;
  out.prices.assign(n, std::vector<Rat>(m, Rat(0)));
  for (int x = 0; x < m; ++x) {
    if (eq.distribution.amounts[x] == 0) continue;
    for (int i = 0; i < n; ++i)
      out.prices[i][x] = eq.decomposition.rows[i][x] / eq.distribution.amounts[x];
  }

  out.budgets_exhausted = true;
  for (int i = 0; i < n; ++i) {
    Rat spent = 0;
    for (int x = 0; x < m; ++x) spent += out.prices[i][x] * eq.distribution.amounts[x];
    Rat gap = rat_abs(spent - profile.agent(i).contribution);
    if (eq.mode == Mode::exact ? gap != 0
                               : to_double(gap) >
                                     1e-8 * std::max(1.0, to_double(profile.total_contribution())))
      out.budgets_exhausted = false;
  }
  out.unit_column_sums = true;
  for (int x = 0; x < m; ++x) {
    if (eq.distribution.amounts[x] == 0) continue;
    Rat colsum = 0;
    for (int i = 0; i < n; ++i) colsum += out.prices[i][x];
    Rat gap = rat_abs(colsum - 1);
    if (eq.mode == Mode::exact ? gap != 0 : to_double(gap) > 1e-8)
      out.unit_column_sums = false;
  }
  return out;
}

int nash_welfare_compare(const Profile& profile, const Distribution& a,
                         const Distribution& b) {
  bool a_inf = false, b_inf = false;
  std::vector<Rat> ua(profile.num_agents()), ub(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i) {
    if (profile.agent(i).contribution == 0) continue;
    ua[i] = leontief_utility(profile, i, a);
    ub[i] = leontief_utility(profile, i, b);
    if (ua[i] == 0) a_inf = true;
    if (ub[i] == 0) b_inf = true;
  }
  if (a_inf || b_inf) {
    if (a_inf && b_inf) return 0;
    return a_inf ? -1 : 1;
  }
  mpfr_t acc, term;
  mpfr_init2(acc, 256);
  mpfr_init2(term, 256);
  mpfr_set_zero(acc, 1);
  for (int i = 0; i < profile.num_agents(); ++i) {
    const Rat& c = profile.agent(i).contribution;
    if (c == 0) continue;
    Rat ratio = ua[i] / ub[i];
    mpfr_set_q(term, ratio.get_mpq_t(), MPFR_RNDN);
    mpfr_log(term, term, MPFR_RNDN);
    mpfr_mul_q(term, term, c.get_mpq_t(), MPFR_RNDN);
    mpfr_add(acc, acc, term, MPFR_RNDN);
  }
  int sign;
  if (mpfr_zero_p(acc)) {
    sign = 0;
  } else {
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

Distribution brute_force_nash(const Profile& profile, int resolution) {
  if (resolution < 1) throw std::invalid_argument("brute_force_nash: resolution < 1");
  if (profile.total_contribution() == 0)
    return make_distribution(std::vector<Rat>(profile.num_charities(), Rat(0)),
                             Mode::floating);
  ProfileReduction red = reduce_profile(profile);
  const Profile& R = red.reduced;
  const int m = R.num_charities();
  const double total = to_double(R.total_contribution());

  std::vector<double> best(m, 0.0);
  double best_welfare = -kInf;

  // Coarse composition grid sized to keep enumeration cheap.
  int coarse = m <= 1 ? 1 : (m == 2 ? 512 : (m == 3 ? 128 : 40));
  coarse = std::min(coarse, std::max(resolution, 1));
  std::vector<int> comp(m, 0);
  std::vector<double> point(m, 0.0);
  auto evaluate = [&](const std::vector<double>& pt) {
    double w = nash_welfare_f(R, pt);
    if (w > best_welfare) {
      best_welfare = w;
      best = pt;
    }
  };
  // Enumerate compositions of `coarse` into m parts.
  std::function<void(int, int)> enumerate = [&](int pos, int left) {
    if (pos == m - 1) {
      comp[pos] = left;
      for (int x = 0; x < m; ++x) point[x] = total * comp[x] / coarse;
      evaluate(point);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      comp[pos] = k;
      enumerate(pos + 1, left - k);
    }
  };
  enumerate(0, coarse);

  // Pairwise coordinate descent, halving the step down to total/resolution.
  double target = total / resolution;
  for (double h = total / coarse; h >= target / 2; h /= 2) {
    double step = std::max(h, target);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int from = 0; from < m; ++from) {
        if (best[from] < step) continue;
        for (int to = 0; to < m; ++to) {
          if (to == from) continue;
          std::vector<double> cand = best;
          cand[from] -= step;
          cand[to] += step;
          double w = nash_welfare_f(R, cand);
          if (w > best_welfare) {
            best_welfare = w;
            best = cand;
            improved = true;
          }
        }
      }
    }
    if (step == target) break;
  }

  return expand_distribution(red, profile, distribution_from_doubles(best));
}

namespace {

Rat random_fraction(std::mt19937_64& rng) {  // in [1/8, 10]
  return rat_frac(1 + static_cast<long>(rng() % 80), 8ul);
}

Profile base_instance(const ProbeOptions& opts, std::mt19937_64& rng, bool force_binary) {
  if (opts.profile) return *opts.profile;
  bool binary = force_binary || (rng() % 2 == 0);
  return random_profile(rng, opts.random_agents, opts.random_charities, binary);
}

// Coalition misreport per the sampling scheme: valuations perturbed
// log-uniformly / approval sets redrawn with probability 1/2, coalition
// contributions only ever lowered.
AgentSpec manipulate_agent(const AgentSpec& truth, const Profile& p, int idx,
                           std::mt19937_64& rng) {
  AgentSpec spec = truth;
  const int m = static_cast<int>(truth.values.size());
  if (rng() % 2 == 0) {
    bool redraw = rng() % 2 == 0;
    bool binary = p.binary_weights();
    int positives = 0;
    for (int x = 0; x < m; ++x) {
      if (redraw) {
        spec.values[x] = (rng() % 2 == 0) ? Rat(0) : (binary ? Rat(1) : random_fraction(rng));
      } else if (spec.values[x] > 0 && !binary) {
        spec.values[x] *= random_fraction(rng);
      }
      if (spec.values[x] > 0) ++positives;
    }
    if (positives == 0) spec.values[rng() % m] = binary ? Rat(1) : random_fraction(rng);
  }
  if (rng() % 2 == 0 && truth.contribution > 0) {
    unsigned long c = mpz_get_ui(truth.contribution.get_num_mpz_t());
    if (truth.contribution.get_den() == 1 && c > 0)
      spec.contribution = Rat(static_cast<unsigned long>(rng() % (c + 1)));
  }
  (void)idx;
  return spec;
}

}  // namespace

ProbeReport probe_group_strategyproofness(const ProbeOptions& opts) {
  return run_trials("group-strategyproofness", opts, [&](long trial, std::mt19937_64& rng) {
    TrialOutcome out;
    Profile P = base_instance(opts, rng, false);
    if (P.total_contribution() == 0) return out;
    EquilibriumResult solP = solve_equilibrium(P);
    if (!solved_ok(solP))
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "base solve unconverged"};

    const int n = P.num_agents();
    int gsize = 1 + static_cast<int>(rng() % n);
    std::vector<int> agents(n);
    for (int i = 0; i < n; ++i) agents[i] = i;
    std::shuffle(agents.begin(), agents.end(), rng);
    std::vector<int> coalition(agents.begin(), agents.begin() + gsize);

    std::vector<AgentSpec> specs;
    specs.reserve(n);
    for (int i = 0; i < n; ++i) specs.push_back(P.agent(i));
    for (int g : coalition) specs[g] = manipulate_agent(P.agent(g), P, g, rng);
    Profile Pp(P.charities(), std::move(specs));
    EquilibriumResult solPp = solve_equilibrium(Pp);
    if (!solved_ok(solPp))
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "manipulated solve unconverged"};

    bool exact = solP.mode == Mode::exact && solPp.mode == Mode::exact;
    Rat margin = comparison_margin(opts, P, exact);

    // True utilities of coalition members before and after.
    Rat min_delta, max_delta;
    bool first = true;
    for (int g : coalition) {
      Rat after = leontief_utility(P, g, solPp.distribution);
      Rat delta = after - solP.utilities[g];
      if (first || delta < min_delta) min_delta = delta;
      if (first || delta > max_delta) max_delta = delta;
      first = false;
    }
    if (min_delta >= -margin) {
      out.slack = to_double(margin - max_delta);
      if (max_delta > margin) {
        std::ostringstream os;
        os << "coalition of " << gsize << " gains up to " << to_double(max_delta)
           << " with no member losing";
        return TrialOutcome{TrialOutcome::violation, out.slack, os.str()};
      }
      if (max_delta > 0) out.kind = TrialOutcome::near_miss;
    }

    // Participation bound for a single-agent contribution raise.
    int j = static_cast<int>(rng() % n);
    Rat z(1 + static_cast<unsigned long>(rng() % 50));
    std::vector<AgentSpec> raised;
    for (int i = 0; i < n; ++i) raised.push_back(P.agent(i));
    raised[j].contribution += z;
    Profile Pz(P.charities(), std::move(raised));
    EquilibriumResult solPz = solve_equilibrium(Pz);
    if (!solved_ok(solPz))
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "participation solve unconverged"};
    bool exact_z = solP.mode == Mode::exact && solPz.mode == Mode::exact;
    Rat margin_z = comparison_margin(opts, P, exact_z);
    Rat c_total = P.total_contribution();
    Rat bound = (c_total + z) / c_total * solP.utilities[j];
    Rat slack_z = solPz.utilities[j] - bound;
    out.slack = std::min(out.slack, to_double(slack_z + margin_z));
    if (slack_z < -margin_z) {
      std::ostringstream os;
      os << "agent " << P.agent(j).name << " raised contribution by "
         << format_rational(z) << " but utility " << to_double(solPz.utilities[j])
         << " < bound " << to_double(bound);
      return TrialOutcome{TrialOutcome::violation, to_double(slack_z), os.str()};
    }
    if (exact_z && solP.utilities[j] == 0 && solPz.utilities[j] == 0) {
      return TrialOutcome{TrialOutcome::violation, 0.0,
                          "agent with raised contribution kept zero utility"};
    }
    return out;
  });
}

ProbeReport probe_monotonicity(MonotonicityKind kind, const ProbeOptions& opts) {
  const char* name =
      kind == MonotonicityKind::preference ? "preference-monotonicity" : "contribution-monotonicity";
  return run_trials(name, opts, [&, kind](long trial, std::mt19937_64& rng) {
    TrialOutcome out;
    Profile P = base_instance(opts, rng, false);
    if (P.total_contribution() == 0) return out;
    EquilibriumResult solP = solve_equilibrium(P);
    if (!solved_ok(solP))
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "base solve unconverged"};

    const int n = P.num_agents();
    const int m = P.num_charities();
    int i = static_cast<int>(rng() % n);

    if (kind == MonotonicityKind::preference) {
      int x = static_cast<int>(rng() % m);
      std::vector<AgentSpec> specs;
      for (int a = 0; a < n; ++a) specs.push_back(P.agent(a));
      Rat old_v = specs[i].values[x];
      Rat new_v = old_v > 0 ? old_v * (Rat(1) + random_fraction(rng)) : random_fraction(rng);
      specs[i].values[x] = new_v;
      Profile Pp(P.charities(), std::move(specs));
      EquilibriumResult solPp = solve_equilibrium(Pp);
      if (!solved_ok(solPp))
        return TrialOutcome{TrialOutcome::inconclusive, kInf, "modified solve unconverged"};

      bool exact = solP.mode == Mode::exact && solPp.mode == Mode::exact;
      Rat margin = comparison_margin(opts, P, exact);

      Rat amount_slack = solPp.distribution.amounts[x] - solP.distribution.amounts[x];
      out.slack = to_double(amount_slack + margin);
      if (amount_slack < -margin) {
        std::ostringstream os;
        os << "raising v[" << P.agent(i).name << "," << P.charities()[x]
           << "] decreased delta(x) by " << to_double(-amount_slack);
        return TrialOutcome{TrialOutcome::violation, to_double(amount_slack), os.str()};
      }

      // The manipulator's own utility cannot rise.
      Rat util_gain = solPp.utilities[i] - solP.utilities[i];
      out.slack = std::min(out.slack, to_double(margin - util_gain));
      if (util_gain > margin)
        return TrialOutcome{TrialOutcome::violation, to_double(-util_gain),
                            "agent utility rose after raising a valuation"};

      // Equilibrium Nash welfare w.r.t. the original profile cannot rise.
      if (exact) {
        if (nash_welfare_compare(P, solPp.distribution, solP.distribution) > 0)
          return TrialOutcome{TrialOutcome::violation, -1.0,
                              "original-valuation Nash welfare increased"};
      } else {
        double before = nash_welfare(P, solP.distribution);
        double after = nash_welfare(P, solPp.distribution);
        double allowance = 1e-6 * (1.0 + std::abs(before));
        out.slack = std::min(out.slack, before + allowance - after);
        if (after > before + allowance)
          return TrialOutcome{TrialOutcome::violation, before - after,
                              "original-valuation Nash welfare increased"};
      }
      return out;
    }

    // Contribution monotonicity.
    bool zero_raise = trial % 5 == 0;
    Rat delta = zero_raise ? Rat(0) : Rat(1 + static_cast<unsigned long>(rng() % 50));
    std::vector<AgentSpec> specs;
    for (int a = 0; a < n; ++a) specs.push_back(P.agent(a));
    specs[i].contribution += delta;
    Profile Pp(P.charities(), std::move(specs));
    EquilibriumResult solPp = solve_equilibrium(Pp);
    if (!solved_ok(solPp))
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "modified solve unconverged"};

    if (delta == 0) {
      for (int x = 0; x < m; ++x)
        if (solPp.distribution.amounts[x] != solP.distribution.amounts[x])
          return TrialOutcome{TrialOutcome::violation, -1.0,
                              "zero contribution raise changed the output"};
      return out;
    }

    bool exact = solP.mode == Mode::exact && solPp.mode == Mode::exact;
    Rat margin = comparison_margin(opts, P, exact);
    for (int x = 0; x < m; ++x) {
      Rat slack = solPp.distribution.amounts[x] - solP.distribution.amounts[x];
      out.slack = std::min(out.slack, to_double(slack + margin));
      if (slack < -margin) {
        std::ostringstream os;
        os << "raising C[" << P.agent(i).name << "] by " << format_rational(delta)
           << " decreased delta(" << P.charities()[x] << ") by " << to_double(-slack);
        return TrialOutcome{TrialOutcome::violation, to_double(slack), os.str()};
      }
    }
    return out;
  });
}

namespace {

// Exact random decomposable distribution: integer-weighted rows on the
// approval sets.
Decomposition random_decomposable(const Profile& p, std::mt19937_64& rng) {
  Decomposition dec;
  dec.rows.assign(p.num_agents(), std::vector<Rat>(p.num_charities(), Rat(0)));
  for (int i = 0; i < p.num_agents(); ++i) {
    const auto& approved = p.approved(i);
    std::vector<unsigned long> w(approved.size());
    unsigned long sum = 0;
    for (auto& v : w) {
      v = 1 + rng() % 1000;
      sum += v;
    }
    for (size_t k = 0; k < approved.size(); ++k)
      dec.rows[i][approved[k]] =
          p.agent(i).contribution * rat_frac(static_cast<long>(w[k]), sum);
  }
  return dec;
}

Rat pinned_counterexample_c1(double p) {
  if (p == 1.0 || p == 2.0) return Rat(2);
  if (p == 0.5) return Rat(8);
  double value = std::max(std::pow(std::pow(2.0, p - 1.0) * p, -1.0 / p), 2.0);
  return rat_frac(static_cast<long>(std::ceil(value * 1024.0)), 1024ul);
}

}  // namespace

ProbeReport probe_gwelfare_decomposable(const WelfareSpec& w, long samples,
                                        const ProbeOptions& opts) {
  if (w.tag == WelfareSpec::Tag::power && w.exponent > 0) {
    // Prop-style counterexample: for g(u) = u^p with p > 0 the decomposable
    // point (C_1 + 1, 0) beats the equilibrium (C_1, 1).
    ProbeReport report;
    report.property = "gwelfare-decomposable";
    report.seed = opts.seed;
    report.trials = 1;
    report.expected_counterexample = true;
    const double p = w.exponent;
    Rat c1 = pinned_counterexample_c1(p);
    Profile prof({"a", "b"},
                 {AgentSpec{"agent1", c1, {Rat(1), Rat(0)}},
                  AgentSpec{"agent2", Rat(1), {Rat(1), Rat(1)}}});
    Distribution equilibrium = make_distribution({c1, Rat(1)});
    Distribution better = make_distribution({c1 + 1, Rat(0)});
    double w_eq = g_welfare(prof, equilibrium, w);
    double w_alt = g_welfare(prof, better, w);
    report.worst_margin = w_alt - w_eq;
    if (w_alt > w_eq) {
      ++report.violations;
      std::ostringstream os;
      os << "decomposable (" << format_rational(c1 + 1) << ",0) has g-welfare " << w_alt
         << " > equilibrium " << w_eq << " at p=" << p;
      report.details.push_back(ProbeViolation{0, os.str()});
    }
    return report;
  }

  ProbeOptions run_opts = opts;
  // One fixed instance: solve once, sample `samples` times per trial batch.
  return run_trials("gwelfare-decomposable", run_opts, [&](long trial, std::mt19937_64& rng) {
    TrialOutcome out;
    Profile P = opts.profile ? *opts.profile
                             : random_profile(rng, opts.random_agents,
                                              opts.random_charities, true);
    if (!P.binary_weights())
      throw std::invalid_argument("probe_gwelfare_decomposable: binary weights required");
    if (P.total_contribution() == 0) return out;
    EquilibriumResult eq = solve_equilibrium(P);
    if (eq.mode != Mode::exact)
      return TrialOutcome{TrialOutcome::inconclusive, kInf, "no exact equilibrium"};

    const bool exact_power =
        w.tag == WelfareSpec::Tag::power && w.exponent == std::floor(w.exponent);
    std::optional<Rat> eq_exact;
    if (exact_power)
      eq_exact = g_welfare_exact(P, eq.distribution, static_cast<int>(w.exponent));
    const double eq_val = g_welfare(P, eq.distribution, w);

    long per_trial = std::max<long>(1, samples / std::max<long>(opts.trials, 1));
    for (long s = 0; s < per_trial; ++s) {
      Decomposition sample = random_decomposable(P, rng);
      Distribution sd = sample.to_distribution();
      if (w.tag == WelfareSpec::Tag::nash) {
        int cmp = nash_welfare_compare(P, sd, eq.distribution);
        if (cmp > 0)
          return TrialOutcome{TrialOutcome::violation, -1.0,
                              "decomposable sample beats equilibrium Nash welfare"};
      } else if (exact_power) {
        std::optional<Rat> sv = g_welfare_exact(P, sd, static_cast<int>(w.exponent));
        if (!eq_exact) {
          if (sv)
            return TrialOutcome{TrialOutcome::violation, -1.0,
                                "sample has finite g-welfare, equilibrium does not"};
          continue;
        }
        if (sv && *sv > *eq_exact) {
          std::ostringstream os;
          os << "decomposable sample g-welfare " << to_double(*sv) << " > equilibrium "
             << to_double(*eq_exact);
          return TrialOutcome{TrialOutcome::violation, to_double(*eq_exact - *sv), os.str()};
        }
        if (sv) out.slack = std::min(out.slack, to_double(*eq_exact - *sv));
      } else {
        double sv = g_welfare(P, sd, w);
        out.slack = std::min(out.slack, eq_val - sv);
        if (sv > eq_val + 1e-9 * (1.0 + std::abs(eq_val)))
          return TrialOutcome{TrialOutcome::violation, eq_val - sv,
                              "decomposable sample beats equilibrium g-welfare"};
      }
    }
    return out;
  });
}

ProbeReport probe_dynamics_laws(const ProbeOptions& opts) {
  return run_trials("dynamics-potential", opts, [&](long trial, std::mt19937_64& rng) {
    TrialOutcome out;
    Profile P = opts.profile
                    ? *opts.profile
                    : random_profile(rng, 2 + static_cast<int>(rng() % 3),
                                     2 + static_cast<int>(rng() % 3), rng() % 2 == 0);
    if (P.total_contribution() == 0) return out;
    const int n = P.num_agents();

    RedistributionOptions ropt;
    int bound = n + static_cast<int>(rng() % (n + 1));
    ropt.sequence = SequenceSpec::random_with_bound(bound, rng());
    ropt.max_rounds = 20 + static_cast<int>(rng() % 20);
    ropt.residual_stop = 0;
    ropt.mode = Mode::exact;
    ropt.record_rounds = true;
    ropt.record_snapshots = true;
    DynamicsTrace trace = run_redistribution(P, ropt);

    const long T = static_cast<long>(trace.rounds.size());
    // The laws govern the subsequence after every agent has placed once.
    long placed_after = -1;
    {
      std::vector<bool> seen(n, false);
      int remaining = n;
      for (long t = 0; t < T && remaining > 0; ++t) {
        if (!seen[trace.rounds[t].agent]) {
          seen[trace.rounds[t].agent] = true;
          --remaining;
        }
        if (remaining == 0) placed_after = t;
      }
    }
    if (placed_after < 0) return out;
    for (long t = placed_after + 1; t < T; ++t) {
      const TraceRound& r = trace.rounds[t];
      // Strict potential increase whenever the best response moved money.
      if (r.shifted > 0) {
        int cmp = potential_compare(P, trace.snapshots[t - 1], trace.snapshots[t]);
        if (cmp <= 0)
          return TrialOutcome{TrialOutcome::violation, -1.0,
                              "potential failed to increase on a moving best response"};
      }
      double bound_val = potential_upper_bound(P, trace.snapshots[t]);
      if (r.potential > bound_val + 1e-9 * (1.0 + std::abs(bound_val)))
        return TrialOutcome{TrialOutcome::violation, bound_val - r.potential,
                            "potential exceeded its upper bound"};
      // Triangle inequality d_j(t) <= c_t + d_j(t+1).
      const TraceRound& prev = trace.rounds[t - 1];
      for (int j = 0; j < n; ++j) {
        if (prev.displacements[j] > r.shifted + r.displacements[j])
          return TrialOutcome{TrialOutcome::violation, -1.0,
                              "displacement triangle inequality failed"};
      }
    }
    // Window bound: sum of shifts over [t, t+K] covers max displacement at t.
    for (long t = placed_after + 1; t + bound < T; ++t) {
      Rat csum = 0;
      for (long l = t; l <= t + bound; ++l) csum += trace.rounds[l].shifted;
      Rat maxd = 0;
      for (int j = 0; j < n; ++j)
        maxd = rat_max(maxd, trace.rounds[t - 1].displacements[j]);
      if (csum < maxd)
        return TrialOutcome{TrialOutcome::violation, to_double(csum - maxd),
                            "windowed shifts fail to cover max displacement"};
    }
    return out;
  });
}

}  // namespace edr
