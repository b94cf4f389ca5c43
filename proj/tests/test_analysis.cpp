#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "edr/analysis.hpp"
#include "edr/dynamics.hpp"
#include "edr/exact.hpp"
#include "edr/nash.hpp"
#include "helpers.hpp"

using namespace edr;
using namespace edr::testing;

TEST_CASE("is_equilibrium") {
  Profile p = example1();

  SUBCASE("the equilibrium is certified") {
    EquilibriumCheck c = is_equilibrium(p, dist({300, 300, 300, 100}), Mode::exact);
    REQUIRE(c.accepted);
    CHECK(decomposition_consistent(p, c.certificate, dist({300, 300, 300, 100})));
  }

  SUBCASE("the centralized split is refuted") {
    EquilibriumCheck c = is_equilibrium(p, dist({250, 250, 250, 250}), Mode::exact);
    CHECK(!c.accepted);
    CHECK(c.has_witness);
  }

  SUBCASE("a single agent's water-filling optimum is certified") {
    Profile solo({"a", "b"}, {AgentSpec{"s", Rat(6), {Rat(1), Rat(2)}}});
    EquilibriumCheck c = is_equilibrium(solo, dist({2, 4}), Mode::exact);
    CHECK(c.accepted);
  }

  SUBCASE("float mode accepts near-equilibria and rejects distant points") {
    std::vector<double> close = {299.9999999, 300.0000001, 300.0, 100.0};
    EquilibriumCheck ok = is_equilibrium(p, distribution_from_doubles(close), Mode::floating);
    CHECK(ok.accepted);
    std::vector<double> far = {400, 300, 200, 100};
    EquilibriumCheck bad = is_equilibrium(p, distribution_from_doubles(far), Mode::floating);
    CHECK(!bad.accepted);
  }

  SUBCASE("accepted iff zero displacement") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 12; ++t) {
      Profile rp = random_profile(rng, 2 + rng() % 3, 2 + rng() % 3, true);
      if (rp.total_contribution() == 0) continue;
      EquilibriumResult eq = charity_egalitarian(rp);
      EquilibriumCheck c = is_equilibrium(rp, eq.distribution, Mode::exact);
      CHECK(c.accepted);
      CHECK(exact_residual(rp, c.certificate) == 0);
      // perturb: move mass between two funded charities
      std::vector<Rat> amounts = eq.distribution.amounts;
      int from = -1, to = -1;
      for (int x = 0; x < rp.num_charities(); ++x)
        if (amounts[x] > 0 && from < 0) from = x;
      for (int x = rp.num_charities() - 1; x >= 0; --x)
        if (x != from && from >= 0) {
          to = x;
          break;
        }
      if (from < 0 || to < 0) continue;
      amounts[from] /= 2;
      amounts[to] += eq.distribution.amounts[from] - amounts[from];
      EquilibriumCheck c2 = is_equilibrium(rp, make_distribution(amounts), Mode::exact);
      if (c2.accepted) {
        // acceptance must come with a zero-displacement certificate
        CHECK(exact_residual(rp, c2.certificate) == 0);
      }
    }
  }
}

TEST_CASE("is_efficient") {
  Profile p = footnote_eff();

  SUBCASE("(0.5,1,0.5) is inefficient with witness b") {
    EfficiencyCheck c = is_efficient(p, dist({rat_frac(1, 2), Rat(1), rat_frac(1, 2)}));
    CHECK(!c.efficient);
    CHECK(c.witness_charity == 1);
  }

  SUBCASE("(1,1,0) is efficient") {
    CHECK(is_efficient(p, dist({1, 1, 0})).efficient);
    CHECK(is_efficient(p, dist({0, 1, 1})).efficient);
  }

  SUBCASE("equilibrium outputs are efficient") {
    EquilibriumResult eq = solve_equilibrium(p);
    CHECK(is_efficient(p, eq.distribution).efficient);
  }
}

TEST_CASE("lindahl prices") {
  SUBCASE("example-1 prices") {
    Profile p = example1();
    EquilibriumResult eq = solve_equilibrium(p);
    LindahlPrices lp = lindahl_prices(p, eq);
    CHECK(lp.budgets_exhausted);
    CHECK(lp.unit_column_sums);
    CHECK(lp.prices[0] == std::vector<Rat>{1, 1, 1, 0});
    CHECK(lp.prices[1] == std::vector<Rat>{0, 0, 0, 1});
  }

  SUBCASE("6.2 prices follow the unique decomposition") {
    Profile p = example62();
    EquilibriumResult eq = solve_equilibrium(p);
    LindahlPrices lp = lindahl_prices(p, eq);
    CHECK(lp.prices[0] == std::vector<Rat>{1, rat_frac(3, 4), 0});
    CHECK(lp.prices[1] == std::vector<Rat>{0, rat_frac(1, 4), 1});
    CHECK(lp.budgets_exhausted);
    CHECK(lp.unit_column_sums);
  }

  SUBCASE("single agent pays unit prices on funded charities") {
    Profile p({"a", "b"}, {AgentSpec{"s", Rat(6), {Rat(1), Rat(2)}}});
    EquilibriumResult eq = solve_equilibrium(p);
    LindahlPrices lp = lindahl_prices(p, eq);
    CHECK(lp.prices[0] == std::vector<Rat>{1, 1});
  }

  SUBCASE("unverified inputs are rejected") {
    Profile p = example1();
    EquilibriumResult fake;
    fake.mode = Mode::exact;
    fake.distribution = dist({250, 250, 250, 250});
    fake.decomposition.rows = {{Rat(250), Rat(250), Rat(250), Rat(150)},
                               {Rat(0), Rat(0), Rat(0), Rat(100)}};
    fake.residual = 1;
    CHECK_THROWS_AS(lindahl_prices(p, fake), std::invalid_argument);
  }
}

TEST_CASE("brute force nash oracle") {
  SUBCASE("6.2 within one grid step of (12,24,24)") {
    Distribution d = brute_force_nash(example62(), 600);
    double step = 60.0 / 600.0;
    CHECK(std::abs(to_double(d.amounts[0]) - 12) <= step);
    CHECK(std::abs(to_double(d.amounts[1]) - 24) <= step);
    CHECK(std::abs(to_double(d.amounts[2]) - 24) <= step);
  }

  SUBCASE("single charity takes everything") {
    Profile p({"only"}, {AgentSpec{"a", Rat(3), {Rat(1)}}});
    Distribution d = brute_force_nash(p, 100);
    CHECK(to_double(d.amounts[0]) == doctest::Approx(3.0));
  }

  SUBCASE("example-1 within one grid step of (300,300,300,100)") {
    Distribution d = brute_force_nash(example1(), 1000);
    double step = 1.0;
    std::vector<double> want = {300, 300, 300, 100};
    for (int x = 0; x < 4; ++x)
      CHECK(std::abs(to_double(d.amounts[x]) - want[x]) <= step);
  }
}

TEST_CASE("group strategyproofness probe") {
  SUBCASE("random instances show no violations") {
    ProbeOptions opts;
    opts.trials = 120;
    opts.seed = 7;
    ProbeReport r = probe_group_strategyproofness(opts);
    CHECK(r.trials == 120);
    CHECK(r.violations == 0);
    CHECK(r.inconclusive == 0);
  }

  SUBCASE("identity misreport keeps utilities unchanged") {
    Profile p = example1();
    EquilibriumResult a = solve_equilibrium(p);
    EquilibriumResult b = solve_equilibrium(p);
    CHECK(a.utilities == b.utilities);
  }

  SUBCASE("participation bound on example-1") {
    Profile p = example1();
    Profile doubled({"A", "B", "C", "D"},
                    {AgentSpec{"donor1", Rat(900), {Rat(1), Rat(1), Rat(1), Rat(0)}},
                     AgentSpec{"donor2", Rat(200), {Rat(0), Rat(0), Rat(1), Rat(1)}}});
    EquilibriumResult before = solve_equilibrium(p);
    EquilibriumResult after = solve_equilibrium(doubled);
    REQUIRE(before.mode == Mode::exact);
    REQUIRE(after.mode == Mode::exact);
    // C = 1000, Z = 100: ratio at least 1.1
    CHECK(after.utilities[1] >= rat_frac(11, 10) * before.utilities[1]);
  }

  SUBCASE("probe on a fixed profile") {
    ProbeOptions opts;
    opts.profile = example1();
    opts.trials = 60;
    opts.seed = 3;
    ProbeReport r = probe_group_strategyproofness(opts);
    CHECK(r.violations == 0);
  }
}

TEST_CASE("monotonicity probes") {
  SUBCASE("preference monotonicity on random instances") {
    ProbeOptions opts;
    opts.trials = 120;
    opts.seed = 19;
    ProbeReport r = probe_monotonicity(MonotonicityKind::preference, opts);
    CHECK(r.violations == 0);
    CHECK(r.inconclusive == 0);
  }

  SUBCASE("contribution monotonicity on random instances") {
    ProbeOptions opts;
    opts.trials = 120;
    opts.seed = 23;
    ProbeReport r = probe_monotonicity(MonotonicityKind::contribution, opts);
    CHECK(r.violations == 0);
    CHECK(r.inconclusive == 0);
  }

  SUBCASE("raising v_{2,D} keeps delta(D) at least 100") {
    Profile raised({"A", "B", "C", "D"},
                   {AgentSpec{"donor1", Rat(900), {Rat(1), Rat(1), Rat(1), Rat(0)}},
                    AgentSpec{"donor2", Rat(100), {Rat(0), Rat(0), Rat(1), Rat(2)}}});
    EquilibriumResult r = solve_equilibrium(raised);
    REQUIRE(r.mode == Mode::exact);
    CHECK(r.distribution.amounts[3] >= 100);
  }

  SUBCASE("raising a valuation below the critical threshold changes nothing") {
    // 6.2 instance: agent1 starts valuing z at 1; threshold is delta(z)/u_1
    // = 24/12 = 2, so values below 2 leave (12,24,24) in equilibrium.
    Profile tweaked({"x", "y", "z"},
                    {AgentSpec{"agent1", Rat(30), {Rat(1), Rat(2), Rat(1)}},
                     AgentSpec{"agent2", Rat(30), {Rat(0), Rat(1), Rat(1)}}});
    EquilibriumResult r = solve_equilibrium(tweaked);
    REQUIRE(r.mode == Mode::exact);
    CHECK(r.distribution.amounts == std::vector<Rat>{12, 24, 24});
  }

  SUBCASE("raising a contribution by zero is a no-op") {
    EquilibriumResult a = solve_equilibrium(example62());
    EquilibriumResult b = solve_equilibrium(example62());
    CHECK(a.distribution.amounts == b.distribution.amounts);
  }
}

TEST_CASE("g-welfare decomposable probe") {
  SUBCASE("p = -1 on example-1 sees no violations") {
    ProbeOptions opts;
    opts.profile = example1();
    opts.trials = 50;
    opts.seed = 29;
    ProbeReport r = probe_gwelfare_decomposable(WelfareSpec::power_spec(-1.0), 5000, opts);
    CHECK(r.violations == 0);
  }

  SUBCASE("nash spec: equilibrium beats every sample") {
    ProbeOptions opts;
    opts.trials = 40;
    opts.seed = 31;
    ProbeReport r = probe_gwelfare_decomposable(WelfareSpec::nash_spec(), 4000, opts);
    CHECK(r.violations == 0);
  }

  SUBCASE("p > 0 reproduces the pinned counterexample") {
    for (double p : {1.0, 0.5, 2.0}) {
      ProbeOptions opts;
      ProbeReport r = probe_gwelfare_decomposable(WelfareSpec::power_spec(p), 1, opts);
      CHECK(r.expected_counterexample);
      CHECK(r.violations == 1);
    }
    // p = 1 numbers from the construction: welfare 6 beats 5
    Profile p = appendix_b();
    CHECK(*g_welfare_exact(p, dist({3, 0}), 1) == 6);
    CHECK(*g_welfare_exact(p, dist({2, 1}), 1) == 5);
  }
}

TEST_CASE("dynamics laws probe") {
  ProbeOptions opts;
  opts.trials = 30;
  opts.seed = 37;
  ProbeReport r = probe_dynamics_laws(opts);
  CHECK(r.violations == 0);
  CHECK(r.inconclusive == 0);
}

TEST_CASE("lindahl conditions hold exactly on exact equilibria") {
  std::mt19937_64 rng(43);
  for (int t = 0; t < 10; ++t) {
    Profile rp = random_profile(rng, 2 + rng() % 3, 2 + rng() % 3, t % 2 == 0);
    if (rp.total_contribution() == 0) continue;
    EquilibriumResult eq = solve_equilibrium(rp);
    if (eq.mode != Mode::exact) continue;
    LindahlPrices lp = lindahl_prices(rp, eq);
    CHECK(lp.budgets_exhausted);
    CHECK(lp.unit_column_sums);
  }
}

TEST_CASE("brute force agrees with the solver on small instances") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 6; ++t) {
    Profile rp = random_profile(rng, 2 + rng() % 3, 2 + rng() % 2, t % 2 == 0);
    if (rp.total_contribution() == 0) continue;
    EquilibriumResult eq = solve_equilibrium(rp);
    Distribution oracle = brute_force_nash(rp, 500);
    double step = to_double(rp.total_contribution()) / 500.0;
    for (int x = 0; x < rp.num_charities(); ++x)
      CHECK(std::abs(to_double(eq.distribution.amounts[x]) -
                     to_double(oracle.amounts[x])) <= step + 1e-9);
  }
}
