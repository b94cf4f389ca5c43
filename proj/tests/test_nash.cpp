#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "edr/analysis.hpp"
#include "edr/exact.hpp"
#include "edr/nash.hpp"
#include "helpers.hpp"

using namespace edr;
using namespace edr::testing;

namespace {

double max_gap(const Distribution& a, const Distribution& b) {
  double worst = 0;
  for (size_t x = 0; x < a.amounts.size(); ++x)
    worst = std::max(worst, std::abs(to_double(a.amounts[x]) - to_double(b.amounts[x])));
  return worst;
}

}  // namespace

TEST_CASE("solve_equilibrium golden instances") {
  SUBCASE("example-1 via auto is exact") {
    EquilibriumResult r = solve_equilibrium(example1());
    CHECK(r.mode == Mode::exact);
    CHECK(r.distribution.amounts == std::vector<Rat>{300, 300, 300, 100});
    CHECK(r.residual == 0);
  }

  SUBCASE("example-2 puts 50 on the common charity") {
    EquilibriumResult r = solve_equilibrium(example2());
    REQUIRE(r.mode == Mode::exact);
    CHECK(r.distribution.amounts[0] == 50);
    for (int x = 1; x <= 10; ++x) CHECK(r.distribution.amounts[x] == 25);
    CHECK(r.utilities == std::vector<Rat>(10, Rat(25)));
  }

  SUBCASE("the 6.2 instance lands on (12,24,24) with utilities (12,24)") {
    EquilibriumResult r = solve_equilibrium(example62());
    REQUIRE(r.mode == Mode::exact);
    CHECK(r.distribution.amounts == std::vector<Rat>{12, 24, 24});
    CHECK(r.utilities == std::vector<Rat>{12, 24});
  }

  SUBCASE("dynamics and subgradient agree within tolerance") {
    SolveConfig dyn;
    dyn.method = SolveConfig::Method::dynamics;
    SolveConfig sub;
    sub.method = SolveConfig::Method::subgradient;
    for (const Profile& p : {example1(), example62(), remark_cd()}) {
      EquilibriumResult a = solve_equilibrium(p, dyn);
      EquilibriumResult b = solve_equilibrium(p, sub);
      CHECK(a.converged);
      CHECK(b.converged);
      double scale = to_double(p.total_contribution());
      CHECK(max_gap(a.distribution, b.distribution) <= 10 * 1e-10 * scale);
    }
  }
}

TEST_CASE("solver agreement on random instances") {
  std::mt19937_64 rng(2025);
  SolveConfig dyn;
  dyn.method = SolveConfig::Method::dynamics;
  for (int t = 0; t < 12; ++t) {
    Profile p = random_profile(rng, 2 + rng() % 4, 2 + rng() % 4, t % 2 == 0);
    if (p.total_contribution() == 0) continue;
    EquilibriumResult a = solve_equilibrium(p, dyn);
    EquilibriumResult b = solve_equilibrium(p);  // auto, exact via snap
    REQUIRE(a.converged);
    double scale = to_double(p.total_contribution());
    CHECK(max_gap(a.distribution, b.distribution) <= 10 * 1e-10 * scale);
    if (p.binary_weights()) {
      EquilibriumResult c = charity_egalitarian(p);
      REQUIRE(b.mode == Mode::exact);
      CHECK(b.distribution.amounts == c.distribution.amounts);
    }
  }
}

TEST_CASE("nash optimality against sampling") {
  std::mt19937_64 rng(7);
  Profile p = example62();
  EquilibriumResult eq = solve_equilibrium(p);
  double best = nash_welfare(p, eq.distribution);
  double total = to_double(p.total_contribution());
  for (int s = 0; s < 10000; ++s) {
    // random feasible point plus local perturbations of the output
    std::vector<double> cand(3);
    if (s % 4 == 0) {
      double u = static_cast<double>(rng() % 10000) / 10000.0;
      double v = static_cast<double>(rng() % 10000) / 10000.0;
      if (u > v) std::swap(u, v);
      cand = {u * total, (v - u) * total, (1 - v) * total};
    } else {
      for (int x = 0; x < 3; ++x) cand[x] = to_double(eq.distribution.amounts[x]);
      int from = rng() % 3, to = rng() % 3;
      double eps = total * 1e-4 * (1 + rng() % 100) / 100.0;
      eps = std::min(eps, cand[from]);
      cand[from] -= eps;
      cand[to] += eps;
    }
    CHECK(nash_welfare_f(p, cand) <= best + 1e-9 * (1 + std::abs(best)));
  }
}

TEST_CASE("every funded charity is critical for someone") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 15; ++t) {
    Profile p = random_profile(rng, 2 + rng() % 4, 2 + rng() % 4, t % 2 == 0);
    if (p.total_contribution() == 0) continue;
    EquilibriumResult eq = solve_equilibrium(p);
    EfficiencyCheck eff = is_efficient(p, eq.distribution);
    CHECK(eff.efficient);
  }
}

TEST_CASE("scale invariance") {
  SUBCASE("rescaling one agent's valuation row leaves the output unchanged") {
    Profile base = example62();
    Profile scaled({"x", "y", "z"},
                   {AgentSpec{"agent1", Rat(30), {Rat(5), Rat(10), Rat(0)}},
                    AgentSpec{"agent2", Rat(30), {Rat(0), Rat(1), Rat(1)}}});
    EquilibriumResult a = solve_equilibrium(base);
    EquilibriumResult b = solve_equilibrium(scaled);
    REQUIRE(a.mode == Mode::exact);
    REQUIRE(b.mode == Mode::exact);
    CHECK(a.distribution.amounts == b.distribution.amounts);
  }

  SUBCASE("scaling all contributions scales the output exactly") {
    Profile base = example62();
    Profile scaled({"x", "y", "z"},
                   {AgentSpec{"agent1", Rat(90), {Rat(1), Rat(2), Rat(0)}},
                    AgentSpec{"agent2", Rat(90), {Rat(0), Rat(1), Rat(1)}}});
    EquilibriumResult a = solve_equilibrium(base);
    EquilibriumResult b = solve_equilibrium(scaled);
    REQUIRE(a.mode == Mode::exact);
    REQUIRE(b.mode == Mode::exact);
    for (int x = 0; x < 3; ++x)
      CHECK(b.distribution.amounts[x] == 3 * a.distribution.amounts[x]);
  }
}

TEST_CASE("cobb-douglas solve") {
  SUBCASE("remark instance equilibrium is (4,4,4)") {
    CobbDouglasResult r = solve_cobb_douglas_equilibrium(remark_cd());
    REQUIRE(r.equilibrium.mode == Mode::exact);
    CHECK(r.equilibrium.distribution.amounts == std::vector<Rat>{4, 4, 4});
    CHECK(r.log_utilities[0] == doctest::Approx(std::log(16.0)));
    CHECK(r.log_utilities[1] == doctest::Approx(std::log(16.0)));
  }

  SUBCASE("(3,6,3) strictly CD-dominates the equilibrium") {
    Profile p = remark_cd();
    Distribution alt = dist({3, 6, 3});
    CobbDouglasResult eq = solve_cobb_douglas_equilibrium(p);
    for (int i = 0; i < 2; ++i) {
      double dominated = cobb_douglas_log_utility(p, i, alt);
      CHECK(dominated > eq.log_utilities[i]);
      CHECK(std::exp(dominated) == doctest::Approx(18.0));
      CHECK(std::exp(eq.log_utilities[i]) == doctest::Approx(16.0));
    }
  }

  SUBCASE("a single agent spends proportionally to her values") {
    Profile p({"a", "b"}, {AgentSpec{"solo", Rat(9), {Rat(1), Rat(2)}}});
    CobbDouglasResult r = solve_cobb_douglas_equilibrium(p);
    CHECK(r.equilibrium.distribution.amounts == std::vector<Rat>{3, 6});
  }

  SUBCASE("example-1 coincides with the Leontief equilibrium") {
    CobbDouglasResult r = solve_cobb_douglas_equilibrium(example1());
    CHECK(r.equilibrium.distribution.amounts == std::vector<Rat>{300, 300, 300, 100});
  }

  SUBCASE("delegation matches solve_equilibrium on random instances") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 10; ++t) {
      Profile p = random_profile(rng, 2 + rng() % 3, 2 + rng() % 3, t % 2 == 0);
      if (p.total_contribution() == 0) continue;
      EquilibriumResult a = solve_equilibrium(p);
      CobbDouglasResult b = solve_cobb_douglas_equilibrium(p);
      CHECK(max_gap(a.distribution, b.equilibrium.distribution) == 0.0);
    }
  }
}

TEST_CASE("nash welfare rescaling invariance of the argmax") {
  // multiplying one agent's valuation row by lambda shifts welfare but not
  // the maximizer; check via solver outputs
  Profile base = example1();
  Profile scaled({"A", "B", "C", "D"},
                 {AgentSpec{"donor1", Rat(900), {Rat(7), Rat(7), Rat(7), Rat(0)}},
                  AgentSpec{"donor2", Rat(100), {Rat(0), Rat(0), Rat(1), Rat(1)}}});
  EquilibriumResult a = solve_equilibrium(base);
  EquilibriumResult b = solve_equilibrium(scaled);
  REQUIRE(a.mode == Mode::exact);
  REQUIRE(b.mode == Mode::exact);
  CHECK(a.distribution.amounts == b.distribution.amounts);
}

TEST_CASE("unconverged runs are flagged") {
  SolveConfig cfg;
  cfg.method = SolveConfig::Method::dynamics;
  cfg.max_iterations = 3;  // far too few
  cfg.tolerance = Rat(mpz_class(1), mpz_class("1000000000000000"));
  EquilibriumResult r = solve_equilibrium(example2(), cfg);
  CHECK(!r.converged);
  CHECK(r.mode == Mode::floating);
}

TEST_CASE("zero endowment solves trivially") {
  Profile p({"a"}, {AgentSpec{"idle", Rat(0), {Rat(1)}}});
  EquilibriumResult r = solve_equilibrium(p);
  CHECK(r.distribution.amounts == std::vector<Rat>{0});
  CHECK(r.residual == 0);
  CHECK(r.converged);
}
