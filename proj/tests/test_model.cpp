#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "edr/analysis.hpp"
#include "edr/model.hpp"
#include "helpers.hpp"

using namespace edr;
using namespace edr::testing;

TEST_CASE("leontief utility") {
  Profile p = example1();
  Distribution d = dist({300, 300, 300, 100});
  CHECK(leontief_utility(p, 0, d) == 300);
  CHECK(leontief_utility(p, 1, d) == 100);

  SUBCASE("single approved charity holding the full endowment") {
    Profile solo({"a", "b"}, {AgentSpec{"one", Rat(7), {Rat(3), Rat(0)}}});
    CHECK(leontief_utility(solo, 0, dist({7, 0})) == Rat(7, 3));
    Profile pair({"a", "b"}, {AgentSpec{"one", Rat(5), {Rat(1), Rat(0)}},
                              AgentSpec{"two", Rat(0), {Rat(1), Rat(1)}}});
    CHECK(leontief_utility(pair, 0, dist({5, 0})) == 5);
  }

  SUBCASE("general weights") {
    Profile p62 = example62();
    Distribution d62 = dist({12, 24, 24});
    CHECK(leontief_utility(p62, 0, d62) == 12);
    CHECK(leontief_utility(p62, 1, d62) == 24);
  }
}

TEST_CASE("cobb-douglas log utility") {
  Profile p = remark_cd();
  CHECK(cobb_douglas_log_utility(p, 0, dist({4, 4, 4})) == doctest::Approx(std::log(16.0)));
  CHECK(cobb_douglas_log_utility(p, 0, dist({3, 6, 3})) == doctest::Approx(std::log(18.0)));
  CHECK(cobb_douglas_log_utility(p, 1, dist({3, 6, 3})) == doctest::Approx(std::log(18.0)));
  CHECK(cobb_douglas_log_utility(p, 0, dist({0, 12, 0})) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("critical sets") {
  Profile p = example1();
  Distribution d = dist({300, 300, 300, 100});
  CHECK(critical_set(p, 0, d) == std::vector<int>{0, 1, 2});
  CHECK(critical_set(p, 1, d) == std::vector<int>{3});

  SUBCASE("uniform tie covers the whole approval set") {
    Distribution u = dist({250, 250, 250, 250});
    CHECK(critical_set(p, 0, u) == std::vector<int>{0, 1, 2});
    CHECK(critical_set(p, 1, u) == std::vector<int>{2, 3});
  }

  SUBCASE("figure-1 state") {
    Profile fig({"w", "x", "y", "z"},
                {AgentSpec{"i", Rat(6), {Rat(0), Rat(1), Rat(1), Rat(1)}}});
    CHECK(critical_set(fig, 0, dist({3, 2, 6, 9})) == std::vector<int>{1});
  }

  SUBCASE("members satisfy delta(x) = v * u exactly") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      Profile rp = random_profile(rng, 4, 5, trial % 2 == 0);
      std::vector<Rat> amounts(5, Rat(0));
      Rat left = rp.total_contribution();
      for (int x = 0; x < 4; ++x) {
        Rat part = left * rat_frac(1 + rng() % 3, 4ul);
        amounts[x] = part;
        left -= part;
      }
      amounts[4] = left;
      Distribution rd = make_distribution(amounts);
      for (int i = 0; i < rp.num_agents(); ++i) {
        Rat u = leontief_utility(rp, i, rd);
        auto crit = critical_set(rp, i, rd);
        CHECK(!crit.empty());
        for (int x : crit) CHECK(rd.amounts[x] == rp.value(i, x) * u);
        // every charity obeys delta(x) >= v * u
        for (int x = 0; x < 5; ++x) CHECK(rd.amounts[x] >= rp.value(i, x) * u);
      }
    }
  }

  SUBCASE("removing mass from a critical charity lowers the utility") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      Profile rp = random_profile(rng, 3, 4, true);
      if (rp.total_contribution() == 0) continue;
      std::vector<Rat> amounts(4, rp.total_contribution() / 4);
      Distribution rd = make_distribution(amounts);
      for (int i = 0; i < rp.num_agents(); ++i) {
        Rat u = leontief_utility(rp, i, rd);
        for (int x : critical_set(rp, i, rd)) {
          auto less = amounts;
          Rat eps = amounts[x] / 2;
          if (eps == 0) continue;
          less[x] -= eps;
          CHECK(leontief_utility(rp, i, make_distribution(less)) < u);
        }
      }
    }
  }
}

TEST_CASE("nash welfare") {
  Profile p = example1();
  CHECK(nash_welfare(p, dist({300, 300, 300, 100})) ==
        doctest::Approx(900 * std::log(300.0) + 100 * std::log(100.0)));
  CHECK(nash_welfare(p, dist({1000, 0, 0, 0})) ==
        -std::numeric_limits<double>::infinity());

  Profile p2 = example2();
  std::vector<Rat> a(11, Rat(25));
  a[0] = 50;
  CHECK(nash_welfare(p2, make_distribution(a)) == doctest::Approx(300 * std::log(25.0)));

  SUBCASE("zero contributors do not pull welfare to -inf") {
    Profile z({"a", "b"}, {AgentSpec{"rich", Rat(10), {Rat(1), Rat(0)}},
                           AgentSpec{"idle", Rat(0), {Rat(0), Rat(1)}}});
    CHECK(nash_welfare(z, dist({10, 0})) == doctest::Approx(10 * std::log(10.0)));
  }
}

TEST_CASE("g-welfare") {
  Profile p = appendix_b();
  WelfareSpec p1 = WelfareSpec::power_spec(1.0);
  CHECK(g_welfare(p, dist({3, 0}), p1) == doctest::Approx(6.0));
  CHECK(g_welfare(p, dist({2, 1}), p1) == doctest::Approx(5.0));
  CHECK(*g_welfare_exact(p, dist({3, 0}), 1) == 6);
  CHECK(*g_welfare_exact(p, dist({2, 1}), 1) == 5);

  SUBCASE("negative powers diverge at zero utility") {
    CHECK(g_welfare(p, dist({3, 0}), WelfareSpec::power_spec(-1.0)) ==
          -std::numeric_limits<double>::infinity());
    CHECK(!g_welfare_exact(p, dist({3, 0}), -1).has_value());
    CHECK(*g_welfare_exact(p, dist({2, 1}), -1) == Rat(-2));
  }

  SUBCASE("nash spec reduces to nash welfare") {
    Profile e1 = example1();
    Distribution d = dist({300, 300, 300, 100});
    CHECK(g_welfare(e1, d, WelfareSpec::nash_spec()) == doctest::Approx(nash_welfare(e1, d)));
  }
}

TEST_CASE("leximin order") {
  LeximinKey a({Rat(20), Rat(20), Rat(20)});
  LeximinKey b({Rat(12), Rat(24), Rat(24)});
  CHECK(leximin_compare(a, b) == 1);
  CHECK(leximin_compare(b, a) == -1);
  CHECK(leximin_compare(a, LeximinKey({Rat(20), Rat(20), Rat(20)})) == 0);
  CHECK(leximin_compare(LeximinKey({Rat(0), Rat(5)}), LeximinKey({Rat(1), Rat(1)})) == -1);
  CHECK_THROWS_AS(leximin_compare(a, LeximinKey({Rat(1)})), std::invalid_argument);

  SUBCASE("total preorder on random keys") {
    std::mt19937_64 rng(3);
    auto draw = [&]() {
      std::vector<Rat> v(4);
      for (auto& r : v) r = rat_frac(rng() % 12, 1 + rng() % 5);
      return LeximinKey(v);
    };
    for (int t = 0; t < 200; ++t) {
      LeximinKey x = draw(), y = draw(), z = draw();
      int xy = leximin_compare(x, y), yz = leximin_compare(y, z), xz = leximin_compare(x, z);
      CHECK(leximin_compare(x, x) == 0);
      CHECK(xy == -leximin_compare(y, x));
      if (xy <= 0 && yz <= 0) CHECK(xz <= 0);  // transitivity
      if (xy == 0 && yz == 0) CHECK(xz == 0);
    }
  }
}

TEST_CASE("profile validation") {
  CHECK_THROWS(Profile({}, {AgentSpec{"a", Rat(1), {}}}));
  CHECK_THROWS(Profile({"x"}, {}));
  CHECK_THROWS(Profile({"x"}, {AgentSpec{"a", Rat(-1), {Rat(1)}}}));
  CHECK_THROWS(Profile({"x"}, {AgentSpec{"a", Rat(1), {Rat(-1)}}}));
  CHECK_THROWS(Profile({"x"}, {AgentSpec{"a", Rat(1), {Rat(0)}}}));  // no positive value
  CHECK_THROWS(Profile({"x", "x"}, {AgentSpec{"a", Rat(1), {Rat(1), Rat(1)}}}));
  CHECK_THROWS(Profile({"x"}, {AgentSpec{"a", Rat(1), {Rat(1)}},
                               AgentSpec{"a", Rat(1), {Rat(1)}}}));
}

TEST_CASE("profile reduction strips idle agents and unfunded charities") {
  Profile p({"a", "b", "c"}, {AgentSpec{"rich", Rat(10), {Rat(1), Rat(1), Rat(0)}},
                              AgentSpec{"idle", Rat(0), {Rat(0), Rat(0), Rat(1)}}});
  ProfileReduction red = reduce_profile(p);
  CHECK(red.reduced.num_agents() == 1);
  CHECK(red.reduced.num_charities() == 2);
  Distribution small = make_distribution({Rat(5), Rat(5)});
  Distribution full = expand_distribution(red, p, small);
  CHECK(full.amounts == std::vector<Rat>{5, 5, 0});
}

TEST_CASE("decomposition bookkeeping") {
  Profile p = example1();
  Decomposition dec;
  dec.rows = {{Rat(300), Rat(300), Rat(300), Rat(0)}, {Rat(0), Rat(0), Rat(0), Rat(100)}};
  Distribution d = dist({300, 300, 300, 100});
  CHECK(decomposition_consistent(p, dec, d));
  dec.rows[1][3] = 99;
  CHECK(!decomposition_consistent(p, dec, d));
}

TEST_CASE("rational parsing and formatting") {
  CHECK(*parse_rational("900") == 900);
  CHECK(*parse_rational("316.5") == Rat(633, 2));
  CHECK(*parse_rational("950/3") == Rat(950, 3));
  CHECK(*parse_rational("-2.25") == Rat(-9, 4));
  CHECK(!parse_rational("abc").has_value());
  CHECK(!parse_rational("1/0").has_value());
  CHECK(!parse_rational("").has_value());
  CHECK(format_rational(Rat(950, 3)) == "950/3");
  CHECK(format_decimal(Rat(950, 3), 2) == "316.67");
  CHECK(format_decimal(Rat(-1, 8), 2) == "-0.13");
  CHECK(format_decimal(Rat(300), 0) == "300");
}
