#include "edr/nash.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edr/dynamics.hpp"
#include "edr/exact.hpp"

namespace edr {

namespace {

struct FloatRun {
  std::vector<std::vector<double>> rows;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

std::vector<std::vector<double>> proportional_rows(const Profile& p) {
  std::vector<std::vector<double>> rows(p.num_agents(),
                                        std::vector<double>(p.num_charities(), 0.0));
  for (int i = 0; i < p.num_agents(); ++i) {
    double vsum = 0.0;
    for (int x : p.approved(i)) vsum += p.value_f(i, x);
    for (int x : p.approved(i))
      rows[i][x] = p.contribution_f(i) * p.value_f(i, x) / vsum;
  }
  return rows;
}

double max_displacement(const Profile& p, const std::vector<std::vector<double>>& rows) {
  double worst = 0.0;
  for (int i = 0; i < p.num_agents(); ++i)
    worst = std::max(worst, displacement_f(p, i, rows));
  return worst;
}

FloatRun run_dynamics(const Profile& p, double eps_abs, long max_iters,
                      std::vector<std::vector<double>> rows) {
  const int n = p.num_agents();
  const int m = p.num_charities();
  FloatRun run;
  run.rows = std::move(rows);
  std::vector<double> cols(m, 0.0);
  auto refresh_cols = [&]() {
    std::fill(cols.begin(), cols.end(), 0.0);
    for (const auto& row : run.rows)
      for (int x = 0; x < m; ++x) cols[x] += row[x];
  };
  refresh_cols();

  std::vector<double> external(m);
  long sweep = 0;
  while (run.iterations < max_iters) {
    double max_shift = 0.0;
    for (int i = 0; i < n && run.iterations < max_iters; ++i) {
      for (int x = 0; x < m; ++x) external[x] = cols[x] - run.rows[i][x];
      std::vector<double> br = best_response_f(p, i, external, p.contribution_f(i));
      double shift = 0.0;
      for (int x = 0; x < m; ++x) shift += std::abs(run.rows[i][x] - br[x]);
      max_shift = std::max(max_shift, shift / 2.0);
      run.rows[i] = br;
      for (int x = 0; x < m; ++x) cols[x] = external[x] + br[x];
      ++run.iterations;
    }
    if (++sweep % 64 == 0) refresh_cols();
    if (max_shift <= eps_abs) {
      refresh_cols();
      double residual = max_displacement(p, run.rows);
      if (residual <= eps_abs) {
        run.residual = residual;
        run.converged = true;
        return run;
      }
    }
  }
  run.residual = max_displacement(p, run.rows);
  run.converged = run.residual <= eps_abs;
  return run;
}

std::vector<double> project_scaled_simplex(std::vector<double> v, double total) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  double running = 0.0;
  for (size_t k = 0; k < u.size(); ++k) {
    running += u[k];
    double th = (running - total) / static_cast<double>(k + 1);
    if (u[k] - th > 0) {
      rho = static_cast<int>(k + 1);
      css = running;
      theta = th;
    }
  }
  (void)css;
  (void)rho;
  for (double& x : v) x = std::max(0.0, x - theta);
  return v;
}

FloatRun run_subgradient(const Profile& p, double eps_abs, long max_iters) {
  const int n = p.num_agents();
  const int m = p.num_charities();
  const double total = to_double(p.total_contribution());

  std::vector<std::vector<double>> rows = proportional_rows(p);
  std::vector<double> delta(m, 0.0);
  for (const auto& row : rows)
    for (int x = 0; x < m; ++x) delta[x] += row[x];

  std::vector<double> best = delta;
  double best_welfare = nash_welfare_f(p, delta);

  const long ascent_steps = std::min<long>(max_iters / 2, 20000);
  for (long t = 1; t <= ascent_steps; ++t) {
    std::vector<double> grad(m, 0.0);
    bool degenerate = false;
    for (int i = 0; i < n; ++i) {
      double c = p.contribution_f(i);
      if (c == 0.0) continue;
      double u = leontief_utility_f(p, i, delta);
      if (u <= 0.0) {
        degenerate = true;
        break;
      }
      std::vector<int> crit = critical_set_f(p, i, delta, 1e-9);
      double share = c / (u * static_cast<double>(crit.size()));
      for (int x : crit) grad[x] += share / p.value_f(i, x);
    }
    if (degenerate) {
      for (int x = 0; x < m; ++x)
        delta[x] = 0.9 * delta[x] + 0.1 * total / static_cast<double>(m);
      continue;
    }
    double norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    if (norm == 0.0) break;
    double step = 0.1 * total / (norm * std::sqrt(static_cast<double>(t)));
    for (int x = 0; x < m; ++x) delta[x] += step * grad[x];
    delta = project_scaled_simplex(std::move(delta), total);
    double w = nash_welfare_f(p, delta);
    if (w > best_welfare) {
      best_welfare = w;
      best = delta;
    }
  }

  // Dynamics polishing from a decomposition assembling the best ascent
  // point (rows proportional to it are a valid decomposition).
  for (int i = 0; i < n; ++i)
    for (int x = 0; x < m; ++x)
      rows[i][x] = p.contribution_f(i) * best[x] / total;
  FloatRun run = run_dynamics(p, eps_abs, std::max<long>(max_iters - ascent_steps, 1000),
                              std::move(rows));
  run.iterations += ascent_steps;
  return run;
}

EquilibriumResult zero_endowment(const Profile& profile, const char* method) {
  EquilibriumResult res;
  res.mode = Mode::exact;
  res.method = method;
  res.distribution = make_distribution(std::vector<Rat>(profile.num_charities(), Rat(0)));
  res.decomposition.rows.assign(profile.num_agents(),
                                std::vector<Rat>(profile.num_charities(), Rat(0)));
  res.utilities.assign(profile.num_agents(), Rat(0));
  res.residual = 0;
  return res;
}

EquilibriumResult assemble_float_result(const Profile& profile,
                                        const ProfileReduction& red, const FloatRun& run,
                                        const char* method) {
  EquilibriumResult res;
  res.mode = Mode::floating;
  res.method = method;
  res.iterations = run.iterations;
  res.converged = run.converged;
  res.decomposition.mode = Mode::floating;
  res.decomposition.rows.assign(profile.num_agents(),
                                std::vector<Rat>(profile.num_charities(), Rat(0)));
  for (size_t ri = 0; ri < red.agent_map.size(); ++ri)
    for (size_t rx = 0; rx < red.charity_map.size(); ++rx)
      res.decomposition.rows[red.agent_map[ri]][red.charity_map[rx]] =
          Rat(run.rows[ri][rx]);
  res.distribution = res.decomposition.to_distribution();
  res.utilities.resize(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i)
    res.utilities[i] = leontief_utility(profile, i, res.distribution);
  res.nash_welfare_value = nash_welfare(profile, res.distribution);
  res.residual = Rat(run.residual) / profile.total_contribution();
  return res;
}

}  // namespace

EquilibriumResult solve_equilibrium(const Profile& profile, const SolveConfig& cfg) {
  if (profile.total_contribution() == 0) return zero_endowment(profile, "exact");

  ProfileReduction red = reduce_profile(profile);
  const Profile& R = red.reduced;
  const double eps_abs = to_double(cfg.tolerance * profile.total_contribution());

  switch (cfg.method) {
    case SolveConfig::Method::dynamics: {
      FloatRun run = run_dynamics(R, eps_abs, cfg.max_iterations, proportional_rows(R));
      return assemble_float_result(profile, red, run, "dynamics");
    }
    case SolveConfig::Method::subgradient: {
      FloatRun run = run_subgradient(R, eps_abs, cfg.max_iterations);
      return assemble_float_result(profile, red, run, "subgradient");
    }
    case SolveConfig::Method::auto_mode:
      break;
  }

  FloatRun run = run_dynamics(R, eps_abs, cfg.max_iterations, proportional_rows(R));
  std::vector<double> delta(R.num_charities(), 0.0);
  for (const auto& row : run.rows)
    for (int x = 0; x < R.num_charities(); ++x) delta[x] += row[x];
  Distribution approx = expand_distribution(
      red, profile, distribution_from_doubles(delta));
  SnapResult snap = snap_to_rational(profile, approx);
  if (snap.success) {
    snap.result.method = "dynamics+snap";
    snap.result.iterations = run.iterations;
    return snap.result;
  }
  if (profile.binary_weights()) {
    EquilibriumResult res = charity_egalitarian(profile);
    res.method = "exact-binary";
    res.iterations = run.iterations;
    return res;
  }
  EquilibriumResult res = assemble_float_result(profile, red, run, "dynamics");
  res.warnings.push_back("snap_to_rational failed; returning the float iterate");
  return res;
}

CobbDouglasResult solve_cobb_douglas_equilibrium(const Profile& profile,
                                                 const SolveConfig& cfg) {
  CobbDouglasResult out;
  out.equilibrium = solve_equilibrium(profile, cfg);
  out.log_utilities.resize(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i)
    out.log_utilities[i] =
        cobb_douglas_log_utility(profile, i, out.equilibrium.distribution);
  return out;
}

}  // namespace edr
