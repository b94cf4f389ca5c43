#include "edr/exact.hpp"

#include <algorithm>
#include <cassert>
#include <queue>
#include <stdexcept>

#include "edr/dynamics.hpp"

namespace edr {

namespace {

EquilibriumResult zero_endowment_result(const Profile& profile, std::string method) {
  EquilibriumResult res;
  res.mode = Mode::exact;
  res.method = std::move(method);
  res.distribution =
      make_distribution(std::vector<Rat>(profile.num_charities(), Rat(0)));
  res.decomposition.rows.assign(profile.num_agents(),
                                std::vector<Rat>(profile.num_charities(), Rat(0)));
  res.utilities.assign(profile.num_agents(), Rat(0));
  res.nash_welfare_value = 0.0;
  res.residual = 0;
  return res;
}

EquilibriumResult assemble_exact_result(const Profile& profile, Distribution dist,
                                        Decomposition dec, std::string method) {
  EquilibriumResult res;
  res.mode = Mode::exact;
  res.method = std::move(method);
  res.distribution = std::move(dist);
  res.decomposition = std::move(dec);
  res.utilities.resize(profile.num_agents());
  for (int i = 0; i < profile.num_agents(); ++i)
    res.utilities[i] = leontief_utility(profile, i, res.distribution);
  res.nash_welfare_value = nash_welfare(profile, res.distribution);
  res.residual = exact_residual(profile, res.decomposition);
  res.converged = true;
  return res;
}

}  // namespace

Rat exact_residual(const Profile& profile, const Decomposition& dec) {
  const Rat& total = profile.total_contribution();
  if (total == 0) return Rat(0);
  Rat worst = 0;
  for (int i = 0; i < profile.num_agents(); ++i)
    worst = rat_max(worst, displacement(profile, i, dec));
  return worst / total;
}

ExtractResult extract_decomposition(const Profile& profile, const Distribution& d) {
  if (d.total() != profile.total_contribution())
    throw std::invalid_argument(
        "extract_decomposition: distribution does not sum to the endowment");
  const int n = profile.num_agents();
  const int m = profile.num_charities();

  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (profile.agent(i).contribution > 0) active.push_back(i);

  ExtractResult out;
  out.decomposition.rows.assign(n, std::vector<Rat>(m, Rat(0)));
  if (active.empty()) {
    out.feasible = d.total() == 0;
    return out;
  }

  std::vector<std::vector<int>> critical(active.size());
  for (size_t a = 0; a < active.size(); ++a)
    critical[a] = critical_set(profile, active[a], std::span<const Rat>(d.amounts));

  // Transportation feasibility as a max-flow LP on the critical graph.
  LinearProgram lp;
  std::vector<std::vector<int>> edge_var(active.size());
  for (size_t a = 0; a < active.size(); ++a) {
    edge_var[a].assign(critical[a].size(), -1);
    for (size_t k = 0; k < critical[a].size(); ++k) edge_var[a][k] = lp.add_var();
  }
  std::vector<std::pair<int, Rat>> obj;
  for (size_t a = 0; a < active.size(); ++a)
    for (int var : edge_var[a]) obj.emplace_back(var, Rat(1));
  lp.set_objective(obj);
  for (size_t a = 0; a < active.size(); ++a) {
    std::vector<std::pair<int, Rat>> row;
    for (int var : edge_var[a]) row.emplace_back(var, Rat(1));
    lp.add_constraint(row, Relation::le, profile.agent(active[a]).contribution);
  }
  std::vector<std::vector<std::pair<size_t, size_t>>> charity_edges(m);
  for (size_t a = 0; a < active.size(); ++a)
    for (size_t k = 0; k < critical[a].size(); ++k)
      charity_edges[critical[a][k]].emplace_back(a, k);
  for (int x = 0; x < m; ++x) {
    std::vector<std::pair<int, Rat>> row;
    for (auto [a, k] : charity_edges[x]) row.emplace_back(edge_var[a][k], Rat(1));
    lp.add_constraint(row, Relation::le, d.amounts[x]);
  }

  SimplexResult sr = simplex_solve(lp);
  if (sr.status != LPStatus::optimal)
    throw std::logic_error("extract_decomposition: transportation program failed");

  if (sr.objective_value == profile.total_contribution()) {
    out.feasible = true;
    for (size_t a = 0; a < active.size(); ++a)
      for (size_t k = 0; k < critical[a].size(); ++k)
        out.decomposition.rows[active[a]][critical[a][k]] = sr.x[edge_var[a][k]];
    return out;
  }

  // Residual reachability from unsaturated agents yields the Hall-type
  // witness: the reached agents spend only inside the reached charities,
  // which cannot absorb their contributions.
  out.feasible = false;
  std::vector<Rat> row_sums(active.size(), Rat(0));
  for (size_t a = 0; a < active.size(); ++a)
    for (size_t k = 0; k < critical[a].size(); ++k) row_sums[a] += sr.x[edge_var[a][k]];
  std::vector<bool> agent_seen(active.size(), false), charity_seen(m, false);
  std::queue<size_t> frontier;
  for (size_t a = 0; a < active.size(); ++a)
    if (row_sums[a] < profile.agent(active[a]).contribution) {
      agent_seen[a] = true;
      frontier.push(a);
    }
  while (!frontier.empty()) {
    size_t a = frontier.front();
    frontier.pop();
    for (size_t k = 0; k < critical[a].size(); ++k) {
      int x = critical[a][k];
      if (charity_seen[x]) continue;
      charity_seen[x] = true;
      for (auto [b, j] : charity_edges[x]) {
        if (agent_seen[b] || sr.x[edge_var[b][j]] == 0) continue;
        agent_seen[b] = true;
        frontier.push(b);
      }
    }
  }
  for (size_t a = 0; a < active.size(); ++a)
    if (agent_seen[a]) {
      out.witness.agents.push_back(active[a]);
      out.witness.confined_contribution += profile.agent(active[a]).contribution;
    }
  for (int x = 0; x < m; ++x)
    if (charity_seen[x]) {
      out.witness.charities.push_back(x);
      out.witness.covered_amount += d.amounts[x];
    }
  assert(out.witness.confined_contribution > out.witness.covered_amount);
  return out;
}

namespace {

struct ApprovalVars {
  std::vector<std::vector<int>> var;  // per reduced agent, aligned with approved()
};

ApprovalVars add_decomposition_vars(const Profile& reduced, LinearProgram& lp) {
  ApprovalVars av;
  av.var.resize(reduced.num_agents());
  for (int i = 0; i < reduced.num_agents(); ++i) {
    av.var[i].resize(reduced.approved(i).size());
    for (size_t k = 0; k < reduced.approved(i).size(); ++k) av.var[i][k] = lp.add_var();
  }
  for (int i = 0; i < reduced.num_agents(); ++i) {
    std::vector<std::pair<int, Rat>> row;
    for (int var : av.var[i]) row.emplace_back(var, Rat(1));
    lp.add_constraint(row, Relation::eq, reduced.agent(i).contribution);
  }
  return av;
}

std::vector<LinearExpr> charity_amount_exprs(const Profile& reduced,
                                             const ApprovalVars& av) {
  std::vector<LinearExpr> exprs(reduced.num_charities());
  for (int i = 0; i < reduced.num_agents(); ++i)
    for (size_t k = 0; k < reduced.approved(i).size(); ++k)
      exprs[reduced.approved(i)[k]].terms.emplace_back(av.var[i][k], Rat(1));
  return exprs;
}

Decomposition decomposition_from_vars(const Profile& reduced, const ApprovalVars& av,
                                      const std::vector<Rat>& x) {
  Decomposition dec;
  dec.rows.assign(reduced.num_agents(),
                  std::vector<Rat>(reduced.num_charities(), Rat(0)));
  for (int i = 0; i < reduced.num_agents(); ++i)
    for (size_t k = 0; k < reduced.approved(i).size(); ++k)
      dec.rows[i][reduced.approved(i)[k]] = x[av.var[i][k]];
  return dec;
}

const char* kNonBinaryWarning =
    "valuations are not binary: reading A_i = {x : v_ix > 0} as approval sets; "
    "equivalence with the equilibrium distribution is guaranteed only for "
    "binary weights";

}  // namespace

EquilibriumResult charity_egalitarian(const Profile& profile) {
  if (profile.total_contribution() == 0)
    return zero_endowment_result(profile, "charity-egalitarian");
  ProfileReduction red = reduce_profile(profile);
  const Profile& R = red.reduced;

  LinearProgram base;
  ApprovalVars av = add_decomposition_vars(R, base);
  std::vector<LinearExpr> objectives = charity_amount_exprs(R, av);
  LeximinResult lex = leximin_solve(base, objectives);

  Distribution dist_red = make_distribution(lex.levels);
  Distribution dist = expand_distribution(red, profile, dist_red);

  Decomposition dec;
  if (profile.binary_weights()) {
    // The leximin distribution is the equilibrium distribution; publish the
    // certifying decomposition on critical sets.
    ExtractResult ext = extract_decomposition(profile, dist);
    if (!ext.feasible)
      throw std::logic_error("charity_egalitarian: equilibrium extraction failed");
    dec = std::move(ext.decomposition);
  } else {
    dec = expand_decomposition(red, profile, decomposition_from_vars(R, av, lex.x));
  }

  EquilibriumResult res =
      assemble_exact_result(profile, std::move(dist), std::move(dec), "charity-egalitarian");
  if (!profile.binary_weights()) res.warnings.push_back(kNonBinaryWarning);
  return res;
}

EquilibriumResult conditional_egalitarian(const Profile& profile) {
  if (profile.total_contribution() == 0)
    return zero_endowment_result(profile, "conditional-egalitarian");
  ProfileReduction red = reduce_profile(profile);
  const Profile& R = red.reduced;
  const int rn = R.num_agents();

  // Stage 1: leximin over the utility vector subject to decomposability.
  LinearProgram base;
  ApprovalVars av = add_decomposition_vars(R, base);
  std::vector<LinearExpr> amounts = charity_amount_exprs(R, av);
  std::vector<int> uvar(rn);
  for (int i = 0; i < rn; ++i) uvar[i] = base.add_var();
  for (int i = 0; i < rn; ++i) {
    for (int x : R.approved(i)) {
      // delta(x) >= v_{i,x} * u_i
      std::vector<std::pair<int, Rat>> row = amounts[x].terms;
      row.emplace_back(uvar[i], -R.value(i, x));
      base.add_constraint(row, Relation::ge, Rat(0));
    }
  }
  std::vector<LinearExpr> util_objs(rn);
  for (int i = 0; i < rn; ++i) util_objs[i].terms.emplace_back(uvar[i], Rat(1));
  LeximinResult lex1 = leximin_solve(base, util_objs);

  // Stage 2: canonicalize the distribution by a charity leximin at the
  // fixed utility levels (the utility-optimal set is convex, so the
  // leximin-maximal funding vector in it is unique).
  LinearProgram base2;
  ApprovalVars av2 = add_decomposition_vars(R, base2);
  std::vector<LinearExpr> amounts2 = charity_amount_exprs(R, av2);
  for (int i = 0; i < rn; ++i)
    for (int x : R.approved(i))
      base2.add_constraint(amounts2[x].terms, Relation::ge, R.value(i, x) * lex1.levels[i]);
  LeximinResult lex2 = leximin_solve(base2, amounts2);

  Distribution dist = expand_distribution(red, profile, make_distribution(lex2.levels));
  Decomposition dec;
  if (profile.binary_weights()) {
    ExtractResult ext = extract_decomposition(profile, dist);
    if (!ext.feasible)
      throw std::logic_error("conditional_egalitarian: equilibrium extraction failed");
    dec = std::move(ext.decomposition);
  } else {
    dec = expand_decomposition(red, profile, decomposition_from_vars(R, av2, lex2.x));
  }

  EquilibriumResult res = assemble_exact_result(profile, std::move(dist), std::move(dec),
                                                "conditional-egalitarian");
  if (!profile.binary_weights()) res.warnings.push_back(kNonBinaryWarning);
  return res;
}

SnapResult snap_to_rational(const Profile& profile, const Distribution& d_float,
                            double tau) {
  SnapResult out;
  if (profile.total_contribution() == 0) {
    out.success = true;
    out.result = zero_endowment_result(profile, "snap");
    return out;
  }
  ProfileReduction red = reduce_profile(profile);
  const Profile& R = red.reduced;
  const int rn = R.num_agents();
  const int rm = R.num_charities();

  std::vector<double> df(rm);
  for (int x = 0; x < rm; ++x) df[x] = to_double(d_float.amounts[red.charity_map[x]]);

  double tau_k = tau;
  for (int attempt = 0; attempt < 4; ++attempt, tau_k *= 10.0) {
    std::vector<std::vector<int>> guessed(rn);
    for (int i = 0; i < rn; ++i) guessed[i] = critical_set_f(R, i, df, tau_k);

    // LP of the guessed critical structure: exact ties on guessed pairs,
    // inequalities elsewhere, decomposition confined to the guesses.
    LinearProgram lp;
    std::vector<int> uvar(rn), dvar(rm);
    for (int i = 0; i < rn; ++i) uvar[i] = lp.add_var();
    for (int x = 0; x < rm; ++x) dvar[x] = lp.add_var();
    std::vector<std::vector<int>> fvar(rn);
    for (int i = 0; i < rn; ++i) {
      fvar[i].resize(guessed[i].size());
      for (size_t k = 0; k < guessed[i].size(); ++k) fvar[i][k] = lp.add_var();
    }
    for (int i = 0; i < rn; ++i) {
      const auto& crit = guessed[i];
      for (int x : R.approved(i)) {
        bool is_critical = std::find(crit.begin(), crit.end(), x) != crit.end();
        lp.add_constraint({{dvar[x], Rat(1)}, {uvar[i], -R.value(i, x)}},
                          is_critical ? Relation::eq : Relation::ge, Rat(0));
      }
      std::vector<std::pair<int, Rat>> row;
      for (int var : fvar[i]) row.emplace_back(var, Rat(1));
      lp.add_constraint(row, Relation::eq, R.agent(i).contribution);
    }
    std::vector<std::vector<std::pair<int, Rat>>> cols(rm);
    for (int i = 0; i < rn; ++i)
      for (size_t k = 0; k < guessed[i].size(); ++k)
        cols[guessed[i][k]].emplace_back(fvar[i][k], Rat(1));
    for (int x = 0; x < rm; ++x) {
      auto row = cols[x];
      row.emplace_back(dvar[x], Rat(-1));
      lp.add_constraint(row, Relation::eq, Rat(0));
    }

    SimplexResult sr = simplex_solve(lp);
    if (sr.status != LPStatus::optimal) continue;

    std::vector<Rat> amounts(rm);
    for (int x = 0; x < rm; ++x) amounts[x] = sr.x[dvar[x]];
    Distribution dist_red = make_distribution(std::move(amounts));
    ExtractResult verify = extract_decomposition(R, dist_red);
    if (!verify.feasible) continue;

    Distribution dist = expand_distribution(red, profile, dist_red);
    Decomposition dec = expand_decomposition(red, profile, verify.decomposition);
    out.result = assemble_exact_result(profile, std::move(dist), std::move(dec), "snap");
    if (out.result.residual != 0) continue;  // not actually an equilibrium
    out.success = true;
    return out;
  }
  out.success = false;
  out.failure_reason =
      "snap_to_rational: no guessed critical structure yielded a verified equilibrium";
  return out;
}

}  // namespace edr
