#include "edr/lp.hpp"

#include <cassert>
#include <stdexcept>

namespace edr {

int LinearProgram::add_var() {
  ++num_vars;
  objective.resize(num_vars, Rat(0));
  for (auto& row : rows) row.coeffs.resize(num_vars, Rat(0));
  return num_vars - 1;
}

void LinearProgram::resize_vars(int count) {
  num_vars = count;
  objective.resize(count, Rat(0));
  for (auto& row : rows) row.coeffs.resize(count, Rat(0));
}

void LinearProgram::add_constraint(const std::vector<std::pair<int, Rat>>& terms,
                                   Relation rel, Rat rhs) {
  Constraint c;
  c.coeffs.assign(num_vars, Rat(0));
  for (const auto& [var, coef] : terms) c.coeffs[var] += coef;
  c.rel = rel;
  c.rhs = std::move(rhs);
  rows.push_back(std::move(c));
}

void LinearProgram::set_objective(const std::vector<std::pair<int, Rat>>& terms) {
  objective.assign(num_vars, Rat(0));
  for (const auto& [var, coef] : terms) objective[var] += coef;
}

Rat LinearExpr::eval(const std::vector<Rat>& x) const {
  Rat v = 0;
  for (const auto& [var, coef] : terms) v += coef * x[var];
  return v;
}

namespace {

enum ColKind { kStructural, kSlack, kArtificial };

struct Tableau {
  int num_rows = 0;
  int num_cols = 0;  // structural + slack + artificial
  std::vector<std::vector<Rat>> a;  // row-major coefficient matrix
  std::vector<Rat> b;               // rhs, kept nonnegative
  std::vector<Rat> reduced;         // reduced-cost row for the current phase
  Rat value;                        // current objective value
  std::vector<int> basis;           // basic column per row
  std::vector<ColKind> kind;
  std::vector<int> col_row;         // owning row for slack/artificial columns
  std::vector<int> row_flip;        // +1/-1 applied to the original row
  std::vector<int> row_origin;      // original constraint index
  bool phase_two = false;

  void pivot(int prow, int pcol) {
    std::vector<Rat>& pr = a[prow];
    const Rat inv = 1 / pr[pcol];
    if (inv != 1) {
      for (Rat& v : pr)
        if (v != 0) v *= inv;
      b[prow] *= inv;
      pr[pcol] = 1;
    }
    for (int i = 0; i < num_rows; ++i) {
      if (i == prow) continue;
      const Rat factor = a[i][pcol];
      if (factor == 0) continue;
      std::vector<Rat>& ri = a[i];
      for (int j = 0; j < num_cols; ++j)
        if (pr[j] != 0) ri[j] -= factor * pr[j];
      b[i] -= factor * b[prow];
      ri[pcol] = 0;
    }
    const Rat rfactor = reduced[pcol];
    if (rfactor != 0) {
      for (int j = 0; j < num_cols; ++j)
        if (pr[j] != 0) reduced[j] -= rfactor * pr[j];
      value += rfactor * b[prow];
      reduced[pcol] = 0;
    }
    basis[prow] = pcol;
  }

  // Bland: smallest eligible entering column, smallest basic column among
  // the tied leaving rows. Returns false when no entering column exists.
  // Sets *unbounded_col when the entering column has no blocking row.
  bool bland_step(const std::vector<bool>& banned, int* unbounded_col) {
    int pcol = -1;
    for (int j = 0; j < num_cols; ++j) {
      if (banned[j]) continue;
      if (reduced[j] > 0) {
        pcol = j;
        break;
      }
    }
    if (pcol < 0) return false;
    int prow = -1;
    Rat best_ratio;
    for (int i = 0; i < num_rows; ++i) {
      if (a[i][pcol] <= 0) continue;
      Rat ratio = b[i] / a[i][pcol];
      if (prow < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[i] < basis[prow])) {
        prow = i;
        best_ratio = ratio;
      }
    }
    if (prow < 0) {
      *unbounded_col = pcol;
      return true;
    }
    pivot(prow, pcol);
    *unbounded_col = -1;
    return true;
  }
};

}  // namespace

SimplexResult simplex_solve(const LinearProgram& lp) {
  const int n = lp.num_vars;
  const int m = static_cast<int>(lp.rows.size());
  for (const auto& row : lp.rows)
    if (static_cast<int>(row.coeffs.size()) != n)
      throw std::invalid_argument("simplex: constraint dimension mismatch");
  if (static_cast<int>(lp.objective.size()) != n)
    throw std::invalid_argument("simplex: objective dimension mismatch");

  Tableau t;
  t.num_rows = m;
  t.a.assign(m, std::vector<Rat>(n, Rat(0)));
  t.b.assign(m, Rat(0));
  t.basis.assign(m, -1);
  t.kind.assign(n, kStructural);
  t.col_row.assign(n, -1);
  t.row_flip.assign(m, 1);
  t.row_origin.resize(m);

  std::vector<Relation> rel(m);
  for (int i = 0; i < m; ++i) {
    t.row_origin[i] = i;
    rel[i] = lp.rows[i].rel;
    t.b[i] = lp.rows[i].rhs;
    t.a[i] = lp.rows[i].coeffs;
    if (t.b[i] < 0) {
      t.row_flip[i] = -1;
      t.b[i] = -t.b[i];
      for (Rat& v : t.a[i]) v = -v;
      if (rel[i] == Relation::le)
        rel[i] = Relation::ge;
      else if (rel[i] == Relation::ge)
        rel[i] = Relation::le;
    }
  }

  // Slack for <=, surplus for >=, artificial for >= and ==.
  auto add_column = [&](ColKind kind, int row, const Rat& entry) {
    for (int i = 0; i < m; ++i) t.a[i].push_back(i == row ? entry : Rat(0));
    t.kind.push_back(kind);
    t.col_row.push_back(row);
    return static_cast<int>(t.kind.size()) - 1;
  };
  std::vector<int> unit_col(m, -1);  // column holding +e_i, for dual recovery
  bool need_phase1 = false;
  for (int i = 0; i < m; ++i) {
    if (rel[i] == Relation::le) {
      int c = add_column(kSlack, i, Rat(1));
      t.basis[i] = c;
      unit_col[i] = c;
    } else if (rel[i] == Relation::ge) {
      add_column(kSlack, i, Rat(-1));
    }
  }
  for (int i = 0; i < m; ++i) {
    if (rel[i] != Relation::le) {
      int c = add_column(kArtificial, i, Rat(1));
      t.basis[i] = c;
      unit_col[i] = c;
      need_phase1 = true;
    }
  }
  t.num_cols = static_cast<int>(t.kind.size());

  std::vector<bool> banned(t.num_cols, false);

  SimplexResult result;

  if (need_phase1) {
    // Maximize -(sum of artificials); start value and reduced costs follow
    // from the artificial basis.
    t.reduced.assign(t.num_cols, Rat(0));
    t.value = 0;
    for (int i = 0; i < m; ++i) {
      if (t.kind[t.basis[i]] != kArtificial) continue;
      for (int j = 0; j < t.num_cols; ++j)
        if (t.kind[j] != kArtificial) t.reduced[j] += t.a[i][j];
      t.value -= t.b[i];
    }
    int unbounded_col = -1;
    while (t.bland_step(banned, &unbounded_col)) {
      if (unbounded_col >= 0)
        throw std::logic_error("simplex: phase 1 unbounded");
    }
    if (t.value < 0) {
      result.status = LPStatus::infeasible;
      // Phase-1 duals are a Farkas certificate of the original rows.
      result.infeasibility.assign(m, Rat(0));
      for (int i = 0; i < m; ++i) {
        Rat y = 0;
        for (int r = 0; r < m; ++r)
          if (t.kind[t.basis[r]] == kArtificial) y -= t.a[r][unit_col[i]];
        result.infeasibility[t.row_origin[i]] = Rat(t.row_flip[i]) * y;
      }
      return result;
    }
    // Drive basic artificials out; a row with no eligible pivot is a
    // redundant constraint and its artificial stays basic at zero.
    for (int i = 0; i < m; ++i) {
      if (t.kind[t.basis[i]] != kArtificial) continue;
      int pcol = -1;
      for (int j = 0; j < t.num_cols; ++j) {
        if (t.kind[j] == kArtificial) continue;
        if (t.a[i][j] != 0) {
          pcol = j;
          break;
        }
      }
      if (pcol >= 0) t.pivot(i, pcol);
    }
    for (int j = 0; j < t.num_cols; ++j)
      if (t.kind[j] == kArtificial) banned[j] = true;
  }

  // Phase 2: rebuild the reduced-cost row for the real objective.
  t.phase_two = true;
  auto structural_cost = [&](int col) -> Rat {
    return (t.kind[col] == kStructural) ? lp.objective[col] : Rat(0);
  };
  t.reduced.assign(t.num_cols, Rat(0));
  for (int j = 0; j < t.num_cols; ++j) t.reduced[j] = structural_cost(j);
  t.value = 0;
  for (int i = 0; i < m; ++i) {
    Rat cb = structural_cost(t.basis[i]);
    if (cb == 0) continue;
    for (int j = 0; j < t.num_cols; ++j)
      if (t.a[i][j] != 0) t.reduced[j] -= cb * t.a[i][j];
    t.value += cb * t.b[i];
  }
  for (int i = 0; i < m; ++i) t.reduced[t.basis[i]] = 0;

  int unbounded_col = -1;
  while (t.bland_step(banned, &unbounded_col)) {
    if (unbounded_col >= 0) {
      result.status = LPStatus::unbounded;
      result.ray.assign(n, Rat(0));
      if (unbounded_col < n) result.ray[unbounded_col] = 1;
      for (int i = 0; i < m; ++i)
        if (t.basis[i] < n) result.ray[t.basis[i]] = -t.a[i][unbounded_col];
      result.x.assign(n, Rat(0));
      for (int i = 0; i < m; ++i)
        if (t.basis[i] < n) result.x[t.basis[i]] = t.b[i];
      return result;
    }
  }

  result.status = LPStatus::optimal;
  result.x.assign(n, Rat(0));
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) result.x[t.basis[i]] = t.b[i];
  result.objective_value = t.value;
  result.duals.assign(m, Rat(0));
  for (int i = 0; i < m; ++i) {
    // y_i = c_B . (B^{-1} e_i); the unit column tracks B^{-1} e_i.
    Rat y = 0;
    for (int r = 0; r < m; ++r) {
      Rat cb = structural_cost(t.basis[r]);
      if (cb != 0) y += cb * t.a[r][unit_col[i]];
    }
    if (t.kind[unit_col[i]] == kSlack) {
      // le rows carry the slack itself, already +e_i.
    }
    result.duals[t.row_origin[i]] = Rat(t.row_flip[i]) * y;
  }
  return result;
}

LeximinResult leximin_solve(const LinearProgram& base,
                            const std::vector<LinearExpr>& objectives) {
  const int k = static_cast<int>(objectives.size());
  std::vector<Rat> levels(k, Rat(0));
  std::vector<bool> fixed(k, false);

  auto with_fixed = [&](const LinearProgram& src) {
    LinearProgram lp = src;
    for (int f = 0; f < k; ++f)
      if (fixed[f]) lp.add_constraint(objectives[f].terms, Relation::eq, levels[f]);
    return lp;
  };

  int remaining = k;
  while (remaining > 0) {
    LinearProgram lp = with_fixed(base);
    const int zp = lp.add_var();
    const int zn = lp.add_var();
    lp.set_objective({{zp, Rat(1)}, {zn, Rat(-1)}});
    for (int f = 0; f < k; ++f) {
      if (fixed[f]) continue;
      auto terms = objectives[f].terms;
      terms.emplace_back(zp, Rat(-1));
      terms.emplace_back(zn, Rat(1));
      lp.add_constraint(terms, Relation::ge, Rat(0));
    }
    SimplexResult res = simplex_solve(lp);
    if (res.status == LPStatus::infeasible)
      throw std::runtime_error("leximin_solve: infeasible program");
    if (res.status == LPStatus::unbounded)
      throw std::runtime_error("leximin_solve: unbounded objective");
    const Rat level = res.objective_value;

    int saturated = 0;
    for (int f = 0; f < k; ++f) {
      if (fixed[f]) continue;
      // A point with a strictly higher value already witnesses freedom.
      if (objectives[f].eval(res.x) > level) continue;
      LinearProgram aux = with_fixed(base);
      for (int g = 0; g < k; ++g)
        if (!fixed[g]) aux.add_constraint(objectives[g].terms, Relation::ge, level);
      aux.set_objective(objectives[f].terms);
      SimplexResult ar = simplex_solve(aux);
      if (ar.status == LPStatus::unbounded) continue;
      if (ar.status != LPStatus::optimal)
        throw std::logic_error("leximin_solve: auxiliary program infeasible");
      if (ar.objective_value == level) {
        fixed[f] = true;
        levels[f] = level;
        ++saturated;
      }
    }
    if (saturated == 0)
      throw std::logic_error("leximin_solve: no objective saturated");
    remaining -= saturated;
  }

  LinearProgram final_lp = with_fixed(base);
  SimplexResult res = simplex_solve(final_lp);
  if (res.status != LPStatus::optimal)
    throw std::logic_error("leximin_solve: final program not solvable");
  res.x.resize(base.num_vars);
  return LeximinResult{std::move(levels), std::move(res.x)};
}

}  // namespace edr
