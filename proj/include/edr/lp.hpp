#ifndef EDR_LP_HPP
#define EDR_LP_HPP

#include <utility>
#include <vector>

#include "edr/rational.hpp"

namespace edr {

enum class Relation { le, eq, ge };

struct Constraint {
  std::vector<Rat> coeffs;  // dense, indexed by variable
  Relation rel = Relation::eq;
  Rat rhs;
};

// Maximization LP over nonnegative variables with exact rational data.
// Instances here are desk-scale (tens of variables), so everything is
// dense and exact.
struct LinearProgram {
  int num_vars = 0;
  std::vector<Constraint> rows;
  std::vector<Rat> objective;

  int add_var();
  void resize_vars(int count);
  void add_constraint(const std::vector<std::pair<int, Rat>>& terms, Relation rel, Rat rhs);
  void set_objective(const std::vector<std::pair<int, Rat>>& terms);
};

enum class LPStatus { optimal, infeasible, unbounded };

struct SimplexResult {
  LPStatus status = LPStatus::infeasible;
  std::vector<Rat> x;               // primal solution (optimal)
  Rat objective_value;              // (optimal)
  std::vector<Rat> duals;           // per row, equality-form duals (optimal)
  std::vector<Rat> ray;             // improving feasible direction (unbounded)
  std::vector<Rat> infeasibility;   // Farkas row multipliers (infeasible)
};

// Two-phase primal simplex on a dense rational tableau with Bland's
// anti-cycling rule. Exact throughout; never terminates on a cycle.
SimplexResult simplex_solve(const LinearProgram& lp);

// Sparse linear expression over LP variables, used as a leximin objective.
struct LinearExpr {
  std::vector<std::pair<int, Rat>> terms;

  Rat eval(const std::vector<Rat>& x) const;
};

struct LeximinResult {
  std::vector<Rat> levels;  // leximin-optimal value per objective, input order
  std::vector<Rat> x;       // a feasible point attaining all levels
};

// Lexicographic max-min over the given objectives subject to `base`.
// Each round maximizes the minimum of the still-free objectives, then
// saturates exactly those that an auxiliary LP cannot push above the
// round level, and recurses on the rest. Throws std::runtime_error if
// the base is infeasible or some objective is unbounded.
LeximinResult leximin_solve(const LinearProgram& base,
                            const std::vector<LinearExpr>& objectives);

}  // namespace edr

#endif
