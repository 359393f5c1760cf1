#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace illiq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Rel { LE, EQ, GE };

// Dense LP in the form: maximize c.x subject to rows (a.x rel rhs) and
// per-variable bounds (+-inf allowed).
struct LinearProgram {
  struct Row {
    std::vector<double> a;
    Rel rel = Rel::LE;
    double rhs = 0.0;
  };

  std::vector<double> objective;
  std::vector<Row> rows;
  std::vector<double> lower;  // default 0
  std::vector<double> upper;  // default +inf

  int num_vars() const { return static_cast<int>(objective.size()); }

  // Adds a variable with the given bounds and objective coefficient,
  // returns its column index.
  int add_var(double lo = 0.0, double hi = kInf, double obj = 0.0);
  void add_row(std::vector<double> a, Rel rel, double rhs);
  // Sparse row: pairs of (column, coefficient).
  void add_row_sparse(const std::vector<std::pair<int, double>>& terms, Rel rel,
                      double rhs);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  std::vector<double> x;
  std::vector<double> duals;  // one per input row, valid when Optimal
  double objective = 0.0;
  int pivots = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

LpSolution solve_lp(const LinearProgram& lp);

const char* to_string(LpStatus s);

// Cumulative counters across all solves in this process, for run reports.
struct LpStats {
  static std::atomic<std::int64_t> solves;
  static std::atomic<std::int64_t> pivots;
  static void reset();
};

}  // namespace illiq
