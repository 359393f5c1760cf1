#include "illiq/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace illiq {

std::atomic<std::int64_t> LpStats::solves{0};
std::atomic<std::int64_t> LpStats::pivots{0};

void LpStats::reset() {
  solves = 0;
  pivots = 0;
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

int LinearProgram::add_var(double lo, double hi, double obj) {
  objective.push_back(obj);
  lower.push_back(lo);
  upper.push_back(hi);
  for (auto& r : rows) r.a.push_back(0.0);
  return num_vars() - 1;
}

void LinearProgram::add_row(std::vector<double> a, Rel rel, double rhs) {
  if (static_cast<int>(a.size()) != num_vars())
    throw std::invalid_argument("lp row width mismatch");
  rows.push_back({std::move(a), rel, rhs});
}

void LinearProgram::add_row_sparse(
    const std::vector<std::pair<int, double>>& terms, Rel rel, double rhs) {
  std::vector<double> a(num_vars(), 0.0);
  for (auto [j, v] : terms) a.at(j) += v;
  rows.push_back({std::move(a), rel, rhs});
}

namespace {

constexpr double kPivTol = 1e-9;   // pivoting / feasibility tolerance
constexpr double kFeasTol = 1e-8;  // reported feasibility tolerance
constexpr double kGapTol = 1e-7;   // strong-duality self-check

// Variable substitution bringing every column to x' >= 0.
enum class VarMode { ShiftLo, NegShiftUp, Split };
struct VarMap {
  VarMode mode;
  double offset = 0.0;  // lo or up
  int col = -1;         // first transformed column
  int col_neg = -1;     // second column for Split
};

struct Tableau {
  int m = 0, ncols = 0;
  std::vector<double> t;  // m x (ncols+1), row-major; last col = rhs
  std::vector<int> basis;

  double& at(int i, int j) { return t[static_cast<size_t>(i) * (ncols + 1) + j]; }
  double* row(int i) { return &t[static_cast<size_t>(i) * (ncols + 1)]; }
  double& rhs(int i) { return at(i, ncols); }
};

void pivot(Tableau& tb, std::vector<double>& cost1, std::vector<double>& cost2,
           int prow, int pcol) {
  const int w = tb.ncols + 1;
  double* pr = tb.row(prow);
  const double inv = 1.0 / pr[pcol];
  for (int j = 0; j < w; ++j) pr[j] *= inv;
  pr[pcol] = 1.0;
  for (int i = 0; i < tb.m; ++i) {
    if (i == prow) continue;
    double f = tb.at(i, pcol);
    if (f == 0.0) continue;
    double* ri = tb.row(i);
    for (int j = 0; j < w; ++j) ri[j] -= f * pr[j];
    ri[pcol] = 0.0;
  }
  for (auto* c : {&cost1, &cost2}) {
    if (c->empty()) continue;
    double f = (*c)[pcol];
    if (f == 0.0) continue;
    for (int j = 0; j < w; ++j) (*c)[j] -= f * pr[j];
    (*c)[pcol] = 0.0;
  }
  tb.basis[prow] = pcol;
}

// Returns {row, col} of the chosen pivot, col = -1 when optimal,
// row = -1 when the entering column proves unboundedness.
std::pair<int, int> choose_pivot(Tableau& tb, const std::vector<double>& cost,
                                 const std::vector<char>& allowed, bool bland) {
  int pcol = -1;
  if (bland) {
    for (int j = 0; j < tb.ncols; ++j)
      if (allowed[j] && cost[j] > kPivTol) { pcol = j; break; }
  } else {
    double best = kPivTol;
    for (int j = 0; j < tb.ncols; ++j)
      if (allowed[j] && cost[j] > best) { best = cost[j]; pcol = j; }
  }
  if (pcol < 0) return {-1, -1};
  int prow = -1;
  double best_ratio = kInf;
  for (int i = 0; i < tb.m; ++i) {
    double a = tb.at(i, pcol);
    if (a > kPivTol) {
      double ratio = tb.rhs(i) / a;
      bool better;
      if (ratio < best_ratio - 1e-12) {
        better = true;
      } else if (ratio < best_ratio + 1e-12 && prow >= 0) {
        // Within the tie band: Bland breaks ties by index (anti-cycling),
        // otherwise prefer the numerically strongest pivot element.
        better = bland ? tb.basis[i] < tb.basis[prow]
                       : a > tb.at(prow, pcol);
      } else {
        better = false;
      }
      if (better) {
        best_ratio = ratio;
        prow = i;
      }
    }
  }
  return {prow, pcol};
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  LpStats::solves++;
  LpSolution sol;
  const int n = lp.num_vars();
  const int m = static_cast<int>(lp.rows.size());
  if (n < 1) throw std::invalid_argument("lp has no variables");
  for (const auto& r : lp.rows)
    if (static_cast<int>(r.a.size()) != n)
      throw std::invalid_argument("lp row width mismatch");

  // Variable substitutions to x' >= 0; finite upper bounds on shifted
  // variables become extra rows.
  std::vector<VarMap> vm(n);
  int cols = 0;
  for (int j = 0; j < n; ++j) {
    double lo = j < static_cast<int>(lp.lower.size()) ? lp.lower[j] : 0.0;
    double up = j < static_cast<int>(lp.upper.size()) ? lp.upper[j] : kInf;
    if (!std::isfinite(lo) && !std::isfinite(up)) {
      vm[j] = {VarMode::Split, 0.0, cols, cols + 1};
      cols += 2;
    } else if (std::isfinite(lo)) {
      vm[j] = {VarMode::ShiftLo, lo, cols, -1};
      cols += 1;
    } else {
      vm[j] = {VarMode::NegShiftUp, up, cols, -1};
      cols += 1;
    }
  }

  // Transformed rows: the m user rows, then upper-bound rows.
  struct TRow {
    std::vector<double> a;
    Rel rel;
    double rhs;
  };
  std::vector<TRow> trows;
  trows.reserve(m + n);
  auto transform_row = [&](const std::vector<double>& a, Rel rel, double rhs) {
    TRow tr{std::vector<double>(cols, 0.0), rel, rhs};
    for (int j = 0; j < n; ++j) {
      double aj = a[j];
      if (aj == 0.0) continue;
      switch (vm[j].mode) {
        case VarMode::ShiftLo:
          tr.a[vm[j].col] += aj;
          tr.rhs -= aj * vm[j].offset;
          break;
        case VarMode::NegShiftUp:
          tr.a[vm[j].col] -= aj;
          tr.rhs -= aj * vm[j].offset;
          break;
        case VarMode::Split:
          tr.a[vm[j].col] += aj;
          tr.a[vm[j].col_neg] -= aj;
          break;
      }
    }
    trows.push_back(std::move(tr));
  };
  for (const auto& r : lp.rows) transform_row(r.a, r.rel, r.rhs);
  for (int j = 0; j < n; ++j) {
    double lo = j < static_cast<int>(lp.lower.size()) ? lp.lower[j] : 0.0;
    double up = j < static_cast<int>(lp.upper.size()) ? lp.upper[j] : kInf;
    if (std::isfinite(lo) && std::isfinite(up)) {
      if (up < lo - kPivTol) {
        sol.status = LpStatus::Infeasible;
        return sol;
      }
      TRow tr{std::vector<double>(cols, 0.0), Rel::LE, up - lo};
      tr.a[vm[j].col] = 1.0;
      trows.push_back(std::move(tr));
    }
  }
  const int mt = static_cast<int>(trows.size());

  // Transformed objective (maximize) with constant offset from shifts.
  std::vector<double> cobj(cols, 0.0);
  double obj_offset = 0.0;
  for (int j = 0; j < n; ++j) {
    double cj = lp.objective[j];
    switch (vm[j].mode) {
      case VarMode::ShiftLo:
        cobj[vm[j].col] += cj;
        obj_offset += cj * vm[j].offset;
        break;
      case VarMode::NegShiftUp:
        cobj[vm[j].col] -= cj;
        obj_offset += cj * vm[j].offset;
        break;
      case VarMode::Split:
        cobj[vm[j].col] += cj;
        cobj[vm[j].col_neg] -= cj;
        break;
    }
  }

  // Equality form with slacks, nonnegative rhs, artificials where needed.
  int nslack = 0, nart = 0;
  for (const auto& r : trows) nslack += (r.rel != Rel::EQ);
  const int ncols_max = cols + nslack + mt;
  Tableau tb;
  tb.m = mt;
  tb.ncols = ncols_max;  // trimmed below via 'allowed'
  tb.t.assign(static_cast<size_t>(mt) * (ncols_max + 1), 0.0);
  tb.basis.assign(mt, -1);
  std::vector<int> slack_col(mt, -1), art_col(mt, -1);
  std::vector<int> row_sign(mt, 1);
  {
    int scol = cols;
    for (int i = 0; i < mt; ++i) {
      auto& r = trows[i];
      double sign = 1.0;
      if (r.rhs < 0.0) {
        sign = -1.0;
        row_sign[i] = -1;
      }
      for (int j = 0; j < cols; ++j) tb.at(i, j) = sign * r.a[j];
      tb.rhs(i) = sign * r.rhs;
      if (r.rel != Rel::EQ) {
        double sc = (r.rel == Rel::LE ? 1.0 : -1.0) * sign;
        slack_col[i] = scol;
        tb.at(i, scol) = sc;
        if (sc > 0) tb.basis[i] = scol;
        ++scol;
      }
      if (tb.basis[i] < 0) {
        art_col[i] = cols + nslack + nart;
        tb.at(i, art_col[i]) = 1.0;
        tb.basis[i] = art_col[i];
        ++nart;
      }
    }
  }
  const int ncols = cols + nslack + nart;
  tb.ncols = ncols_max;  // keep stride; columns >= ncols stay zero/banned

  // Pristine equality-form data, kept for periodic refactorization: dense
  // pivoting drifts on long degenerate runs, so the tableau is rebuilt from
  // the current basis every so often and before accepting optimality.
  Eigen::MatrixXd Afull(mt, ncols);
  Eigen::VectorXd bfull(mt);
  for (int i = 0; i < mt; ++i) {
    for (int j = 0; j < ncols; ++j) Afull(i, j) = tb.at(i, j);
    bfull[i] = tb.rhs(i);
  }

  std::vector<char> allowed(ncols_max, 0);
  for (int j = 0; j < ncols; ++j) allowed[j] = 1;

  // Phase-1 cost row: maximize -sum(artificials), expressed as reduced costs.
  std::vector<double> cost1(ncols_max + 1, 0.0), cost2(ncols_max + 1, 0.0);
  bool need_phase1 = nart > 0;
  if (need_phase1) {
    for (int i = 0; i < mt; ++i) {
      if (art_col[i] < 0) continue;
      for (int j = 0; j <= ncols_max; ++j) cost1[j] += tb.at(i, j);
      cost1[art_col[i]] = 0.0;
    }
  }
  for (int j = 0; j < cols; ++j) cost2[j] = cobj[j];

  const int max_iters = 2000 + 200 * (mt + ncols);
  const int bland_after = 5 * (mt + ncols);
  constexpr int kRefreshEvery = 100;
  int degenerate_streak = 0;
  int iters = 0;
  int since_refresh = 1;  // force a verifying refresh before the first accept
  bool bland = false;

  // Rebuild tableau and reduced-cost rows from the current basis.
  auto refresh = [&](bool with_phase1) -> bool {
    Eigen::MatrixXd B(mt, mt);
    for (int i = 0; i < mt; ++i) B.col(i) = Afull.col(tb.basis[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    Eigen::MatrixXd T = lu.solve(Afull);
    Eigen::VectorXd r = lu.solve(bfull);
    // Accept the factorization by residual, not by a rank estimate; the
    // basis can be poorly scaled yet still usable.
    double scale = std::max(1.0, bfull.lpNorm<Eigen::Infinity>());
    if (!r.allFinite() || !T.allFinite() ||
        (B * r - bfull).lpNorm<Eigen::Infinity>() > 1e-6 * scale) {
      return false;
    }
    for (int i = 0; i < mt; ++i) {
      for (int j = 0; j < ncols; ++j) tb.at(i, j) = T(i, j);
      for (int j = ncols; j < ncols_max; ++j) tb.at(i, j) = 0.0;
      tb.rhs(i) = std::max(0.0, r[i]);
    }
    auto rebuild_cost = [&](std::vector<double>& cost, bool art_objective) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(ncols);
      if (art_objective) {
        for (int i = 0; i < mt; ++i)
          if (art_col[i] >= 0) c[art_col[i]] = -1.0;
      } else {
        for (int j = 0; j < cols; ++j) c[j] = cobj[j];
      }
      Eigen::VectorXd cb(mt);
      for (int i = 0; i < mt; ++i) cb[i] = c[tb.basis[i]];
      Eigen::VectorXd red = c - T.transpose() * cb;
      for (int j = 0; j < ncols; ++j) cost[j] = red[j];
      for (int j = ncols; j <= ncols_max; ++j) cost[j] = 0.0;
      for (int i = 0; i < mt; ++i) cost[tb.basis[i]] = 0.0;
    };
    if (with_phase1) rebuild_cost(cost1, true);
    rebuild_cost(cost2, false);
    return true;
  };

  auto run_phase = [&](std::vector<double>& cost, bool phase1) -> LpStatus {
    for (;;) {
      if (iters++ > max_iters) return LpStatus::NumericalFailure;
      if (since_refresh >= kRefreshEvery) {
        if (!refresh(phase1)) return LpStatus::NumericalFailure;
        since_refresh = 0;
      }
      auto [prow, pcol] = choose_pivot(tb, cost, allowed, bland);
      if (pcol < 0 || prow < 0) {
        // Optimality and unboundedness are only accepted when seen on a
        // freshly refactorized tableau.
        if (since_refresh > 0) {
          if (!refresh(phase1)) return LpStatus::NumericalFailure;
          since_refresh = 0;
          continue;
        }
        if (pcol < 0) return LpStatus::Optimal;
        return phase1 ? LpStatus::NumericalFailure : LpStatus::Unbounded;
      }
      if (tb.rhs(prow) < kPivTol) {
        if (++degenerate_streak > bland_after) bland = true;
      } else {
        degenerate_streak = 0;
      }
      pivot(tb, cost1, cost2, prow, pcol);
      ++sol.pivots;
      ++since_refresh;
    }
  };

  if (need_phase1) {
    LpStatus st = run_phase(cost1, true);
    if (st != LpStatus::Optimal) {
      sol.status = st;
      return sol;
    }
    // cost1[ncols_max] tracks -(phase-1 objective shift); basic artificials
    // at positive level mean infeasible.
    double infeas = 0.0;
    for (int i = 0; i < mt; ++i)
      if (tb.basis[i] >= cols + nslack) infeas += tb.rhs(i);
    if (infeas > 1e-7) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive remaining zero-level artificials out of the basis when possible.
    for (int i = 0; i < mt; ++i) {
      if (tb.basis[i] < cols + nslack) continue;
      int pc = -1;
      for (int j = 0; j < cols + nslack; ++j)
        if (allowed[j] && std::abs(tb.at(i, j)) > 1e-7) { pc = j; break; }
      if (pc >= 0) {
        pivot(tb, cost1, cost2, i, pc);
        ++sol.pivots;
      }
    }
    for (int j = cols + nslack; j < ncols; ++j) allowed[j] = 0;
    since_refresh = 1;  // basis may have changed since the last refresh
  }

  {
    LpStatus st = run_phase(cost2, false);
    if (st != LpStatus::Optimal) {
      sol.status = st;
      return sol;
    }
  }

  // Primal solution in transformed space.
  std::vector<double> xt(ncols, 0.0);
  for (int i = 0; i < mt; ++i)
    if (tb.basis[i] >= 0 && tb.basis[i] < ncols) xt[tb.basis[i]] = tb.rhs(i);
  sol.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    switch (vm[j].mode) {
      case VarMode::ShiftLo: sol.x[j] = vm[j].offset + xt[vm[j].col]; break;
      case VarMode::NegShiftUp: sol.x[j] = vm[j].offset - xt[vm[j].col]; break;
      case VarMode::Split: sol.x[j] = xt[vm[j].col] - xt[vm[j].col_neg]; break;
    }
  }
  double obj = obj_offset;
  for (int j = 0; j < cols; ++j) obj += cobj[j] * xt[j];
  sol.objective = obj;

  // Duals for every equality-form row come off the final cost row under the
  // row's slack/artificial column; map signs back to the user's rows.
  std::vector<double> ydual(mt, 0.0);
  for (int i = 0; i < mt; ++i) {
    double y;
    if (slack_col[i] >= 0) {
      double coef = (trows[i].rel == Rel::LE ? 1.0 : -1.0) * row_sign[i];
      y = -cost2[slack_col[i]] / coef;
    } else {
      y = -cost2[art_col[i]];
    }
    ydual[i] = y * row_sign[i];
  }

  // Self-checks: primal feasibility and strong duality over transformed rows.
  double max_resid = 0.0;
  for (int i = 0; i < mt; ++i) {
    double ax = 0.0;
    for (int j = 0; j < cols; ++j) ax += trows[i].a[j] * xt[j];
    double r = 0.0;
    if (trows[i].rel == Rel::LE) r = std::max(0.0, ax - trows[i].rhs);
    else if (trows[i].rel == Rel::GE) r = std::max(0.0, trows[i].rhs - ax);
    else r = std::abs(ax - trows[i].rhs);
    max_resid = std::max(max_resid, r);
  }
  double dual_obj = obj_offset;
  for (int i = 0; i < mt; ++i) dual_obj += ydual[i] * trows[i].rhs;
  double scale = std::max({1.0, std::abs(obj), std::abs(dual_obj)});
  if (max_resid > kFeasTol * std::max(1.0, scale) ||
      std::abs(obj - dual_obj) > kGapTol * scale) {
    sol.status = LpStatus::NumericalFailure;
    return sol;
  }

  sol.duals.assign(ydual.begin(), ydual.begin() + m);
  sol.status = LpStatus::Optimal;
  LpStats::pivots += sol.pivots;
  return sol;
}

}  // namespace illiq
