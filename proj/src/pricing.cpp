#include "illiq/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "illiq/arbitrage.hpp"
#include "illiq/lp.hpp"

namespace illiq {

namespace {

// Column offsets for the hedging LPs: one portfolio block per non-leaf node
// (leaves are forced to 0) and one aux block per node.
struct HedgeVars {
  std::vector<int> x_off;    // -1 at leaves
  std::vector<int> aux_off;  // -1 when aux_count = 0
  int total = 0;
};

HedgeVars hedge_vars(const MarketModel& model) {
  const auto& tree = model.tree;
  HedgeVars v;
  v.x_off.assign(tree.node_count(), -1);
  v.aux_off.assign(tree.node_count(), -1);
  int off = 0;
  for (int n = 0; n < tree.node_count(); ++n) {
    if (!tree.is_leaf(n)) {
      v.x_off[n] = off;
      off += model.d;
    }
    if (model.set(n).aux_count > 0) {
      v.aux_off[n] = off;
      off += model.set(n).aux_count;
    }
  }
  v.total = off;
  return v;
}

// Adds the self-financing rows A(x_n - x_parent + c_n, aux_n) <= b for every
// node; extra_root_cols lets the caller splice in e.g. a premium variable.
void add_hedge_rows(LinearProgram& lp, const MarketModel& model,
                    const HedgeVars& v, const AdaptedVectorProcess& c,
                    const std::vector<std::pair<int, Eigen::VectorXd>>&
                        extra_root_cols = {}) {
  const auto& tree = model.tree;
  const int d = model.d;
  for (int n = 0; n < tree.node_count(); ++n) {
    const auto& s = model.set(n);
    const int parent = tree.node(n).parent;
    for (int r = 0; r < s.A.rows(); ++r) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < d; ++j) {
        const double a = s.A(r, j);
        if (a == 0.0) continue;
        if (v.x_off[n] >= 0) terms.push_back({v.x_off[n] + j, a});
        if (parent >= 0 && v.x_off[parent] >= 0)
          terms.push_back({v.x_off[parent] + j, -a});
      }
      for (int j = 0; j < s.aux_count; ++j) {
        const double a = s.A(r, d + j);
        if (a != 0.0) terms.push_back({v.aux_off[n] + j, a});
      }
      if (n == tree.root()) {
        for (const auto& [col, dir] : extra_root_cols) {
          const double a = s.A.row(r).head(d).dot(dir);
          if (a != 0.0) terms.push_back({col, a});
        }
      }
      lp.add_row_sparse(terms, Rel::LE, s.b[r] - s.A.row(r).head(d).dot(c.at(n)));
    }
  }
}

AdaptedVectorProcess extract_hedge(const MarketModel& model,
                                   const HedgeVars& v,
                                   const std::vector<double>& x) {
  AdaptedVectorProcess h = AdaptedVectorProcess::zero(model.tree);
  for (int n = 0; n < model.tree.node_count(); ++n)
    if (v.x_off[n] >= 0)
      for (int j = 0; j < model.d; ++j) h.at(n)[j] = x[v.x_off[n] + j];
  return h;
}

HPolyhedron node_polar(const SolvencySet& s) {
  if (!s.cone_gens)
    throw MarketError(
        "conical generator form unavailable for this solvency set");
  return polar_cone(*s.cone_gens);
}

}  // namespace

HedgeResult claim_in_A(const MarketModel& model, const AdaptedVectorProcess& c) {
  HedgeVars v = hedge_vars(model);
  LinearProgram lp;
  for (int j = 0; j < v.total; ++j) lp.add_var(-kInf, kInf, 0.0);
  add_hedge_rows(lp, model, v, c);
  LpSolution s = solve_lp(lp);
  HedgeResult out;
  out.member = s.optimal();
  if (out.member) out.hedge = extract_hedge(model, v, s.x);
  return out;
}

bool claim_in_AT(const MarketModel& model,
                 const std::map<int, Eigen::VectorXd>& leaf_claim) {
  AdaptedVectorProcess c = AdaptedVectorProcess::zero(model.tree);
  for (const auto& [n, val] : leaf_claim) {
    if (!model.tree.is_leaf(n))
      throw MarketError("claim_in_AT value at a non-leaf node");
    c.at(n) = val;
  }
  return claim_in_A(model, c).member;
}

SuperhedgeResult superhedge_premium(const MarketModel& model,
                                    const AdaptedVectorProcess& c,
                                    int numeraire,
                                    const SuperhedgeOptions& opts) {
  if (numeraire < 0 || numeraire >= model.d)
    throw MarketError("numeraire index out of range");
  SuperhedgeResult out;
  if (opts.diagnose_arbitrage &&
      !check_robust_no_scalable_arbitrage(model).holds)
    out.warnings.push_back(
        "model fails robust no-scalable-arbitrage; premium may be unbounded");

  HedgeVars v = hedge_vars(model);
  LinearProgram lp;
  for (int j = 0; j < v.total; ++j) lp.add_var(-kInf, kInf, 0.0);
  const int alpha_col = lp.add_var(-kInf, kInf, -1.0);  // minimize alpha
  // Premium enters as c_0 - alpha * e_num at the root.
  Eigen::VectorXd dir = -Eigen::VectorXd::Unit(model.d, numeraire);
  add_hedge_rows(lp, model, v, c, {{alpha_col, dir}});
  LpSolution s = solve_lp(lp);
  switch (s.status) {
    case LpStatus::Optimal: {
      out.status = SuperhedgeResult::Status::Optimal;
      out.alpha = s.x[alpha_col];
      out.hedge = extract_hedge(model, v, s.x);
      out.premium = AdaptedVectorProcess::zero(model.tree);
      out.premium.at(model.tree.root())[numeraire] = out.alpha;
      break;
    }
    case LpStatus::Unbounded:
      out.status = SuperhedgeResult::Status::ScalableArbitrage;
      break;
    case LpStatus::Infeasible:
      out.status = SuperhedgeResult::Status::Infeasible;
      break;
    default:
      out.status = SuperhedgeResult::Status::NumericalFailure;
  }
  return out;
}

DualBoundResult dual_bound(const MarketModel& model,
                           const AdaptedVectorProcess& c,
                           const AdaptedVectorProcess& p,
                           const DualBoundOptions& opts) {
  const auto& tree = model.tree;
  const int d = model.d;
  // Conical models keep the root normalization sum_i y_0^i <= 1 under both
  // sigma encodings; the fast path replaces the epigraph variables with the
  // polar constraints (sigma = 0 there).
  const bool conical_norm = model.conical;
  const bool fast_path = model.conical && !opts.force_epigraph;
  double box = opts.box;

  for (int attempt = 0;; ++attempt) {
    LinearProgram lp;
    std::vector<int> y_off(tree.node_count());
    std::vector<int> lam_off(tree.node_count());
    for (int n = 0; n < tree.node_count(); ++n) {
      y_off[n] = lp.num_vars();
      const double prob = tree.node(n).prob;
      Eigen::VectorXd w = prob * (c.at(n) - p.at(n));
      for (int j = 0; j < d; ++j)
        lp.add_var(0.0, conical_norm ? kInf : box, w[j]);
    }
    for (int n = 0; n < tree.node_count(); ++n) {
      const auto& s = model.set(n);
      if (fast_path) {
        HPolyhedron polar = node_polar(s);
        for (int r = 0; r < polar.rows(); ++r) {
          std::vector<std::pair<int, double>> terms;
          for (int j = 0; j < d; ++j)
            if (polar.A(r, j) != 0.0)
              terms.push_back({y_off[n] + j, polar.A(r, j)});
          lp.add_row_sparse(terms, Rel::LE, 0.0);
        }
        continue;
      }
      lam_off[n] = lp.num_vars();
      const double prob = tree.node(n).prob;
      // sigma_C(y) enters as min b.lambda with A_x^T lambda = y,
      // A_aux^T lambda = 0; maximization drives b.lambda to the minimum.
      for (int r = 0; r < s.A.rows(); ++r) lp.add_var(0.0, kInf, -prob * s.b[r]);
      for (int j = 0; j < d; ++j) {
        std::vector<std::pair<int, double>> terms;
        for (int r = 0; r < s.A.rows(); ++r)
          if (s.A(r, j) != 0.0) terms.push_back({lam_off[n] + r, s.A(r, j)});
        terms.push_back({y_off[n] + j, -1.0});
        lp.add_row_sparse(terms, Rel::EQ, 0.0);
      }
      for (int j = 0; j < s.aux_count; ++j) {
        std::vector<std::pair<int, double>> terms;
        for (int r = 0; r < s.A.rows(); ++r)
          if (s.A(r, d + j) != 0.0)
            terms.push_back({lam_off[n] + r, s.A(r, d + j)});
        if (!terms.empty()) lp.add_row_sparse(terms, Rel::EQ, 0.0);
      }
    }
    for (int n = 0; n < tree.node_count(); ++n) {
      if (tree.is_leaf(n)) continue;
      for (int j = 0; j < d; ++j) {
        std::vector<std::pair<int, double>> terms{{y_off[n] + j, 1.0}};
        for (int ch : tree.node(n).children)
          terms.push_back({y_off[ch] + j, -tree.node(ch).cond_prob});
        lp.add_row_sparse(terms, Rel::EQ, 0.0);
      }
    }
    if (conical_norm) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < d; ++j) terms.push_back({y_off[tree.root()] + j, 1.0});
      lp.add_row_sparse(terms, Rel::LE, 1.0);
    }

    LpSolution s = solve_lp(lp);
    if (!s.optimal()) throw MarketError("dual_bound LP failed: " +
                                        std::string(to_string(s.status)));
    bool touches = false;
    if (!conical_norm) {
      for (int n = 0; n < tree.node_count() && !touches; ++n)
        for (int j = 0; j < d; ++j)
          if (s.x[y_off[n] + j] > box * (1.0 - 1e-6)) { touches = true; break; }
    }
    if (touches && attempt < opts.max_escalations) {
      box *= 10.0;
      continue;
    }
    DualBoundResult out;
    out.sup_value = s.objective;
    out.argmax_y = AdaptedVectorProcess::zero(tree);
    for (int n = 0; n < tree.node_count(); ++n)
      for (int j = 0; j < d; ++j) out.argmax_y.at(n)[j] = s.x[y_off[n] + j];
    return out;
  }
}

bool superhedge_check(const MarketModel& model, const AdaptedVectorProcess& c,
                      const AdaptedVectorProcess& p, std::string* diagnostic) {
  AdaptedVectorProcess diff = AdaptedVectorProcess::zero(model.tree);
  for (int n = 0; n < model.tree.node_count(); ++n)
    diff.at(n) = c.at(n) - p.at(n);
  bool member = claim_in_A(model, diff).member;
  if (check_robust_no_scalable_arbitrage(model).holds) {
    double sup = dual_bound(model, c, p).sup_value;
    bool dual_ok = sup <= 1e-6;
    if (dual_ok != member && diagnostic)
      *diagnostic = "primal membership (" + std::to_string(member) +
                    ") disagrees with dual bound " + std::to_string(sup);
  }
  return member;
}

std::optional<PriceSystem> find_consistent_price_system(
    const MarketModel& model, bool strict, double delta_min) {
  if (!model.conical)
    throw MarketError("consistent price systems require a conical model");
  const auto& tree = model.tree;
  const int d = model.d;

  LinearProgram lp;
  std::vector<int> y_off(tree.node_count());
  for (int n = 0; n < tree.node_count(); ++n) {
    y_off[n] = lp.num_vars();
    for (int j = 0; j < d; ++j) lp.add_var(0.0, kInf, 0.0);
  }
  int delta_col = -1;
  if (strict) delta_col = lp.add_var(0.0, 1.0, 1.0);  // maximize delta

  for (int n = 0; n < tree.node_count(); ++n) {
    HPolyhedron polar = node_polar(model.set(n));
    std::vector<bool> implicit =
        strict ? implicit_rows(polar) : std::vector<bool>(polar.rows(), false);
    for (int r = 0; r < polar.rows(); ++r) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < d; ++j)
        if (polar.A(r, j) != 0.0) terms.push_back({y_off[n] + j, polar.A(r, j)});
      if (strict && !implicit[r]) {
        terms.push_back({delta_col, 1.0});
        lp.add_row_sparse(terms, Rel::LE, 0.0);
      } else {
        lp.add_row_sparse(terms, strict ? Rel::EQ : Rel::LE, 0.0);
      }
    }
    if (strict)
      for (int j = 0; j < d; ++j)
        lp.add_row_sparse({{y_off[n] + j, 1.0}, {delta_col, -1.0}}, Rel::GE,
                          0.0);
  }
  for (int n = 0; n < tree.node_count(); ++n) {
    if (tree.is_leaf(n)) continue;
    for (int j = 0; j < d; ++j) {
      std::vector<std::pair<int, double>> terms{{y_off[n] + j, 1.0}};
      for (int ch : tree.node(n).children)
        terms.push_back({y_off[ch] + j, -tree.node(ch).cond_prob});
      lp.add_row_sparse(terms, Rel::EQ, 0.0);
    }
  }
  {
    std::vector<std::pair<int, double>> terms;
    for (int j = 0; j < d; ++j) terms.push_back({y_off[tree.root()] + j, 1.0});
    lp.add_row_sparse(terms, Rel::EQ, 1.0);
  }

  LpSolution s = solve_lp(lp);
  if (!s.optimal()) return std::nullopt;
  if (strict && s.x[delta_col] < delta_min) return std::nullopt;
  PriceSystem ps;
  ps.strict = strict;
  ps.y = AdaptedVectorProcess::zero(tree);
  for (int n = 0; n < tree.node_count(); ++n)
    for (int j = 0; j < d; ++j) ps.y.at(n)[j] = s.x[y_off[n] + j];
  return ps;
}

bool verify_price_system(const MarketModel& model, const PriceSystem& ps,
                         double slack, double tol) {
  const auto& tree = model.tree;
  if (!is_martingale(tree, ps.y, tol)) return false;
  double root_sum = ps.y.at(tree.root()).sum();
  if (!(root_sum > tol)) return false;
  for (int n = 0; n < tree.node_count(); ++n) {
    const Eigen::VectorXd& y = ps.y.at(n);
    if (y.minCoeff() < -tol) return false;
    HPolyhedron polar = node_polar(model.set(n));
    if (ps.strict) {
      if (y.minCoeff() < slack) return false;
      if (!relative_interior_membership(polar, y, slack)) return false;
    } else {
      if (!polar.contains(y, tol)) return false;
    }
  }
  return true;
}

}  // namespace illiq
