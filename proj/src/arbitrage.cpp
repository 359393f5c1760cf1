#include "illiq/arbitrage.hpp"

#include <cmath>

#include "illiq/lp.hpp"

namespace illiq {

NaResult check_na(const MarketModel& model) {
  const auto& tree = model.tree;
  const int d = model.d;

  // Variables: one increment z_n in each node's lifted set; terminal wealth
  // on a leaf is the path sum of increments. The cap sum_i w^i <= 1 turns
  // "exists a nonzero nonnegative outcome" into a bounded LP.
  LinearProgram lp;
  std::vector<int> z_off(tree.node_count()), aux_off(tree.node_count(), -1);
  for (int n = 0; n < tree.node_count(); ++n) {
    z_off[n] = lp.num_vars();
    for (int j = 0; j < d; ++j) lp.add_var(-kInf, kInf, 0.0);
    if (model.set(n).aux_count > 0) {
      aux_off[n] = lp.num_vars();
      for (int j = 0; j < model.set(n).aux_count; ++j)
        lp.add_var(-kInf, kInf, 0.0);
    }
  }
  for (int n = 0; n < tree.node_count(); ++n) {
    const auto& s = model.set(n);
    for (int r = 0; r < s.A.rows(); ++r) {
      std::vector<std::pair<int, double>> terms;
      for (int j = 0; j < d; ++j)
        if (s.A(r, j) != 0.0) terms.push_back({z_off[n] + j, s.A(r, j)});
      for (int j = 0; j < s.aux_count; ++j)
        if (s.A(r, d + j) != 0.0)
          terms.push_back({aux_off[n] + j, s.A(r, d + j)});
      lp.add_row_sparse(terms, Rel::LE, s.b[r]);
    }
  }
  std::vector<std::pair<int, double>> cap;
  for (int leaf : tree.leaves()) {
    std::vector<int> path;
    for (int n = leaf; n >= 0; n = tree.node(n).parent) path.push_back(n);
    for (int j = 0; j < d; ++j) {
      std::vector<std::pair<int, double>> terms;
      for (int n : path) terms.push_back({z_off[n] + j, 1.0});
      lp.add_row_sparse(terms, Rel::GE, 0.0);  // w(leaf) >= 0
      for (auto& t : terms) cap.push_back(t);
    }
  }
  lp.add_row_sparse(cap, Rel::LE, 1.0);
  for (auto& [col, coef] : cap) lp.objective[col] += coef;

  LpSolution s = solve_lp(lp);
  if (!s.optimal()) throw MarketError("no-arbitrage LP failed");
  NaResult out;
  out.holds = s.objective <= 1e-8;
  if (!out.holds) {
    AdaptedVectorProcess w = AdaptedVectorProcess::zero(tree);
    for (int n = 0; n < tree.node_count(); ++n)
      for (int j = 0; j < d; ++j) w.at(n)[j] = s.x[z_off[n] + j];
    out.witness = std::move(w);
  }
  return out;
}

RobustNaResult check_robust_na(const MarketModel& model, double strict_delta) {
  if (!model.conical)
    throw MarketError(
        "robust no-arbitrage needs a conical model; pass the recession model");
  RobustNaResult out;
  auto cps = find_consistent_price_system(model, /*strict=*/true, strict_delta);
  out.holds = cps.has_value();
  if (cps) out.certificate = std::move(cps);
  return out;
}

RobustNaResult check_robust_no_scalable_arbitrage(const MarketModel& model,
                                                  double strict_delta) {
  if (model.conical) return check_robust_na(model, strict_delta);
  return check_robust_na(recession_model(model), strict_delta);
}

namespace {

bool in_cone(const HPolyhedron& h, const Eigen::VectorXd& v, double tol) {
  for (int i = 0; i < h.rows(); ++i)
    if (h.A.row(i).dot(v) > tol * std::max(1.0, v.lpNorm<Eigen::Infinity>()))
      return false;
  return true;
}

}  // namespace

bool check_dominance(const MarketModel& model, const MarketModel& candidate) {
  if (!model.conical || !candidate.conical)
    throw MarketError("dominance check needs conical models");
  if (model.tree.node_count() != candidate.tree.node_count())
    throw MarketError("dominance check needs models on the same tree");
  constexpr double tol = 1e-9;

  for (int n = 0; n < model.tree.node_count(); ++n) {
    const auto& s = model.set(n);
    const auto& t = candidate.set(n);
    if (!s.cone_gens || !s.x_halfspaces || !t.x_halfspaces)
      throw MarketError("dominance check needs explicit cone representations");
    const HPolyhedron& ch = *s.x_halfspaces;
    const HPolyhedron& th = *t.x_halfspaces;

    // (a) inclusion C subset C~, via generators of C against halfspaces of C~.
    for (const auto& g : s.cone_gens->rays)
      if (!in_cone(th, g, tol)) return false;
    for (const auto& l : s.cone_gens->lines)
      if (!in_cone(th, l, tol) || !in_cone(th, -l, tol)) return false;

    // (b) every boundary face of C~ may meet C only inside C's lineality.
    std::vector<bool> implicit = implicit_rows(th);
    for (int r = 0; r < th.rows(); ++r) {
      if (implicit[r]) continue;
      Eigen::MatrixXd A(ch.rows() + 2, model.d);
      A.topRows(ch.rows()) = ch.A;
      A.row(ch.rows()) = th.A.row(r);
      A.row(ch.rows() + 1) = -th.A.row(r);
      VCone face = halfspaces_to_generators(
          HPolyhedron{A, Eigen::VectorXd::Zero(A.rows())});
      for (const auto& g : face.rays)
        if (!in_cone(ch, g, tol) || !in_cone(ch, -g, tol)) return false;
      // face lines lie in C's lineality by construction of the intersection,
      // but verify anyway.
      for (const auto& l : face.lines)
        if (!in_cone(ch, l, tol) || !in_cone(ch, -l, tol)) return false;
    }
  }
  return true;
}

}  // namespace illiq
