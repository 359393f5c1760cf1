#include "illiq/market.hpp"

#include <algorithm>
#include <cmath>

#include "illiq/lp.hpp"

namespace illiq {

namespace {

// Feasibility of {aux : A [x;aux] <= b} for fixed x.
bool lifted_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int d,
                     int aux_count, const Eigen::VectorXd& x) {
  if (aux_count == 0) {
    for (int i = 0; i < A.rows(); ++i)
      if (A.row(i).head(d).dot(x) > b[i] + 1e-8) return false;
    return true;
  }
  LinearProgram lp;
  for (int j = 0; j < aux_count; ++j) lp.add_var(-kInf, kInf, 0.0);
  for (int i = 0; i < A.rows(); ++i) {
    std::vector<double> a(aux_count);
    for (int j = 0; j < aux_count; ++j) a[j] = A(i, d + j);
    lp.add_row(std::move(a), Rel::LE, b[i] - A.row(i).head(d).dot(x));
  }
  return solve_lp(lp).optimal();
}

void check_contains_negative_orthant(const SolvencySet& s, int node_id) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(s.d);
  if (!s.contains(zero))
    throw MarketError("solvency set at node " + std::to_string(node_id) +
                      " does not contain 0");
  for (int i = 0; i < s.d; ++i) {
    if (!s.contains(-Eigen::VectorXd::Unit(s.d, i), /*recession=*/true))
      throw MarketError("solvency set at node " + std::to_string(node_id) +
                        " does not allow free disposal of asset " +
                        std::to_string(i));
  }
}

void finalize(MarketModel& model) {
  model.conical = true;
  for (auto& s : model.sets) {
    s.conical = s.b.size() == 0 || s.b.lpNorm<Eigen::Infinity>() <= 1e-12;
    model.conical = model.conical && s.conical;
  }
  for (size_t i = 0; i < model.sets.size(); ++i)
    check_contains_negative_orthant(model.sets[i],
                                    model.tree.node(static_cast<int>(i)).id);
}

VCone bid_ask_generators(const Eigen::MatrixXd& pi) {
  const int d = static_cast<int>(pi.rows());
  std::vector<Eigen::VectorXd> rays;
  for (int i = 0; i < d; ++i) rays.push_back(-Eigen::VectorXd::Unit(d, i));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      rays.push_back(Eigen::VectorXd::Unit(d, j) -
                     pi(i, j) * Eigen::VectorXd::Unit(d, i));
    }
  return VCone::from_rays(std::move(rays), d);
}

}  // namespace

bool SolvencySet::contains(const Eigen::VectorXd& x, bool recession) const {
  if (!recession) return lifted_feasible(A, b, d, aux_count, x);
  return lifted_feasible(A, Eigen::VectorXd::Zero(b.size()), d, aux_count, x);
}

MarketModel from_bid_ask(const EventTree& tree, const BidAskSpec& spec) {
  const int d = tree.asset_count();
  if (static_cast<int>(spec.pi.size()) != tree.node_count())
    throw MarketError("bid-ask spec must cover every node");
  MarketModel model;
  model.tree = tree;
  model.d = d;
  model.kind = MarketModel::Kind::BidAsk;
  for (int n = 0; n < tree.node_count(); ++n) {
    const auto& pi = spec.pi[n];
    if (pi.rows() != d || pi.cols() != d)
      throw MarketError("bid-ask matrix has wrong shape");
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j && !(pi(i, j) > 0.0))
          throw MarketError("nonpositive bid-ask entry pi(" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
    SolvencySet s;
    s.d = d;
    s.aux_count = 0;
    s.cone_gens = bid_ask_generators(pi);
    HPolyhedron h = generators_to_halfspaces(*s.cone_gens);
    s.A = h.A;
    s.b = h.b;
    s.x_halfspaces = h;
    model.sets.push_back(std::move(s));
  }
  finalize(model);
  return model;
}

MarketModel from_cost_process(const EventTree& tree,
                              const CostProcessSpec& spec) {
  const int d = tree.asset_count();
  if (static_cast<int>(spec.pieces.size()) != tree.node_count())
    throw MarketError("cost-process spec must cover every node");
  MarketModel model;
  model.tree = tree;
  model.d = d;
  model.kind = MarketModel::Kind::CostProcess;
  for (int n = 0; n < tree.node_count(); ++n) {
    const auto& pieces = spec.pieces[n];
    if (pieces.empty()) throw MarketError("cost function needs >= 1 piece");
    double at_zero = -kInf;
    for (const auto& p : pieces) {
      if (p.a.size() != d) throw MarketError("cost piece has wrong dimension");
      at_zero = std::max(at_zero, -p.b);
    }
    if (std::abs(at_zero) > 1e-12)
      throw MarketError("S(0) != 0 at node " +
                        std::to_string(tree.node(n).id));
    SolvencySet s;
    s.d = d;
    s.aux_count = 0;
    s.A.resize(pieces.size(), d);
    s.b.resize(pieces.size());
    for (size_t k = 0; k < pieces.size(); ++k) {
      s.A.row(k) = pieces[k].a.transpose();
      s.b[k] = pieces[k].b;
    }
    s.x_halfspaces = HPolyhedron{s.A, s.b};
    if (s.b.lpNorm<Eigen::Infinity>() <= 1e-12 && d <= kMaxDoubleDescriptionDim)
      s.cone_gens = halfspaces_to_generators(*s.x_halfspaces);
    model.sets.push_back(std::move(s));
  }
  finalize(model);
  return model;
}

MarketModel from_currency_costs(const EventTree& tree,
                                const CurrencyIlliquiditySpec& spec) {
  const int d = tree.asset_count();
  if (static_cast<int>(spec.costs.size()) != tree.node_count())
    throw MarketError("currency-cost spec must cover every node");
  MarketModel model;
  model.tree = tree;
  model.d = d;
  model.kind = MarketModel::Kind::CurrencyCosts;

  const int ntrans = d * (d - 1);  // ordered pairs (i,j), i != j
  auto pair_index = [&](int i, int j) {
    int k = 0;
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb) {
        if (a == bb) continue;
        if (a == i && bb == j) return k;
        ++k;
      }
    return -1;
  };

  for (int n = 0; n < tree.node_count(); ++n) {
    const auto& costs = spec.costs[n];
    if (static_cast<int>(costs.size()) != d)
      throw MarketError("currency-cost spec has wrong shape");
    bool conical = true;
    int npieces = 0;
    for (int i = 0; i < d; ++i) {
      if (static_cast<int>(costs[i].size()) != d)
        throw MarketError("currency-cost spec has wrong shape");
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        if (costs[i][j].empty())
          throw MarketError("cost S^{ij} needs >= 1 piece");
        double at_zero = -kInf;
        for (const auto& p : costs[i][j]) {
          if (p.slope < 0.0)
            throw MarketError("decreasing piece slope in S^{" +
                              std::to_string(i) + std::to_string(j) + "}");
          if (std::abs(p.offset) > 1e-12) conical = false;
          at_zero = std::max(at_zero, -p.offset);
          ++npieces;
        }
        if (std::abs(at_zero) > 1e-12)
          throw MarketError("S^{ij}(0) != 0 at node " +
                            std::to_string(tree.node(n).id));
      }
    }

    // Variables: x (d), a^{ij} (ntrans), u^{ij} (ntrans).
    // Rows: x^i - sum_j a^{ji} + sum_j u^{ij} <= 0 (d),
    //       slope a^{ij} - u^{ij} <= offset (per piece), -a^{ij} <= 0.
    SolvencySet s;
    s.d = d;
    s.aux_count = 2 * ntrans;
    const int nv = d + 2 * ntrans;
    const int nrows = d + npieces + ntrans;
    s.A = Eigen::MatrixXd::Zero(nrows, nv);
    s.b = Eigen::VectorXd::Zero(nrows);
    int r = 0;
    for (int i = 0; i < d; ++i) {
      s.A(r, i) = 1.0;
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        s.A(r, d + pair_index(j, i)) -= 1.0;        // incoming a^{ji}
        s.A(r, d + ntrans + pair_index(i, j)) += 1.0;  // cost u^{ij}
      }
      ++r;
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        for (const auto& p : costs[i][j]) {
          s.A(r, d + pair_index(i, j)) = p.slope;
          s.A(r, d + ntrans + pair_index(i, j)) = -1.0;
          s.b[r] = p.offset;
          ++r;
        }
      }
    for (int k = 0; k < ntrans; ++k) {
      s.A(r, d + k) = -1.0;
      ++r;
    }
    Eigen::MatrixXd top = Eigen::MatrixXd::Ones(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        double t = 0.0;
        for (const auto& p : costs[i][j]) t = std::max(t, p.slope);
        top(i, j) = t;
      }
    s.top_slopes = top;
    if (conical) {
      // With all offsets 0, S^{ij}(v) = (top slope) v on v >= 0, so the
      // projected cone is the bid-ask cone at the top marginal rate.
      std::vector<Eigen::VectorXd> rays;
      for (int i = 0; i < d; ++i) rays.push_back(-Eigen::VectorXd::Unit(d, i));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          if (i == j) continue;
          rays.push_back(Eigen::VectorXd::Unit(d, j) -
                         top(i, j) * Eigen::VectorXd::Unit(d, i));
        }
      s.cone_gens = VCone::from_rays(std::move(rays), d);
      if (d <= kMaxDoubleDescriptionDim)
        s.x_halfspaces = generators_to_halfspaces(*s.cone_gens);
    }
    model.sets.push_back(std::move(s));
  }
  finalize(model);
  return model;
}

MarketModel from_explicit(const EventTree& tree,
                          std::vector<HPolyhedron> sets) {
  const int d = tree.asset_count();
  if (static_cast<int>(sets.size()) != tree.node_count())
    throw MarketError("explicit model must cover every node");
  MarketModel model;
  model.tree = tree;
  model.d = d;
  model.kind = MarketModel::Kind::Explicit;
  for (auto& h : sets) {
    if (h.dim() != d) throw MarketError("polyhedron has wrong dimension");
    SolvencySet s;
    s.d = d;
    s.aux_count = 0;
    s.A = h.A;
    s.b = h.b;
    s.x_halfspaces = std::move(h);
    if (s.b.size() == 0 || (s.b.lpNorm<Eigen::Infinity>() <= 1e-12 &&
                            d <= kMaxDoubleDescriptionDim))
      s.cone_gens = halfspaces_to_generators(*s.x_halfspaces);
    model.sets.push_back(std::move(s));
  }
  finalize(model);
  return model;
}

MarketModel recession_model(const MarketModel& model) {
  MarketModel out;
  out.tree = model.tree;
  out.d = model.d;
  out.kind = model.kind;
  for (size_t n = 0; n < model.sets.size(); ++n) {
    const auto& s = model.sets[n];
    SolvencySet r;
    r.d = s.d;
    r.aux_count = s.aux_count;
    r.A = s.A;
    r.b = Eigen::VectorXd::Zero(s.b.size());
    r.top_slopes = s.top_slopes;
    if (s.conical) {
      r.cone_gens = s.cone_gens;
      r.x_halfspaces = s.x_halfspaces;
    } else if (s.aux_count == 0) {
      r.x_halfspaces = HPolyhedron{r.A, r.b};
      if (r.d <= kMaxDoubleDescriptionDim)
        r.cone_gens = halfspaces_to_generators(*r.x_halfspaces);
    } else if (s.top_slopes) {
      // Recession slope of each S^{ij} is its top piece slope, so the
      // projected recession cone is the bid-ask cone at those rates.
      const int d = s.d;
      std::vector<Eigen::VectorXd> rays;
      for (int i = 0; i < d; ++i) rays.push_back(-Eigen::VectorXd::Unit(d, i));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          if (i == j) continue;
          rays.push_back(Eigen::VectorXd::Unit(d, j) -
                         (*s.top_slopes)(i, j) * Eigen::VectorXd::Unit(d, i));
        }
      r.cone_gens = VCone::from_rays(std::move(rays), d);
      if (d <= kMaxDoubleDescriptionDim)
        r.x_halfspaces = generators_to_halfspaces(*r.cone_gens);
    }
    out.sets.push_back(std::move(r));
  }
  out.conical = true;
  for (auto& s : out.sets) s.conical = true;
  return out;
}

HPolyhedron project_lifted_to_x(const SolvencySet& set) {
  if (set.aux_count == 0) return HPolyhedron{set.A, set.b};
  if (set.d > 3)
    throw GeometryError("lifted projection available for d <= 3 only");
  // Homogenize: cone {(x, aux, t) : A (x,aux) - b t <= 0, -t <= 0}, take its
  // generators, project to (x, t), rebuild halfspaces and dehomogenize.
  const int nv = set.d + set.aux_count;
  Eigen::MatrixXd Ah(set.A.rows() + 1, nv + 1);
  Ah.setZero();
  Ah.block(0, 0, set.A.rows(), nv) = set.A;
  Ah.block(0, nv, set.A.rows(), 1) = -set.b;
  Ah(set.A.rows(), nv) = -1.0;
  VCone gens = halfspaces_to_generators_unchecked(HPolyhedron{
      Ah, Eigen::VectorXd::Zero(Ah.rows())});
  VCone proj;
  proj.dim = set.d + 1;
  auto project = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd w(set.d + 1);
    w.head(set.d) = v.head(set.d);
    w[set.d] = v[nv];
    return w;
  };
  for (const auto& g : gens.rays) proj.rays.push_back(project(g));
  for (const auto& l : gens.lines) proj.lines.push_back(project(l));
  HPolyhedron hp = generators_to_halfspaces(proj);
  // Rows (g, g0): g.x + g0 t <= 0 on the homogenization, i.e. g.x <= -g0.
  std::vector<int> keep;
  for (int i = 0; i < hp.rows(); ++i)
    if (hp.A.row(i).head(set.d).lpNorm<Eigen::Infinity>() > 1e-12)
      keep.push_back(i);
  Eigen::MatrixXd A(keep.size(), set.d);
  Eigen::VectorXd b(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    A.row(i) = hp.A.row(keep[i]).head(set.d);
    b[i] = -hp.A(keep[i], set.d);
  }
  return {A, b};
}

}  // namespace illiq
