#include "illiq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "illiq/lp.hpp"

namespace illiq {

namespace {

constexpr double kTol = 1e-9;

Eigen::VectorXd normalized_maxabs(const Eigen::VectorXd& v) {
  double m = v.lpNorm<Eigen::Infinity>();
  return m > kTol ? Eigen::VectorXd(v / m) : v;
}

LinearProgram lp_over(const HPolyhedron& poly, const Eigen::VectorXd& obj) {
  LinearProgram lp;
  const int d = poly.dim();
  for (int j = 0; j < d; ++j) lp.add_var(-kInf, kInf, obj.size() ? obj[j] : 0.0);
  for (int i = 0; i < poly.rows(); ++i) {
    std::vector<double> a(d);
    for (int j = 0; j < d; ++j) a[j] = poly.A(i, j);
    lp.add_row(std::move(a), Rel::LE, poly.b[i]);
  }
  return lp;
}

bool is_feasible(const HPolyhedron& poly) {
  LinearProgram lp = lp_over(poly, Eigen::VectorXd::Zero(poly.dim()));
  return solve_lp(lp).optimal();
}

}  // namespace

bool HPolyhedron::is_cone(double tol) const {
  return b.size() == 0 || b.lpNorm<Eigen::Infinity>() <= tol;
}

bool HPolyhedron::contains(const Eigen::VectorXd& z, double tol) const {
  for (int i = 0; i < rows(); ++i)
    if (A.row(i).dot(z) > b[i] + tol) return false;
  return true;
}

HPolyhedron HPolyhedron::full_space(int d) {
  return {Eigen::MatrixXd(0, d), Eigen::VectorXd(0)};
}

HPolyhedron HPolyhedron::negative_orthant(int d) {
  return {Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
}

VCone VCone::from_rays(std::vector<Eigen::VectorXd> rays, int d) {
  VCone c;
  c.rays = std::move(rays);
  c.dim = d;
  return c;
}

HPolyhedron polar_cone(const VCone& cone) {
  const int d = cone.dim;
  const int m = static_cast<int>(cone.rays.size() + 2 * cone.lines.size());
  Eigen::MatrixXd A(m, d);
  int r = 0;
  for (const auto& g : cone.rays) A.row(r++) = g.transpose();
  for (const auto& l : cone.lines) {
    A.row(r++) = l.transpose();
    A.row(r++) = -l.transpose();
  }
  return {A, Eigen::VectorXd::Zero(m)};
}

HPolyhedron recession_cone(const HPolyhedron& poly) {
  if (!is_feasible(poly)) throw GeometryError("recession cone of an empty set");
  return {poly.A, Eigen::VectorXd::Zero(poly.rows())};
}

VCone lineality_space(const HPolyhedron& cone) {
  VCone out;
  out.dim = cone.dim();
  if (cone.rows() == 0) {
    for (int j = 0; j < cone.dim(); ++j)
      out.lines.push_back(Eigen::VectorXd::Unit(cone.dim(), j));
    return out;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cone.A);
  lu.setThreshold(1e-9);
  Eigen::MatrixXd ker = lu.kernel();
  if (lu.dimensionOfKernel() == 0) return out;
  for (int j = 0; j < ker.cols(); ++j)
    out.lines.push_back(normalized_maxabs(ker.col(j)));
  return out;
}

double support_function_value(const HPolyhedron& poly,
                              const Eigen::VectorXd& y) {
  LinearProgram lp = lp_over(poly, y);
  LpSolution s = solve_lp(lp);
  if (s.status == LpStatus::Unbounded) return kInf;
  if (s.status == LpStatus::Infeasible)
    throw GeometryError("support function of an empty set");
  if (!s.optimal()) throw GeometryError("support function LP failed");
  return s.objective;
}

std::vector<bool> implicit_rows(const HPolyhedron& cone, double tol) {
  // g_i is implicit iff min{g_i.z : z in cone, |z|_inf <= 1} = 0; the box
  // keeps the LP bounded, which is enough since the set is a cone.
  std::vector<bool> out(cone.rows(), false);
  for (int i = 0; i < cone.rows(); ++i) {
    LinearProgram lp;
    const int d = cone.dim();
    for (int j = 0; j < d; ++j) lp.add_var(-1.0, 1.0, -cone.A(i, j));
    for (int r = 0; r < cone.rows(); ++r) {
      std::vector<double> a(d);
      for (int j = 0; j < d; ++j) a[j] = cone.A(r, j);
      lp.add_row(std::move(a), Rel::LE, 0.0);
    }
    LpSolution s = solve_lp(lp);
    if (!s.optimal()) throw GeometryError("implicit-row LP failed");
    out[i] = s.objective <= tol;  // objective = -min g.z
  }
  return out;
}

bool relative_interior_membership(const HPolyhedron& cone,
                                  const Eigen::VectorXd& y, double slack) {
  std::vector<bool> implicit = implicit_rows(cone);
  for (int i = 0; i < cone.rows(); ++i) {
    double v = cone.A.row(i).dot(y);
    if (implicit[i]) {
      if (std::abs(v) > slack) return false;
    } else {
      if (v > -slack) return false;
    }
  }
  return true;
}

namespace {

struct DDRay {
  Eigen::VectorXd v;
  std::vector<char> active;  // over all input rows, filled as rows process
};

bool subset_of(const std::vector<char>& s, const std::vector<char>& t,
               const std::vector<int>& idx) {
  for (int i : idx)
    if (s[i] && !t[i]) return false;
  return true;
}

}  // namespace

VCone halfspaces_to_generators(const HPolyhedron& cone) {
  if (cone.dim() > kMaxDoubleDescriptionDim)
    throw GeometryError("double description capped at dimension 6");
  return halfspaces_to_generators_unchecked(cone);
}

VCone halfspaces_to_generators_unchecked(const HPolyhedron& cone) {
  const int d = cone.dim();
  VCone out;
  out.dim = d;
  const int m = cone.rows();
  if (m == 0) {
    for (int j = 0; j < d; ++j) out.lines.push_back(Eigen::VectorXd::Unit(d, j));
    return out;
  }

  // Split R^d into ker(A) (the lineality space) and the row space of A,
  // then enumerate extreme rays of the pointed reduced cone.
  out.lines = lineality_space(cone).lines;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cone.A.transpose());
  qr.setThreshold(1e-9);
  const int r = static_cast<int>(qr.rank());
  if (r == 0) return out;  // cone is a subspace
  Eigen::MatrixXd Q =
      qr.householderQ() * Eigen::MatrixXd::Identity(d, r);  // basis U
  Eigen::MatrixXd Ar = cone.A * Q;  // m x r, full column rank

  // Deterministic choice of r independent rows for the initial basis.
  std::vector<int> base;
  {
    Eigen::MatrixXd acc(0, r);
    for (int i = 0; i < m && static_cast<int>(base.size()) < r; ++i) {
      Eigen::MatrixXd cand(acc.rows() + 1, r);
      cand << acc, Ar.row(i);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q2(cand);
      q2.setThreshold(1e-9);
      if (q2.rank() == cand.rows()) {
        acc = cand;
        base.push_back(i);
      }
    }
    if (static_cast<int>(base.size()) < r)
      throw GeometryError("rank deficiency in double description setup");
  }

  Eigen::MatrixXd B(r, r);
  for (int i = 0; i < r; ++i) B.row(i) = Ar.row(base[i]);
  Eigen::MatrixXd Binv = B.inverse();

  std::vector<DDRay> rays;
  for (int j = 0; j < r; ++j) {
    DDRay ray;
    ray.v = normalized_maxabs(-Binv.col(j));
    ray.active.assign(m, 0);
    for (int i = 0; i < r; ++i) ray.active[base[i]] = (i != j);
    rays.push_back(std::move(ray));
  }

  std::vector<char> in_base(m, 0);
  for (int i : base) in_base[i] = 1;
  std::vector<int> processed(base.begin(), base.end());

  for (int row = 0; row < m; ++row) {
    if (in_base[row]) continue;
    Eigen::VectorXd a = Ar.row(row).transpose();
    double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
    std::vector<int> neg, zero, pos;
    std::vector<double> val(rays.size());
    for (size_t i = 0; i < rays.size(); ++i) {
      val[i] = a.dot(rays[i].v);
      if (val[i] < -kTol * scale) neg.push_back(static_cast<int>(i));
      else if (val[i] > kTol * scale) pos.push_back(static_cast<int>(i));
      else zero.push_back(static_cast<int>(i));
    }
    std::vector<DDRay> next;
    for (int i : neg) next.push_back(rays[i]);
    for (int i : zero) {
      rays[i].active[row] = 1;
      next.push_back(rays[i]);
    }
    for (int p : pos) {
      for (int nn : neg) {
        // Combinatorial adjacency: no third ray's active set contains the
        // common active set of p and n.
        std::vector<char> common(m, 0);
        for (int i : processed)
          common[i] = rays[p].active[i] && rays[nn].active[i];
        bool adjacent = true;
        for (size_t i = 0; i < rays.size(); ++i) {
          if (static_cast<int>(i) == p || static_cast<int>(i) == nn) continue;
          if (subset_of(common, rays[i].active, processed)) {
            adjacent = false;
            break;
          }
        }
        if (!adjacent) continue;
        DDRay w;
        w.v = normalized_maxabs(val[p] * rays[nn].v - val[nn] * rays[p].v);
        w.active.assign(m, 0);
        for (int i : processed)
          w.active[i] = rays[p].active[i] && rays[nn].active[i];
        w.active[row] = 1;
        next.push_back(std::move(w));
      }
    }
    // Deduplicate (rays are max-abs normalized).
    std::vector<DDRay> dedup;
    for (auto& cand : next) {
      bool dup = false;
      for (const auto& kept : dedup)
        if ((cand.v - kept.v).lpNorm<Eigen::Infinity>() < 1e-7) { dup = true; break; }
      if (!dup) dedup.push_back(std::move(cand));
    }
    rays = std::move(dedup);
    processed.push_back(row);
  }

  for (const auto& ray : rays)
    out.rays.push_back(normalized_maxabs(Q * ray.v));
  return out;
}

HPolyhedron generators_to_halfspaces(const VCone& cone) {
  if (cone.dim > kMaxDoubleDescriptionDim)
    throw GeometryError("double description capped at dimension 6");
  VCone dual = halfspaces_to_generators(polar_cone(cone));
  const int m = static_cast<int>(dual.rays.size() + 2 * dual.lines.size());
  Eigen::MatrixXd A(m, cone.dim);
  int r = 0;
  for (const auto& g : dual.rays) A.row(r++) = normalized_maxabs(g).transpose();
  for (const auto& l : dual.lines) {
    A.row(r++) = normalized_maxabs(l).transpose();
    A.row(r++) = -normalized_maxabs(l).transpose();
  }
  return {A, Eigen::VectorXd::Zero(m)};
}

HPolyhedron orthant_plus_polygon(int k_halfspaces, double radius) {
  if (k_halfspaces < 4) throw GeometryError("polygon needs >= 4 halfspaces");
  std::vector<Eigen::Vector2d> dirs;
  for (int j = 0; j < k_halfspaces; ++j) {
    double th = 2.0 * std::numbers::pi * j / k_halfspaces;
    Eigen::Vector2d u(std::cos(th), std::sin(th));
    if (u.x() >= -1e-12 && u.y() >= -1e-12) dirs.push_back(u);
  }
  Eigen::MatrixXd A(dirs.size(), 2);
  Eigen::VectorXd b(dirs.size());
  for (size_t i = 0; i < dirs.size(); ++i) {
    A.row(i) = dirs[i].transpose();
    b[i] = radius;
  }
  return {A, b};
}

}  // namespace illiq
