#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace illiq {

class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// {z : A z <= b}. A cone when b == 0.
struct HPolyhedron {
  Eigen::MatrixXd A;  // m x d
  Eigen::VectorXd b;  // m

  int dim() const { return static_cast<int>(A.cols()); }
  int rows() const { return static_cast<int>(A.rows()); }
  bool is_cone(double tol = 1e-12) const;
  bool contains(const Eigen::VectorXd& z, double tol = 1e-8) const;

  static HPolyhedron full_space(int d);
  // R^d_- translated by the origin: {z : z <= 0}.
  static HPolyhedron negative_orthant(int d);
};

// cone = {sum lambda_i rays_i + sum mu_j lines_j : lambda >= 0, mu free}.
struct VCone {
  std::vector<Eigen::VectorXd> rays;
  std::vector<Eigen::VectorXd> lines;
  int dim = 0;

  static VCone from_rays(std::vector<Eigen::VectorXd> rays, int d);
};

// {y : g.y <= 0 for rays g, l.y = 0 for lines l}; equalities as +-row pairs.
HPolyhedron polar_cone(const VCone& cone);

// {z : A z <= 0}. Throws on an empty input set (LP feasibility check).
HPolyhedron recession_cone(const HPolyhedron& poly);

// Basis of ker(A) for a cone {z : A z <= 0}.
VCone lineality_space(const HPolyhedron& cone);

// sup {x.y : x in P}; +inf when unbounded, throws GeometryError on empty P.
double support_function_value(const HPolyhedron& poly, const Eigen::VectorXd& y);

// Row i of a cone's H-representation is implicit when g_i.z = 0 on the whole
// cone; decided by an LP over the cone intersected with the unit box.
std::vector<bool> implicit_rows(const HPolyhedron& cone, double tol = 1e-9);

bool relative_interior_membership(const HPolyhedron& cone,
                                  const Eigen::VectorXd& y,
                                  double slack = 1e-7);

inline constexpr int kMaxDoubleDescriptionDim = 6;

// Double description at desk scale (dim <= 6); throws above the cap.
VCone halfspaces_to_generators(const HPolyhedron& cone);
HPolyhedron generators_to_halfspaces(const VCone& cone);

// Cap-free variant for internal lifted-space work (projections homogenize
// past the public dimension cap).
VCone halfspaces_to_generators_unchecked(const HPolyhedron& cone);

// H-representation of R^d_- + r*B, with B a regular 2^k-gon model of the unit
// ball (d = 2 only): keeps the outward normals with nonnegative components.
HPolyhedron orthant_plus_polygon(int k_halfspaces, double radius);

}  // namespace illiq
