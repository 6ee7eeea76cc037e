#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hardy/execution.hpp"
#include "hardy/point.hpp"

namespace hardy {

/// Open axis-aligned cube Q(c, r) = { y : max_i |c_i - y_i| < r }.
struct Cube {
  Point center;
  double radius = 0.0;

  Cube() = default;
  Cube(Point c, double r);

  int dim() const { return center.dim(); }
  double side() const { return 2.0 * radius; }
  /// d_Q = 2 sqrt(d) r_Q.
  double diameter() const;
  double volume() const;
  double lo(int i) const { return center[i] - radius; }
  double hi(int i) const { return center[i] + radius; }

  bool contains(const Point& y) const;
  bool contains_closed(const Point& y, double tol = 0.0) const;

  friend bool operator==(const Cube& a, const Cube& b) {
    return a.radius == b.radius && a.center == b.center;
  }
};

/// Q(c_Q, (1+theta)^k r_Q). The factor is applied k times so that
/// dilate(dilate(Q, 1, th), 1, th) == dilate(Q, 2, th) bit for bit.
Cube dilate(const Cube& q, int k, double theta);

/// True when the open cubes share a point.
bool interiors_intersect(const Cube& a, const Cube& b);
/// Lebesgue measure of a ∩ b.
double overlap_volume(const Cube& a, const Cube& b);
/// closure(inner) ⊆ closure(outer), up to an absolute tolerance.
bool encloses(const Cube& outer, const Cube& inner, double tol = 0.0);
/// Euclidean distance from y to the closed cube (0 inside).
double distance_to(const Cube& q, const Point& y);

/// Finite cube family on a bounding box, meant to satisfy (G1)-(G3).
struct CubeFamily {
  std::vector<Cube> cubes;
  double theta = 0.125;
  /// The constant C in the diameter-comparability condition.
  double scale_constant = 1.0;
  Cube bbox;

  int dim() const { return bbox.dim(); }
  std::size_t size() const { return cubes.size(); }
  std::optional<std::size_t> index_of(const Cube& q) const;
};

/// Lattice tiling of `bbox` by cubes of radius t. The box is snapped outward
/// (about its center) to an integer number of cubes per axis.
CubeFamily make_uniform_family(double t, const Cube& bbox, double theta = 0.125);

/// Replaces cube `index` by its 2^d dyadic children (radius halved) and sets
/// the scale constant to 2.
CubeFamily refine(const CubeFamily& family, std::size_t index);

struct GReport {
  bool g1_ok = false;
  bool g2_ok = false;
  bool g3_ok = false;
  /// Largest diameter ratio among pairs whose fourfold dilations meet.
  double empirical_C = 1.0;
  std::size_t uncovered_samples = 0;
  double max_overlap = 0.0;
  bool all_ok() const { return g1_ok && g2_ok && g3_ok; }
};

/// Checks (G1) on a sample grid of the bounding box (`samples_per_radius`
/// points per smallest radius, per axis), (G2) by pairwise intersection
/// volumes and (G3) exactly on the fourfold dilations.
GReport check_G(const CubeFamily& family, int samples_per_radius = 2,
                Exec exec = Exec::parallel);

struct LocGlob {
  std::vector<std::size_t> loc;
  std::vector<std::size_t> glob;
};

/// loc = { Q' : Q*** ∩ Q'*** ≠ ∅ }, glob = the rest. Throws if q is not a member.
LocGlob loc_glob_split(const CubeFamily& family, const Cube& q);
LocGlob loc_glob_split(const CubeFamily& family, std::size_t index);

enum class BumpProfile {
  quintic,  ///< 1 - 10s^3 + 15s^4 - 6s^5 on [0,1], C^2
  smooth,   ///< exp(-1/u) quotient, C^infinity
};

struct PartitionConfig {
  /// Width of the decay ramp outside Q as a fraction of r_Q; <= 0 means theta.
  double width = 0.0;
  BumpProfile profile = BumpProfile::quintic;
};

/// Shepard-normalized tensor bumps: psi_Q is 1 on cl(Q) and vanishes outside
/// Q*, and phi_Q = psi_Q / sum psi.
class PartitionOfUnity {
public:
  PartitionOfUnity(CubeFamily family, PartitionConfig config);

  const CubeFamily& family() const { return family_; }
  double width() const { return width_; }

  /// Unnormalized bump psi_Q(x).
  double bump(std::size_t q, const Point& x) const;
  /// Sum of all bumps at x (>= 1 on the cover).
  double bump_sum(const Point& x) const;
  /// phi_Q(x).
  double value(std::size_t q, const Point& x) const;
  /// sum_Q phi_Q(x).
  double sum(const Point& x) const;

private:
  double profile(double s) const;

  CubeFamily family_;
  PartitionConfig config_;
  double width_;
};

/// Throws std::invalid_argument naming the minimum admissible theta when the
/// requested ramp does not fit inside Q*.
PartitionOfUnity build_partition(const CubeFamily& family, PartitionConfig config = {});

struct GradientScan {
  /// max over Q and grid points of |grad phi_Q| * d_Q (central differences).
  double constant = 0.0;
  std::size_t points = 0;
};

GradientScan scan_gradient(const PartitionOfUnity& pu, int grid_per_axis,
                           Exec exec = Exec::parallel);

}  // namespace hardy
