#pragma once

#include <vector>

#include "core/common.hpp"

namespace modmetric {

struct Sphere {
  Vec center;
  double radius = 1.0;
};

enum class ThreeSpheresBranch { interior_branch, origin_branch };

struct ThreeSpheresResult {
  Sphere sphere;
  double theta = 0.0;  // angle of the normalized configuration, in [0, pi]
  ThreeSpheresBranch branch = ThreeSpheresBranch::origin_branch;
};

struct SphericalCone {
  Vec vertex;
  Vec axis;           // unit vector
  double half_angle;  // in (0, pi/2)
  double radius;      // > 0
};

// Reflection of x in the sphere s: x* = c + r^2 (x - c)/|x - c|^2.
// Throws GeometryError for x == center (no finite image).
Vec invert_point(const Vec& x, const Sphere& s);

// Polarization of a finite point set:
//   E_p = ((E u E*) n closed-ball) u ((E n E*) \ closed-ball),
// with E* the inversion image of E.  Membership tolerance 1e-12 (relative to
// the sphere radius for the ball test, absolute in point matching).
std::vector<Vec> polarize_points(const std::vector<Vec>& pts, const Sphere& s);

// Boundary angle of the two-branch radius formula: theta_seam = pi - arccot k.
double three_spheres_seam(double k);

// Normalized radius R3/R as a function of (k, theta).  Piecewise:
// on [0, seam] the sphere through the origin, on [seam, pi] the sphere with
// center on the vertical axis.  The first branch strictly decreases from
// k/(1-k) to k/sqrt(1+k^2); the second increases from that value to sqrt(k).
double three_spheres_radius(double k, double theta);

// Given x1 with |x1 - x0| = R and x2 with |x2 - x0| = kR (tolerance 1e-9*R),
// constructs the sphere with respect to which x1 and x2 are symmetric and
// whose closed ball contains x0 and x2.  Works in 2-D (z = 0) and 3-D.
ThreeSpheresResult three_spheres(const Vec& x1, const Vec& x2, const Vec& x0, double R,
                                 double k);

// Opening angle at which both cone radii of the level-sphere cones vanish:
// alpha0 = arctan(sqrt(R^2 - r^2)/r) = arccos(r/R), for 0 < r < R.
double cone_alpha0(double r, double R);

struct ConeRadii {
  double ext;
  double interior;
};

// Radii of the exterior/interior spherical cones at opening alpha:
//   rho_ext = R - r sec(alpha),  rho_int = r (R cos(alpha) - r)/(R - r cos(alpha)).
// Requires 0 <= alpha <= alpha0(r, R); both radii vanish at alpha0.
ConeRadii cone_radii(double alpha, double r, double R);

// True iff 0 < |y - vertex| <= radius and angle(y - vertex, axis) <= half_angle.
bool cone_contains(const SphericalCone& cone, const Vec& y);

}  // namespace modmetric
