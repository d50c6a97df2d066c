#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace modmetric {

namespace {

constexpr double kMatchTol = 1e-12;

// Any unit vector orthogonal to the unit vector e.
Vec orthogonal_unit(const Vec& e) {
  // Pick the coordinate axis least aligned with e and project it out.
  Vec cand = std::fabs(e.x) <= std::fabs(e.y) && std::fabs(e.x) <= std::fabs(e.z)
                 ? Vec{1, 0, 0}
                 : (std::fabs(e.y) <= std::fabs(e.z) ? Vec{0, 1, 0} : Vec{0, 0, 1});
  Vec p = cand - dot(cand, e) * e;
  return (1.0 / norm(p)) * p;
}

}  // namespace

Vec invert_point(const Vec& x, const Sphere& s) {
  if (s.radius <= 0.0) throw ParamError("sphere radius must be positive");
  const Vec d = x - s.center;
  const double d2 = norm2(d);
  if (d2 == 0.0) throw GeometryError("center has no finite image");
  return s.center + (s.radius * s.radius / d2) * d;
}

std::vector<Vec> polarize_points(const std::vector<Vec>& pts, const Sphere& s) {
  const double tol = kMatchTol * std::fmax(1.0, s.radius);
  const auto in_closed_ball = [&](const Vec& p) { return dist(p, s.center) <= s.radius + tol; };

  std::vector<Vec> reflected;
  reflected.reserve(pts.size());
  for (const Vec& p : pts) reflected.push_back(invert_point(p, s));

  const auto member = [&](const std::vector<Vec>& set, const Vec& p) {
    for (const Vec& q : set)
      if (dist(p, q) <= tol) return true;
    return false;
  };

  std::vector<Vec> out;
  const auto push_unique = [&](const Vec& p) {
    if (!member(out, p)) out.push_back(p);
  };

  // (E u E*) n closed ball
  for (const Vec& p : pts)
    if (in_closed_ball(p)) push_unique(p);
  for (const Vec& p : reflected)
    if (in_closed_ball(p)) push_unique(p);
  // (E n E*) \ closed ball
  for (const Vec& p : pts)
    if (!in_closed_ball(p) && member(reflected, p)) push_unique(p);

  return out;
}

double three_spheres_seam(double k) {
  if (!(k > 0.0 && k < 1.0)) throw ParamError("three_spheres: k must lie in (0,1)");
  return 0.5 * M_PI + std::atan(k);
}

double three_spheres_radius(double k, double theta) {
  if (!(k > 0.0 && k < 1.0)) throw ParamError("three_spheres: k must lie in (0,1)");
  if (!(theta >= 0.0 && theta <= M_PI) || !std::isfinite(theta))
    throw ParamError("three_spheres: theta must lie in [0,pi]");
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double a = std::sqrt(1.0 - k * k * s * s);
  if (theta >= three_spheres_seam(k)) {
    // Sphere centered on the vertical axis at (0, k sin theta).
    return std::sqrt(-k * c * a);
  }
  // Sphere through the origin, center at (lambda, k sin theta) on the line
  // carrying x1 and x2.
  const double lambda = k * k / (a - k * c) + k * c;
  return std::sqrt(lambda * lambda + k * k * s * s);
}

ThreeSpheresResult three_spheres(const Vec& x1, const Vec& x2, const Vec& x0, double R,
                                 double k) {
  if (!(k > 0.0 && k < 1.0)) throw ParamError("three_spheres: k must lie in (0,1)");
  if (!(R > 0.0)) throw ParamError("three_spheres: R must be positive");
  const double tol = 1e-9 * R;
  const Vec u1 = x1 - x0;
  const Vec u2 = x2 - x0;
  if (std::fabs(norm(u1) - R) > tol)
    throw GeometryError("three_spheres: |x1 - x0| differs from R");
  if (std::fabs(norm(u2) - k * R) > tol)
    throw GeometryError("three_spheres: |x2 - x0| differs from k*R");

  // Normalize to the configuration of the proof: x0 at the origin, R = 1,
  // x1 and x2 in a plane where both share the height k sin(theta).
  const double inv = 1.0 / R;
  const Vec v1 = inv * u1;
  const Vec v2 = inv * u2;

  Vec ex = v2 - v1;
  ex = (1.0 / norm(ex)) * ex;
  Vec p = v2 - dot(v2, ex) * ex;  // common orthogonal component of v1, v2
  Vec ey;
  if (norm(p) > 1e-13) {
    ey = (1.0 / norm(p)) * p;
  } else {
    ey = orthogonal_unit(ex);
  }
  if (dot(v2, ey) < 0.0) ey = -1.0 * ey;  // keep the recovered height nonnegative

  const double cx = dot(v2, ex);                  // k cos(theta)
  const double cy = std::fmax(0.0, dot(v2, ey));  // k sin(theta)
  double theta = std::atan2(cy, cx);
  theta = std::fmin(std::fmax(theta, 0.0), M_PI);

  const double s = std::sin(theta);
  const double c = std::cos(theta);
  const double a = std::sqrt(std::fmax(0.0, 1.0 - k * k * s * s));

  ThreeSpheresResult out;
  out.theta = theta;
  double ccx;  // center abscissa in the canonical frame
  double r3;
  if (theta >= three_spheres_seam(k)) {
    out.branch = ThreeSpheresBranch::interior_branch;
    ccx = 0.0;
    r3 = std::sqrt(-k * c * a);
  } else {
    out.branch = ThreeSpheresBranch::origin_branch;
    ccx = k * k / (a - k * c) + k * c;
    r3 = std::sqrt(ccx * ccx + k * k * s * s);
  }
  out.sphere.center = x0 + R * (ccx * ex + (k * s) * ey);
  out.sphere.radius = R * r3;
  return out;
}

double cone_alpha0(double r, double R) {
  if (!(r > 0.0 && r < R)) throw ParamError("cone_alpha0: need 0 < r < R");
  return std::atan(std::sqrt(R * R - r * r) / r);
}

ConeRadii cone_radii(double alpha, double r, double R) {
  const double a0 = cone_alpha0(r, R);
  if (!(alpha >= 0.0) || alpha > a0 * (1.0 + 1e-12))
    throw ParamError("cone_radii: alpha outside [0, alpha0]");
  const double ca = std::cos(alpha);
  ConeRadii out;
  out.ext = R - r / ca;
  out.interior = r * (R * ca - r) / (R - r * ca);
  if (out.ext < 0.0) out.ext = 0.0;          // alpha == alpha0 up to rounding
  if (out.interior < 0.0) out.interior = 0.0;
  return out;
}

bool cone_contains(const SphericalCone& cone, const Vec& y) {
  const Vec d = y - cone.vertex;
  const double len = norm(d);
  if (len == 0.0) return false;  // the vertex itself is excluded
  if (len > cone.radius * (1.0 + 1e-12)) return false;
  const Vec cr{d.y * cone.axis.z - d.z * cone.axis.y, d.z * cone.axis.x - d.x * cone.axis.z,
               d.x * cone.axis.y - d.y * cone.axis.x};
  const double angle = std::atan2(norm(cr), dot(d, cone.axis));
  return angle <= cone.half_angle + 1e-12;
}

}  // namespace modmetric
