#pragma once

// Test-side oracles, independent of the library implementation paths they
// check.  Elliptic integrals via AGM, the Grötzsch ring, and the analytic
// ring capacity.

#include <cmath>
#include <stdexcept>

namespace oracles {

// Complete elliptic integral of the first kind, modulus convention:
//   K(k) = pi / (2 AGM(1, sqrt(1 - k^2))).
inline double elliptic_K(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw std::invalid_argument("elliptic_K: k in [0,1)");
  double a = 1.0, g = std::sqrt(1.0 - k * k);
  for (int i = 0; i < 60 && std::fabs(a - g) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + g);
    g = std::sqrt(a * g);
    a = an;
  }
  return M_PI / (2.0 * a);
}

// Grötzsch ring modulus mu_G(r) = (pi/2) K(sqrt(1-r^2)) / K(r), 0 < r < 1.
inline double grotzsch_mu(double r) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("grotzsch_mu: r in (0,1)");
  return 0.5 * M_PI * elliptic_K(std::sqrt(1.0 - r * r)) / elliptic_K(r);
}

// Capacity of the plane Grötzsch condenser (B(0,1), [0, r]): 2 pi / mu_G(r).
inline double grotzsch_capacity(double r) { return 2.0 * M_PI / grotzsch_mu(r); }

// Ring condenser capacity from the explicit radial minimizer.
inline double ring_capacity(double r, double R, int n) {
  if (!(r > 0.0 && r < R)) throw std::invalid_argument("ring_capacity: 0 < r < R");
  const double lg = std::log(R / r);
  if (n == 2) return 2.0 * M_PI / lg;
  if (n == 3) return 4.0 * M_PI / (lg * lg);
  throw std::invalid_argument("ring_capacity: n in {2,3}");
}

}  // namespace oracles
