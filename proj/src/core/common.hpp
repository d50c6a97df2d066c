#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace modmetric {

// Error taxonomy. The CLI maps ParamError/ConfigError/GeometryError to
// exit code 2 and NumericError to exit code 3.
struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Small fixed-size vector; 2-D points carry z = 0.
struct Vec {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec operator+(Vec a, const Vec& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec operator-(Vec a, const Vec& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec operator*(double s, const Vec& a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec operator*(const Vec& a, double s) { return s * a; }
inline double dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline bool finite(const Vec& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// Distance from point p to segment [a, b].
inline double dist_point_segment(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  double t = dot(p - a, ab) / len2;
  t = std::fmax(0.0, std::fmin(1.0, t));
  return dist(p, a + t * ab);
}

// Deterministic PRNG used everywhere randomness is needed.  splitmix64 for
// seeding/derivation, xoshiro-style usage through explicit helpers so output
// does not depend on the standard library's distribution implementations.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double u01() { return (next_u64() >> 11) * 0x1.0p-53; }
  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }
  // Uniform integer in [0, n).
  uint64_t index(uint64_t n) { return n ? next_u64() % n : 0; }
};

// Derive a case seed from a suite seed; stable across platforms.
inline uint64_t derive_seed(uint64_t base, uint64_t index) {
  Rng r(base ^ (0x2545F4914F6CDD1DULL * (index + 1)));
  return r.next_u64();
}

// Static-partition parallel map over [0, n).  Each item writes only its own
// slot, so results are identical for any worker count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// Worker-count resolution: explicit value, else MODMETRIC_JOBS, else hardware.
int resolve_jobs(int requested);

}  // namespace modmetric
