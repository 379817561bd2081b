#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <initializer_list>
#include <optional>
#include <vector>

#include "noslip/core.hpp"

namespace noslip {

/// Real polynomial of degree <= 4, coefficients in ascending order.
struct Polynomial {
  std::array<double, 5> c{};
  int deg = 0;

  Polynomial() = default;

  Polynomial(std::initializer_list<double> ascending) {
    int n = 0;
    for (double v : ascending) {
      if (n > 4) throw std::invalid_argument("Polynomial: degree > 4");
      c[n++] = v;
    }
    deg = n - 1;
    trim();
  }

  static Polynomial quadratic(double c0, double c1, double c2) {
    Polynomial p;
    p.c = {c0, c1, c2, 0.0, 0.0};
    p.deg = 2;
    p.trim();
    return p;
  }

  static Polynomial quartic(double c0, double c1, double c2, double c3, double c4) {
    Polynomial p;
    p.c = {c0, c1, c2, c3, c4};
    p.deg = 4;
    p.trim();
    return p;
  }

  // Leading coefficients below 1e-30 of the largest magnitude are noise, not
  // degree.
  void trim() {
    double cmax = 0.0;
    for (int i = 0; i <= deg; ++i) cmax = std::max(cmax, std::abs(c[i]));
    while (deg > 0 && std::abs(c[deg]) <= 1e-30 * cmax) c[deg--] = 0.0;
  }

  double operator()(double t) const {
    double r = c[deg];
    for (int i = deg - 1; i >= 0; --i) r = r * t + c[i];
    return r;
  }

  Polynomial derivative() const {
    Polynomial d;
    d.deg = std::max(deg - 1, 0);
    for (int i = 1; i <= deg; ++i) d.c[i - 1] = c[i] * i;
    return d;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (int i = 0; i <= deg; ++i) m = std::max(m, std::abs(c[i]));
    return m;
  }
};

struct RealRoot {
  double x = 0.0;
  int multiplicity = 1;
};

namespace detail {

inline double eval_poly(const double* c, int deg, double t) {
  double r = c[deg];
  for (int i = deg - 1; i >= 0; --i) r = r * t + c[i];
  return r;
}

// Guarded Newton: accept a step only if it shrinks |p|; at (near-)multiple
// roots the raw iteration divides noise by noise and must not wander off.
inline double newton_polish(const Polynomial& p, const Polynomial& dp, double x) {
  double fx = std::abs(p(x));
  for (int it = 0; it < 60; ++it) {
    const double fp = dp(x);
    if (fp == 0.0) break;
    const double step = p(x) / fp;
    const double xn = x - step;
    const double fn = std::abs(p(xn));
    if (!(fn <= fx)) break;
    x = xn;
    fx = fn;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

// Monic quadratic t^2 + b t + c, stable form.
inline int quadratic_roots(double b, double c, double out[2]) {
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  if (q == 0.0) {
    out[0] = 0.0;
    out[1] = -b;
    return 2;
  }
  out[0] = q;
  out[1] = c / q;
  return 2;
}

// As above, but a moderately negative discriminant still emits the vertex:
// Ferrari factor quadratics carry resolvent roundoff, so a double root of
// the quartic may surface with disc well below zero. Impostor candidates
// are dropped by the residual filter downstream.
inline int quadratic_roots_with_vertex(double b, double c, double out[2]) {
  const int n = quadratic_roots(b, c, out);
  if (n > 0) return n;
  const double disc = b * b - 4.0 * c;
  if (disc >= -1e-4 * (b * b + 4.0 * std::abs(c) + 1e-300)) {
    out[0] = -0.5 * b;
    return 1;
  }
  return 0;
}

// Monic cubic t^3 + a t^2 + b t + c; always returns at least one real root.
inline int cubic_roots(double a, double b, double c, double out[3]) {
  const double third_a = a / 3.0;
  const double p = b - a * third_a;                      // depressed: u^3 + p u + q
  const double q = c + third_a * (2.0 * third_a * third_a - b);
  const double half_q = 0.5 * q;
  double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  // strictly positive discriminant: one real root; a borderline value means
  // a (near-)double root, handled by the trig branch below
  const double disc_scale = half_q * half_q + std::abs(third_p * third_p * third_p);
  if (disc > 1e-12 * disc_scale) {
    const double s = std::sqrt(disc);
    const double big = -half_q - (half_q >= 0.0 ? s : -s);
    const double alpha = std::cbrt(big);
    const double u = (alpha == 0.0) ? 0.0 : alpha - third_p / alpha;
    out[0] = u - third_a;
    return 1;
  }
  if (third_p >= 0.0) {
    // only possible in the borderline band; collapses to a triple root
    out[0] = std::cbrt(-q) - third_a;
    return 1;
  }
  const double m = 2.0 * std::sqrt(-third_p);
  double cosphi = -half_q / std::sqrt(-third_p * third_p * third_p);
  cosphi = std::clamp(cosphi, -1.0, 1.0);
  const double phi = std::acos(cosphi) / 3.0;
  for (int k = 0; k < 3; ++k)
    out[k] = m * std::cos(phi - 2.0 * kPi * k / 3.0) - third_a;
  return 3;
}

// Ferrari: monic quartic t^4 + a t^3 + b t^2 + c t + d. Produces candidate
// real roots; borderline complex pairs may leak through as near-double
// candidates and are filtered by the residual check in real_roots.
inline int quartic_candidates(double a, double b, double c, double d, double out[4]) {
  const double a4 = a / 4.0;
  // depressed: y^4 + p y^2 + q y + r, t = y - a/4
  const double p = b - 6.0 * a4 * a4;
  const double q = c - 2.0 * b * a4 + 8.0 * a4 * a4 * a4;
  const double r = d - c * a4 + b * a4 * a4 - 3.0 * a4 * a4 * a4 * a4;

  int n = 0;
  if (std::abs(q) <= 1e-14 * (1.0 + std::abs(p) + std::abs(r))) {
    // biquadratic
    double z[2];
    const int nz = quadratic_roots_with_vertex(p, r, z);
    for (int i = 0; i < nz; ++i) {
      if (z[i] < -1e-12 * (1.0 + std::abs(p) + std::abs(r))) continue;
      const double s = std::sqrt(std::max(z[i], 0.0));
      out[n++] = s - a4;
      out[n++] = -s - a4;
    }
    return n;
  }

  // resolvent for m in (y^2 + p/2 + m)^2 - 2m (y - q/(4m))^2:
  //   8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0
  double mroots[3];
  const int nm = cubic_roots(p, 0.25 * (p * p - 4.0 * r), -q * q / 8.0, mroots);
  double m = -kInf;
  for (int i = 0; i < nm; ++i) m = std::max(m, mroots[i]);
  if (!(m > 0.0)) return 0;

  const double s2m = std::sqrt(2.0 * m);
  const double h = p / 2.0 + m;
  const double k = q / (2.0 * s2m);
  double y[2];
  int ny = quadratic_roots_with_vertex(s2m, h - k, y);
  for (int i = 0; i < ny; ++i) out[n++] = y[i] - a4;
  ny = quadratic_roots_with_vertex(-s2m, h + k, y);
  for (int i = 0; i < ny; ++i) out[n++] = y[i] - a4;
  return n;
}

// Bracketed bisection between monotone-interval endpoints.
inline double bisect(const Polynomial& p, double lo, double hi, double flo) {
  for (int it = 0; it < 140; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = p(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * (1.0 + std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

inline double residual_scale(const Polynomial& p, double x) {
  double s = std::max(1.0, std::abs(x));
  double acc = 1.0;
  for (int i = 0; i < p.deg; ++i) acc *= s;
  return p.max_abs_coeff() * acc;
}

/// Multiplicity from derivative vanishing at a (polished) root.
inline int multiplicity_at(const Polynomial& p, double x) {
  int m = 1;
  Polynomial d = p.derivative();
  while (m < p.deg && d.deg >= 0) {
    if (std::abs(d(x)) > 1e-6 * residual_scale(d, x)) break;
    ++m;
    if (d.deg == 0) break;
    d = d.derivative();
  }
  return m;
}

inline std::vector<RealRoot> real_roots_impl(const Polynomial& p, bool allow_fallback);

// Robust path: split the axis at the critical points of p, then bisect each
// monotone piece; catches multiple roots where closed forms lose digits.
inline std::vector<RealRoot> roots_by_derivative_split(const Polynomial& p) {
  std::vector<RealRoot> roots;
  const Polynomial dp = p.derivative();

  std::vector<double> cuts;
  if (p.deg >= 2) {
    for (const RealRoot& r : real_roots_impl(dp, false)) cuts.push_back(r.x);
  }
  std::sort(cuts.begin(), cuts.end());

  double bound = 1.0;
  for (int i = 0; i < p.deg; ++i)
    bound = std::max(bound, std::abs(p.c[i] / p.c[p.deg]));
  bound = 1.0 + bound;

  std::vector<double> pts;
  pts.push_back(-bound);
  for (double c : cuts)
    if (c > -bound && c < bound) pts.push_back(c);
  pts.push_back(bound);

  // roots sitting exactly at critical points (multiplicity >= 2)
  std::vector<double> crit_roots;
  for (double c : cuts) {
    if (std::abs(p(c)) <= 1e-10 * residual_scale(p, c)) {
      roots.push_back({c, multiplicity_at(p, c)});
      crit_roots.push_back(c);
    }
  }

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double lo = pts[i], hi = pts[i + 1];
    // skip intervals whose endpoint already accounts for the root
    bool endpoint_root = false;
    for (double cr : crit_roots)
      if (std::abs(cr - lo) <= 1e-12 * (1.0 + std::abs(lo)) ||
          std::abs(cr - hi) <= 1e-12 * (1.0 + std::abs(hi)))
        endpoint_root = true;
    if (endpoint_root) continue;
    const double flo = p(lo), fhi = p(hi);
    if (flo == 0.0) {
      roots.push_back({lo, 1});
      continue;
    }
    if ((flo > 0.0) == (fhi > 0.0)) continue;
    double x = bisect(p, lo, hi, flo);
    x = newton_polish(p, dp, x);
    roots.push_back({x, 1});
  }

  std::sort(roots.begin(), roots.end(),
            [](const RealRoot& a, const RealRoot& b) { return a.x < b.x; });
  return roots;
}

/// Collapse polished candidates that landed on the same root; keep the one
/// with the smallest residual as the cluster representative.
inline std::vector<double> dedupe_candidates(std::vector<double>& xs, const Polynomial& p) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (double x : xs) {
    if (!out.empty() && std::abs(x - out.back()) <= 1e-7 * std::max(1.0, std::abs(x))) {
      if (std::abs(p(x)) < std::abs(p(out.back()))) out.back() = x;
    } else {
      out.push_back(x);
    }
  }
  return out;
}

inline std::vector<RealRoot> real_roots_impl(const Polynomial& poly, bool allow_fallback) {
  if (poly.deg == 0) throw std::invalid_argument("real_roots: degree 0 polynomial");

  // pre-scale so max |c_i| = 1
  Polynomial p = poly;
  const double cmax = p.max_abs_coeff();
  for (int i = 0; i <= p.deg; ++i) p.c[i] /= cmax;
  const Polynomial dp = p.derivative();

  double cand[4];
  int n = 0;
  const double lead = p.c[p.deg];
  switch (p.deg) {
    case 1:
      cand[0] = -p.c[0] / p.c[1];
      n = 1;
      break;
    case 2:
      n = quadratic_roots(p.c[1] / lead, p.c[0] / lead, cand);
      break;
    case 3:
      n = cubic_roots(p.c[2] / lead, p.c[1] / lead, p.c[0] / lead, cand);
      break;
    case 4:
      n = quartic_candidates(p.c[3] / lead, p.c[2] / lead, p.c[1] / lead,
                             p.c[0] / lead, cand);
      break;
    default:
      throw std::invalid_argument("real_roots: degree > 4");
  }

  std::vector<double> polished;
  polished.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(cand[i])) continue;
    polished.push_back(newton_polish(p, dp, cand[i]));
  }
  const std::vector<double> distinct = dedupe_candidates(polished, p);

  // residual acceptance; spurious candidates from borderline complex pairs
  // fail here and are dropped, conditioning failures trigger the fallback
  bool suspicious = false;
  std::vector<RealRoot> accepted;
  int total_mult = 0;
  for (double x : distinct) {
    const double res = std::abs(p(x));
    const double scale = residual_scale(p, x);
    if (res <= 1e-10 * scale) {
      const int mult = multiplicity_at(p, x);
      accepted.push_back({x, mult});
      total_mult += mult;
    } else if (res <= 1e-6 * scale) {
      suspicious = true; // neither clean root nor clean rejection
    }
  }
  if (total_mult > p.deg) suspicious = true;

  if (suspicious && allow_fallback) {
    std::vector<RealRoot> fb = roots_by_derivative_split(p);
    for (const RealRoot& r : fb) {
      if (std::abs(p(r.x)) > 1e-6 * residual_scale(p, r.x))
        throw numerical_error("real_roots: residual exceeds tolerance after fallback");
    }
    return fb;
  }
  if (suspicious) {
    // robust path is unavailable while we are *inside* it
    throw numerical_error("real_roots: ill-conditioned polynomial");
  }
  return accepted;
}

} // namespace detail

/// All real roots, ascending, with multiplicity tags; accurate to the
/// residual bound |p(r)| <= 1e-10 * max|c| * max(1,|r|)^deg.
inline std::vector<RealRoot> real_roots(const Polynomial& p) {
  return detail::real_roots_impl(p, true);
}

/// Smallest real root strictly greater than t_min, if any.
inline std::optional<double> smallest_root_above(const Polynomial& p, double t_min) {
  for (const RealRoot& r : real_roots(p))
    if (r.x > t_min) return r.x;
  return std::nullopt;
}

} // namespace noslip
