// Test-only oracles, kept independent of the implementation paths they check:
// a Sturm-sequence root bracketer and a dense-sampling first-collision probe.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "noslip/dynamics.hpp"
#include "noslip/geometry.hpp"
#include "noslip/numerics.hpp"

namespace oracle {

struct SPoly {
  std::vector<double> c; // ascending

  int deg() const { return int(c.size()) - 1; }

  double eval(double x) const {
    double r = 0.0;
    for (int i = deg(); i >= 0; --i) r = r * x + c[std::size_t(i)];
    return r;
  }

  SPoly derivative() const {
    SPoly d;
    for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(c[i] * double(i));
    if (d.c.empty()) d.c.push_back(0.0);
    return d;
  }

  void trim() {
    while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * max_abs()) c.pop_back();
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
  }
};

// remainder of a / b (polynomial long division)
inline SPoly poly_rem(SPoly a, const SPoly& b) {
  a.trim();
  SPoly r = a;
  const int db = b.deg();
  while (r.deg() >= db && r.max_abs() > 0.0) {
    const double k = r.c.back() / b.c.back();
    const int shift = r.deg() - db;
    for (int i = 0; i <= db; ++i) r.c[std::size_t(i + shift)] -= k * b.c[std::size_t(i)];
    r.c.pop_back();
    SPoly t = r;
    t.trim();
    if (t.deg() < r.deg()) r = t;
  }
  r.trim();
  return r;
}

inline std::vector<SPoly> sturm_chain(SPoly p) {
  p.trim();
  std::vector<SPoly> chain{p, p.derivative()};
  while (chain.back().deg() > 0 && chain.back().max_abs() > 0.0) {
    SPoly r = poly_rem(chain[chain.size() - 2], chain.back());
    for (double& v : r.c) v = -v;
    if (r.max_abs() <= 1e-300) break;
    chain.push_back(r);
  }
  return chain;
}

inline int sign_changes(const std::vector<SPoly>& chain, double x) {
  int changes = 0;
  int prev = 0;
  for (const SPoly& p : chain) {
    const double v = p.eval(x);
    const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

/// Distinct real roots via Sturm bracketing plus bisection, each to ~1e-10.
inline std::vector<double> sturm_roots(const SPoly& input) {
  SPoly p = input;
  p.trim();
  if (p.deg() < 1) return {};
  const auto chain = sturm_chain(p);
  double bound = 1.0;
  for (int i = 0; i < p.deg(); ++i)
    bound = std::max(bound, std::abs(p.c[std::size_t(i)] / p.c.back()));
  bound = bound + 1.0;

  std::vector<double> roots;
  struct Interval {
    double lo, hi;
    int n;
  };
  std::vector<Interval> stack{{-bound, bound,
                               sign_changes(chain, -bound) - sign_changes(chain, bound)}};
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    if (iv.n <= 0) continue;
    if (iv.n == 1 || iv.hi - iv.lo < 1e-12 * (1.0 + std::abs(iv.lo))) {
      // refine by Sturm-count bisection (works for even multiplicities too)
      double lo = iv.lo, hi = iv.hi;
      const int s_lo = sign_changes(chain, lo);
      for (int it = 0; it < 120 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (s_lo - sign_changes(chain, mid) >= 1)
          hi = mid;
        else
          lo = mid;
      }
      roots.push_back(0.5 * (lo + hi));
      continue;
    }
    const double mid = 0.5 * (iv.lo + iv.hi);
    const int left = sign_changes(chain, iv.lo) - sign_changes(chain, mid);
    stack.push_back({iv.lo, mid, left});
    stack.push_back({mid, iv.hi, iv.n - left});
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

// ---------------------------------------------------------------------------
// Dense-sampling first-collision probe: march the ballistic arc with a small
// step, bisect the first sign change of the inside test.

struct FirstHit {
  double t = 0.0;
  std::int64_t component = -1;
};

inline std::optional<FirstHit> dense_first_hit(const noslip::ParticleState& state,
                                               const noslip::Table& table,
                                               const noslip::ForceField& force,
                                               double t_hi, double step_scale = 1e-4) {
  using noslip::Vec2;
  const Vec2 accel = force.accel();
  auto pos_at = [&](double t) {
    return state.pos + state.vel * t + accel * (0.5 * t * t);
  };
  const double v = std::max(noslip::norm(state.vel), 1e-9);
  const double dt = step_scale * table.char_length / v;
  double t_prev = 0.0;
  double c_prev = table.clearance(state.pos);
  if (c_prev <= 0.0) return std::nullopt; // must start strictly inside
  for (double t = dt; t <= t_hi; t += dt) {
    const double c = table.clearance(pos_at(t));
    if (c < 0.0) {
      double lo = t_prev, hi = t;
      for (int it = 0; it < 100 && hi - lo > 1e-15 * (1.0 + lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (table.clearance(pos_at(mid)) < 0.0)
          hi = mid;
        else
          lo = mid;
      }
      const double t_star = 0.5 * (lo + hi);
      return FirstHit{t_star, table.nearest_component(pos_at(t_star)).first};
    }
    t_prev = t;
    c_prev = c;
  }
  return std::nullopt;
}

} // namespace oracle
