#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noslip/core.hpp"
#include "noslip/geometry.hpp"
#include "noslip/numerics.hpp"

namespace noslip {

/// Mass distribution of the rolling particle. gamma = 0 is a point mass,
/// 1/sqrt(2) a uniform disk, 1 a ring; beta = 2*atan(gamma) is the rotation
/// angle of the collision map.
struct MassDistribution {
  double gamma = 0.0;
  double beta = 0.0;
  double cos_beta = 1.0;
  double sin_beta = 0.0;

  static MassDistribution from_gamma(double gamma) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("MassDistribution: gamma must be >= 0");
    const double d = 1.0 + gamma * gamma;
    return {gamma, 2.0 * std::atan(gamma), (1.0 - gamma * gamma) / d, 2.0 * gamma / d};
  }

  static MassDistribution from_beta(double beta) {
    if (!(beta >= 0.0 && beta < kPi))
      throw std::invalid_argument("MassDistribution: beta must lie in [0, pi)");
    return from_gamma(std::tan(beta / 2.0));
  }
};

/// Particle state in the lab frame. The orientation coordinate is carried
/// along but never influences events.
struct ParticleState {
  Vec2 pos{};
  Vec2 vel{};
  double rot_vel = 0.0;
  double orientation = 0.0;
  double t = 0.0;

  double speed2() const { return rot_vel * rot_vel + norm2(vel); }
  double speed() const { return std::sqrt(speed2()); }
};

/// Constant force acting on the spatial position only, never on rotation.
struct ForceField {
  double g = 0.0;
  Vec2 dir{0.0, -1.0};

  static ForceField none() { return {0.0, {0.0, -1.0}}; }
  static ForceField gravity(double g, Vec2 dir = {0.0, -1.0}) {
    if (g < 0.0) throw std::invalid_argument("ForceField: magnitude must be >= 0");
    return {g, g > 0.0 ? normalized(dir) : dir};
  }

  Vec2 accel() const { return dir * g; }
};

/// 1/2 |v|^2 plus potential height along -dir.
inline double mechanical_energy(const ParticleState& s, const ForceField& f) {
  return 0.5 * s.speed2() - f.g * dot(f.dir, s.pos);
}

/// Exact ballistic update; rotational velocity is inert in flight.
inline ParticleState propagate(ParticleState s, double dt, const ForceField& f) {
  if (dt < 0.0) throw std::invalid_argument("propagate: dt must be >= 0");
  const Vec2 a = f.accel();
  s.pos += s.vel * dt + a * (0.5 * dt * dt);
  s.vel += a * dt;
  s.orientation += s.rot_vel * dt;
  s.t += dt;
  return s;
}

// ---------------------------------------------------------------------------
// Collision maps on local (rotational, tangential, normal) triples. The
// normal entry is the inward-normal component, so an approaching particle
// has nrm < 0.

inline void require_approaching(const Vec3& v) {
  const double scale = norm(v);
  if (v.nrm > 1e-10 * scale)
    throw std::invalid_argument("reflect: velocity does not approach the wall");
}

inline Vec3 no_slip_reflect(const Vec3& v, const MassDistribution& m) {
  require_approaching(v);
  return {-m.cos_beta * v.rot - m.sin_beta * v.tan,
          -m.sin_beta * v.rot + m.cos_beta * v.tan, -v.nrm};
}

inline Vec3 specular_reflect(const Vec3& v) {
  require_approaching(v);
  return {v.rot, v.tan, -v.nrm};
}

/// The no-slip map as a matrix on (rot, tan, nrm) triples.
inline Mat3 collision_matrix(const MassDistribution& m) {
  Mat3 t;
  t.m[0][0] = -m.cos_beta;
  t.m[0][1] = -m.sin_beta;
  t.m[1][0] = -m.sin_beta;
  t.m[1][1] = m.cos_beta;
  t.m[2][2] = -1.0;
  return t;
}

// ---------------------------------------------------------------------------
// Event detection

struct CollisionEvent {
  double t_flight = 0.0; // flight time preceding this collision
  double t = 0.0;        // absolute time of impact
  Vec2 point{};
  std::int64_t component = -1;
  CollisionRule rule = CollisionRule::no_slip;
  double vin_rot = 0.0;
  Vec2 vin{};
  double vout_rot = 0.0;
  Vec2 vout{};
  Frame frame{};
};

enum class EventStatus { hit, vertex, escaped, none };

struct NextEvent {
  EventStatus status = EventStatus::none;
  CollisionEvent event{};   // hit and vertex
  double t_escape = 0.0;    // escaped (absorbing terminal crossing)
  Vec2 escape_point{};
};

struct EventOptions {
  double t_min_factor = 1e-9;  // x char_length / speed: departure-root exclusion
  double graze_tol = 1e-10;    // x |v|: tangential hits below this are skipped
  double vertex_tol = 1e-9;    // x char_length: endpoint proximity
  int max_wraps = 100000;      // periodic-cell crossings per flight
  double march_factor = 0.45;  // lattice chunk length, x spacing
  double no_event_span = 1e5;  // x char_length of scanned path before giving up
};

namespace detail {

struct Candidate {
  double t = kInf;
  Vec2 point{};
  Vec2 normal{}; // inward
  std::int64_t id = -1;
  CollisionRule rule = CollisionRule::no_slip;
  bool vertex = false;
};

inline Vec2 arc_pos(const ParticleState& s, Vec2 accel, double t) {
  return s.pos + s.vel * t + accel * (0.5 * t * t);
}

inline Vec2 arc_vel(const ParticleState& s, Vec2 accel, double t) {
  return s.vel + accel * t;
}

// Earliest valid crossing of one wall component in (lo, hi].
inline bool scan_segment(const ParticleState& s, Vec2 accel, const BoundaryComponent& c,
                         double lo, double hi, const EventOptions& opts,
                         double char_len, Candidate& out) {
  const Vec2 n = c.seg_normal;
  const Polynomial p = Polynomial::quadratic(dot(s.pos - c.a, n), dot(s.vel, n),
                                             0.5 * dot(accel, n));
  if (p.deg == 0) return false;
  const double vtol = opts.vertex_tol * char_len;
  for (const RealRoot& r : real_roots(p)) {
    const double t = r.x;
    if (!(t > lo) || !(t <= hi)) continue;
    const Vec2 v = arc_vel(s, accel, t);
    const double appr = dot(v, n);
    if (!(appr < -opts.graze_tol * std::max(norm(v), 1e-300))) continue;
    const Vec2 pt = arc_pos(s, accel, t);
    const Vec2 u = c.direction();
    const double along = dot(pt - c.a, u);
    const double len = norm(c.b - c.a);
    bool vertex = false;
    if (!c.extend_neg) {
      if (along < -vtol) continue;
      if (along < vtol) vertex = true;
    }
    if (!c.extend_pos) {
      if (along > len + vtol) continue;
      if (along > len - vtol) vertex = true;
    }
    out = {t, pt, n, c.id, c.rule, vertex};
    return true;
  }
  return false;
}

inline bool scan_circle(const ParticleState& s, Vec2 accel, const BoundaryComponent& c,
                        double lo, double hi, const EventOptions& opts,
                        double char_len, Candidate& out) {
  const Vec2 d = s.pos - c.center;
  const Polynomial p =
      Polynomial::quartic(dot(d, d) - c.radius * c.radius, 2.0 * dot(d, s.vel),
                          norm2(s.vel) + dot(d, accel), dot(s.vel, accel),
                          0.25 * norm2(accel));
  if (p.deg == 0) return false;
  for (const RealRoot& r : real_roots(p)) {
    const double t = r.x;
    if (!(t > lo) || !(t <= hi)) continue;
    const Vec2 pt = arc_pos(s, accel, t);
    const Vec2 radial = pt - c.center;
    const double rn = norm(radial);
    if (rn <= 0.0) continue;
    const Vec2 n = radial * (double(c.normal_out) / rn);
    const Vec2 v = arc_vel(s, accel, t);
    if (!(dot(v, n) < -opts.graze_tol * std::max(norm(v), 1e-300))) continue;
    bool vertex = false;
    if (c.kind == ComponentKind::arc) {
      const double ang = std::atan2(radial.y, radial.x);
      double rel = std::fmod(ang - c.arc_start, 2.0 * kPi);
      if (rel < 0.0) rel += 2.0 * kPi;
      const double atol = opts.vertex_tol * char_len / c.radius;
      if (rel > c.arc_span + atol) continue;
      if (rel < atol || rel > c.arc_span - atol) vertex = true;
    }
    out = {t, pt, n, c.id, c.rule, vertex};
    return true;
  }
  return false;
}

inline bool scan_component(const ParticleState& s, Vec2 accel, const BoundaryComponent& c,
                           double lo, double hi, const EventOptions& opts,
                           double char_len, Candidate& out) {
  if (c.kind == ComponentKind::segment)
    return scan_segment(s, accel, c, lo, hi, opts, char_len, out);
  return scan_circle(s, accel, c, lo, hi, opts, char_len, out);
}

/// Earliest downward crossing of the absorbing terminal height, if any.
inline double terminal_crossing(const ParticleState& s, Vec2 accel, double terminal_y,
                                double lo) {
  const Polynomial p =
      Polynomial::quadratic(s.pos.y - terminal_y, s.vel.y, 0.5 * accel.y);
  if (p.deg == 0) return kInf;
  for (const RealRoot& r : real_roots(p)) {
    if (!(r.x > lo)) continue;
    if (s.vel.y + accel.y * r.x < 0.0) return r.x;
  }
  return kInf;
}

inline NextEvent finish_hit(const ParticleState& s, Vec2 accel, const Candidate& cand,
                            double t_offset, const ParticleState& chunk_state,
                            const MassDistribution& mass) {
  NextEvent ne;
  ne.status = cand.vertex ? EventStatus::vertex : EventStatus::hit;
  CollisionEvent& ev = ne.event;
  ev.t_flight = t_offset + cand.t;
  ev.t = s.t + ev.t_flight;
  ev.point = cand.point;
  ev.component = cand.id;
  ev.rule = cand.rule;
  ev.frame = frame_from_normal(cand.normal);
  ev.vin = arc_vel(chunk_state, accel, cand.t);
  ev.vin_rot = chunk_state.rot_vel;
  if (ne.status == EventStatus::vertex) return ne; // collision law undefined there
  const Vec3 local{ev.vin_rot, dot(ev.vin, ev.frame.tangent), dot(ev.vin, ev.frame.normal)};
  const Vec3 refl = cand.rule == CollisionRule::specular ? specular_reflect(local)
                                                         : no_slip_reflect(local, mass);
  ev.vout_rot = refl.rot;
  ev.vout = ev.frame.tangent * refl.tan + ev.frame.normal * refl.nrm;
  return ne;
}

} // namespace detail

/// Earliest collision of the ballistic arc with the table boundary. Grazing
/// contacts are skipped; hits within the vertex tolerance of a segment end
/// report EventStatus::vertex and leave the outgoing velocity unset.
inline NextEvent next_collision(const ParticleState& state, const Table& table,
                                const ForceField& force, const MassDistribution& mass,
                                const EventOptions& opts = {}) {
  const Vec2 accel = force.accel();
  const double vscale = std::max(norm(state.vel),
                                 std::sqrt(force.g * table.char_length) + 1e-300);
  const double t_min = opts.t_min_factor * table.char_length / vscale;

  if (const auto* lat = std::get_if<TriLattice>(&table.tiling)) {
    // March the arc chunk by chunk, materializing nearby scatterers.
    ParticleState cur = state;
    cur.t = 0.0;
    double elapsed = 0.0;
    double scanned = 0.0;
    const double t_term = table.terminal_y
                              ? detail::terminal_crossing(state, accel, *table.terminal_y, t_min)
                              : kInf;
    while (scanned < opts.no_event_span * table.char_length) {
      const double v0 = std::max(norm(cur.vel), 1e-12);
      double dt = opts.march_factor * lat->spacing / v0;
      const double v1 = v0 + force.g * dt;
      dt = opts.march_factor * lat->spacing / std::max(v1, 1e-12);
      const double lo = std::max(t_min - elapsed, 0.0);
      double hi = dt;
      bool final_chunk = false;
      if (elapsed + hi >= t_term) {
        hi = t_term - elapsed;
        final_chunk = true;
        if (hi <= lo) break; // terminal first
      }
      const Vec2 p0 = cur.pos;
      const Vec2 p1 = detail::arc_pos(cur, accel, hi);
      const Vec2 mid = detail::arc_pos(cur, accel, 0.5 * hi);
      const double reach = 0.5 * norm(p1 - p0) + 0.125 * force.g * hi * hi +
                           lat->radius + 0.1 * lat->spacing;
      detail::Candidate best;
      for (const LatticeSite& site : table.lattice_sites_in_disc(mid, reach)) {
        BoundaryComponent disk = BoundaryComponent::circle(site.center, lat->radius, +1);
        disk.id = lattice_site_id(site.i, site.j);
        disk.rule = table.lattice_rule;
        detail::Candidate cand;
        if (detail::scan_component(cur, accel, disk, lo, hi, opts, table.char_length, cand) &&
            cand.t < best.t)
          best = cand;
      }
      for (const auto& c : table.components) {
        detail::Candidate cand;
        if (detail::scan_component(cur, accel, c, lo, hi, opts, table.char_length, cand) &&
            cand.t < best.t)
          best = cand;
      }
      if (best.id != -1) return detail::finish_hit(state, accel, best, elapsed, cur, mass);
      if (final_chunk) break;
      scanned += norm(p1 - p0);
      cur = propagate(cur, hi, force);
      elapsed += hi;
    }
    if (t_term < kInf) {
      NextEvent ne;
      ne.status = EventStatus::escaped;
      ne.t_escape = t_term;
      ne.escape_point = detail::arc_pos(state, accel, t_term);
      return ne;
    }
    return {};
  }

  if (const auto* cell = std::get_if<PeriodicRect>(&table.tiling)) {
    // Coordinate wrapping at cell exit; event detection stays local.
    ParticleState cur = state;
    cur.pos = table.wrap(cur.pos);
    cur.t = 0.0;
    double elapsed = 0.0;
    for (int wraps = 0; wraps < opts.max_wraps; ++wraps) {
      const double t_eps = 1e-13 * table.char_length / std::max(norm(cur.vel), 1e-12);
      // earliest outward crossing of the four cell edges
      double t_exit = kInf;
      int exit_edge = -1;
      const double wx = cell->width / 2.0, hy = cell->height / 2.0;
      struct Edge { double c0, c1, c2, sign; bool horiz; };
      const Edge edges[4] = {
          {cur.pos.x - wx, cur.vel.x, 0.5 * accel.x, +1.0, false},
          {cur.pos.x + wx, cur.vel.x, 0.5 * accel.x, -1.0, false},
          {cur.pos.y - hy, cur.vel.y, 0.5 * accel.y, +1.0, true},
          {cur.pos.y + hy, cur.vel.y, 0.5 * accel.y, -1.0, true},
      };
      for (int e = 0; e < 4; ++e) {
        const Edge& edge = edges[e];
        // a wrapped-in state sits exactly on an edge; an outward velocity
        // there means the crossing happens now, not at a later root
        if (edge.c0 == 0.0 && edge.c1 * edge.sign > 0.0) {
          t_exit = 0.0;
          exit_edge = e;
          break;
        }
        const Polynomial p = Polynomial::quadratic(edge.c0, edge.c1, edge.c2);
        if (p.deg == 0) continue;
        for (const RealRoot& r : real_roots(p)) {
          if (!(r.x > t_eps) || r.x >= t_exit) continue;
          const double vcross = edge.horiz ? cur.vel.y + accel.y * r.x
                                           : cur.vel.x + accel.x * r.x;
          if (vcross * edge.sign > 0.0) {
            t_exit = r.x;
            exit_edge = e;
          }
        }
      }
      const double lo = std::max(t_min - elapsed, 0.0);
      const double hi = std::min(t_exit, kInf);
      detail::Candidate best;
      for (const auto& c : table.components) {
        detail::Candidate cand;
        if (detail::scan_component(cur, accel, c, lo, hi, opts, table.char_length, cand) &&
            cand.t < best.t)
          best = cand;
      }
      if (best.id != -1) {
        NextEvent ne = detail::finish_hit(state, accel, best, elapsed, cur, mass);
        ne.event.point = table.wrap(ne.event.point);
        return ne;
      }
      if (!(t_exit < kInf)) return {}; // never leaves the cell, never collides
      cur = propagate(cur, t_exit, force);
      // re-seat the crossed coordinate exactly on the opposite edge
      switch (exit_edge) {
        case 0: cur.pos.x = -wx; break;
        case 1: cur.pos.x = wx; break;
        case 2: cur.pos.y = -hy; break;
        case 3: cur.pos.y = hy; break;
      }
      cur.pos = table.wrap(cur.pos);
      elapsed += t_exit;
    }
    return {};
  }

  // Plain table: scan every component over the unbounded arc.
  detail::Candidate best;
  for (const auto& c : table.components) {
    detail::Candidate cand;
    if (detail::scan_component(state, accel, c, t_min, kInf, opts, table.char_length, cand) &&
        cand.t < best.t)
      best = cand;
  }
  const double t_term = table.terminal_y
                            ? detail::terminal_crossing(state, accel, *table.terminal_y, t_min)
                            : kInf;
  if (t_term < best.t) {
    NextEvent ne;
    ne.status = EventStatus::escaped;
    ne.t_escape = t_term;
    ne.escape_point = detail::arc_pos(state, accel, t_term);
    return ne;
  }
  if (best.id == -1) return {};
  ParticleState zeroed = state;
  zeroed.t = 0.0;
  return detail::finish_hit(state, accel, best, 0.0, zeroed, mass);
}

// ---------------------------------------------------------------------------
// Orbit driver

enum class Termination {
  collision_limit,
  time_limit,
  escaped, // crossed an absorbing terminal height
  no_event,
  vertex,
  pinched,
  numerical,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::collision_limit: return "capped";
    case Termination::time_limit: return "time";
    case Termination::escaped: return "escaped";
    case Termination::no_event: return "none";
    case Termination::vertex: return "pinched";
    case Termination::pinched: return "pinched";
    case Termination::numerical: return "numerical";
  }
  return "?";
}

struct StopRule {
  long max_collisions = 1000000000L;
  double t_max = kInf;
};

struct OrbitResult {
  std::vector<CollisionEvent> events;
  ParticleState final_state{};
  Termination termination = Termination::collision_limit;
  std::string diagnostic;
};

/// Advance collision-to-collision until a stop condition fires. Vertex hits
/// and stagnation (two consecutive flights below 10x the departure-root
/// exclusion at one component) terminate the orbit with a flagged status.
inline OrbitResult run_orbit(ParticleState state, const Table& table,
                             const ForceField& force, const MassDistribution& mass,
                             const StopRule& stop, const EventOptions& opts = {}) {
  OrbitResult out;
  std::int64_t pinch_comp = -1;
  bool pinch_prev = false;
  while (long(out.events.size()) < stop.max_collisions) {
    NextEvent ne;
    try {
      ne = next_collision(state, table, force, mass, opts);
    } catch (const std::exception& e) {
      out.termination = Termination::numerical;
      out.diagnostic = e.what();
      break;
    }
    if (ne.status == EventStatus::none) {
      out.termination = Termination::no_event;
      break;
    }
    if (ne.status == EventStatus::escaped) {
      if (state.t + ne.t_escape > stop.t_max) {
        state = propagate(state, stop.t_max - state.t, force);
        out.termination = Termination::time_limit;
        break;
      }
      state = propagate(state, ne.t_escape, force);
      out.termination = Termination::escaped;
      break;
    }
    if (state.t + ne.event.t_flight > stop.t_max) {
      state = propagate(state, stop.t_max - state.t, force);
      out.termination = Termination::time_limit;
      break;
    }
    if (ne.status == EventStatus::vertex) {
      state = propagate(state, ne.event.t_flight, force);
      out.termination = Termination::vertex;
      break;
    }
    const double t_min = opts.t_min_factor * table.char_length /
                         std::max(norm(ne.event.vin), 1e-12);
    const bool short_flight = ne.event.t_flight < 10.0 * t_min;
    if (short_flight && pinch_prev && pinch_comp == ne.event.component) {
      out.termination = Termination::pinched;
      break;
    }
    pinch_prev = short_flight;
    pinch_comp = ne.event.component;

    state.orientation += state.rot_vel * ne.event.t_flight;
    state.t += ne.event.t_flight;
    state.pos = ne.event.point;
    state.vel = ne.event.vout;
    state.rot_vel = ne.event.vout_rot;
    out.events.push_back(ne.event);
    out.termination = Termination::collision_limit;
  }
  out.final_state = state;
  return out;
}

} // namespace noslip
