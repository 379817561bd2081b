#pragma once

#include <functional>
#include <mutex>
#include <optional>

#include "noslip/core.hpp"
#include "noslip/dynamics.hpp"
#include "noslip/geometry.hpp"
#include "noslip/parallel.hpp"

namespace noslip {

/// Velocity change between consecutive half-plane bounces: the collision map
/// conjugated by a half-turn of the (tangent, normal) plane. S * S = I.
inline Mat3 bounce_velocity_matrix(const MassDistribution& m) {
  Mat3 s;
  s.m[0][0] = -m.cos_beta;
  s.m[0][1] = m.sin_beta;
  s.m[1][0] = m.sin_beta;
  s.m[1][1] = m.cos_beta;
  s.m[2][2] = -1.0;
  return s;
}

namespace detail {

/// Lateral displacement between collision points 2 and 4 of a bouncing-ball
/// run; vanishes exactly for the closing spin orientation.
inline double half_plane_drift(double ratio_sign, const MassDistribution& mass) {
  const Table table = make_half_plane();
  const ForceField force = ForceField::gravity(1.0);
  ParticleState s;
  s.pos = {0.0, 1.0};
  s.rot_vel = 1.0;
  s.vel = {ratio_sign * mass.gamma, 1.0};
  const OrbitResult r = run_orbit(s, table, force, mass, {4});
  if (r.events.size() < 4) return kInf;
  return std::abs(r.events[3].point.x - r.events[1].point.x);
}

/// The tangential/rotational ratio sign that closes bouncing-ball orbits
/// under this library's frame conventions; resolved once by simulation.
inline double half_plane_ratio_sign() {
  static std::once_flag flag;
  static double sign = 1.0;
  std::call_once(flag, [] {
    const MassDistribution probe = MassDistribution::from_gamma(1.0 / std::sqrt(2.0));
    const double plus = half_plane_drift(+1.0, probe);
    const double minus = half_plane_drift(-1.0, probe);
    sign = plus <= minus ? 1.0 : -1.0;
  });
  return sign;
}

} // namespace detail

/// Bouncing-ball state on the half plane whose tangential/rotational ratio
/// meets the 2-periodic closure condition; launched upward from (0, z0) with
/// the given total speed, kinetic energy split evenly between the vertical
/// component and the rest.
inline ParticleState construct_half_plane_bounce(const MassDistribution& mass,
                                                 double speed, double z0) {
  if (!(mass.gamma > 0.0))
    throw std::invalid_argument("construct_half_plane_bounce: gamma must be positive "
                                "(no rotational coupling at gamma = 0)");
  if (!(speed > 0.0)) throw std::invalid_argument("construct_half_plane_bounce: speed <= 0");
  if (z0 < 0.0) throw std::invalid_argument("construct_half_plane_bounce: z0 < 0");
  const double sign = detail::half_plane_ratio_sign();
  const double vz = speed / std::sqrt(2.0);
  const double rot = speed / std::sqrt(2.0 * (1.0 + mass.gamma * mass.gamma));
  ParticleState s;
  s.pos = {0.0, z0};
  s.rot_vel = rot;
  s.vel = {sign * mass.gamma * rot, vz};
  return s;
}

// ---------------------------------------------------------------------------
// Wedge 2-periodic orbits with force

/// Published speed scale of the 2-periodic wedge family, 2*sqrt(g*d/sin 2theta).
inline double wedge_speed(double g, double d, double theta) {
  if (!(g > 0.0 && d > 0.0)) throw std::invalid_argument("wedge_speed: need g, d > 0");
  const double s = std::sin(2.0 * theta);
  if (!(theta > 0.0 && theta < kPi / 2.0) || s <= 0.0)
    throw std::invalid_argument("wedge_speed: sin(2 theta) must be positive");
  return 2.0 * std::sqrt(g * d / s);
}

/// Launch speed whose ballistic arc spans a horizontal chord of length d at
/// launch angle theta: sqrt(g*d/sin 2theta). Half the published scale; the
/// simulated orbits close only with this value.
inline double chord_launch_speed(double g, double d, double theta) {
  return 0.5 * wedge_speed(g, d, theta);
}

/// Rotational velocity matching launch speed v to the closure condition:
/// x0' = v sin(theta - phi) / gamma.
inline double wedge_spin(double v, double theta, double phi, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("wedge_spin: gamma must be positive");
  return v * std::sin(theta - phi) / gamma;
}

struct WedgePeriodicSpec {
  double phi = kPi / 6.0;   // wedge half-angle
  double theta = kPi / 4.0; // launch angle from the q0 -> q1 chord
  double d = 1.0;           // chord length |q0 - q1|
  double g = 1.0;           // force magnitude, along the bisector
  double gamma = 1.0 / std::numbers::sqrt2;
  WedgeOrientation orientation = WedgeOrientation::opening_up;

  void validate() const {
    if (!(phi > 0.0 && phi < kPi / 2.0))
      throw std::invalid_argument("WedgePeriodicSpec: phi must lie in (0, pi/2)");
    if (!(theta > 0.0 && theta < kPi / 2.0))
      throw std::invalid_argument("WedgePeriodicSpec: theta must lie in (0, pi/2)");
    if (!(d > 0.0 && g > 0.0 && gamma > 0.0))
      throw std::invalid_argument("WedgePeriodicSpec: d, g, gamma must be positive");
  }
};

struct WedgePeriodicOrbit {
  Table table;
  ForceField force;
  MassDistribution mass;
  ParticleState state; // at q0, just launched
  Vec2 q0{}, q1{};
  double chord = 0.0;
  double v_scale = 0.0;      // wedge_speed value
  double launch_speed = 0.0; // chord_launch_speed value
  double spin = 0.0;
  double flight_time = 0.0;
  double period = 0.0;
};

/// Relative distance from q0 after every second collision, maximised over
/// the run; the closure figure of merit for a candidate 2-periodic orbit.
inline double wedge_closure_error(const WedgePeriodicOrbit& orbit, int n_collisions = 2) {
  const OrbitResult r =
      run_orbit(orbit.state, orbit.table, orbit.force, orbit.mass, {n_collisions});
  if (long(r.events.size()) < n_collisions) return kInf;
  double worst = 0.0;
  for (std::size_t k = 1; k < r.events.size(); k += 2)
    worst = std::max(worst, norm(r.events[k].point - orbit.q0) / orbit.chord);
  return worst;
}

/// Path-reversing 2-periodic orbit between opposed wedge points. Upward
/// wedges take a downward force, downward wedges an upward one; the spin
/// orientation is fixed by a short closure simulation.
inline WedgePeriodicOrbit construct_wedge_periodic(const WedgePeriodicSpec& spec) {
  spec.validate();
  const bool up = spec.orientation == WedgeOrientation::opening_up;
  const double flip = up ? 1.0 : -1.0;

  WedgePeriodicOrbit orbit;
  orbit.table = make_wedge({spec.phi, spec.orientation, {0.0, 0.0}});
  orbit.force = ForceField::gravity(spec.g, {0.0, -flip});
  orbit.mass = MassDistribution::from_gamma(spec.gamma);
  const double along = spec.d / (2.0 * std::sin(spec.phi));
  orbit.q0 = {-spec.d / 2.0, flip * along * std::cos(spec.phi)};
  orbit.q1 = {spec.d / 2.0, flip * along * std::cos(spec.phi)};
  orbit.chord = spec.d;
  orbit.v_scale = wedge_speed(spec.g, spec.d, spec.theta);
  orbit.launch_speed = chord_launch_speed(spec.g, spec.d, spec.theta);
  orbit.flight_time = 2.0 * orbit.launch_speed * std::sin(spec.theta) / spec.g;
  orbit.period = 2.0 * orbit.flight_time;

  const double spin_mag = std::abs(wedge_spin(orbit.launch_speed, spec.theta, spec.phi,
                                              spec.gamma));
  orbit.state.pos = orbit.q0;
  orbit.state.vel = {orbit.launch_speed * std::cos(spec.theta),
                     flip * orbit.launch_speed * std::sin(spec.theta)};

  double best_err = kInf;
  double best_spin = spin_mag;
  for (const double sgn : {+1.0, -1.0}) {
    orbit.state.rot_vel = sgn * spin_mag;
    const double err = wedge_closure_error(orbit, 2);
    if (err < best_err) {
      best_err = err;
      best_spin = sgn * spin_mag;
    }
    if (spin_mag == 0.0) break; // theta == phi: no spin needed
  }
  orbit.state.rot_vel = best_spin;
  orbit.spin = best_spin;
  return orbit;
}

/// No-force wedge 2-periodicity condition on a horizontal launch:
/// gamma = -(y0'/x0') sin(phi).
inline double no_force_wedge_condition(double y_vel, double rot_vel, double phi) {
  if (rot_vel == 0.0)
    throw std::invalid_argument("no_force_wedge_condition: rotational velocity is zero");
  return -(y_vel / rot_vel) * std::sin(phi);
}

/// Elliptic threshold for a no-force 2-periodic point between curvature-kappa
/// scatterers a distance d apart with tangential wedge angle phi.
inline bool is_linearly_stable_no_force(double kappa, double d, double beta, double phi) {
  if (!(kappa > 0.0 && d > 0.0))
    throw std::invalid_argument("is_linearly_stable_no_force: kappa, d must be positive");
  if (!(phi >= 0.0 && phi < kPi / 2.0))
    throw std::invalid_argument("is_linearly_stable_no_force: phi must lie in [0, pi/2)");
  const double c = std::cos(beta / 2.0);
  const double c2 = c * c;
  const double threshold = (2.0 - 2.0 * c2 * std::cos(phi) * std::cos(phi)) /
                           (c2 * std::cos(phi));
  return kappa * d < threshold;
}

// ---------------------------------------------------------------------------
// Two-disk periodic states

/// Horizontal no-force 2-periodic state launched from q0 on the left disk;
/// spin orientation resolved by a 2-collision closure check.
inline ParticleState two_disk_horizontal_state(const Table& table, double radius,
                                               double contact_angle,
                                               const MassDistribution& mass, double v,
                                               double center_distance = 2.0) {
  if (!(mass.gamma > 0.0))
    throw std::invalid_argument("two_disk_horizontal_state: gamma must be positive");
  const auto [q0, q1] = two_disk_contact_points(radius, contact_angle, center_distance);
  const double spin_mag = std::abs(v * std::sin(contact_angle) / mass.gamma);
  ParticleState s;
  s.pos = q0;
  s.vel = {v, 0.0};
  if (spin_mag == 0.0) return s; // contact_angle == 0: flat bounce, no spin
  double best_err = kInf;
  double best = spin_mag;
  for (const double sgn : {+1.0, -1.0}) {
    s.rot_vel = sgn * spin_mag;
    const OrbitResult r = run_orbit(s, table, ForceField::none(), mass, {2});
    const double err = r.events.size() < 2 ? kInf : norm(r.events[1].point - q0);
    if (err < best_err) {
      best_err = err;
      best = sgn * spin_mag;
    }
  }
  s.rot_vel = best;
  return s;
}

/// Theorem-2 style 2-periodic state between opposed two-disk contact points
/// under a downward force; the tangential wedge angle equals the contact
/// angle.
inline ParticleState two_disk_force_state(const Table& table, double radius,
                                          double contact_angle, double theta,
                                          const ForceField& force,
                                          const MassDistribution& mass,
                                          double center_distance = 2.0) {
  if (!(mass.gamma > 0.0))
    throw std::invalid_argument("two_disk_force_state: gamma must be positive");
  const auto [q0, q1] = two_disk_contact_points(radius, contact_angle, center_distance);
  const double d = q1.x - q0.x;
  const double w = chord_launch_speed(force.g, d, theta);
  const double spin_mag = std::abs(wedge_spin(w, theta, contact_angle, mass.gamma));
  ParticleState s;
  s.pos = q0;
  s.vel = {w * std::cos(theta), w * std::sin(theta)};
  double best_err = kInf;
  double best = spin_mag;
  for (const double sgn : {+1.0, -1.0}) {
    s.rot_vel = sgn * spin_mag;
    const OrbitResult r = run_orbit(s, table, force, mass, {2});
    const double err = r.events.size() < 2 ? kInf : norm(r.events[1].point - q0);
    if (err < best_err) {
      best_err = err;
      best = sgn * spin_mag;
    }
    if (spin_mag == 0.0) break;
  }
  s.rot_vel = best;
  return s;
}

// ---------------------------------------------------------------------------
// Survival counting and stability grids

struct SurvivalResult {
  int count = 0;
  Termination status = Termination::collision_limit;
};

using EscapePredicate = std::function<bool(const NextEvent&, const ParticleState&)>;

/// Collisions executed before the escape predicate fires (or the orbit
/// terminates), capped at max_collisions.
inline SurvivalResult survival_count(ParticleState state, const Table& table,
                                     const ForceField& force, const MassDistribution& mass,
                                     int max_collisions, const EscapePredicate& escapes) {
  SurvivalResult out;
  for (int i = 0; i < max_collisions; ++i) {
    NextEvent ne;
    try {
      ne = next_collision(state, table, force, mass);
    } catch (const std::exception&) {
      out.status = Termination::numerical;
      return out;
    }
    if (ne.status == EventStatus::none || ne.status == EventStatus::escaped ||
        (escapes && escapes(ne, state))) {
      out.status = Termination::escaped;
      return out;
    }
    if (ne.status == EventStatus::vertex) {
      out.status = Termination::pinched;
      return out;
    }
    state.orientation += state.rot_vel * ne.event.t_flight;
    state.t += ne.event.t_flight;
    state.pos = ne.event.point;
    state.vel = ne.event.vout;
    state.rot_vel = ne.event.vout_rot;
    ++out.count;
  }
  out.status = Termination::collision_limit;
  return out;
}

/// Escape rule for two-disk grids: any flight longer than cap_factor * (d/v).
inline EscapePredicate flight_time_escape(double d, double cap_factor = 10.0) {
  return [d, cap_factor](const NextEvent& ne, const ParticleState& s) {
    const double v = std::max(norm(s.vel), 1e-12);
    return ne.event.t_flight > cap_factor * d / v;
  };
}

enum class GridScenario { no_force_horizontal, force_theorem2, fixed_phic_vary_theta };

struct StabilityGridSpec {
  int n1 = 20;
  int n2 = 20;
  double axis1_lo = 0.05, axis1_hi = 0.95;  // disk radius R
  double axis2_lo = 0.05, axis2_hi = 1.35;  // contact angle phi_c, or theta
  double perturbation = 1e-3;               // relative, applied to the launch angle
  int max_collisions = 1000;
  double gamma = 1.0 / std::numbers::sqrt2;
  double g = 1.0;           // force scenarios
  double theta0 = 0.1;      // launch angle of the force_theorem2 scenario
  double fixed_phi_c = 0.4; // contact angle of the fixed_phic scenario
  unsigned threads = 0;     // 0: machine parallelism

  void validate() const {
    if (n1 < 2 || n2 < 2) throw std::invalid_argument("StabilityGridSpec: need n >= 2");
    if (!(perturbation > 0.0))
      throw std::invalid_argument("StabilityGridSpec: perturbation must be positive");
    if (max_collisions < 1)
      throw std::invalid_argument("StabilityGridSpec: max_collisions must be >= 1");
  }
};

struct GridRow {
  double axis1 = 0.0;
  double axis2 = 0.0;
  int count = 0;
  Termination status = Termination::collision_limit;
  bool low_confidence = false; // near-tangent contact angle
};

struct ResultTable {
  std::vector<GridRow> rows;
};

namespace detail {

inline ParticleState rotate_launch(ParticleState s, double dangle) {
  s.vel = rotate(s.vel, dangle);
  return s;
}

} // namespace detail

/// Survival-count grid over perturbed 2-periodic orbits between two disks.
inline ResultTable stability_grid(const StabilityGridSpec& spec, GridScenario scenario) {
  spec.validate();
  ResultTable table;
  table.rows.resize(std::size_t(spec.n1) * spec.n2);
  const MassDistribution mass = MassDistribution::from_gamma(spec.gamma);
  const unsigned threads = spec.threads == 0 ? default_threads() : spec.threads;

  parallel_for(table.rows.size(), threads, [&](std::size_t idx) {
    const int i = int(idx) / spec.n2;
    const int j = int(idx) % spec.n2;
    const double a1 = spec.axis1_lo + (spec.axis1_hi - spec.axis1_lo) * i / (spec.n1 - 1);
    const double a2 = spec.axis2_lo + (spec.axis2_hi - spec.axis2_lo) * j / (spec.n2 - 1);
    GridRow row;
    row.axis1 = a1;
    row.axis2 = a2;
    try {
      const double radius = a1;
      const Table disks = make_two_disk_table(radius);
      double contact = 0.0;
      ForceField force = ForceField::none();
      ParticleState s;
      double dangle = 0.0;
      switch (scenario) {
        case GridScenario::no_force_horizontal:
          contact = a2;
          s = two_disk_horizontal_state(disks, radius, contact, mass, 1.0);
          dangle = spec.perturbation; // launch angle is 0: perturb additively
          break;
        case GridScenario::force_theorem2:
          contact = a2;
          force = ForceField::gravity(spec.g);
          s = two_disk_force_state(disks, radius, contact, spec.theta0, force, mass);
          dangle = spec.theta0 * spec.perturbation;
          break;
        case GridScenario::fixed_phic_vary_theta:
          contact = spec.fixed_phi_c;
          force = ForceField::gravity(spec.g);
          s = two_disk_force_state(disks, radius, contact, a2, force, mass);
          dangle = a2 * spec.perturbation;
          break;
      }
      const auto [q0, q1] = two_disk_contact_points(radius, contact);
      const double d = q1.x - q0.x;
      const SurvivalResult sr =
          survival_count(detail::rotate_launch(s, dangle), disks, force, mass,
                         spec.max_collisions, flight_time_escape(d));
      row.count = sr.count;
      row.status = sr.status;
      row.low_confidence = contact > kPi / 2.0 - 0.1;
    } catch (const std::exception&) {
      row.status = Termination::numerical;
    }
    table.rows[idx] = row;
  });
  return table;
}

} // namespace noslip
