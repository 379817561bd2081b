#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "noslip/core.hpp"
#include "noslip/dynamics.hpp"
#include "noslip/geometry.hpp"
#include "noslip/parallel.hpp"
#include "noslip/rng.hpp"

namespace noslip {

// ---------------------------------------------------------------------------
// Histogram

struct Histogram {
  std::vector<long> bins;
  long underflow = 0;
  long overflow = 0;

  long total() const {
    long t = underflow + overflow;
    for (long b : bins) t += b;
    return t;
  }
};

inline Histogram histogram(const std::vector<double>& values, int n_bins, double lo,
                           double hi) {
  if (n_bins < 1) throw std::invalid_argument("histogram: need n_bins >= 1");
  if (!(hi > lo)) throw std::invalid_argument("histogram: need hi > lo");
  Histogram h;
  h.bins.assign(n_bins, 0);
  const double w = (hi - lo) / n_bins;
  for (double v : values) {
    if (v < lo) {
      ++h.underflow;
    } else if (v >= hi) {
      ++h.overflow;
    } else {
      ++h.bins[std::size_t((v - lo) / w)];
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Galton board batches

enum class DirectionSampling { down_semicircle, full_circle, spin_randomized };

struct GaltonConfig {
  double spacing = 1.0;
  double scatterer_radius = 0.25;
  double top_y = 0.0;
  double terminal_y = -20.0 * std::numbers::sqrt3 / 2.0; // 20 rows down
  int n_particles = 10000;
  double speed = 1.0;
  double spin = 0.0;
  Vec2 drop{0.0, 2.0};
  double t_max = 1000.0;
  std::uint64_t seed = 1;
  CollisionRule rule = CollisionRule::no_slip;
  double gamma = 1.0 / std::numbers::sqrt2;
  double g = 1.0;
  Vec2 g_dir{0.0, -1.0};
  DirectionSampling sampling = DirectionSampling::down_semicircle;
  long max_collisions = 500000;
  unsigned threads = 0;

  void validate() const {
    if (n_particles < 1) throw std::invalid_argument("GaltonConfig: n_particles >= 1");
    if (!(t_max > 0.0)) throw std::invalid_argument("GaltonConfig: t_max must be positive");
    if (!(terminal_y < drop.y))
      throw std::invalid_argument("GaltonConfig: terminal height must lie below the drop point");
    if (!(speed > 0.0)) throw std::invalid_argument("GaltonConfig: speed must be positive");
  }
};

enum class GaltonStatus { arrived, unfinished, pinched, numerical };

inline const char* to_string(GaltonStatus s) {
  switch (s) {
    case GaltonStatus::arrived: return "arrived";
    case GaltonStatus::unfinished: return "unfinished";
    case GaltonStatus::pinched: return "pinched";
    case GaltonStatus::numerical: return "numerical";
  }
  return "?";
}

struct GaltonOutcome {
  int particle = 0;
  std::uint64_t stream = 0;
  GaltonStatus status = GaltonStatus::unfinished;
  double terminal_x = 0.0; // horizontal displacement at arrival
  double arrival_t = 0.0;
  long n_collisions = 0;
  double energy_drift = 0.0; // relative, over the whole descent
};

struct TrappedDiagnostic {
  int particle = 0;
  std::int64_t cell_i = 0, cell_j = 0; // last-visited lattice cell
  Vec2 box_lo{}, box_hi{};             // bounding box of the final collisions
  long n_collisions = 0;
};

struct GaltonResult {
  std::vector<GaltonOutcome> outcomes;
  std::vector<TrappedDiagnostic> trapped;
  long arrived = 0;
  long unfinished = 0;
  long failed = 0; // pinched + numerical

  double arrival_fraction() const {
    return outcomes.empty() ? 0.0 : double(arrived) / double(outcomes.size());
  }

  std::vector<double> arrived_displacements() const {
    std::vector<double> xs;
    xs.reserve(std::size_t(arrived));
    for (const auto& o : outcomes)
      if (o.status == GaltonStatus::arrived) xs.push_back(o.terminal_x);
    return xs;
  }
};

namespace detail {

struct GaltonParticleRun {
  GaltonOutcome outcome;
  std::deque<Vec2> tail; // last collision points, for trapped diagnostics
  std::int64_t last_i = 0, last_j = 0;
};

inline GaltonParticleRun run_galton_particle(int index, const GaltonConfig& cfg,
                                             const Table& board, const ForceField& force,
                                             const MassDistribution& mass) {
  GaltonParticleRun run;
  GaltonOutcome& out = run.outcome;
  out.particle = index;
  out.stream = Rng::mix64(cfg.seed ^ Rng::mix64(std::uint64_t(index)));
  Rng rng(cfg.seed, std::uint64_t(index));

  ParticleState s;
  s.pos = cfg.drop;
  switch (cfg.sampling) {
    case DirectionSampling::down_semicircle:
      s.vel = cfg.speed * rng.unit_vector(-kPi, 0.0);
      s.rot_vel = cfg.spin;
      break;
    case DirectionSampling::full_circle:
      s.vel = cfg.speed * rng.unit_vector();
      s.rot_vel = cfg.spin;
      break;
    case DirectionSampling::spin_randomized: {
      // random unit 3-velocity scaled to the configured speed
      double r = rng.gaussian(), a = rng.gaussian(), b = rng.gaussian();
      const double n = std::sqrt(r * r + a * a + b * b);
      if (n > 0.0) {
        s.rot_vel = cfg.speed * r / n;
        s.vel = {cfg.speed * a / n, cfg.speed * std::abs(b) / n * -1.0};
      }
      break;
    }
  }

  const double e0 = mechanical_energy(s, force);
  const std::size_t tail_keep = 1000;
  while (true) {
    if (out.n_collisions >= cfg.max_collisions) {
      out.status = GaltonStatus::unfinished;
      break;
    }
    NextEvent ne;
    try {
      ne = next_collision(s, board, force, mass);
    } catch (const std::exception&) {
      out.status = GaltonStatus::numerical;
      break;
    }
    if (ne.status == EventStatus::escaped) {
      if (s.t + ne.t_escape > cfg.t_max) {
        out.status = GaltonStatus::unfinished;
        break;
      }
      out.status = GaltonStatus::arrived;
      out.terminal_x = ne.escape_point.x;
      out.arrival_t = s.t + ne.t_escape;
      s = propagate(s, ne.t_escape, force);
      break;
    }
    if (ne.status == EventStatus::none) {
      out.status = GaltonStatus::unfinished;
      break;
    }
    if (ne.status == EventStatus::vertex) {
      out.status = GaltonStatus::pinched;
      break;
    }
    if (s.t + ne.event.t_flight > cfg.t_max) {
      out.status = GaltonStatus::unfinished;
      break;
    }
    s.orientation += s.rot_vel * ne.event.t_flight;
    s.t += ne.event.t_flight;
    s.pos = ne.event.point;
    s.vel = ne.event.vout;
    s.rot_vel = ne.event.vout_rot;
    ++out.n_collisions;
    run.tail.push_back(ne.event.point);
    if (run.tail.size() > tail_keep) run.tail.pop_front();
    if (is_lattice_id(ne.event.component)) {
      const auto [i, j] = lattice_id_split(ne.event.component);
      run.last_i = i;
      run.last_j = j;
    }
  }
  const double e1 = mechanical_energy(s, force);
  out.energy_drift = std::abs(e1 - e0) / std::max(std::abs(e0), 1e-300);
  return run;
}

} // namespace detail

/// Drop n particles with random initial directions and record per-particle
/// outcomes; per-particle failures never abort the batch.
inline GaltonResult run_galton(const GaltonConfig& cfg) {
  cfg.validate();
  const Table board =
      make_galton_board(cfg.spacing, cfg.scatterer_radius, cfg.top_y, cfg.terminal_y);
  Table runboard = board;
  runboard.lattice_rule = cfg.rule;
  const ForceField force = ForceField::gravity(cfg.g, cfg.g_dir);
  const MassDistribution mass =
      MassDistribution::from_gamma(cfg.rule == CollisionRule::specular ? 0.0 : cfg.gamma);

  GaltonResult result;
  result.outcomes.resize(std::size_t(cfg.n_particles));
  std::vector<detail::GaltonParticleRun> runs(std::size_t(cfg.n_particles));
  const unsigned threads = cfg.threads == 0 ? default_threads() : cfg.threads;
  parallel_for(std::size_t(cfg.n_particles), threads, [&](std::size_t i) {
    runs[i] = detail::run_galton_particle(int(i), cfg, runboard, force, mass);
  });

  for (std::size_t i = 0; i < runs.size(); ++i) {
    result.outcomes[i] = runs[i].outcome;
    switch (runs[i].outcome.status) {
      case GaltonStatus::arrived: ++result.arrived; break;
      case GaltonStatus::unfinished: ++result.unfinished; break;
      default: ++result.failed; break;
    }
    if (runs[i].outcome.status == GaltonStatus::unfinished && !runs[i].tail.empty()) {
      TrappedDiagnostic d;
      d.particle = int(i);
      d.cell_i = runs[i].last_i;
      d.cell_j = runs[i].last_j;
      d.box_lo = d.box_hi = runs[i].tail.front();
      for (const Vec2& p : runs[i].tail) {
        d.box_lo.x = std::min(d.box_lo.x, p.x);
        d.box_lo.y = std::min(d.box_lo.y, p.y);
        d.box_hi.x = std::max(d.box_hi.x, p.x);
        d.box_hi.y = std::max(d.box_hi.y, p.y);
      }
      d.n_collisions = runs[i].outcome.n_collisions;
      result.trapped.push_back(d);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Velocity phase portraits

struct PhasePoint {
  double s = 0.0; // global boundary arclength parameter in [0, 1)
  double v_rot = 0.0, v_tan = 0.0, v_nrm = 0.0;
  int orbit_id = 0;
  int collision_index = 0;
};

struct PhasePortraitConfig {
  Table table;
  MassDistribution mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  ForceField force = ForceField::none();
  int n_orbits = 50;
  int collisions_per_orbit = 200;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  void validate() const {
    if (n_orbits < 1 || collisions_per_orbit < 1)
      throw std::invalid_argument("PhasePortraitConfig: need n_orbits, collisions >= 1");
    if (table.components.empty())
      throw std::invalid_argument("PhasePortraitConfig: table has no components");
  }
};

struct PhasePortrait {
  std::vector<PhasePoint> points;
  std::vector<Termination> orbit_status;
};

/// Drop the normal component of a unit outgoing velocity; lands in the
/// closed unit disk.
inline std::pair<double, double> velocity_disk_projection(const Vec3& v) {
  return {v.rot, v.tan};
}

namespace detail {

inline ParticleState random_boundary_state(const Table& table, Rng& rng) {
  // component chosen with probability proportional to its length
  double total = 0.0;
  for (const auto& c : table.components) total += c.finite_length(table.char_length);
  double pick = rng.uniform() * total;
  const BoundaryComponent* comp = &table.components.back();
  for (const auto& c : table.components) {
    pick -= c.finite_length(table.char_length);
    if (pick <= 0.0) {
      comp = &c;
      break;
    }
  }
  Vec2 point{}, normal{};
  if (comp->kind == ComponentKind::segment) {
    const double len = comp->finite_length(table.char_length);
    const double s = rng.uniform(0.0, len);
    point = comp->a + comp->direction() * s;
    normal = comp->seg_normal;
  } else {
    const double span = comp->kind == ComponentKind::arc ? comp->arc_span : 2.0 * kPi;
    const double ang = comp->arc_start + rng.uniform(0.0, span);
    const Vec2 radial{std::cos(ang), std::sin(ang)};
    point = comp->center + radial * comp->radius;
    normal = radial * double(comp->normal_out);
  }
  const Frame frame = frame_from_normal(normal);
  // outgoing unit 3-velocity, uniform on the upper half sphere
  double rot, tan, nrm;
  do {
    rot = rng.gaussian();
    tan = rng.gaussian();
    nrm = rng.gaussian();
    const double n = std::sqrt(rot * rot + tan * tan + nrm * nrm);
    rot /= n;
    tan /= n;
    nrm = std::abs(nrm) / n;
  } while (!(nrm > 1e-6));
  ParticleState s;
  s.pos = point;
  s.rot_vel = rot;
  s.vel = frame.tangent * tan + frame.normal * nrm;
  return s;
}

} // namespace detail

/// Record the unit outgoing velocity triple at every collision of n random
/// orbits; early terminations keep their partial data.
inline PhasePortrait sample_phase_portrait(const PhasePortraitConfig& cfg) {
  cfg.validate();
  PhasePortrait out;
  std::vector<std::vector<PhasePoint>> per_orbit(std::size_t(cfg.n_orbits));
  out.orbit_status.resize(std::size_t(cfg.n_orbits));
  const unsigned threads = cfg.threads == 0 ? default_threads() : cfg.threads;
  parallel_for(std::size_t(cfg.n_orbits), threads, [&](std::size_t i) {
    Rng rng(cfg.seed, i);
    const ParticleState start = detail::random_boundary_state(cfg.table, rng);
    const OrbitResult r =
        run_orbit(start, cfg.table, cfg.force, cfg.mass, {cfg.collisions_per_orbit});
    out.orbit_status[i] = r.termination;
    auto& pts = per_orbit[i];
    pts.reserve(r.events.size());
    int k = 0;
    for (const CollisionEvent& ev : r.events) {
      const Vec3 local{ev.vout_rot, dot(ev.vout, ev.frame.tangent),
                       dot(ev.vout, ev.frame.normal)};
      const double n = norm(local);
      if (n <= 0.0) continue;
      PhasePoint p;
      p.s = global_arclength(cfg.table, ev.component, ev.point);
      p.v_rot = local.rot / n;
      p.v_tan = local.tan / n;
      p.v_nrm = local.nrm / n;
      p.orbit_id = int(i);
      p.collision_index = k++;
      pts.push_back(p);
    }
  });
  for (auto& pts : per_orbit)
    out.points.insert(out.points.end(), pts.begin(), pts.end());
  return out;
}

// ---------------------------------------------------------------------------
// Channel boundedness probes

enum class ChannelForce { none, parallel, orthogonal };

struct ChannelTrial {
  int trial = 0;
  bool collided = true;
  long collisions = 0;
  double extent_half = 0.0; // max |axial displacement| over the first half
  double extent_full = 0.0; // ... over the whole run
  Termination status = Termination::collision_limit;
};

/// Bounce n_trials random states down an infinite strip and track the
/// maximal axial displacement, with a halfway checkpoint for growth probes.
inline std::vector<ChannelTrial> run_channel_boundedness(double width, ChannelForce kind,
                                                         const MassDistribution& mass,
                                                         int n_trials, long n_collisions,
                                                         std::uint64_t seed = 1,
                                                         unsigned threads = 0,
                                                         double g = 1.0) {
  if (!(width > 0.0)) throw std::invalid_argument("run_channel_boundedness: width > 0");
  const bool vertical = kind != ChannelForce::orthogonal;
  const Table table =
      make_channel(width, vertical ? ChannelAxis::vertical : ChannelAxis::horizontal);
  ForceField force = ForceField::none();
  if (kind != ChannelForce::none) force = ForceField::gravity(g);

  std::vector<ChannelTrial> trials;
  trials.resize(std::size_t(n_trials));
  const unsigned use = threads == 0 ? default_threads() : threads;
  parallel_for(std::size_t(n_trials), use, [&](std::size_t i) {
    Rng rng(seed, i);
    ChannelTrial& tr = trials[i];
    tr.trial = int(i);

    ParticleState s;
    double speed = 1.0;
    if (kind == ChannelForce::orthogonal) {
      // enough vertical energy to reach the upper wall from anywhere
      speed = 4.0 * std::sqrt(g * width);
      s.pos = {0.0, rng.uniform(-0.4, 0.0) * width};
      const double ang = rng.uniform(kPi / 6.0, 5.0 * kPi / 6.0);
      s.vel = speed * Vec2{std::cos(ang), std::sin(ang)};
      if (std::abs(s.vel.x) < 0.05 * speed) s.vel.x = 0.05 * speed;
    } else {
      s.pos = {rng.uniform(-0.4, 0.4) * width, 0.0};
      const double ang = rng.uniform(-kPi / 3.0, kPi / 3.0); // wall-ward
      s.vel = speed * Vec2{std::cos(ang), std::sin(ang)};
      if (rng.uniform() < 0.5) s.vel.x = -s.vel.x;
    }
    s.rot_vel = rng.uniform(-0.5, 0.5) * speed;

    const double axial0 = vertical ? s.pos.y : s.pos.x;
    for (long k = 0; k < n_collisions; ++k) {
      NextEvent ne;
      try {
        ne = next_collision(s, table, force, mass);
      } catch (const std::exception&) {
        tr.status = Termination::numerical;
        return;
      }
      if (ne.status != EventStatus::hit) {
        tr.status = Termination::no_event;
        tr.collided = tr.collisions > 0;
        return;
      }
      s.orientation += s.rot_vel * ne.event.t_flight;
      s.t += ne.event.t_flight;
      s.pos = ne.event.point;
      s.vel = ne.event.vout;
      s.rot_vel = ne.event.vout_rot;
      ++tr.collisions;
      const double axial = vertical ? s.pos.y : s.pos.x;
      const double extent = std::abs(axial - axial0);
      tr.extent_full = std::max(tr.extent_full, extent);
      if (k < n_collisions / 2) tr.extent_half = std::max(tr.extent_half, extent);
    }
  });
  return trials;
}

} // namespace noslip
