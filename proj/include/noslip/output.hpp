#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "noslip/core.hpp"
#include "noslip/dynamics.hpp"
#include "noslip/experiments.hpp"
#include "noslip/geometry.hpp"
#include "noslip/orbits.hpp"

namespace noslip {

/// Shortest round-tripping decimal form; used by every tabular writer so
/// identical runs produce identical bytes.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Tabular writers

inline void write_events_csv(std::ostream& os, const OrbitResult& orbit) {
  os << "index,t,t_flight,x,y,component,rule,vin_rot,vin_x,vin_y,"
        "vout_rot,vout_x,vout_y,status\n";
  long idx = 0;
  for (const CollisionEvent& e : orbit.events) {
    os << idx++ << ',' << fmt(e.t) << ',' << fmt(e.t_flight) << ',' << fmt(e.point.x)
       << ',' << fmt(e.point.y) << ',' << e.component << ','
       << (e.rule == CollisionRule::specular ? "specular" : "no-slip") << ','
       << fmt(e.vin_rot) << ',' << fmt(e.vin.x) << ',' << fmt(e.vin.y) << ','
       << fmt(e.vout_rot) << ',' << fmt(e.vout.x) << ',' << fmt(e.vout.y) << ",\n";
  }
  os << idx << ',' << fmt(orbit.final_state.t) << ",," << fmt(orbit.final_state.pos.x)
     << ',' << fmt(orbit.final_state.pos.y) << ",,,,,,,,," << to_string(orbit.termination)
     << '\n';
}

inline void write_galton_csv(std::ostream& os, const GaltonResult& result) {
  os << "particle,seed,status,terminal_y,arrival_t,n_collisions\n";
  for (const GaltonOutcome& o : result.outcomes) {
    os << o.particle << ',' << o.stream << ',' << to_string(o.status) << ','
       << fmt(o.terminal_x) << ',' << fmt(o.arrival_t) << ',' << o.n_collisions << '\n';
  }
}

inline void write_trapped_csv(std::ostream& os, const GaltonResult& result) {
  os << "particle,cell_i,cell_j,box_lo_x,box_lo_y,box_hi_x,box_hi_y,n_collisions\n";
  for (const TrappedDiagnostic& d : result.trapped) {
    os << d.particle << ',' << d.cell_i << ',' << d.cell_j << ',' << fmt(d.box_lo.x) << ','
       << fmt(d.box_lo.y) << ',' << fmt(d.box_hi.x) << ',' << fmt(d.box_hi.y) << ','
       << d.n_collisions << '\n';
  }
}

inline void write_phase_ndjson(std::ostream& os, const PhasePortrait& portrait) {
  for (const PhasePoint& p : portrait.points) {
    os << "{\"orbit_id\":" << p.orbit_id << ",\"collision_index\":" << p.collision_index
       << ",\"s\":" << fmt(p.s) << ",\"v_rot\":" << fmt(p.v_rot)
       << ",\"v_tan\":" << fmt(p.v_tan) << ",\"v_nrm\":" << fmt(p.v_nrm) << "}\n";
  }
}

inline void write_grid_csv(std::ostream& os, const ResultTable& grid) {
  os << "axis1,axis2,survival_count,status,low_confidence\n";
  for (const GridRow& r : grid.rows) {
    os << fmt(r.axis1) << ',' << fmt(r.axis2) << ',' << r.count << ','
       << to_string(r.status) << ',' << (r.low_confidence ? 1 : 0) << '\n';
  }
}

inline void write_channel_csv(std::ostream& os, const std::vector<ChannelTrial>& trials) {
  os << "trial,collided,collisions,extent_half,extent_full,status\n";
  for (const ChannelTrial& t : trials) {
    os << t.trial << ',' << (t.collided ? 1 : 0) << ',' << t.collisions << ','
       << fmt(t.extent_half) << ',' << fmt(t.extent_full) << ',' << to_string(t.status)
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG scenes

struct SvgOptions {
  double width_px = 800.0;
  double margin_px = 24.0;
  int samples_per_arc = 48; // flight-arc polyline samples (>= 32)
  std::size_t max_points = 200000;
  double point_radius_px = 1.6;
  bool draw_table = true;
};

namespace svg_detail {

struct Box {
  double lo_x = kInf, lo_y = kInf, hi_x = -kInf, hi_y = -kInf;
  void add(Vec2 p) {
    lo_x = std::min(lo_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_x = std::max(hi_x, p.x);
    hi_y = std::max(hi_y, p.y);
  }
  void pad(double f) {
    const double dx = std::max(hi_x - lo_x, 1e-9), dy = std::max(hi_y - lo_y, 1e-9);
    lo_x -= f * dx;
    hi_x += f * dx;
    lo_y -= f * dy;
    hi_y += f * dy;
  }
  double w() const { return hi_x - lo_x; }
  double h() const { return hi_y - lo_y; }
};

struct Mapper {
  Box box;
  double scale = 1.0, margin = 0.0, height_px = 0.0;
  Vec2 to_px(Vec2 p) const {
    return {margin + (p.x - box.lo_x) * scale,
            height_px - margin - (p.y - box.lo_y) * scale}; // y up
  }
};

inline Mapper make_mapper(Box box, const SvgOptions& opts) {
  Mapper m;
  m.box = box;
  const double usable = opts.width_px - 2.0 * opts.margin_px;
  m.scale = usable / std::max(box.w(), 1e-12);
  m.margin = opts.margin_px;
  m.height_px = box.h() * m.scale + 2.0 * opts.margin_px;
  return m;
}

inline std::string orbit_color(int orbit_id) {
  // golden-angle hue walk, fixed saturation/lightness
  const double h = std::fmod(137.50776405003785 * (orbit_id + 1), 360.0) / 60.0;
  const double s = 0.72, l = 0.42;
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (int(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double mlift = l - c / 2.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int((r + mlift) * 255.0 + 0.5),
                int((g + mlift) * 255.0 + 0.5), int((b + mlift) * 255.0 + 0.5));
  return buf;
}

inline void draw_table(std::ostringstream& os, const Table& table, const Mapper& m) {
  const char* style = "fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"";
  for (const auto& c : table.components) {
    if (c.kind == ComponentKind::segment) {
      Vec2 a = c.a, b = c.b;
      const Vec2 u = c.direction();
      const double diag = std::hypot(m.box.w(), m.box.h());
      if (c.extend_pos) b = c.a + u * (2.0 * diag + norm(c.b - c.a));
      if (c.extend_neg) a = c.a - u * 2.0 * diag;
      const Vec2 pa = m.to_px(a), pb = m.to_px(b);
      os << "<line x1=\"" << fmt6(pa.x) << "\" y1=\"" << fmt6(pa.y) << "\" x2=\""
         << fmt6(pb.x) << "\" y2=\"" << fmt6(pb.y) << "\" " << style << "/>\n";
    } else if (c.kind == ComponentKind::circle) {
      const Vec2 p = m.to_px(c.center);
      os << "<circle cx=\"" << fmt6(p.x) << "\" cy=\"" << fmt6(p.y) << "\" r=\""
         << fmt6(c.radius * m.scale) << "\" " << style << "/>\n";
    } else {
      const Vec2 p0 = m.to_px(c.center + c.radius * Vec2{std::cos(c.arc_start),
                                                         std::sin(c.arc_start)});
      const double end = c.arc_start + c.arc_span;
      const Vec2 p1 = m.to_px(c.center + c.radius * Vec2{std::cos(end), std::sin(end)});
      const int large = c.arc_span > kPi ? 1 : 0;
      os << "<path d=\"M " << fmt6(p0.x) << ' ' << fmt6(p0.y) << " A "
         << fmt6(c.radius * m.scale) << ' ' << fmt6(c.radius * m.scale) << " 0 " << large
         << " 0 " << fmt6(p1.x) << ' ' << fmt6(p1.y) << "\" " << style << "/>\n";
    }
  }
  if (const auto* lat = std::get_if<TriLattice>(&table.tiling)) {
    const Vec2 mid{(m.box.lo_x + m.box.hi_x) / 2.0, (m.box.lo_y + m.box.hi_y) / 2.0};
    const double reach = std::hypot(m.box.w(), m.box.h()) / 2.0 + lat->spacing;
    std::size_t drawn = 0;
    for (const LatticeSite& s : table.lattice_sites_in_disc(mid, reach)) {
      if (++drawn > 4000) break;
      const Vec2 p = m.to_px(s.center);
      os << "<circle cx=\"" << fmt6(p.x) << "\" cy=\"" << fmt6(p.y) << "\" r=\""
         << fmt6(lat->radius * m.scale) << "\" " << style << "/>\n";
    }
  }
}

} // namespace svg_detail

/// Table outline plus the sampled flight arcs between collisions, with
/// start and end markers.
inline std::string render_trajectory(const Table& table, const ParticleState& start,
                                     const std::vector<CollisionEvent>& events,
                                     const ForceField& force, const SvgOptions& opts = {}) {
  using svg_detail::Box;
  const Vec2 accel = force.accel();
  const int samples = std::max(opts.samples_per_arc, 32);

  // collect flight arcs: start -> ev0, ev_i -> ev_{i+1}
  std::vector<std::vector<Vec2>> arcs;
  Vec2 pos = start.pos;
  Vec2 vel = start.vel;
  for (const CollisionEvent& ev : events) {
    std::vector<Vec2> arc;
    arc.reserve(std::size_t(samples) + 1);
    for (int k = 0; k <= samples; ++k) {
      const double t = ev.t_flight * k / samples;
      arc.push_back(pos + vel * t + accel * (0.5 * t * t));
    }
    arcs.push_back(std::move(arc));
    pos = ev.point;
    vel = ev.vout;
  }

  Box box;
  box.add(start.pos);
  for (const auto& arc : arcs)
    for (const Vec2& p : arc) box.add(p);
  for (const auto& c : table.components) {
    if (c.kind == ComponentKind::segment && !c.extend_neg && !c.extend_pos) {
      box.add(c.a);
      box.add(c.b);
    } else if (c.kind != ComponentKind::segment) {
      box.add(c.center + Vec2{c.radius, c.radius});
      box.add(c.center - Vec2{c.radius, c.radius});
    }
  }
  box.pad(0.06);
  const svg_detail::Mapper m = svg_detail::make_mapper(box, opts);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(opts.width_px)
     << "\" height=\"" << fmt6(m.height_px) << "\" viewBox=\"0 0 " << fmt6(opts.width_px)
     << ' ' << fmt6(m.height_px) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (opts.draw_table) svg_detail::draw_table(os, table, m);
  for (const auto& arc : arcs) {
    os << "<polyline fill=\"none\" stroke=\"" << svg_detail::orbit_color(0)
       << "\" stroke-width=\"1\" points=\"";
    for (const Vec2& p : arc) {
      const Vec2 q = m.to_px(p);
      os << fmt6(q.x) << ',' << fmt6(q.y) << ' ';
    }
    os << "\"/>\n";
  }
  const Vec2 p0 = m.to_px(start.pos);
  os << "<circle cx=\"" << fmt6(p0.x) << "\" cy=\"" << fmt6(p0.y)
     << "\" r=\"3\" fill=\"#0a7d2c\"/>\n";
  if (!events.empty()) {
    const Vec2 p1 = m.to_px(events.back().point);
    os << "<circle cx=\"" << fmt6(p1.x) << "\" cy=\"" << fmt6(p1.y)
       << "\" r=\"3\" fill=\"#b00020\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

enum class PortraitMode { velocity_disk, s_vs_angle };

/// Scatter of projected collision velocities, one color per orbit.
inline std::string render_phase_portrait(const std::vector<PhasePoint>& points,
                                         PortraitMode mode, const SvgOptions& opts = {}) {
  const double w = opts.width_px;
  const double h = opts.width_px;
  const double margin = opts.margin_px;

  // deterministic thinning beyond the point cap
  std::size_t stride = 1;
  if (points.size() > opts.max_points && opts.max_points > 0)
    stride = (points.size() + opts.max_points - 1) / opts.max_points;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt6(w) << "\" height=\""
     << fmt6(h) << "\" viewBox=\"0 0 " << fmt6(w) << ' ' << fmt6(h) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (mode == PortraitMode::velocity_disk) {
    os << "<circle cx=\"" << fmt6(w / 2.0) << "\" cy=\"" << fmt6(h / 2.0) << "\" r=\""
       << fmt6(w / 2.0 - margin)
       << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  } else {
    os << "<rect x=\"" << fmt6(margin) << "\" y=\"" << fmt6(margin) << "\" width=\""
       << fmt6(w - 2.0 * margin) << "\" height=\"" << fmt6(h - 2.0 * margin)
       << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  }
  for (std::size_t i = 0; i < points.size(); i += stride) {
    const PhasePoint& p = points[i];
    double px, py;
    if (mode == PortraitMode::velocity_disk) {
      const auto [u, v] = velocity_disk_projection({p.v_rot, p.v_tan, p.v_nrm});
      px = w / 2.0 + u * (w / 2.0 - margin);
      py = h / 2.0 - v * (h / 2.0 - margin);
    } else {
      const double ang = std::atan2(p.v_tan, p.v_nrm); // in (-pi/2, pi/2)
      px = margin + p.s * (w - 2.0 * margin);
      py = h / 2.0 - ang / (kPi / 2.0) * (h / 2.0 - margin);
    }
    os << "<circle cx=\"" << fmt6(px) << "\" cy=\"" << fmt6(py) << "\" r=\""
       << fmt6(opts.point_radius_px) << "\" fill=\"" << svg_detail::orbit_color(p.orbit_id)
       << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace noslip
