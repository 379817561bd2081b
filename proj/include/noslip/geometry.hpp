#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "noslip/core.hpp"

namespace noslip {

enum class CollisionRule { no_slip, specular };

enum class ComponentKind { segment, circle, arc };

/// One oriented piece of table boundary. Segments double as rays or full
/// lines through the extend flags; circles and arcs flag whether the table
/// interior lies outside (scatterer) or inside (enclosing wall).
struct BoundaryComponent {
  ComponentKind kind = ComponentKind::segment;
  std::int64_t id = 0;
  CollisionRule rule = CollisionRule::no_slip;

  // segment | ray | line
  Vec2 a{}, b{};
  bool extend_neg = false;
  bool extend_pos = false;
  Vec2 seg_normal{}; // unit inward normal

  // circle | arc
  Vec2 center{};
  double radius = 0.0;
  double arc_start = 0.0; // radians, arc only
  double arc_span = 0.0;  // in (0, 2*pi]
  int normal_out = +1;    // +1: inward normal away from center (scatterer)

  static BoundaryComponent segment(Vec2 a, Vec2 b, Vec2 inward_normal) {
    if (norm(b - a) <= 0.0)
      throw std::invalid_argument("segment: endpoints must be distinct");
    BoundaryComponent c;
    c.kind = ComponentKind::segment;
    c.a = a;
    c.b = b;
    c.seg_normal = normalized(inward_normal);
    return c;
  }

  static BoundaryComponent ray(Vec2 origin, Vec2 dir, Vec2 inward_normal) {
    BoundaryComponent c = segment(origin, origin + normalized(dir), inward_normal);
    c.extend_pos = true;
    return c;
  }

  static BoundaryComponent line(Vec2 point, Vec2 dir, Vec2 inward_normal) {
    BoundaryComponent c = ray(point, dir, inward_normal);
    c.extend_neg = true;
    return c;
  }

  static BoundaryComponent circle(Vec2 center, double radius, int normal_out) {
    if (radius <= 0.0) throw std::invalid_argument("circle: radius must be positive");
    BoundaryComponent c;
    c.kind = ComponentKind::circle;
    c.center = center;
    c.radius = radius;
    c.normal_out = normal_out >= 0 ? +1 : -1;
    return c;
  }

  static BoundaryComponent arc(Vec2 center, double radius, double start,
                               double span, int normal_out) {
    if (span <= 0.0 || span > 2.0 * kPi + 1e-12)
      throw std::invalid_argument("arc: span must lie in (0, 2*pi]");
    BoundaryComponent c = circle(center, radius, normal_out);
    c.kind = ComponentKind::arc;
    c.arc_start = start;
    c.arc_span = span;
    return c;
  }

  Vec2 direction() const { return normalized(b - a); }

  double finite_length(double fallback) const {
    switch (kind) {
      case ComponentKind::segment:
        return (extend_neg || extend_pos) ? fallback : norm(b - a);
      case ComponentKind::circle:
        return 2.0 * kPi * radius;
      case ComponentKind::arc:
        return arc_span * radius;
    }
    return fallback;
  }

  /// Angle within [0, span) measured from arc_start; any value for circles.
  bool arc_contains_angle(double ang) const {
    if (kind != ComponentKind::arc) return true;
    double rel = std::fmod(ang - arc_start, 2.0 * kPi);
    if (rel < 0.0) rel += 2.0 * kPi;
    return rel <= arc_span;
  }
};

/// Orthonormal boundary frame; cross(tangent, normal) = +1 and the normal
/// points into the table interior.
struct Frame {
  Vec2 tangent{};
  Vec2 normal{};
};

inline Frame frame_from_normal(Vec2 inward_normal) {
  const Vec2 n = normalized(inward_normal);
  return {perp_cw(n), n};
}

// ---------------------------------------------------------------------------
// Tilings

struct PeriodicRect {
  double width = 0.0;
  double height = 0.0; // cell is [-w/2, w/2) x [-h/2, h/2)
};

struct TriLattice {
  double spacing = 0.0;  // in-row center spacing a
  double radius = 0.0;   // scatterer radius, 2r < a
  double top_y = 0.0;    // row 0 height; rows continue downward
  double row_height() const { return spacing * std::sqrt(3.0) / 2.0; }
};

using Tiling = std::variant<std::monostate, PeriodicRect, TriLattice>;

struct LatticeSite {
  std::int64_t i = 0;
  std::int64_t j = 0;
  Vec2 center{};
};

inline constexpr std::int64_t kLatticeIdBase = std::int64_t(1) << 60;

inline std::int64_t lattice_site_id(std::int64_t i, std::int64_t j) {
  return kLatticeIdBase | (j << 32) | std::int64_t(std::uint32_t(std::int32_t(i)));
}

inline bool is_lattice_id(std::int64_t id) { return id >= kLatticeIdBase; }

inline std::pair<std::int64_t, std::int64_t> lattice_id_split(std::int64_t id) {
  const std::int64_t rest = id & ~kLatticeIdBase;
  const std::int64_t j = rest >> 32;
  const std::int64_t i = std::int64_t(std::int32_t(std::uint32_t(rest & 0xffffffffll)));
  return {i, j};
}

// ---------------------------------------------------------------------------

struct Table {
  std::vector<BoundaryComponent> components;
  Tiling tiling{};
  std::optional<double> terminal_y; // absorbing height (Galton boards)
  std::string name;
  double char_length = 1.0;

  bool periodic() const { return std::holds_alternative<PeriodicRect>(tiling); }
  bool lattice() const { return std::holds_alternative<TriLattice>(tiling); }

  Vec2 wrap(Vec2 p) const {
    if (const auto* cell = std::get_if<PeriodicRect>(&tiling)) {
      p.x -= cell->width * std::floor(p.x / cell->width + 0.5);
      p.y -= cell->height * std::floor(p.y / cell->height + 0.5);
    }
    return p;
  }

  const BoundaryComponent* find(std::int64_t id) const {
    for (const auto& c : components)
      if (c.id == id) return &c;
    return nullptr;
  }

  /// Materializes lattice scatterers on demand; fixed components by id.
  BoundaryComponent component_for(std::int64_t id) const {
    if (is_lattice_id(id)) {
      const auto* lat = std::get_if<TriLattice>(&tiling);
      if (!lat) throw std::invalid_argument("component_for: no lattice tiling");
      const auto [i, j] = lattice_id_split(id);
      BoundaryComponent c =
          BoundaryComponent::circle(lattice_center(*lat, i, j), lat->radius, +1);
      c.id = id;
      return c;
    }
    const BoundaryComponent* c = find(id);
    if (!c) throw std::invalid_argument("component_for: unknown component id");
    return *c;
  }

  static Vec2 lattice_center(const TriLattice& lat, std::int64_t i, std::int64_t j) {
    const double off = (j % 2 != 0) ? 0.5 * lat.spacing : 0.0;
    return {double(i) * lat.spacing + off, lat.top_y - double(j) * lat.row_height()};
  }

  std::vector<LatticeSite> lattice_sites_in_disc(Vec2 c, double radius) const {
    std::vector<LatticeSite> out;
    const auto* lat = std::get_if<TriLattice>(&tiling);
    if (!lat) return out;
    const double h = lat->row_height();
    const std::int64_t j_lo =
        std::max<std::int64_t>(0, std::int64_t(std::ceil((lat->top_y - c.y - radius) / h)));
    const std::int64_t j_hi = std::int64_t(std::floor((lat->top_y - c.y + radius) / h));
    for (std::int64_t j = j_lo; j <= j_hi; ++j) {
      const double off = (j % 2 != 0) ? 0.5 * lat->spacing : 0.0;
      const std::int64_t i_lo =
          std::int64_t(std::ceil((c.x - radius - off) / lat->spacing));
      const std::int64_t i_hi =
          std::int64_t(std::floor((c.x + radius - off) / lat->spacing));
      for (std::int64_t i = i_lo; i <= i_hi; ++i) {
        const Vec2 ctr = lattice_center(*lat, i, j);
        if (norm(ctr - c) <= radius) out.push_back({i, j, ctr});
      }
    }
    return out;
  }

  /// All lattice sites at minimal distance from p (ties within 1e-9*spacing).
  std::vector<LatticeSite> nearest_lattice_sites(Vec2 p) const {
    const auto* lat = std::get_if<TriLattice>(&tiling);
    if (!lat) return {};
    double r = 1.5 * lat->spacing;
    std::vector<LatticeSite> near;
    for (int tries = 0; tries < 16 && near.empty(); ++tries, r *= 2.0)
      near = lattice_sites_in_disc(p, r);
    if (near.empty()) return {};
    double best = kInf;
    for (const auto& s : near) best = std::min(best, norm(s.center - p));
    std::vector<LatticeSite> out;
    for (const auto& s : near)
      if (norm(s.center - p) <= best + 1e-9 * lat->spacing) out.push_back(s);
    return out;
  }

  /// Signed inside-clearance: positive strictly inside, negative outside.
  /// Segments contribute half-plane distances (wall arrangements here are
  /// convex), circles their radial clearance. Arcs are ignored.
  double clearance(Vec2 p) const {
    double m = kInf;
    const Vec2 q = wrap(p);
    for (const auto& c : components) {
      switch (c.kind) {
        case ComponentKind::segment:
          m = std::min(m, dot(q - c.a, c.seg_normal));
          break;
        case ComponentKind::circle:
          m = std::min(m, double(c.normal_out) * (norm(q - c.center) - c.radius));
          break;
        case ComponentKind::arc:
          break;
      }
    }
    if (const auto* lat = std::get_if<TriLattice>(&tiling)) {
      for (const auto& s : lattice_sites_in_disc(q, 1.6 * lat->spacing))
        m = std::min(m, norm(s.center - q) - lat->radius);
    }
    return m;
  }

  bool contains(Vec2 p, double tol = 0.0) const { return clearance(p) >= -tol; }

  /// Closest component id and its absolute boundary distance.
  std::pair<std::int64_t, double> nearest_component(Vec2 p) const {
    const Vec2 q = wrap(p);
    std::int64_t best_id = -1;
    double best = kInf;
    for (const auto& c : components) {
      double d = kInf;
      if (c.kind == ComponentKind::segment) {
        const Vec2 u = c.direction();
        double s = dot(q - c.a, u);
        const double len = norm(c.b - c.a);
        if (!c.extend_neg) s = std::max(s, 0.0);
        if (!c.extend_pos) s = std::min(s, len);
        d = norm(q - (c.a + u * s));
      } else {
        d = std::abs(norm(q - c.center) - c.radius);
        if (!c.arc_contains_angle(std::atan2(q.y - c.center.y, q.x - c.center.x)))
          d = kInf;
      }
      if (d < best) {
        best = d;
        best_id = c.id;
      }
    }
    for (const auto& s : nearest_lattice_sites(q)) {
      const auto* lat = std::get_if<TriLattice>(&tiling);
      const double d = std::abs(norm(s.center - q) - lat->radius);
      if (d < best) {
        best = d;
        best_id = lattice_site_id(s.i, s.j);
      }
    }
    return {best_id, best};
  }

  void set_rule(CollisionRule r) {
    for (auto& c : components) c.rule = r;
    lattice_rule = r;
  }

  CollisionRule lattice_rule = CollisionRule::no_slip;
};

/// Boundary frame at a point of the given component; the point must lie on
/// the component within tol * char_length.
inline Frame local_frame(const Table& table, std::int64_t component_id, Vec2 point,
                         double tol = 1e-6) {
  const BoundaryComponent c = table.component_for(component_id);
  const Vec2 p = table.wrap(point);
  const double atol = tol * table.char_length;
  if (c.kind == ComponentKind::segment) {
    if (std::abs(dot(p - c.a, c.seg_normal)) > atol)
      throw std::invalid_argument("local_frame: point off boundary");
    const Vec2 u = c.direction();
    const double s = dot(p - c.a, u);
    const double len = norm(c.b - c.a);
    if ((!c.extend_neg && s < -atol) || (!c.extend_pos && s > len + atol))
      throw std::invalid_argument("local_frame: point outside segment span");
    return frame_from_normal(c.seg_normal);
  }
  const double rad = norm(p - c.center);
  if (std::abs(rad - c.radius) > atol)
    throw std::invalid_argument("local_frame: point off boundary");
  return frame_from_normal((p - c.center) * (double(c.normal_out) / rad));
}

// ---------------------------------------------------------------------------
// Table zoo

/// Upper half plane: one full line y = 0 with inward normal (0, 1).
inline Table make_half_plane() {
  Table t;
  t.name = "half-plane";
  auto wall = BoundaryComponent::line({0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0});
  wall.id = 0;
  t.components.push_back(wall);
  return t;
}

enum class WedgeOrientation { opening_up, opening_down };

struct WedgeSpec {
  double half_angle = kPi / 4.0; // wall-to-bisector angle, in (0, pi/2)
  WedgeOrientation orientation = WedgeOrientation::opening_up;
  Vec2 vertex{};
};

/// Two half-lines meeting at the vertex, bisector vertical.
inline Table make_wedge(const WedgeSpec& spec) {
  const double phi = spec.half_angle;
  if (!(phi > 0.0 && phi < kPi / 2.0))
    throw std::invalid_argument("make_wedge: half angle must lie in (0, pi/2)");
  const double up = spec.orientation == WedgeOrientation::opening_up ? 1.0 : -1.0;
  Table t;
  t.name = "wedge";
  const Vec2 dir_left{-std::sin(phi), up * std::cos(phi)};
  const Vec2 dir_right{std::sin(phi), up * std::cos(phi)};
  auto left = BoundaryComponent::ray(spec.vertex, dir_left, {std::cos(phi), up * std::sin(phi)});
  auto right = BoundaryComponent::ray(spec.vertex, dir_right, {-std::cos(phi), up * std::sin(phi)});
  left.id = 0;
  right.id = 1;
  t.components = {left, right};
  return t;
}

enum class CellShape { square, hexagon };

/// Cell walls (or a periodic square cell) around a central disk scatterer.
inline Table make_sinai_cell(CellShape shape, double side, double scatterer_radius,
                             bool periodic) {
  if (side <= 0.0) throw std::invalid_argument("make_sinai_cell: side must be positive");
  if (scatterer_radius <= 0.0)
    throw std::invalid_argument("make_sinai_cell: radius must be positive");
  const double inradius =
      shape == CellShape::square ? side / 2.0 : side * std::sqrt(3.0) / 2.0;
  if (scatterer_radius >= inradius)
    throw std::invalid_argument("make_sinai_cell: scatterer touches cell walls");

  Table t;
  t.name = periodic ? "sinai-torus" : "sinai-cell";
  t.char_length = side;
  std::int64_t next_id = 0;
  if (periodic) {
    if (shape != CellShape::square)
      throw std::invalid_argument("make_sinai_cell: periodic tiling requires a square cell");
    t.tiling = PeriodicRect{side, side};
  } else {
    const int n = shape == CellShape::square ? 4 : 6;
    const double circum = shape == CellShape::square ? side / std::sqrt(2.0) : side;
    const double a0 = kPi / 2.0 - kPi / n;
    std::vector<Vec2> verts(n);
    for (int k = 0; k < n; ++k) {
      const double ang = a0 + 2.0 * kPi * k / n;
      verts[k] = {circum * std::cos(ang), circum * std::sin(ang)};
    }
    for (int k = 0; k < n; ++k) {
      const Vec2 a = verts[k], b = verts[(k + 1) % n];
      auto wall = BoundaryComponent::segment(a, b, perp_ccw(normalized(b - a)));
      wall.id = next_id++;
      t.components.push_back(wall);
    }
  }
  auto disk = BoundaryComponent::circle({0.0, 0.0}, scatterer_radius, +1);
  disk.id = next_id;
  t.components.push_back(disk);
  return t;
}

/// Triangular lattice of disk scatterers, unbounded horizontally and downward
/// to the absorbing terminal height. Scatterers materialize on demand.
inline Table make_galton_board(double spacing, double scatterer_radius, double top_height,
                               double terminal_height) {
  if (spacing <= 0.0) throw std::invalid_argument("make_galton_board: spacing must be positive");
  if (!(2.0 * scatterer_radius < spacing))
    throw std::invalid_argument("make_galton_board: scatterers overlap (2r >= spacing)");
  if (!(terminal_height < top_height))
    throw std::invalid_argument("make_galton_board: terminal height must lie below top");
  Table t;
  t.name = "galton";
  t.char_length = spacing;
  t.tiling = TriLattice{spacing, scatterer_radius, top_height};
  t.terminal_y = terminal_height;
  return t;
}

/// Two identical disks with centers (-/+ center_distance/2, 0).
inline Table make_two_disk_table(double radius, double center_distance = 2.0) {
  if (!(radius > 0.0 && 2.0 * radius < center_distance))
    throw std::invalid_argument("make_two_disk_table: need 0 < R < center_distance/2");
  Table t;
  t.name = "two-disk";
  t.char_length = center_distance / 2.0;
  auto left = BoundaryComponent::circle({-center_distance / 2.0, 0.0}, radius, +1);
  auto right = BoundaryComponent::circle({center_distance / 2.0, 0.0}, radius, +1);
  left.id = 0;
  right.id = 1;
  t.components = {left, right};
  return t;
}

/// Opposed contact points on the facing quadrants, parametrized by the angle
/// from the horizontal. Returns {q0 on the left disk, q1 on the right disk}.
inline std::pair<Vec2, Vec2> two_disk_contact_points(double radius, double contact_angle,
                                                     double center_distance = 2.0) {
  const double c = center_distance / 2.0;
  const Vec2 q0{-c + radius * std::cos(contact_angle), radius * std::sin(contact_angle)};
  const Vec2 q1{c - radius * std::cos(contact_angle), radius * std::sin(contact_angle)};
  return {q0, q1};
}

inline Table make_regular_polygon(int sides, double circumradius) {
  if (sides < 3) throw std::invalid_argument("make_regular_polygon: need >= 3 sides");
  if (circumradius <= 0.0)
    throw std::invalid_argument("make_regular_polygon: circumradius must be positive");
  Table t;
  t.name = "polygon-" + std::to_string(sides);
  t.char_length = circumradius;
  const double a0 = kPi / 2.0 - kPi / sides;
  std::vector<Vec2> verts(sides);
  for (int k = 0; k < sides; ++k) {
    const double ang = a0 + 2.0 * kPi * k / sides;
    verts[k] = {circumradius * std::cos(ang), circumradius * std::sin(ang)};
  }
  for (int k = 0; k < sides; ++k) {
    const Vec2 a = verts[k], b = verts[(k + 1) % sides];
    auto wall = BoundaryComponent::segment(a, b, perp_ccw(normalized(b - a)));
    wall.id = k;
    t.components.push_back(wall);
  }
  return t;
}

inline Table make_rectangle(double width, double height) {
  if (width <= 0.0 || height <= 0.0)
    throw std::invalid_argument("make_rectangle: sides must be positive");
  Table t;
  t.name = "rectangle";
  t.char_length = std::max(width, height);
  const double w = width / 2.0, h = height / 2.0;
  const Vec2 v[4] = {{-w, -h}, {w, -h}, {w, h}, {-w, h}};
  for (int k = 0; k < 4; ++k) {
    const Vec2 a = v[k], b = v[(k + 1) % 4];
    auto wall = BoundaryComponent::segment(a, b, perp_ccw(normalized(b - a)));
    wall.id = k;
    t.components.push_back(wall);
  }
  return t;
}

enum class ChannelAxis { vertical, horizontal };

/// Infinite strip of the given width; the axis is the unbounded direction.
inline Table make_channel(double width, ChannelAxis axis) {
  if (width <= 0.0) throw std::invalid_argument("make_channel: width must be positive");
  Table t;
  t.name = "channel";
  t.char_length = width;
  const double w = width / 2.0;
  BoundaryComponent lo, hi;
  if (axis == ChannelAxis::vertical) {
    lo = BoundaryComponent::line({-w, 0.0}, {0.0, 1.0}, {1.0, 0.0});
    hi = BoundaryComponent::line({w, 0.0}, {0.0, 1.0}, {-1.0, 0.0});
  } else {
    lo = BoundaryComponent::line({0.0, -w}, {1.0, 0.0}, {0.0, 1.0});
    hi = BoundaryComponent::line({0.0, w}, {1.0, 0.0}, {0.0, -1.0});
  }
  lo.id = 0;
  hi.id = 1;
  t.components = {lo, hi};
  return t;
}

// ---------------------------------------------------------------------------
// Arclength parametrization, used by phase portraits: each component is
// normalized by its own length and concatenated in component-id order.

inline double component_arclength(const BoundaryComponent& c, Vec2 p, double fallback_len) {
  switch (c.kind) {
    case ComponentKind::segment: {
      const double s = dot(p - c.a, c.direction());
      const double len = c.finite_length(fallback_len);
      return std::clamp(s / len, 0.0, 1.0);
    }
    case ComponentKind::circle: {
      double ang = std::atan2(p.y - c.center.y, p.x - c.center.x);
      if (ang < 0.0) ang += 2.0 * kPi;
      return ang / (2.0 * kPi);
    }
    case ComponentKind::arc: {
      double rel = std::fmod(std::atan2(p.y - c.center.y, p.x - c.center.x) - c.arc_start,
                             2.0 * kPi);
      if (rel < 0.0) rel += 2.0 * kPi;
      return std::clamp(rel / c.arc_span, 0.0, 1.0);
    }
  }
  return 0.0;
}

/// Global boundary parameter in [0, 1). Lattice scatterers are not part of
/// the parametrization (portraits target bounded tables).
inline double global_arclength(const Table& table, std::int64_t component_id, Vec2 p) {
  double total = 0.0;
  double prefix = 0.0;
  bool seen = false;
  double here = 0.0;
  for (const auto& c : table.components) {
    const double len = c.finite_length(table.char_length);
    if (c.id == component_id) {
      here = prefix + component_arclength(c, table.wrap(p), table.char_length) * len;
      seen = true;
    }
    if (!seen) prefix += len;
    total += len;
  }
  if (!seen || total <= 0.0) return 0.0;
  double s = here / total;
  if (s >= 1.0) s -= 1.0;
  return s;
}

} // namespace noslip
