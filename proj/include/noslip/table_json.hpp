#pragma once

#include <string>

#include <json.hpp>

#include "noslip/geometry.hpp"

namespace noslip {

using json = nlohmann::json;

inline Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }

/// Build a table from its JSON description: {"kind": ..., parameters...}.
inline Table table_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "half-plane") return make_half_plane();
  if (kind == "wedge") {
    WedgeSpec spec;
    spec.half_angle = j.at("phi").get<double>();
    const std::string o = j.value("orientation", "up");
    spec.orientation = o == "down" ? WedgeOrientation::opening_down
                                   : WedgeOrientation::opening_up;
    if (j.contains("vertex")) spec.vertex = vec2_from_json(j.at("vertex"));
    return make_wedge(spec);
  }
  if (kind == "sinai-cell") {
    const std::string cell = j.value("cell", "square");
    return make_sinai_cell(cell == "hexagon" ? CellShape::hexagon : CellShape::square,
                           j.at("side").get<double>(),
                           j.at("scatterer_radius").get<double>(),
                           j.value("periodic", false));
  }
  if (kind == "galton") {
    return make_galton_board(j.at("spacing").get<double>(), j.at("radius").get<double>(),
                             j.value("top", 0.0), j.at("terminal").get<double>());
  }
  if (kind == "two-disk") {
    return make_two_disk_table(j.at("radius").get<double>(),
                               j.value("center_distance", 2.0));
  }
  if (kind == "polygon") {
    return make_regular_polygon(j.at("sides").get<int>(),
                                j.value("circumradius", 1.0));
  }
  if (kind == "rectangle") {
    return make_rectangle(j.at("width").get<double>(), j.at("height").get<double>());
  }
  if (kind == "channel") {
    const std::string axis = j.value("axis", "vertical");
    return make_channel(j.at("width").get<double>(),
                        axis == "horizontal" ? ChannelAxis::horizontal
                                             : ChannelAxis::vertical);
  }
  throw std::invalid_argument("table_from_json: unknown kind '" + kind + "'");
}

/// Inverse of table_from_json for the constructor zoo; round-trips through
/// the same parameters.
inline json table_to_json(const Table& t) {
  json j;
  if (t.name == "half-plane") {
    j["kind"] = "half-plane";
  } else if (t.name == "wedge") {
    j["kind"] = "wedge";
    const auto& left = t.components.at(0);
    const Vec2 dir = left.direction();
    j["phi"] = std::atan2(std::abs(dir.x), std::abs(dir.y));
    j["orientation"] = dir.y >= 0.0 ? "up" : "down";
    j["vertex"] = vec2_to_json(left.a);
  } else if (t.name == "sinai-cell" || t.name == "sinai-torus") {
    j["kind"] = "sinai-cell";
    j["cell"] = t.components.size() == 7 ? "hexagon" : "square";
    j["side"] = t.char_length;
    j["scatterer_radius"] = t.components.back().radius;
    j["periodic"] = t.periodic();
  } else if (t.name == "galton") {
    const auto& lat = std::get<TriLattice>(t.tiling);
    j["kind"] = "galton";
    j["spacing"] = lat.spacing;
    j["radius"] = lat.radius;
    j["top"] = lat.top_y;
    j["terminal"] = *t.terminal_y;
  } else if (t.name == "two-disk") {
    j["kind"] = "two-disk";
    j["radius"] = t.components.at(0).radius;
    j["center_distance"] = 2.0 * t.char_length;
  } else if (t.name.rfind("polygon-", 0) == 0) {
    j["kind"] = "polygon";
    j["sides"] = int(t.components.size());
    j["circumradius"] = t.char_length;
  } else if (t.name == "rectangle") {
    j["kind"] = "rectangle";
    j["width"] = norm(t.components.at(0).b - t.components.at(0).a);
    j["height"] = norm(t.components.at(1).b - t.components.at(1).a);
  } else if (t.name == "channel") {
    j["kind"] = "channel";
    j["width"] = t.char_length;
    j["axis"] = t.components.at(0).direction().y != 0.0 ? "vertical" : "horizontal";
  } else {
    throw std::invalid_argument("table_to_json: unnamed table");
  }
  return j;
}

} // namespace noslip
