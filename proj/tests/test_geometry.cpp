#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "noslip/geometry.hpp"
#include "noslip/rng.hpp"
#include "noslip/table_json.hpp"

using namespace noslip;

TEST_CASE("half plane basics") {
  const Table t = make_half_plane();
  REQUIRE(t.components.size() == 1);
  const Frame f = local_frame(t, 0, {5.0, 0.0});
  CHECK(f.tangent.x == Catch::Approx(1.0));
  CHECK(f.tangent.y == Catch::Approx(0.0).margin(1e-15));
  CHECK(f.normal.x == Catch::Approx(0.0).margin(1e-15));
  CHECK(f.normal.y == Catch::Approx(1.0));
  CHECK(t.contains({0.0, 1.0}));
  CHECK_FALSE(t.contains({0.0, -1.0}));
  CHECK_THROWS_AS(local_frame(t, 0, {3.0, 0.5}), std::invalid_argument);
}

TEST_CASE("wedge geometry") {
  SECTION("walls along (+-sin phi, cos phi)") {
    const double phi = kPi / 4.0;
    const Table t = make_wedge({phi, WedgeOrientation::opening_up, {0.0, 0.0}});
    REQUIRE(t.components.size() == 2);
    const Vec2 dl = t.components[0].direction();
    const Vec2 dr = t.components[1].direction();
    CHECK(dl.x == Catch::Approx(-std::sin(phi)));
    CHECK(dl.y == Catch::Approx(std::cos(phi)));
    CHECK(dr.x == Catch::Approx(std::sin(phi)));
    CHECK(dr.y == Catch::Approx(std::cos(phi)));
  }
  SECTION("interior angle is twice the half angle") {
    const double phi = kPi / 7.0;
    const Table t = make_wedge({phi, WedgeOrientation::opening_up, {0.0, 0.0}});
    const double cosang = dot(t.components[0].direction(), t.components[1].direction());
    CHECK(std::acos(cosang) == Catch::Approx(2.0 * kPi / 7.0));
  }
  SECTION("downward wedge contains points below the vertex") {
    const Table t = make_wedge({kPi / 3.0, WedgeOrientation::opening_down, {0.0, 0.0}});
    CHECK(t.contains({0.0, -1.0}));
    CHECK(t.contains({0.5, -1.0}));
    CHECK_FALSE(t.contains({0.0, 1.0}));
  }
  SECTION("half angle domain") {
    CHECK_THROWS_AS(make_wedge({0.0, WedgeOrientation::opening_up, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_wedge({kPi / 2.0, WedgeOrientation::opening_up, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_wedge({-0.3, WedgeOrientation::opening_up, {}}),
                    std::invalid_argument);
  }
}

TEST_CASE("sinai cells") {
  const Table torus = make_sinai_cell(CellShape::square, 2.0, 0.5, true);
  CHECK(torus.components.size() == 1);
  CHECK(torus.periodic());

  const Table hex = make_sinai_cell(CellShape::hexagon, 1.0, 0.3, false);
  CHECK(hex.components.size() == 7);
  CHECK_FALSE(hex.periodic());

  CHECK_THROWS_AS(make_sinai_cell(CellShape::square, 2.0, 1.1, false),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_sinai_cell(CellShape::hexagon, 1.0, 0.3, true),
                  std::invalid_argument);
}

TEST_CASE("galton lattice queries") {
  const Table board = make_galton_board(1.0, 0.25, 0.0, -20.0);

  SECTION("a lattice point is its own nearest scatterer") {
    const auto sites = board.nearest_lattice_sites({0.0, 0.0});
    REQUIRE(sites.size() == 1);
    CHECK(sites[0].i == 0);
    CHECK(sites[0].j == 0);
  }
  SECTION("midpoint between row-adjacent scatterers is equidistant") {
    const double h = std::sqrt(3.0) / 2.0;
    const Vec2 mid{0.25, -h / 2.0};
    const auto sites = board.nearest_lattice_sites(mid);
    CHECK(sites.size() >= 2);
  }
  SECTION("overlapping scatterers rejected") {
    CHECK_THROWS_AS(make_galton_board(1.0, 0.6, 0.0, -20.0), std::invalid_argument);
  }
  SECTION("disc query equals brute-force enumeration") {
    Rng rng(7);
    const auto& lat = std::get<TriLattice>(board.tiling);
    for (int trial = 0; trial < 50; ++trial) {
      const Vec2 c{rng.uniform(-10.0, 10.0), rng.uniform(-15.0, 0.0)};
      const double radius = 3.0 * lat.spacing;
      std::set<std::pair<long long, long long>> fast;
      for (const auto& s : board.lattice_sites_in_disc(c, radius))
        fast.insert({s.i, s.j});
      // direct double loop, deliberately over-wide bounds
      std::set<std::pair<long long, long long>> brute;
      for (long long j = 0; j <= 60; ++j) {
        for (long long i = -40; i <= 40; ++i) {
          const Vec2 ctr = Table::lattice_center(lat, i, j);
          if (norm(ctr - c) <= radius) brute.insert({i, j});
        }
      }
      REQUIRE(fast == brute);
    }
  }
}

TEST_CASE("two-disk table and contact points") {
  const Table t = make_two_disk_table(0.5);
  REQUIRE(t.components.size() == 2);
  {
    const auto [q0, q1] = two_disk_contact_points(0.5, 0.0);
    CHECK(q0.x == Catch::Approx(-0.5));
    CHECK(q0.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(q1.x == Catch::Approx(0.5));
  }
  {
    const auto [q0, q1] = two_disk_contact_points(0.5, kPi / 2.0);
    CHECK(q0.y == Catch::Approx(0.5));
    CHECK(q1.y == Catch::Approx(0.5));
    CHECK(norm(q1 - q0) == Catch::Approx(2.0));
  }
  CHECK_THROWS_AS(make_two_disk_table(1.2), std::invalid_argument);
  CHECK_THROWS_AS(make_two_disk_table(0.0), std::invalid_argument);
}

TEST_CASE("scatterer frame is right-handed") {
  // unit circle scatterer at the origin, table interior outside
  Table t;
  auto disk = BoundaryComponent::circle({0.0, 0.0}, 1.0, +1);
  disk.id = 0;
  t.components.push_back(disk);
  const Frame f = local_frame(t, 0, {1.0, 0.0});
  CHECK(f.normal.x == Catch::Approx(1.0));
  CHECK(f.normal.y == Catch::Approx(0.0).margin(1e-15));
  CHECK(cross(f.tangent, f.normal) == Catch::Approx(1.0));
  CHECK(f.tangent.y == Catch::Approx(-1.0)); // fixed by right-handedness
}

TEST_CASE("interior probes and frame handedness across the zoo") {
  struct Probe {
    Table table;
    std::vector<std::pair<std::int64_t, Vec2>> points; // (component, boundary point)
  };
  std::vector<Probe> probes;
  probes.push_back({make_half_plane(), {{0, {3.0, 0.0}}, {0, {-7.5, 0.0}}}});
  {
    const double phi = 0.6;
    Probe p{make_wedge({phi, WedgeOrientation::opening_up, {0.0, 0.0}}), {}};
    p.points.push_back({0, Vec2{-std::sin(phi), std::cos(phi)} * 2.0});
    p.points.push_back({1, Vec2{std::sin(phi), std::cos(phi)} * 1.3});
    probes.push_back(p);
  }
  {
    Probe p{make_sinai_cell(CellShape::hexagon, 1.0, 0.3, false), {}};
    p.points.push_back({6, {0.3, 0.0}});
    p.points.push_back({6, {0.0, -0.3}});
    probes.push_back(p);
  }
  {
    Probe p{make_two_disk_table(0.5), {}};
    const auto [q0, q1] = two_disk_contact_points(0.5, 0.4);
    p.points.push_back({0, q0});
    p.points.push_back({1, q1});
    probes.push_back(p);
  }
  {
    Probe p{make_regular_polygon(5, 1.0), {}};
    const Vec2 mid = (p.table.components[2].a + p.table.components[2].b) * 0.5;
    p.points.push_back({2, mid});
    probes.push_back(p);
  }

  for (const Probe& p : probes) {
    for (const auto& [id, point] : p.points) {
      const Frame f = local_frame(p.table, id, point);
      CHECK(std::abs(cross(f.tangent, f.normal) - 1.0) < 1e-12);
      CHECK(std::abs(norm(f.normal) - 1.0) < 1e-12);
      // inward normal points toward a probe just inside
      const Vec2 probe_in = point + f.normal * 1e-6;
      const Vec2 probe_out = point - f.normal * 1e-6;
      CHECK(p.table.contains(probe_in));
      CHECK_FALSE(p.table.contains(probe_out));
      CHECK(dot(f.normal, probe_in - point) > 0.0);
    }
  }
}

TEST_CASE("table JSON round trip") {
  std::vector<Table> tables;
  tables.push_back(make_half_plane());
  tables.push_back(make_wedge({0.5, WedgeOrientation::opening_down, {0.0, 0.0}}));
  tables.push_back(make_sinai_cell(CellShape::square, 2.0, 0.5, true));
  tables.push_back(make_sinai_cell(CellShape::hexagon, 1.0, 0.3, false));
  tables.push_back(make_galton_board(1.0, 0.25, 0.0, -17.0));
  tables.push_back(make_two_disk_table(0.6));
  tables.push_back(make_regular_polygon(12, 1.0));
  tables.push_back(make_rectangle(2.0, 1.0));
  tables.push_back(make_channel(1.0, ChannelAxis::vertical));

  for (const Table& t : tables) {
    const json j = table_to_json(t);
    const Table back = table_from_json(j);
    CHECK(back.name == t.name);
    CHECK(back.components.size() == t.components.size());
    for (std::size_t i = 0; i < t.components.size(); ++i) {
      CHECK(back.components[i].kind == t.components[i].kind);
      CHECK(norm(back.components[i].a - t.components[i].a) < 1e-12);
      CHECK(std::abs(back.components[i].radius - t.components[i].radius) < 1e-12);
    }
    CHECK(table_to_json(back) == j);
  }
}

TEST_CASE("global arclength parameter") {
  const Table poly = make_regular_polygon(4, 1.0);
  double prev = -1.0;
  for (const auto& c : poly.components) {
    for (double f : {0.1, 0.5, 0.9}) {
      const Vec2 p = c.a + (c.b - c.a) * f;
      const double s = global_arclength(poly, c.id, p);
      CHECK(s >= 0.0);
      CHECK(s < 1.0);
      CHECK(s > prev);
      prev = s;
    }
  }
}
