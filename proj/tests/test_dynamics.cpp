#include <catch2/catch_amalgamated.hpp>

#include "noslip/dynamics.hpp"
#include "noslip/geometry.hpp"
#include "noslip/rng.hpp"

#include "oracles.hpp"

using namespace noslip;

namespace {

Vec3 random_unit3(Rng& rng) {
  double r, t, n;
  double len;
  do {
    r = rng.gaussian();
    t = rng.gaussian();
    n = rng.gaussian();
    len = std::sqrt(r * r + t * t + n * n);
  } while (len < 1e-9);
  return {r / len, t / len, n / len};
}

} // namespace

TEST_CASE("mass distribution parameters") {
  for (double g : {0.0, 0.3, 1.0 / std::numbers::sqrt2, 1.0, 4.0}) {
    const MassDistribution m = MassDistribution::from_gamma(g);
    CHECK(m.beta == Catch::Approx(2.0 * std::atan(g)).margin(1e-15));
    CHECK(std::tan(m.beta / 2.0) == Catch::Approx(g).margin(1e-12));
    CHECK(m.cos_beta == Catch::Approx(std::cos(m.beta)).margin(1e-12));
    CHECK(m.sin_beta == Catch::Approx(std::sin(m.beta)).margin(1e-12));
    const MassDistribution mb = MassDistribution::from_beta(m.beta);
    CHECK(mb.gamma == Catch::Approx(g).margin(1e-12));
  }
  CHECK_THROWS_AS(MassDistribution::from_gamma(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(MassDistribution::from_beta(kPi), std::invalid_argument);
}

TEST_CASE("no-slip reflection pinned values") {
  SECTION("gamma = 0 is diag(-1, 1, -1)") {
    const auto m = MassDistribution::from_gamma(0.0);
    const Vec3 out = no_slip_reflect({1.0, 2.0, -3.0}, m);
    CHECK(out.rot == Catch::Approx(-1.0));
    CHECK(out.tan == Catch::Approx(2.0));
    CHECK(out.nrm == Catch::Approx(3.0));
  }
  SECTION("gamma = 1 swaps and negates rot/tan") {
    const auto m = MassDistribution::from_gamma(1.0);
    const Vec3 out = no_slip_reflect({1.0, 0.0, -1.0}, m);
    CHECK(out.rot == Catch::Approx(0.0).margin(1e-15));
    CHECK(out.tan == Catch::Approx(-1.0));
    CHECK(out.nrm == Catch::Approx(1.0));
  }
  SECTION("gamma = 1/sqrt(2)") {
    const auto m = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
    CHECK(m.cos_beta == Catch::Approx(1.0 / 3.0));
    CHECK(m.sin_beta == Catch::Approx(0.9428090415820634));
    const Vec3 out = no_slip_reflect({0.0, 1.0, -1.0}, m);
    CHECK(out.rot == Catch::Approx(-0.9428090415820634));
    CHECK(out.tan == Catch::Approx(1.0 / 3.0));
    CHECK(out.nrm == Catch::Approx(1.0));
  }
  SECTION("receding velocity rejected") {
    const auto m = MassDistribution::from_gamma(0.5);
    CHECK_THROWS_AS(no_slip_reflect({0.0, 0.0, 1.0}, m), std::invalid_argument);
  }
}

TEST_CASE("specular reflection") {
  Vec3 out = specular_reflect({0.3, 1.0, -1.0});
  CHECK(out.rot == Catch::Approx(0.3));
  CHECK(out.tan == Catch::Approx(1.0));
  CHECK(out.nrm == Catch::Approx(1.0));
  out = specular_reflect({0.0, 0.0, -2.0});
  CHECK(out.nrm == Catch::Approx(2.0));

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Vec3 v = random_unit3(rng);
    v.nrm = -std::abs(v.nrm) - 1e-6;
    const Vec3 r = specular_reflect(v);
    CHECK(std::abs(norm(r) - norm(v)) < 1e-14);
  }
}

TEST_CASE("collision map is an orthogonal involution") {
  Rng rng(11);
  for (int k = 0; k < 100; ++k) {
    const double gamma = rng.uniform(0.0, 10.0);
    const Mat3 t = collision_matrix(MassDistribution::from_gamma(gamma));
    const Mat3 tt = t * t;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(tt.m[i][j] - (i == j ? 1.0 : 0.0)) < 1e-12);
    for (int n = 0; n < 10; ++n) {
      const Vec3 v = random_unit3(rng);
      const Vec3 tv = t.apply(v);
      CHECK(std::abs(norm(tv) - norm(v)) < 1e-12);
      const Vec3 ttv = t.apply(tv);
      CHECK(std::abs(ttv.rot - v.rot) < 1e-12);
      CHECK(std::abs(ttv.tan - v.tan) < 1e-12);
      CHECK(std::abs(ttv.nrm - v.nrm) < 1e-12);
    }
  }
}

TEST_CASE("ballistic propagation") {
  SECTION("straight line without force") {
    ParticleState s;
    s.pos = {1.0, 2.0};
    s.vel = {0.5, -0.25};
    const ParticleState out = propagate(s, 4.0, ForceField::none());
    CHECK(out.pos.x == Catch::Approx(3.0));
    CHECK(out.pos.y == Catch::Approx(1.0));
  }
  SECTION("free fall displacement") {
    ParticleState s;
    const ParticleState out = propagate(s, 2.0, ForceField::gravity(1.0));
    CHECK(out.pos.y == Catch::Approx(-2.0));
    CHECK(out.vel.y == Catch::Approx(-2.0));
  }
  SECTION("mechanical energy is exactly conserved") {
    Rng rng(5);
    const ForceField f = ForceField::gravity(1.7, {0.3, -0.9});
    for (int i = 0; i < 100; ++i) {
      ParticleState s;
      s.pos = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      s.vel = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      s.rot_vel = rng.uniform(-2.0, 2.0);
      const double e0 = mechanical_energy(s, f);
      const double e1 = mechanical_energy(propagate(s, rng.uniform(0.0, 5.0), f), f);
      CHECK(std::abs(e1 - e0) <= 1e-12 * std::max(1.0, std::abs(e0)));
    }
  }
  SECTION("rotational velocity is inert") {
    ParticleState s;
    s.rot_vel = 0.7;
    const ParticleState out = propagate(s, 3.0, ForceField::gravity(2.0));
    CHECK(out.rot_vel == Catch::Approx(0.7));
    CHECK(out.orientation == Catch::Approx(2.1));
  }
}

TEST_CASE("next collision pinned cases") {
  SECTION("free fall onto the half plane") {
    const Table t = make_half_plane();
    ParticleState s;
    s.pos = {0.0, 1.0};
    const NextEvent ne =
        next_collision(s, t, ForceField::gravity(1.0), MassDistribution::from_gamma(0.5));
    REQUIRE(ne.status == EventStatus::hit);
    CHECK(ne.event.t_flight == Catch::Approx(std::numbers::sqrt2).epsilon(1e-12));
    CHECK(ne.event.point.x == Catch::Approx(0.0).margin(1e-12));
    CHECK(ne.event.point.y == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("straight flight onto a scatterer") {
    Table t;
    auto disk = BoundaryComponent::circle({0.0, 0.0}, 1.0, +1);
    disk.id = 0;
    t.components.push_back(disk);
    ParticleState s;
    s.pos = {-2.0, 0.0};
    s.vel = {1.0, 0.0};
    const NextEvent ne =
        next_collision(s, t, ForceField::none(), MassDistribution::from_gamma(0.5));
    REQUIRE(ne.status == EventStatus::hit);
    CHECK(ne.event.t_flight == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(ne.event.point.x == Catch::Approx(-1.0).epsilon(1e-12));
  }
  SECTION("upward escape without force reports no event") {
    const Table t = make_half_plane();
    ParticleState s;
    s.pos = {0.0, 1.0};
    s.vel = {0.1, 1.0};
    const NextEvent ne =
        next_collision(s, t, ForceField::none(), MassDistribution::from_gamma(0.5));
    CHECK(ne.status == EventStatus::none);
  }
  SECTION("grazing flight is not a collision") {
    Table t;
    auto disk = BoundaryComponent::circle({0.0, 0.0}, 1.0, +1);
    disk.id = 0;
    t.components.push_back(disk);
    ParticleState s;
    s.pos = {-3.0, 1.0}; // exactly tangent line y = 1
    s.vel = {1.0, 0.0};
    const NextEvent ne =
        next_collision(s, t, ForceField::none(), MassDistribution::from_gamma(0.5));
    CHECK(ne.status == EventStatus::none);
  }
  SECTION("wedge apex registers as a vertex hit") {
    const Table t = make_wedge({0.5, WedgeOrientation::opening_up, {0.0, 0.0}});
    ParticleState s;
    s.pos = {0.0, 1.0};
    s.vel = {0.0, -1.0};
    const NextEvent ne =
        next_collision(s, t, ForceField::none(), MassDistribution::from_gamma(0.5));
    CHECK(ne.status == EventStatus::vertex);
  }
}

TEST_CASE("collision events preserve speed") {
  const Table cell = make_sinai_cell(CellShape::square, 2.0, 0.5, false);
  const auto mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  ParticleState s;
  s.pos = {-0.8, 0.3};
  s.vel = {1.0, 0.35};
  s.rot_vel = 0.4;
  const OrbitResult r = run_orbit(s, cell, ForceField::none(), mass, {200});
  REQUIRE(r.events.size() == 200);
  for (const CollisionEvent& e : r.events) {
    const double vin = std::sqrt(e.vin_rot * e.vin_rot + norm2(e.vin));
    const double vout = std::sqrt(e.vout_rot * e.vout_rot + norm2(e.vout));
    CHECK(std::abs(vout - vin) < 1e-10);
  }
}

TEST_CASE("gamma = 0 no-slip matches a specular run spatially") {
  const Table cell = make_sinai_cell(CellShape::square, 2.0, 0.5, false);
  Table spec_cell = cell;
  spec_cell.set_rule(CollisionRule::specular);

  ParticleState s;
  s.pos = {-0.7, 0.41};
  s.vel = {0.9, 0.31};
  s.rot_vel = 0.5; // spatially irrelevant at gamma = 0

  const OrbitResult noslip =
      run_orbit(s, cell, ForceField::none(), MassDistribution::from_gamma(0.0), {20});
  const OrbitResult specular =
      run_orbit(s, spec_cell, ForceField::none(), MassDistribution::from_gamma(0.0), {20});
  REQUIRE(noslip.events.size() == 20);
  REQUIRE(specular.events.size() == 20);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(norm(noslip.events[i].point - specular.events[i].point) < 1e-6);
    // rotation is reversed each bounce instead of kept, spatial path identical
    CHECK(std::abs(std::abs(noslip.events[i].vout_rot) - 0.5) < 1e-12);
  }
}

TEST_CASE("energy conservation along forced orbits") {
  const Table cell = make_sinai_cell(CellShape::hexagon, 2.0, 0.5, false);
  const ForceField force = ForceField::gravity(0.8);
  const auto mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  ParticleState s;
  s.pos = {-0.6, 0.9};
  s.vel = {1.1, 0.2};
  s.rot_vel = -0.3;
  const double e0 = mechanical_energy(s, force);
  const OrbitResult r = run_orbit(s, cell, force, mass, {1000});
  REQUIRE(r.events.size() == 1000);
  const double e1 = mechanical_energy(r.final_state, force);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-9);
}

TEST_CASE("channel orbits stay bounded") {
  const Table channel = make_channel(1.0, ChannelAxis::vertical);
  const auto mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  ParticleState s;
  s.pos = {0.1, 0.0};
  s.vel = {0.8, 0.45};
  s.rot_vel = 0.2;
  const OrbitResult r = run_orbit(s, channel, ForceField::none(), mass, {10000});
  REQUIRE(r.events.size() == 10000);
  double max_abs_y = 0.0;
  for (const CollisionEvent& e : r.events)
    max_abs_y = std::max(max_abs_y, std::abs(e.point.y));
  CHECK(max_abs_y < 50.0);
}

TEST_CASE("mixed collision rules per component") {
  Table t = make_sinai_cell(CellShape::square, 2.0, 0.5, false);
  t.components.back().rule = CollisionRule::specular; // scatterer only
  const auto mass = MassDistribution::from_gamma(1.0);
  ParticleState s;
  s.pos = {-1.5 / std::numbers::sqrt2, 0.0};
  s.vel = {1.0, 0.0};
  s.rot_vel = 0.7;
  const NextEvent ne = next_collision(s, t, ForceField::none(), mass);
  REQUIRE(ne.status == EventStatus::hit);
  CHECK(ne.event.rule == CollisionRule::specular);
  CHECK(ne.event.vout_rot == Catch::Approx(0.7)); // unchanged by specular law
}

TEST_CASE("periodic cell wrapping") {
  const Table torus = make_sinai_cell(CellShape::square, 2.0, 0.5, true);
  const auto mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  ParticleState s;
  s.pos = {-0.9, 0.3};
  s.vel = {1.0, 0.0};
  const NextEvent first = next_collision(s, torus, ForceField::none(), mass);
  REQUIRE(first.status == EventStatus::hit);
  CHECK(first.event.t_flight == Catch::Approx(0.5).epsilon(1e-10));
  CHECK(first.event.point.x == Catch::Approx(-0.4).epsilon(1e-10));

  const OrbitResult r = run_orbit(s, torus, ForceField::none(), mass, {500});
  REQUIRE(r.events.size() == 500);
  for (const CollisionEvent& e : r.events) {
    CHECK(std::abs(e.point.x) <= 1.0 + 1e-9);
    CHECK(std::abs(e.point.y) <= 1.0 + 1e-9);
    CHECK(std::abs(norm(e.point) - 0.5) < 1e-9); // always on the scatterer
  }
}

TEST_CASE("first hit agrees with the dense-sampling oracle") {
  Rng rng(2024);
  const auto mass = MassDistribution::from_gamma(1.0 / std::numbers::sqrt2);
  int compared = 0;
  for (int trial = 0; trial < 120; ++trial) {
    Table table;
    ForceField force = ForceField::none();
    ParticleState s;
    const int pick = int(rng.next_u64() % 5);
    switch (pick) {
      case 0:
        table = make_half_plane();
        force = ForceField::gravity(1.0);
        s.pos = {rng.uniform(-2.0, 2.0), rng.uniform(0.3, 2.0)};
        break;
      case 1:
        table = make_wedge({rng.uniform(0.3, 1.2), WedgeOrientation::opening_up, {}});
        force = ForceField::gravity(rng.uniform(0.5, 1.5));
        s.pos = {rng.uniform(-0.2, 0.2), rng.uniform(1.0, 2.0)};
        break;
      case 2:
        table = make_sinai_cell(CellShape::square, 2.0, 0.5, false);
        s.pos = {rng.uniform(-0.9, -0.6), rng.uniform(0.6, 0.9)};
        break;
      case 3:
        table = make_two_disk_table(0.7);
        s.pos = {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
        break;
      default:
        table = make_galton_board(1.0, 0.3, 0.0, -50.0);
        force = ForceField::gravity(1.0);
        s.pos = {rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.5)};
        break;
    }
    if (!table.contains(s.pos, -1e-6)) continue;
    s.vel = rng.unit_vector() * rng.uniform(0.5, 1.5);
    s.rot_vel = rng.uniform(-1.0, 1.0);

    const double t_hi = 20.0 * table.char_length / norm(s.vel);
    const auto ref = oracle::dense_first_hit(s, table, force, t_hi);
    NextEvent mine;
    try {
      mine = next_collision(s, table, force, mass);
    } catch (const std::exception&) {
      continue;
    }
    if (!ref.has_value()) continue;
    if (mine.status == EventStatus::escaped) continue;
    REQUIRE(mine.status != EventStatus::none);
    CHECK(std::abs(mine.event.t_flight - ref->t) < 1e-8 * std::max(1.0, ref->t));
    CHECK(mine.event.component == ref->component);
    ++compared;
  }
  CHECK(compared > 60);
}
