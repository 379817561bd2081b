#include <catch2/catch_amalgamated.hpp>

#include "noslip/numerics.hpp"
#include "noslip/rng.hpp"

#include "oracles.hpp"

using namespace noslip;

TEST_CASE("quadratic roots") {
  const auto roots = real_roots(Polynomial{-1.0, 0.0, 1.0}); // t^2 - 1
  REQUIRE(roots.size() == 2);
  CHECK(roots[0].x == Catch::Approx(-1.0).margin(1e-12));
  CHECK(roots[1].x == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("constructed quartic with a double root") {
  // (t-1)^2 (t-2)(t-3) = t^4 - 7 t^3 + 17 t^2 - 17 t + 6
  const auto roots = real_roots(Polynomial{6.0, -17.0, 17.0, -7.0, 1.0});
  REQUIRE(roots.size() == 3);
  CHECK(roots[0].x == Catch::Approx(1.0).margin(1e-6));
  CHECK(roots[0].multiplicity == 2);
  CHECK(roots[1].x == Catch::Approx(2.0).margin(1e-9));
  CHECK(roots[1].multiplicity == 1);
  CHECK(roots[2].x == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("degree errors") {
  CHECK_THROWS_AS(real_roots(Polynomial{3.0}), std::invalid_argument);
  CHECK_THROWS_AS(real_roots(Polynomial{0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("smallest root above") {
  const Polynomial p{-1.0, 0.0, 1.0};
  CHECK(smallest_root_above(p, 0.0) == Catch::Approx(1.0));
  CHECK_FALSE(smallest_root_above(p, 1.5).has_value());
  CHECK_FALSE(smallest_root_above(Polynomial{1.0, 0.0, 1.0}, -100.0).has_value());
}

TEST_CASE("no real roots") {
  CHECK(real_roots(Polynomial{1.0, 0.0, 1.0}).empty());          // t^2 + 1
  CHECK(real_roots(Polynomial{1.0, 0.0, 1.0, 0.0, 1.0}).empty()); // t^4 + t^2 + 1
}

TEST_CASE("cubic always yields a root") {
  const auto roots = real_roots(Polynomial{-6.0, 11.0, -6.0, 1.0}); // (t-1)(t-2)(t-3)
  REQUIRE(roots.size() == 3);
  CHECK(roots[0].x == Catch::Approx(1.0).margin(1e-10));
  CHECK(roots[2].x == Catch::Approx(3.0).margin(1e-10));
}

TEST_CASE("random polynomials match the Sturm oracle") {
  Rng rng(20240817);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int deg = 1 + int(rng.next_u64() % 4);
    Polynomial p;
    oracle::SPoly sp;
    p.deg = deg;
    for (int i = 0; i <= deg; ++i) {
      const double c = rng.uniform(-1000.0, 1000.0);
      p.c[std::size_t(i)] = c;
      sp.c.push_back(c);
    }
    if (std::abs(p.c[std::size_t(deg)]) < 1e-6) continue; // avoid borderline degree
    const auto mine = real_roots(p);
    const auto ref = oracle::sturm_roots(sp);

    // random coefficients yield well-separated simple roots
    REQUIRE(mine.size() == ref.size());
    for (std::size_t i = 0; i < mine.size(); ++i) {
      CHECK(std::abs(mine[i].x - ref[i]) <=
            1e-8 * std::max(1.0, std::abs(ref[i])));
    }

    // residual bound and ordering invariants
    double prev = -kInf;
    int mult_total = 0;
    for (const RealRoot& r : mine) {
      const double scale = std::max(1.0, std::abs(r.x));
      CHECK(std::abs(p(r.x)) <=
            1e-10 * p.max_abs_coeff() * scale * scale * scale * scale);
      CHECK(r.x >= prev);
      prev = r.x;
      mult_total += r.multiplicity;
    }
    CHECK(mult_total <= deg);
    ++checked;
  }
  CHECK(checked > 9000);
}

TEST_CASE("random constructed double roots carry multiplicity tags") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform(-5.0, 5.0);
    double b = rng.uniform(-5.0, 5.0);
    double c = rng.uniform(-5.0, 5.0);
    if (std::abs(b - a) < 0.5) b = a + 1.0;
    if (std::abs(c - a) < 0.5 || std::abs(c - b) < 0.5) c = std::max(a, b) + 1.3;
    // (t-a)^2 (t-b)(t-c)
    const Polynomial p{a * a * b * c,
                       -(2.0 * a * b * c + a * a * (b + c)),
                       b * c + 2.0 * a * (b + c) + a * a,
                       -(2.0 * a + b + c),
                       1.0};
    const auto roots = real_roots(p);
    bool found = false;
    for (const RealRoot& r : roots)
      if (std::abs(r.x - a) < 1e-5 && r.multiplicity == 2) found = true;
    CHECK(found);
  }
}

TEST_CASE("tiny leading coefficient falls back gracefully") {
  // nearly-degenerate quartic: two modest roots, two huge ones
  const Polynomial p{2.0, -3.0, 1.0, 0.0, 1e-9}; // ~ (t-1)(t-2) + 1e-9 t^4
  const auto roots = real_roots(p);
  REQUIRE(roots.size() >= 2);
  bool near1 = false, near2 = false;
  for (const RealRoot& r : roots) {
    if (std::abs(r.x - 1.0) < 1e-6) near1 = true;
    if (std::abs(r.x - 2.0) < 1e-6) near2 = true;
  }
  CHECK(near1);
  CHECK(near2);
}
