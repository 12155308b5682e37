#include <cmath>
#include <random>

#include "doctest.h"
#include "thermo/group.hpp"
#include "thermo/potential.hpp"

using namespace thermo;
using namespace thermo::pot;

namespace {

const grp::OrbitDatabase& pair_db() {
    static auto db = grp::enumerate_orbit(grp::schottky_pair(), {.max_word_len = 1'000'000, .max_dist = 12.0});
    return db;
}

}  // namespace

TEST_CASE("bump profile") {
    CHECK(bump_profile(0.0, 0.8) == doctest::Approx(1.0));
    CHECK(bump_profile(0.8, 0.8) == 0.0);
    CHECK(bump_profile(2.0, 0.8) == 0.0);
    for (double d = 0.0; d < 0.8; d += 0.01) CHECK(bump_profile(d + 0.01, 0.8) <= bump_profile(d, 0.8) + 1e-15);
}

TEST_CASE("closed-form segment integrals agree with Simpson quadrature") {
    auto spec = PotentialSpec::bump(0.7, 0.8).plus(PotentialSpec::constant(-0.2));
    spec.terms.push_back(RadialSlope{hyp::make_point(0.3, 1.4), 0.5, 0.4});
    Potential F(spec, pair_db());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> r(0.0, 4.0), th(-3.14159, 3.14159);
    for (int trial = 0; trial < 60; ++trial) {
        Point x = hyp::from_polar(r(rng), th(rng)), y = hyp::from_polar(r(rng), th(rng));
        CHECK(F.segment_integral(x, y) == doctest::Approx(F.line_integral(x, y, 0.002)).epsilon(1e-6));
    }
}

TEST_CASE("potentials are Γ-invariant inside the complete radius") {
    const auto& db = pair_db();
    auto spec = PotentialSpec::bump(1.0, 0.9);
    spec.terms.push_back(RadialSlope{hyp::make_point(0.2, 0.8), 1.0, 0.3});
    Potential F(spec, db);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> r(0.0, 2.0), th(-3.14159, 3.14159);
    for (int trial = 0; trial < 200; ++trial) {
        Point x = hyp::from_polar(r(rng), th(rng));
        const auto& g = db.elements()[1 + rng() % 40].matrix;
        CHECK(F.eval(g.apply(x)) == doctest::Approx(F.eval(x)).epsilon(1e-12));
    }
}

TEST_CASE("constant potentials integrate to c times length") {
    const auto& db = pair_db();
    Potential F(PotentialSpec::constant(0.3), db);
    for (std::size_t i = 0; i < db.size(); i += 97) {
        const auto& e = db.elements()[i];
        CHECK(F.orbit_integral(e.matrix) == doctest::Approx(0.3 * e.d_o).epsilon(1e-12));
    }
    auto g = grp::schottky_pair().generators[0];
    CHECK(F.period_integral(g) == doctest::Approx(0.3 * 2.5).epsilon(1e-12));
}

TEST_CASE("zero potential") {
    Potential F(PotentialSpec::zero(), pair_db());
    CHECK(F.is_zero());
    CHECK(F.eval(hyp::make_point(0.4, 2.0)) == 0.0);
    CHECK(F.segment_integral(hyp::kOrigin, hyp::make_point(3.0, 0.5)) == 0.0);
}

TEST_CASE("orbit integrals by half segments match the direct integral") {
    const auto& db = pair_db();
    Potential F(PotentialSpec::bump(0.6, 0.7), db);
    for (std::size_t i = 1; i < 400; i += 13) {
        const auto& g = db.elements()[i].matrix;
        CHECK(F.orbit_integral(g) ==
              doctest::Approx(F.segment_integral(hyp::kOrigin, g.apply(hyp::kOrigin))).epsilon(1e-9));
    }
}

TEST_CASE("spec scaling and summation") {
    auto a = PotentialSpec::bump(0.5, 0.8).plus(PotentialSpec::constant(0.2));
    auto b = a.scaled(3.0);
    CHECK(b.constant_part() == doctest::Approx(0.6));
    CHECK(b.sup_abs() == doctest::Approx(3.0 * a.sup_abs()));
    CHECK(a.support_radius() == doctest::Approx(0.8));
    CHECK(PotentialSpec::constant(1.0).is_constant());
}
