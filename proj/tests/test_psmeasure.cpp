#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "thermo/psmeasure.hpp"

using namespace thermo;
using namespace thermo::ps;

namespace {

constexpr double kPi = std::numbers::pi;

struct Fixture {
    grp::Presentation p = grp::schottky_pair();
    grp::OrbitDatabase db = grp::enumerate_orbit(p, {.max_word_len = 1'000'000, .max_dist = 14.0});
    grp::OrbitIndex index{db};
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("a lone identity atom") {
    grp::OrbitDatabase db({grp::GroupElement{}}, grp::Truncation{}, "free-reduced-words");
    auto m = build_ps_measure(db, 0.7);
    REQUIRE(m.atoms().size() == 1);
    CHECK(m.atoms()[0].weight == doctest::Approx(1.0));
    CHECK(m.atoms()[0].at_base);
    CHECK(m.total() == doctest::Approx(1.0));
    CHECK(m.arc_mass(-kPi, kPi) == 0.0);
}

TEST_CASE("the measure is a probability measure with log-sum-exp weights") {
    const auto& f = fx();
    for (double s : {0.6, 1.0, 3.0}) {
        auto m = build_ps_measure(f.db, s);
        CHECK(m.total() == doctest::Approx(1.0).epsilon(1e-12));
        double z = 0.0;
        for (const auto& e : f.db.elements()) z += std::exp(-s * e.d_o);
        CHECK(m.log_normalizer() == doctest::Approx(std::log(z)).epsilon(1e-12));
        // Arcs covering the circle hold everything except the identity atom.
        double id = 1.0 / z;
        CHECK(m.arc_mass(-kPi, kPi) + id == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.arc_mass(0.3, 0.3 + 2 * kPi - 1e-12) + id == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("arc masses are additive and wrap around") {
    const auto& f = fx();
    auto m = build_ps_measure(f.db, 0.8);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10.0, 10.0), w(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a = u(rng), b = a + w(rng), c = b + w(rng);
        std::size_t n1 = 0, n2 = 0, n = 0;
        double m1 = m.arc_mass(a, b, &n1), m2 = m.arc_mass(std::nextafter(b, 100.0), c, &n2), mm = m.arc_mass(a, c, &n);
        CHECK(m1 + m2 == doctest::Approx(mm).epsilon(1e-12));
        CHECK(n1 + n2 == n);
        CHECK(m.arc_mass(a + 2 * kPi, b + 2 * kPi) == doctest::Approx(m1).epsilon(1e-12));
    }
}

TEST_CASE("the quarter-turn symmetry of the pair is inherited by the measure") {
    const auto& f = fx();
    auto m = build_ps_measure(f.db, 0.6);
    for (int k = 0; k < 40; ++k) {
        // Edges away from the axes, where atoms accumulate.
        double lo = -kPi + 0.0123 + k * 0.15, hi = lo + 0.137;
        double ref = m.arc_mass(lo, hi);
        CHECK(m.arc_mass(lo + kPi / 2, hi + kPi / 2) == doctest::Approx(ref).epsilon(1e-9));
        CHECK(m.arc_mass(lo + kPi, hi + kPi) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("gibbs cocycle") {
    const auto& f = fx();
    pot::Potential zero(pot::PotentialSpec::zero(), f.db);
    pot::Potential c(pot::PotentialSpec::constant(0.35), f.db);
    pot::Potential bump(pot::PotentialSpec::bump(0.8, 0.7), f.db);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> r(0.0, 2.0), th(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial) {
        auto xi = hyp::BoundaryPoint::from_angle(th(rng));
        Point x = hyp::from_polar(r(rng), th(rng)), y = hyp::from_polar(r(rng), th(rng)),
              z = hyp::from_polar(r(rng), th(rng));
        CHECK(gibbs_cocycle(xi, x, y, zero).value == 0.0);
        CHECK(gibbs_cocycle(xi, x, y, c).value == doctest::Approx(0.35 * hyp::busemann(xi, x, y)).epsilon(1e-8));
        // ρ(x, z) = ρ(x, y) + ρ(y, z), up to the tail bounds.
        auto xy = gibbs_cocycle(xi, x, y, bump, 25.0), yz = gibbs_cocycle(xi, y, z, bump, 25.0),
             xz = gibbs_cocycle(xi, x, z, bump, 25.0);
        CHECK(std::abs(xy.value + yz.value - xz.value) <= xy.tail_bound + yz.tail_bound + xz.tail_bound + 1e-9);
    }
    CHECK_THROWS(gibbs_cocycle(hyp::BoundaryPoint::from_angle(0.1), hyp::kOrigin, hyp::kOrigin, bump, 5.0));
}

TEST_CASE("avoiding mass is monotone in T and T0") {
    const auto& f = fx();
    auto m = build_ps_measure(f.db, 0.6);
    std::vector<double> Tg{2.0, 3.0, 4.0, 5.0, 6.0};
    auto a = u_set_mass_decay(m, f.db, f.index, 0.5, 0.5, Tg);
    auto b = u_set_mass_decay(m, f.db, f.index, 0.5, 1.5, Tg);
    for (std::size_t i = 0; i < Tg.size(); ++i) {
        if (i) CHECK(a.rows[i].mass <= a.rows[i - 1].mass + 1e-15);
        CHECK(a.rows[i].mass <= b.rows[i].mass + 1e-15);
        CHECK(a.rows[i].mass <= a.rows[i].eligible + 1e-15);
    }
    CHECK_THROWS(u_set_mass_decay(m, f.db, f.index, 0.5, 0.5, {20.0}));
}

TEST_CASE("shadow ratios are bounded") {
    const auto& f = fx();
    auto m = build_ps_measure(f.db, 0.6);
    std::vector<std::size_t> gammas;
    for (std::size_t i = 0; i < f.db.size(); ++i)
        if (f.db.elements()[i].d_o >= 4.0 && f.db.elements()[i].d_o <= 7.0) gammas.push_back(i);
    auto rep = shadow_mass_check(m, f.db, gammas, 1.0);
    CHECK(rep.rows.size() == gammas.size());
    CHECK(rep.min_ratio > 0.0);
    CHECK(rep.max_ratio / rep.min_ratio < 50.0);
    CHECK(std::abs(rep.slope) < 0.2);
}

TEST_CASE("pushed atoms match the translated reference") {
    const auto& f = fx();
    auto m = build_ps_measure(f.db, 0.6);
    pot::Potential zero(pot::PotentialSpec::zero(), f.db);
    for (std::size_t g = 0; g < f.p.generators.size(); ++g) {
        auto r = equivariance_check(m, f.db, f.p, g, zero, 6.0, 32, 20);
        CHECK(r.arcs_checked > 0);
        CHECK(r.max_relative_error < 1e-6);
    }
}
