#include <cmath>
#include <random>

#include "doctest.h"
#include "thermo/entropy.hpp"

using namespace thermo;
using namespace thermo::ent;

namespace {

struct Fixture {
    grp::Presentation p = grp::schottky_pair();
    grp::OrbitDatabase db = grp::enumerate_orbit(p, {.max_word_len = 1'000'000, .max_dist = 14.0});
    TranslateCache cache{db};
};

const Fixture& fx() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("flow moves the base point by t") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> r(0.0, 3.0), th(-3.14, 3.14), t(0.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        TangentSample v{hyp::from_polar(r(rng), th(rng)), hyp::BoundaryPoint::from_angle(th(rng)), 1.0, 0};
        double s = t(rng);
        CHECK(hyp::dist(flow(v, s).base, v.base) == doctest::Approx(s).epsilon(1e-9));
        CHECK(hyp::dist(flow(flow(v, s), 1.0).base, flow(v, s + 1.0).base) < 1e-8);
    }
}

TEST_CASE("distance from a trajectory to itself is zero") {
    const auto& f = fx();
    auto mu = closed_orbit_measure(f.p.generators[0], 5);
    for (const auto& v : mu.samples) CHECK(quotient_orbit_distance(v, v, 6.0, 0.1, f.cache) == 0.0);
}

TEST_CASE("quotient distance matches a brute-force scan over the group") {
    const auto& f = fx();
    auto g = f.p.generators[0];
    double len = hyp::analyze_isometry(g).translation_length;
    auto mu = closed_orbit_measure(g, 4);
    for (const auto& v : mu.samples) {
        auto w = flow(v, len / 2.0);
        double brute = hyp::dist(v.base, w.base);
        for (const auto& e : f.db.elements()) brute = std::min(brute, hyp::dist(v.base, e.matrix.apply(w.base)));
        CHECK(quotient_orbit_distance(v, w, 0.0, 0.1, f.cache, 10.0) == doctest::Approx(brute).epsilon(1e-12));
        // One full period later the trajectory is back in the same place of the quotient.
        CHECK(quotient_orbit_distance(v, flow(v, len), 4.0, 0.05, f.cache) < 1e-6);
    }
}

TEST_CASE("closed-orbit samples sit on the axis, equally spaced") {
    const auto& f = fx();
    auto g = f.p.evaluate(grp::Word::parse("ab"));
    auto cls = hyp::analyze_isometry(g);
    auto mu = closed_orbit_measure(g, 10);
    CHECK(mu.samples.size() == 10);
    CHECK_FALSE(mu.diagnostic_only);
    for (std::size_t k = 0; k < mu.samples.size(); ++k) {
        CHECK(mu.samples[k].weight == doctest::Approx(0.1));
        CHECK(hyp::point_segment_distance(mu.samples[k].base, *cls.axis) < 1e-9);
        if (k)
            CHECK(hyp::dist(mu.samples[k - 1].base, mu.samples[k].base) ==
                  doctest::Approx(cls.translation_length / 10.0).epsilon(1e-9));
    }
}

TEST_CASE("a single sample needs a single center") {
    const auto& f = fx();
    auto mu = closed_orbit_measure(f.p.generators[0], 1);
    DynamicalDistances dist(mu, {2.0, 4.0, 6.0, 8.0}, 0.1, f.cache);
    auto s = spanning_weight(mu, dist, 3, 0.9, 0.1);
    CHECK(s.count == 1);
    CHECK(s.weight == 1.0);
    auto k = katok_estimate(mu, dist, 0.9, 0.1);
    CHECK(k.estimate.value == 0.0);
    CHECK(k.normalization == "[0,T]");
}

TEST_CASE("closed orbit entropy is zero; constants shift pressure exactly") {
    const auto& f = fx();
    auto mu = closed_orbit_measure(f.p.generators[0], 40);
    pot::Potential c(pot::PotentialSpec::constant(0.3), f.db);
    std::vector<double> Tg{4.0, 6.0, 8.0, 10.0};
    DynamicalDistances d0(mu, Tg, 0.05, f.cache, nullptr, 1.0), dc(mu, Tg, 0.05, f.cache, &c, 1.0);
    double prev = 1e9;
    for (double eps : {0.1, 0.2, 0.4}) {
        auto h = katok_estimate(mu, d0, 0.9, eps);
        CHECK(std::abs(h.estimate.value) < 1e-12);
        CHECK(h.log_weight[0] <= prev);
        prev = h.log_weight[0];
        auto p0 = katok_estimate(mu, d0, 0.9, eps, true), pc = katok_estimate(mu, dc, 0.9, eps, true);
        CHECK(pc.estimate.value - p0.estimate.value == doctest::Approx(0.3).epsilon(1e-9));
    }
    CHECK_THROWS(spanning_weight(mu, d0, 0, 1.0, 0.1));
    CHECK_THROWS(spanning_weight(mu, d0, 0, 0.9, 2.0));
}

TEST_CASE("PS-derived samples are diagnostic and reproducible") {
    const auto& f = fx();
    auto m = ps::build_ps_measure(f.db, 0.6);
    auto a = ps_derived_measure(m, 30, 4), b = ps_derived_measure(m, 30, 4);
    CHECK(a.diagnostic_only);
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i].context == b.samples[i].context);
}
