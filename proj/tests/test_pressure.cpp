#include <cmath>

#include "doctest.h"
#include "thermo/error.hpp"
#include "thermo/pressure.hpp"

using namespace thermo;
using namespace thermo::prs;

namespace {

AnnulusTable synthetic(const std::vector<double>& q, double horizon) {
    AnnulusTable tab;
    tab.horizon = horizon;
    for (std::size_t i = 0; i < q.size(); ++i) {
        tab.t.push_back(static_cast<double>(i + 1));
        tab.q.push_back(q[i]);
        tab.count.push_back(q[i] > 0.0 ? 1 : 0);
    }
    return tab;
}

}  // namespace

TEST_CASE("exact exponential growth is recovered") {
    std::vector<double> q;
    for (int t = 1; t <= 12; ++t) q.push_back(3.0 * std::exp(0.7 * t));
    auto e = fit_exponent(synthetic(q, 12.0));
    CHECK(e.value == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(e.stderr_ < 1e-10);
    CHECK_FALSE(e.neg_inf);
    CHECK(e.t_min >= 6.0);
}

TEST_CASE("the fit ignores incomplete bins") {
    std::vector<double> q;
    for (int t = 1; t <= 12; ++t) q.push_back(std::exp(0.4 * t));
    q[11] = 1e-3;
    q[10] = 1e-3;
    auto e = fit_exponent(synthetic(q, 10.0));
    CHECK(e.value == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("trailing empty bins give the sentinel") {
    std::vector<double> q{1, 2, 3, 1, 0, 0, 0};
    auto e = fit_exponent(synthetic(q, 7.0));
    CHECK(e.neg_inf);
    CHECK(e.value == kNegInf);
    CHECK(e.witness == doctest::Approx(4.0));
    // Two empty bins are not enough.
    CHECK_THROWS_AS(fit_exponent(synthetic({1, 2, 3, 1, 0, 0}, 6.0)), Error);
    // An entirely empty table is not evidence of anything.
    CHECK_THROWS_AS(fit_exponent(synthetic({0, 0, 0, 0, 0, 0}, 6.0)), Error);
}

TEST_CASE("kappa adds log t") {
    std::vector<double> q;
    for (int t = 1; t <= 12; ++t) q.push_back(std::exp(0.5 * t) / t);
    FitOptions opt;
    opt.kappa = 1.0;
    CHECK(fit_exponent(synthetic(q, 12.0), opt).value == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("annulus sums count every non-identity element once") {
    auto db = grp::enumerate_orbit(grp::schottky_pair(), {.max_word_len = 1'000'000, .max_dist = 10.0});
    auto tab = annulus_sums(db, 1.0);
    long n = 0;
    double q = 0.0;
    for (std::size_t i = 0; i < tab.t.size(); ++i) n += tab.count[i], q += tab.q[i];
    CHECK(static_cast<std::size_t>(n) == db.size() - 1);
    CHECK(q == doctest::Approx(static_cast<double>(db.size() - 1)));
    // With f constant λt on each bin the exponent shifts by exactly λ.
    auto e0 = fit_exponent(tab);
    std::vector<double> f;
    for (const auto& el : db.elements()) f.push_back(0.25 * std::ceil(el.d_o - 1e-12));
    CHECK(fit_exponent(annulus_sums(db, 1.0, f)).value == doctest::Approx(e0.value + 0.25).epsilon(1e-9));
}

TEST_CASE("relaxed Γ_K contains strict Γ_K") {
    auto p = grp::schottky_parabolic();
    auto db = grp::enumerate_orbit(p, {.max_word_len = 1'000'000, .max_dist = 12.0});
    grp::OrbitIndex index(db);
    for (double R : {0.5, 1.0}) {
        auto s = gamma_k_members(db, index, R, GammaKMode::strict, &p);
        auto r = gamma_k_members(db, index, R, GammaKMode::relaxed, &p);
        CHECK(s.count <= r.count);
        for (std::size_t i = 0; i < db.size(); ++i)
            if (s.members[i]) CHECK(r.members[i]);
    }
}

TEST_CASE("convex-cocompact restricted exponent vanishes") {
    auto p = grp::schottky_pair();
    auto db = grp::enumerate_orbit(p, {.max_word_len = 1'000'000, .max_dist = 14.0});
    grp::OrbitIndex index(db);
    auto gk = gamma_k_members(db, index, 1.5, GammaKMode::relaxed, &p);
    auto r = restricted_exponent(db, gk, 1.0);
    CHECK(r.ok);
    CHECK(r.estimate.neg_inf);
}
