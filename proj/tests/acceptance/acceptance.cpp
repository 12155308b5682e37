// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned here.
//
//   acceptance                      exit 0 iff every criterion passes
//   acceptance --expected-fail 11   exit 0 iff exactly the listed ones fail

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "thermo/error.hpp"
#include "thermo/hypgeom.hpp"
#include "thermo/scenario.hpp"

using namespace thermo;
using namespace thermo::hyp;
using cli::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kPressureTol = 0.05;        // 1
constexpr double kLatticeTol = 0.05;         // 2
constexpr double kCuspTol = 0.07;            // 4
constexpr double kGapSigmas = 3.0;           // 4
constexpr double kStableTol = 0.02;          // 4: neighbouring R agree within this
constexpr double kShadowSlope = 0.07;        // 6
constexpr double kRecurrenceTol = 0.1;       // 7
constexpr double kGurevicInfTol = 0.1;       // 8
constexpr double kGeometryTol = 1e-9;        // 9
constexpr double kShadowAngleTol = 1e-6;     // 9
constexpr double kEntropyTol = 0.05;         // 10
constexpr double kExcursionSlack = 0.15;     // 11

struct Result {
    int id;
    std::string title;
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double value(const json& est) {
    if (est.value("neg_inf", false)) return -std::numeric_limits<double>::infinity();
    return est.at("value").get<double>();
}

const json& analysis(const cli::RunReport& r, const std::string& name) {
    const auto& a = r.doc.at("analyses").at(name);
    if (a.contains("error")) throw Error(ErrorKind::insufficient_data, name + ": " + a["error"].get<std::string>());
    return a;
}

cli::RunReport run(cli::ScenarioConfig cfg, std::vector<std::string> analyses) {
    cfg.analyses = std::move(analyses);
    auto t0 = std::chrono::steady_clock::now();
    auto r = cli::run_scenario(cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "  ran " << cfg.preset.name << " (" << cfg.potential.str() << ") in " << fmt("%.1f", secs) << " s\n";
    return r;
}

// ------------------------------------------------------------ criterion 1

Result pressure_equality() {
    Result res{1, "pressure equality on schottky_pair"};
    auto cfg = cli::default_config("schottky_pair");
    std::string detail;
    bool ok = true;
    for (auto F : {pot::PotentialSpec::zero(), pot::PotentialSpec::bump(0.5, 0.8)}) {
        cfg.potential = F;
        auto r = run(cfg, {"exponent", "gurevic"});
        const auto& g = analysis(r, "gurevic");
        double d = value(analysis(r, "exponent")["estimate"]), p = value(g["estimate"]);
        double diff = std::abs(d - p);
        ok = ok && diff <= kPressureTol;
        detail += fmt("F=%s: delta=%.4f P_Gur=%.4f |diff|=%.4f; ", F.str().c_str(), d, p, diff);
    }
    res.passed = ok;
    res.detail = detail + fmt("tol %.2f", kPressureTol);
    return res;
}

// ------------------------------------------------------------ criterion 2

Result lattice_calibration(cli::RunReport& r) {
    Result res{2, "modular group exponent"};
    double d = value(analysis(r, "exponent")["estimate"]);
    res.passed = std::abs(d - 1.0) <= kLatticeTol;
    double g = value(analysis(r, "gurevic")["estimate"]);
    res.detail = fmt("delta=%.4f (target 1 +- %.2f), Gurevic cross-check %.4f", d, kLatticeTol, g);
    return res;
}

// ------------------------------------------------------------ criterion 3

Result convex_cocompact_vanishing(cli::RunReport& r) {
    Result res{3, "restricted exponent -inf on schottky_pair"};
    const auto& rows = analysis(r, "infinity")["per_R"];
    // R0: smallest R from which every larger R on the grid is the sentinel.
    double R0 = -1.0, witness = 0.0;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (!(*it)["ok"].get<bool>() || !(*it)["estimate"]["neg_inf"].get<bool>()) break;
        R0 = (*it)["R"].get<double>();
        witness = std::max(witness, (*it)["estimate"]["witness"].get<double>());
    }
    res.passed = R0 > 0.0;
    res.detail = R0 > 0.0 ? fmt("R0=%.2f, empty annuli beyond T*=%.1f up to the horizon", R0, witness)
                          : std::string("no R on the grid gives the sentinel");
    return res;
}

// ------------------------------------------------------------ criterion 4

// Exponent of the parabolic subgroup by direct summation of Σ e^{-s d(o, T^n o)}:
// d(o, T^n o) = 2 asinh(|n| c / 2), so the orbit points with d < t number
// 2 floor((2 / c) sinh(t / 2)). Slope of log(bin counts) over a long range.
double parabolic_oracle(double c) {
    auto below = [c](double t) { return 2.0 * std::floor(2.0 / c * std::sinh(t / 2.0)); };
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (double t = 20.0; t < 60.0; t += 1.0) {
        double y = std::log(below(t + 1.0) - below(t));
        sx += t, sy += y, sxx += t * t, sxy += t * y, ++m;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Result cusp_exponent(cli::RunReport& r) {
    Result res{4, "cusp exponent on schottky_parabolic"};
    double oracle = parabolic_oracle(r.doc["config"]["preset"]["c"].get<double>());
    const auto& inf = analysis(r, "infinity");
    const auto& rows = inf["per_R"];
    // Largest R whose estimate agrees with the next smaller R.
    const json* best = nullptr;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (!rows[k]["ok"].get<bool>() || !rows[k - 1]["ok"].get<bool>()) continue;
        if (std::abs(value(rows[k]["estimate"]) - value(rows[k - 1]["estimate"])) <= kStableTol) best = &rows[k];
    }
    if (!best) {
        res.detail = "no stable R on the grid";
        return res;
    }
    const auto& e = (*best)["estimate"];
    double dk = value(e), dk_se = e["stderr"].get<double>();
    double d = value(inf["full"]), d_se = inf["full"]["stderr"].get<double>();
    double gap = d - dk, sigma = std::hypot(d_se, dk_se);
    bool near = std::abs(dk - oracle) <= kCuspTol, spr = gap > kGapSigmas * sigma;
    res.passed = near && spr;
    res.detail = fmt("R=%.2f delta_K=%.4f+-%.4f, oracle %.4f (tol %.2f); gap %.4f = %.1f sigma (need %.0f)",
                     (*best)["R"].get<double>(), dk, dk_se, oracle, kCuspTol, gap, gap / sigma, kGapSigmas);
    return res;
}

// ------------------------------------------------------------ criterion 5

Result perturbation_laws(cli::RunReport& r) {
    Result res{5, "compact perturbation sweep on schottky_parabolic"};
    const auto& s = analysis(r, "sweep");
    bool ok = true;
    std::string failed;
    for (const auto& c : r.doc["checks"])
        if (c["analysis"] == "sweep" && !c["passed"].get<bool>()) ok = false, failed += c["check"].get<std::string>() + "; ";
    std::string lam;
    for (const auto& row : s["rows"])
        lam += fmt("%g:%.3f/%.3f ", row["lambda"].get<double>(), value(row["full"]),
                   row["restricted"].is_object() ? value(row["restricted"]) : NAN);
    res.passed = ok;
    res.detail = "lambda:delta/delta_K " + lam +
                 fmt("min 2nd diff %.4f, well margin %.4f", s["min_second_difference"].get<double>(),
                     s["well_margin"].get<double>()) +
                 (ok ? "" : " failed: " + failed);
    return res;
}

// ------------------------------------------------------------ criterion 6

Result shadow_stability(cli::RunReport& r) {
    Result res{6, "shadow ratio slope on schottky_pair"};
    for (const auto& row : analysis(r, "ps_check")["rows"]) {
        if (std::abs(row["epsilon"].get<double>() - 0.05) > 1e-12) continue;
        double slope = row["slope"].get<double>(), se = row["slope_stderr"].get<double>();
        res.passed = std::abs(slope) <= kShadowSlope;
        res.detail = fmt("s=%.4f, %zu elements with d_o in [5,10], slope %.4f+-%.4f (bound %.2f)", row["s"].get<double>(),
                         row["tested"].get<std::size_t>(), slope, se, kShadowSlope);
        return res;
    }
    res.detail = "no row at epsilon 0.05";
    return res;
}

// ------------------------------------------------------------ criterion 7

Result recurrence_gap(cli::RunReport& r) {
    Result res{7, "exponential recurrence rate vs gap on schottky_parabolic"};
    const auto& a = analysis(r, "recurrence");
    double alpha = a["alpha"].get<double>(), gap = a["gap"].get<double>();
    res.passed = alpha > 0.0 && std::abs(alpha - gap) <= kRecurrenceTol;
    res.detail = fmt("R=%.2f alpha=%.4f+-%.4f, delta-delta_K=%.4f, |diff|=%.4f (tol %.2f)", a["R"].get<double>(), alpha,
                     a["alpha_stderr"].get<double>(), gap, std::abs(alpha - gap), kRecurrenceTol);
    return res;
}

// ------------------------------------------------------------ criterion 8

Result gurevic_infinity(cli::RunReport& r) {
    Result res{8, "Gurevic pressure at infinity on schottky_parabolic"};
    const auto& a = analysis(r, "gurevic_infinity");
    if (!a.contains("corner")) {
        res.detail = "no estimate at the grid corner";
        return res;
    }
    const auto& c = a["corner"];
    auto num = [](const json& v) { return v.is_number() ? v.get<double>() : -INFINITY; };
    double p = num(c["P_Gur_inf"]), d = num(c["delta_inf"]);
    double diff = std::isinf(p) && std::isinf(d) ? 0.0 : std::abs(p - d);
    res.passed = diff <= kGurevicInfTol;
    res.detail = fmt("corner R=%.2f alpha=0.1: P_Gur_inf=%.4f delta_inf=%.4f |diff|=%.4f (tol %.2f)",
                     c["R"].get<double>(), p, d, diff, kGurevicInfTol);
    return res;
}

// ------------------------------------------------------------ criterion 9

Point random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ly(-2.0, 2.0);
    return Point{ux(rng), std::exp(ly(rng))};
}

Isometry random_isometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> th(-kPi, kPi), len(0.0, 3.0);
    return rotation_about_origin(th(rng)) * translation_through_origin(th(rng), len(rng));
}

double tangent_ray_oracle(double d, double R) {
    Point c{0.0, std::exp(d)};
    double lo = 0.0, hi = kPi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        GeodesicSegment ray{kOrigin, BoundaryPoint::from_angle(mid)};
        (point_segment_distance(c, ray) <= R ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Result geometry_suite() {
    Result res{9, "geometry property suite"};
    constexpr int kCases = 10000;
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> th(-kPi, kPi);
    // Errors relative to max(1, |quantity|).
    double cocycle = 0, equiv = 0, sandwich = 0, conj = 0, angle = 0;
    auto rel = [](double err, double scale) { return err / std::max(1.0, std::abs(scale)); };
    for (int i = 0; i < kCases; ++i) {
        Point x = random_point(rng), y = random_point(rng), z = random_point(rng);
        BoundaryPoint xi = BoundaryPoint::from_angle(th(rng));
        Isometry g = random_isometry(rng), k = random_isometry(rng);
        double bxy = busemann(xi, x, y), byz = busemann(xi, y, z), bxz = busemann(xi, x, z);
        cocycle = std::max(cocycle, rel(std::abs(bxz - bxy - byz), bxz));
        equiv = std::max(equiv, rel(std::abs(busemann(g.apply(xi), g.apply(x), g.apply(y)) - bxy), bxy));
        double h = point_segment_distance(x, GeodesicSegment{y, z});
        double lhs = dist(y, x) + dist(x, z) - 2.0 * h, dyz = dist(y, z);
        double viol = std::max({0.0, lhs - dyz, dyz - lhs - 2.0 * std::log(2.0)});
        sandwich = std::max(sandwich, rel(viol, dyz));
        double l1 = analyze_isometry(k).translation_length, l2 = analyze_isometry(g * k * g.inverse()).translation_length;
        conj = std::max(conj, rel(std::abs(l1 - l2), l1));
    }
    std::uniform_real_distribution<double> dd(0.5, 12.0), rr(0.05, 3.0);
    for (int i = 0; i < kCases; ++i) {
        double d = dd(rng), R = rr(rng);
        if (R >= d) continue;
        angle = std::max(angle, std::abs(shadow_halfangle(d, R) - tangent_ray_oracle(d, R)));
    }
    res.passed = std::max({cocycle, equiv, sandwich, conj}) <= kGeometryTol && angle <= kShadowAngleTol;
    res.detail = fmt("%d cases each; max rel err: cocycle %.1e, equivariance %.1e, sandwich %.1e, conjugation %.1e "
                     "(tol %.0e); shadow angle %.1e (tol %.0e)",
                     kCases, cocycle, equiv, sandwich, conj, kGeometryTol, angle, kShadowAngleTol);
    return res;
}

// ------------------------------------------------------------ criterion 10

Result entropy_sanity(cli::RunReport& r) {
    Result res{10, "entropy estimator sanity on schottky_pair"};
    const auto& a = analysis(r, "entropy");
    double shift = a["shift"].get<double>();
    bool ok = true, monotone = true;
    double prev = INFINITY, worst_h = 0.0, worst_shift = 0.0;
    for (const auto& row : a["rows"]) {
        double h = value(row["entropy"]), se = row["entropy"]["stderr"].get<double>();
        double dp = value(row["shifted_pressure"]) - value(row["pressure"]);
        double dp_se = std::hypot(row["shifted_pressure"]["stderr"].get<double>(), row["pressure"]["stderr"].get<double>());
        worst_h = std::max(worst_h, std::abs(h));
        worst_shift = std::max(worst_shift, std::abs(dp - shift));
        ok = ok && std::abs(h) <= kEntropyTol && std::abs(dp - shift) <= dp_se + 1e-9;
        if (h > prev + se) monotone = false;
        prev = h;
    }
    res.passed = ok && monotone;
    res.detail = fmt("word %s: max |h|=%.2e (tol %.2f), max |shift-c|=%.2e for c=%.2f, monotone in eps: %s",
                     a["word"].get<std::string>().c_str(), worst_h, kEntropyTol, worst_shift, shift, monotone ? "yes" : "no");
    return res;
}

// ------------------------------------------------------------ criterion 11

Result excursion_trend(cli::RunReport& r) {
    Result res{11, "excursion-count growth bound on schottky_parabolic"};
    const auto& a = analysis(r, "excursion_check");
    bool ok = true;
    std::string detail;
    for (const auto& row : a["rows"]) {
        double al = row["alpha"].get<double>();
        if (!row.contains("growth")) {
            ok = false;
            detail += fmt("alpha %.1f: %s; ", al, row["note"].get<std::string>().c_str());
            continue;
        }
        double g = value(row["growth"]), b = row["bound"].get<double>();
        ok = ok && g <= b;
        detail += fmt("alpha %.1f: growth %.4f vs bound %.4f (%zu orbits); ", al, g, b,
                      row["orbits"].get<std::size_t>());
    }
    res.passed = ok;
    res.detail = detail + fmt("slack %.2f, orbits up to length %.0f", kExcursionSlack,
                              a["census"]["max_len"].get<double>());
    return res;
}

template <class F>
Result guarded(int id, const std::string& title, F f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {id, title, false, std::string("error: ") + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected_fail;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--expected-fail" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string tok; std::getline(ss, tok, ',');) expected_fail.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--expected-fail N[,M...]]\n";
            return 2;
        }
    }

    std::vector<Result> results;
    try {
        results.push_back(guarded(1, "pressure equality", pressure_equality));

        auto modular = run(cli::default_config("modular_group"), {"exponent", "gurevic"});
        results.push_back(guarded(2, "modular group exponent", [&] { return lattice_calibration(modular); }));

        auto pair_cfg = cli::default_config("schottky_pair");
        pair_cfg.settings.ps_check.epsilons = {0.05};
        pair_cfg.settings.ps_check.slope_tolerance = kShadowSlope;
        auto pair = run(pair_cfg, {"infinity", "ps_check", "entropy"});
        results.push_back(guarded(3, "restricted exponent -inf", [&] { return convex_cocompact_vanishing(pair); }));

        auto para_cfg = cli::default_config("schottky_parabolic");
        para_cfg.settings.excursion_check.slack = kExcursionSlack;
        auto para = run(para_cfg, {"infinity", "gurevic_infinity", "sweep", "recurrence", "excursion_check"});
        results.push_back(guarded(4, "cusp exponent", [&] { return cusp_exponent(para); }));
        results.push_back(guarded(5, "perturbation sweep", [&] { return perturbation_laws(para); }));
        results.push_back(guarded(6, "shadow ratio slope", [&] { return shadow_stability(pair); }));
        results.push_back(guarded(7, "recurrence vs gap", [&] { return recurrence_gap(para); }));
        results.push_back(guarded(8, "Gurevic at infinity", [&] { return gurevic_infinity(para); }));
        results.push_back(guarded(9, "geometry property suite", geometry_suite));
        results.push_back(guarded(10, "entropy sanity", [&] { return entropy_sanity(pair); }));
        results.push_back(guarded(11, "excursion growth bound", [&] { return excursion_trend(para); }));
    } catch (const std::exception& e) {
        std::cerr << "acceptance run aborted: " << e.what() << '\n';
        return 3;
    }

    std::sort(results.begin(), results.end(), [](const Result& a, const Result& b) { return a.id < b.id; });
    std::set<int> failed;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << ' ' << r.id << ' ' << r.title << ": " << r.detail << '\n';
        if (!r.passed) failed.insert(r.id);
    }
    std::cout << results.size() - failed.size() << "/" << results.size() << " criteria pass";
    if (!expected_fail.empty()) {
        std::cout << "; expected to fail:";
        for (int id : expected_fail) std::cout << ' ' << id;
    }
    std::cout << '\n';
    return failed == expected_fail ? 0 : 1;
}
