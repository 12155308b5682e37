#include "thermo/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "thermo/entropy.hpp"
#include "thermo/error.hpp"
#include "thermo/orbits.hpp"
#include "thermo/pressure.hpp"
#include "thermo/psmeasure.hpp"

namespace thermo::cli {

namespace {

// ------------------------------------------------------------ json helpers

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw Error(ErrorKind::config, where + " must be an object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* a : keys) known = known || k == a;
        if (!known) throw Error(ErrorKind::config, "unknown field '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::config, std::string("field '") + key + "' in " + where + " has the wrong type");
    }
}

void read_grid(const json& j, const char* key, std::vector<double>& out, const std::string& where, bool sorted = true) {
    read(j, key, out, where);
    if (sorted && !std::is_sorted(out.begin(), out.end()))
        throw Error(ErrorKind::config, std::string("'") + key + "' in " + where + " must be increasing");
}

json num(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

std::string cell(double v) {
    if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Short form for check names.
std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string cell(long v) { return std::to_string(v); }
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

json truncation_json(const grp::Truncation& t) {
    return json{{"max_word_len", t.max_word_len},
                {"max_dist", t.max_dist},
                {"horizon", t.horizon},
                {"certified", t.certified},
                {"achieved_word_len", t.achieved_word_len}};
}

json estimate_json(const prs::ExponentEstimate& e) {
    json j{{"value", e.neg_inf ? json("-inf") : json(e.value)},
           {"stderr", e.stderr_},
           {"neg_inf", e.neg_inf},
           {"method", e.method},
           {"t_min", e.t_min},
           {"t_max", e.t_max},
           {"bins", e.bins},
           {"cumulative", num(e.cumulative)}};
    if (e.neg_inf) j["witness"] = e.witness;
    return j;
}

double value_of(const prs::ExponentEstimate& e) { return e.neg_inf ? prs::kNegInf : e.value; }

// ------------------------------------------------------------ run state

struct Check {
    std::string analysis, name;
    double value = 0.0, bound = 0.0;
    std::string relation;
    bool passed = false;
    std::string note;
};

struct Run {
    const ScenarioConfig& cfg;
    grp::Presentation p;
    grp::OrbitDatabase db;
    std::unique_ptr<grp::OrbitIndex> index;
    std::unique_ptr<pot::Potential> F;
    std::optional<prs::ExponentEstimate> full;
    std::map<double, prs::GammaKReport> gk;
    std::map<double, prs::RestrictedResult> restricted;
    std::unique_ptr<orb::OrbitCensus> census;
    std::vector<Check> checks;
    RunReport report;

    explicit Run(const ScenarioConfig& c) : cfg(c) {}

    prs::GammaKMode mode() const {
        return cfg.settings.gamma_k_mode == "strict" ? prs::GammaKMode::strict : prs::GammaKMode::relaxed;
    }
    double c() const { return cfg.settings.bin_width; }

    const prs::ExponentEstimate& exponent() {
        if (!full) full = prs::fit_exponent(prs::annulus_sums(db, c()));
        return *full;
    }
    const prs::RestrictedResult& restricted_at(double R) {
        auto it = restricted.find(R);
        if (it != restricted.end()) return it->second;
        auto g = gk.find(R);
        if (g == gk.end()) g = gk.emplace(R, prs::gamma_k_members(db, *index, R, mode(), &p)).first;
        return restricted.emplace(R, prs::restricted_exponent(db, g->second, c())).first->second;
    }
    const orb::OrbitCensus& orbits() {
        if (!census) {
            std::set<double> grid{cfg.settings.gurevic.R, cfg.settings.excursion_check.R_inner,
                                  cfg.settings.excursion_check.R_outer};
            for (double R : cfg.settings.gurevic_infinity.R_grid) grid.insert(R);
            std::vector<double> Rg(grid.begin(), grid.end());
            census = std::make_unique<orb::OrbitCensus>(
                orb::build_periodic_orbits(p, db, *index, cfg.truncation.max_orbit_len, Rg, F.get()));
        }
        return *census;
    }
    std::size_t census_index(double R) {
        const auto& g = orbits().R_grid;
        auto it = std::find(g.begin(), g.end(), R);
        if (it == g.end()) throw Error(ErrorKind::config, "R = " + label(R) + " is not on the orbit census grid");
        return static_cast<std::size_t>(it - g.begin());
    }
    json census_json() {
        const auto& o = orbits();
        json j{{"orbits", o.orbits.size()},
               {"max_len", o.max_len},
               {"unresolved", o.unresolved},
               {"non_primitive", o.non_primitive},
               {"required_radius", o.required_radius}};
        json cr = json::array();
        for (std::size_t k = 0; k < o.R_grid.size(); ++k)
            cr.push_back({{"R", o.R_grid[k]}, {"C_R", o.C_R.empty() ? 0.0 : o.C_R[k]},
                          {"nK_bound_ok", o.nK_bound_ok.empty() ? true : static_cast<bool>(o.nK_bound_ok[k])}});
        j["return_count_bounds"] = cr;
        return j;
    }

    void check(const std::string& analysis, const std::string& name, double value, const std::string& relation,
               double bound, bool passed, const std::string& note = "") {
        checks.push_back({analysis, name, value, bound, relation, passed, note});
    }
    CsvTable& table(const std::string& name, std::vector<std::string> columns) {
        report.tables.push_back({name, std::move(columns), {}});
        return report.tables.back();
    }

    json run_exponent();
    json run_infinity();
    json run_gurevic();
    json run_gurevic_infinity();
    json run_sweep();
    json run_ps_check();
    json run_recurrence();
    json run_entropy();
    json run_excursion();
};

json Run::run_exponent() {
    auto tab = prs::annulus_sums(db, c());
    const auto& e = exponent();
    auto& t = table("exponent", {"t", "q", "count", "complete"});
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        t.rows.push_back({cell(tab.t[i]), cell(tab.q[i]), cell(tab.count[i]), cell(tab.complete(i))});
    json j{{"estimate", estimate_json(e)}, {"discrepancy", e.discrepancy()}};
    const auto& ex = cfg.settings.exponent;
    if (ex.value) {
        double diff = std::abs(value_of(e) - *ex.value);
        check("exponent", "|delta - expected|", diff, "<=", ex.tolerance, diff <= ex.tolerance);
    }
    return j;
}

json Run::run_infinity() {
    const auto& s = cfg.settings;
    const auto& e = exponent();
    auto& t = table("infinity", {"R", "members", "value", "stderr", "neg_inf", "witness", "ok"});
    json rows = json::array();
    const prs::RestrictedResult* last = nullptr;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity(), prev_se = 0.0;
    for (double R : s.R_grid) {
        const auto& r = restricted_at(R);
        json row{{"R", R}, {"members", r.members}, {"ok", r.ok}};
        if (r.ok) {
            row["estimate"] = estimate_json(r.estimate);
            double v = value_of(r.estimate);
            if (std::isfinite(prev) && v > prev + 2.0 * std::hypot(r.estimate.stderr_, prev_se)) monotone = false;
            prev = v;
            prev_se = r.estimate.stderr_;
            last = &r;
        } else {
            row["note"] = r.note;
        }
        rows.push_back(row);
        t.rows.push_back({cell(R), cell(r.members), cell(r.ok ? value_of(r.estimate) : 0.0), cell(r.estimate.stderr_),
                          cell(r.estimate.neg_inf), cell(r.estimate.witness), cell(r.ok)});
    }
    json j{{"mode", s.gamma_k_mode}, {"per_R", rows}, {"full", estimate_json(e)}};
    if (last) {
        double v = value_of(last->estimate);
        j["summary"] = num(v);
        j["summary_R"] = last->R;
        j["summary_stderr"] = last->estimate.stderr_;
        double gap = e.value - v;
        double sigma = std::hypot(e.stderr_, last->estimate.stderr_);
        j["gap"] = num(gap);
        j["gap_sigma"] = sigma;
        bool spr = last->estimate.neg_inf || gap > 3.0 * sigma;
        j["spr"] = spr;
        check("infinity", "pressure gap over combined stderr", last->estimate.neg_inf ? std::numeric_limits<double>::infinity() : gap / sigma, ">",
              3.0, spr);
    } else {
        check("infinity", "pressure gap over combined stderr", 0.0, ">", 3.0, false, "no R with a usable estimate");
    }
    // Γ_K is not nested in R, so this is informational only.
    j["nonincreasing_in_R"] = monotone;
    return j;
}

json Run::run_gurevic() {
    double R = cfg.settings.gurevic.R;
    std::size_t k = census_index(R);
    auto tab = orb::gurevic_table(orbits(), k, c());
    auto est = orb::gurevic_pressure(orbits(), k, c());
    auto& t = table("gurevic", {"t", "sum", "count"});
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        t.rows.push_back({cell(tab.t[i]), cell(tab.all[i]), cell(tab.count_all[i])});
    json j{{"R", R}, {"kappa", orb::kGurevicKappa}, {"estimate", estimate_json(est)}, {"census", census_json()}};
    const auto& e = exponent();
    double diff = std::abs(value_of(e) - value_of(est));
    j["exponent"] = estimate_json(e);
    j["difference"] = num(diff);
    check("gurevic", "|delta - P_Gur|", diff, "<=", cfg.settings.gurevic.tolerance,
          diff <= cfg.settings.gurevic.tolerance);
    return j;
}

json Run::run_gurevic_infinity() {
    const auto& s = cfg.settings.gurevic_infinity;
    if (s.R_grid.empty() || s.alpha_grid.empty()) throw Error(ErrorKind::config, "empty R or α grid");
    auto& t = table("gurevic_infinity", {"R", "alpha", "value", "stderr", "neg_inf", "orbits", "ok"});
    json rows = json::array();
    std::optional<prs::ExponentEstimate> corner;
    std::string corner_note;
    for (double R : s.R_grid) {
        std::size_t k = census_index(R);
        for (double a : s.alpha_grid) {
            auto tab = orb::gurevic_table(orbits(), k, c(), a);
            long n = 0;
            for (long x : tab.count_filtered) n += x;
            json row{{"R", R}, {"alpha", a}, {"orbits", n}};
            bool is_corner = R == s.R_grid.back() && a == *std::min_element(s.alpha_grid.begin(), s.alpha_grid.end());
            try {
                auto est = orb::gurevic_pressure_at_infinity(orbits(), k, a, c());
                row["estimate"] = estimate_json(est);
                t.rows.push_back({cell(R), cell(a), cell(value_of(est)), cell(est.stderr_), cell(est.neg_inf), cell(n),
                                  cell(true)});
                if (is_corner) corner = est;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::insufficient_data) throw;
                row["note"] = e.what();
                t.rows.push_back({cell(R), cell(a), "", "", "", cell(n), cell(false)});
                if (is_corner) corner_note = e.what();
            }
            rows.push_back(row);
        }
    }
    double Rmax = s.R_grid.back();
    const auto& ri = restricted_at(Rmax);
    json j{{"grid", rows}, {"census", census_json()}};
    if (!ri.ok) {
        check("gurevic_infinity", "|P_Gur^inf - delta^inf| at grid corner", 0.0, "<=", s.tolerance, false,
              "restricted exponent unavailable: " + ri.note);
    } else if (!corner) {
        check("gurevic_infinity", "|P_Gur^inf - delta^inf| at grid corner", 0.0, "<=", s.tolerance, false,
              corner_note);
    } else {
        double a = value_of(*corner), b = value_of(ri.estimate);
        bool both_inf = corner->neg_inf && ri.estimate.neg_inf;
        double diff = both_inf ? 0.0 : std::abs(a - b);
        j["corner"] = {{"R", Rmax}, {"P_Gur_inf", num(a)}, {"delta_inf", num(b)}, {"difference", num(diff)}};
        check("gurevic_infinity", "|P_Gur^inf - delta^inf| at grid corner", diff, "<=", s.tolerance,
              diff <= s.tolerance);
    }
    return j;
}

json Run::run_sweep() {
    const auto& s = cfg.settings.sweep;
    restricted_at(s.R);
    auto rep = prs::perturbation_sweep(db, cfg.potential, s.perturbation, s.lambdas, gk.at(s.R), c());
    auto& t = table("sweep", {"lambda", "delta", "delta_stderr", "delta_K", "delta_K_stderr", "delta_K_neg_inf"});
    json rows = json::array();
    for (const auto& r : rep.rows) {
        rows.push_back({{"lambda", r.lambda},
                        {"full", estimate_json(r.full)},
                        {"restricted", r.restricted.ok ? estimate_json(r.restricted.estimate) : json(r.restricted.note)}});
        t.rows.push_back({cell(r.lambda), cell(value_of(r.full)), cell(r.full.stderr_),
                          cell(r.restricted.ok ? value_of(r.restricted.estimate) : 0.0),
                          cell(r.restricted.estimate.stderr_), cell(r.restricted.estimate.neg_inf)});
    }
    json j{{"R", s.R}, {"perturbation", potential_to_json(s.perturbation)}, {"rows", rows},
           {"min_second_difference", num(rep.min_second_difference)}, {"well_margin", rep.well_margin}};
    check("sweep", "restricted exponent invariant (2 stderr)", rep.restricted_invariant, "==", 1.0,
          rep.restricted_invariant);
    check("sweep", "delta nondecreasing in lambda", rep.monotone, "==", 1.0, rep.monotone);
    check("sweep", "min second difference", rep.min_second_difference, ">=", -0.02, rep.convex);
    check("sweep", "well margin", rep.well_margin, ">=", 0.0, rep.well_ok);
    return j;
}

json Run::run_ps_check() {
    const auto& s = cfg.settings.ps_check;
    const auto& e = exponent();
    std::vector<std::size_t> gammas;
    for (std::size_t i = 0; i < db.size(); ++i) {
        double d = db.elements()[i].d_o;
        if (d >= s.d_min && d <= s.d_max) gammas.push_back(i);
    }
    if (gammas.size() < 3) throw Error(ErrorKind::insufficient_data, "fewer than 3 elements in the shadow test range");
    auto& t = table("ps_check", {"epsilon", "s", "R", "slope", "slope_stderr", "min_ratio", "max_ratio", "flagged"});
    auto& eq = table("ps_equivariance", {"epsilon", "generator", "arcs", "max_relative_error"});
    json rows = json::array();
    for (double eps : s.epsilons) {
        double sv = e.value + eps;
        auto m = ps::build_ps_measure(db, sv);
        auto sh = ps::shadow_mass_check(m, db, gammas, s.R);
        json row{{"epsilon", eps}, {"s", sv}, {"slope", sh.slope}, {"slope_stderr", sh.slope_stderr},
                 {"min_ratio", sh.min_ratio}, {"max_ratio", sh.max_ratio}, {"flagged", sh.flagged},
                 {"tested", gammas.size()}};
        t.rows.push_back({cell(eps), cell(sv), cell(s.R), cell(sh.slope), cell(sh.slope_stderr), cell(sh.min_ratio),
                          cell(sh.max_ratio), cell(sh.flagged)});
        check("ps_check", "|shadow slope| at s = delta + " + label(eps), std::abs(sh.slope), "<=", s.slope_tolerance,
              std::abs(sh.slope) <= s.slope_tolerance);
        json eqs = json::array();
        for (std::size_t g = 0; g < p.generators.size(); ++g) {
            auto r = ps::equivariance_check(m, db, p, g, *F);
            eqs.push_back({{"generator", p.generator_names[g]}, {"arcs", r.arcs_checked},
                           {"max_relative_error", r.max_relative_error}});
            eq.rows.push_back({cell(eps), p.generator_names[g], cell(r.arcs_checked), cell(r.max_relative_error)});
            if (r.arcs_checked > 0)
                check("ps_check", "equivariance error, generator " + p.generator_names[g] + ", eps " + label(eps),
                      r.max_relative_error, "<=", s.equivariance_tolerance,
                      r.max_relative_error <= s.equivariance_tolerance);
        }
        row["equivariance"] = eqs;
        rows.push_back(row);
    }
    return json{{"R", s.R}, {"d_range", {s.d_min, s.d_max}}, {"rows", rows}, {"exponent", estimate_json(e)}};
}

json Run::run_recurrence() {
    const auto& s = cfg.settings.recurrence;
    const auto& e = exponent();
    const auto& rk = restricted_at(s.R);
    if (!rk.ok) throw Error(ErrorKind::insufficient_data, "restricted exponent at R = " + label(s.R) + ": " + rk.note);
    auto m = ps::build_ps_measure(db, e.value + s.epsilon);
    double t_max = std::min(index->complete_radius(), db.truncation().horizon) - s.R - 2.0;
    std::vector<double> Tg;
    for (double T = s.T0; T <= t_max + 1e-9; T += s.T_step) Tg.push_back(T);
    auto rep = ps::u_set_mass_decay(m, db, *index, s.R, s.T0, Tg);
    auto& t = table("recurrence", {"T", "mass", "eligible", "fraction", "atoms"});
    for (const auto& r : rep.rows)
        t.rows.push_back({cell(r.T), cell(r.mass), cell(r.eligible), cell(r.fraction()), cell(r.atoms)});
    double dk = value_of(rk.estimate);
    double gap = e.value - dk;
    json j{{"R", s.R}, {"T0", s.T0}, {"s", m.s()}, {"alpha", rep.alpha}, {"alpha_stderr", rep.alpha_stderr},
           {"fit_points", rep.fit_points}, {"verdict", rep.verdict}, {"delta", estimate_json(e)},
           {"delta_K", estimate_json(rk.estimate)}, {"gap", num(gap)}};
    if (rep.vanishes) {
        j["witness"] = rep.witness;
        bool ok = rk.estimate.neg_inf;
        check("recurrence", "avoiding mass vanishes with delta_K = -inf", ok, "==", 1.0, ok,
              "finitely many excursions");
    } else {
        check("recurrence", "alpha > 0", rep.alpha, ">", 0.0, rep.alpha > 0.0);
        double diff = std::abs(rep.alpha - gap);
        check("recurrence", "|alpha - (delta - delta_K)|", diff, "<=", s.tolerance, diff <= s.tolerance);
    }
    return j;
}

json Run::run_entropy() {
    const auto& s = cfg.settings.entropy;
    if (s.epsilons.empty()) throw Error(ErrorKind::config, "entropy needs at least one ε");
    auto g = p.evaluate(grp::Word::parse(s.word));
    auto cls = hyp::analyze_isometry(g);
    auto mu = ent::closed_orbit_measure(g, s.samples);
    ent::TranslateCache cache(db);
    double cap = 2.0 * *std::max_element(s.epsilons.begin(), s.epsilons.end());
    ent::DynamicalDistances dist(mu, s.T_grid, s.step, cache, F.get(), cap);
    pot::Potential shifted(cfg.potential.plus(pot::PotentialSpec::constant(s.shift)), db);
    ent::DynamicalDistances dist_shift(mu, s.T_grid, s.step, cache, &shifted, cap);
    double mean_f = F->period_integral(g) / cls.translation_length;
    auto& t = table("entropy", {"epsilon", "T", "log_count", "log_weight", "log_weight_shifted"});
    json rows = json::array();
    double prev = std::numeric_limits<double>::infinity(), prev_se = 0.0;
    bool monotone = true;
    std::vector<double> eps = s.epsilons;
    std::sort(eps.begin(), eps.end());
    for (double e : eps) {
        auto h = ent::katok_estimate(mu, dist, s.delta, e);
        auto pw = ent::katok_estimate(mu, dist, s.delta, e, true);
        auto ps_ = ent::katok_estimate(mu, dist_shift, s.delta, e, true);
        for (std::size_t k = 0; k < h.T.size(); ++k)
            t.rows.push_back({cell(e), cell(h.T[k]), cell(h.log_weight[k]), cell(pw.log_weight[k]),
                              cell(ps_.log_weight[k])});
        double shift = ps_.estimate.value - pw.estimate.value;
        double shift_se = std::hypot(ps_.estimate.stderr_, pw.estimate.stderr_);
        rows.push_back({{"epsilon", e}, {"entropy", estimate_json(h.estimate)}, {"pressure", estimate_json(pw.estimate)},
                        {"shifted_pressure", estimate_json(ps_.estimate)}, {"normalization", h.normalization}});
        check("entropy", "|h| on a closed orbit, eps " + label(e), std::abs(h.estimate.value), "<=", s.tolerance,
              std::abs(h.estimate.value) <= s.tolerance);
        double dev = std::abs(shift - s.shift);
        check("entropy", "|shift - c|, eps " + label(e), dev, "<=", shift_se + 1e-9, dev <= shift_se + 1e-9);
        check("entropy", "mean F - pressure, eps " + label(e), mean_f - pw.estimate.value, "<=", s.tolerance,
              mean_f <= pw.estimate.value + s.tolerance);
        if (h.estimate.value > prev + std::hypot(h.estimate.stderr_, prev_se) + 1e-12) monotone = false;
        prev = h.estimate.value;
        prev_se = h.estimate.stderr_;
    }
    check("entropy", "entropy nonincreasing in eps", monotone, "==", 1.0, monotone);
    return json{{"word", s.word},
                {"length", cls.translation_length},
                {"samples", s.samples},
                {"delta", s.delta},
                {"shift", s.shift},
                {"mean_F", mean_f},
                {"normalization", "[0,T]"},
                {"rows", rows}};
}

json Run::run_excursion() {
    const auto& s = cfg.settings.excursion_check;
    const auto& e = exponent();
    const auto& rk = restricted_at(s.R_inner);
    if (!rk.ok) throw Error(ErrorKind::insufficient_data, "restricted exponent at R = " + label(s.R_inner) + ": " + rk.note);
    std::size_t in = census_index(s.R_inner), out = census_index(s.R_outer);
    auto& t = table("excursion_check", {"alpha", "orbits", "growth", "stderr", "neg_inf", "bound", "margin", "passed"});
    json rows = json::array();
    for (double a : s.alphas) {
        json row{{"alpha", a}};
        try {
            auto chk = orb::weighted_excursion_sum(orbits(), in, out, a, value_of(rk.estimate), e.value, s.slack, c());
            row["orbits"] = chk.orbits_used;
            row["growth"] = estimate_json(chk.growth);
            row["bound"] = chk.bound;
            row["margin"] = num(chk.margin);
            row["nested_ratio"] = num(chk.nested_ratio);
            t.rows.push_back({cell(a), cell(chk.orbits_used), cell(value_of(chk.growth)), cell(chk.growth.stderr_),
                              cell(chk.growth.neg_inf), cell(chk.bound), cell(chk.margin), cell(chk.passed)});
            check("excursion_check", "growth at alpha " + label(a), value_of(chk.growth), "<=", chk.bound, chk.passed);
        } catch (const Error& err) {
            if (err.kind() != ErrorKind::insufficient_data) throw;
            row["note"] = err.what();
            t.rows.push_back({cell(a), "0", "", "", "", "", "", cell(false)});
            check("excursion_check", "growth at alpha " + label(a), 0.0, "<=", 0.0, false, err.what());
        }
        rows.push_back(row);
    }
    return json{{"R_inner", s.R_inner}, {"R_outer", s.R_outer}, {"delta", estimate_json(e)},
                {"delta_K", estimate_json(rk.estimate)}, {"rows", rows}, {"census", census_json()}};
}

// ------------------------------------------------------------ potential terms

pot::Term parse_term(const json& j) {
    const std::string where = "potential term";
    if (!j.is_object() || !j.contains("type")) throw Error(ErrorKind::config, "potential term needs a 'type'");
    auto type = j.at("type").get<std::string>();
    auto point = [&](const char* key, hyp::Point& out) {
        if (!j.contains(key)) return;
        auto v = j.at(key).get<std::vector<double>>();
        if (v.size() != 2) throw Error(ErrorKind::config, std::string("'") + key + "' must be [x, y]");
        out = hyp::make_point(v[0], v[1]);
    };
    if (type == "zero") {
        allow_keys(j, where, {"type"});
        return pot::Zero{};
    }
    if (type == "constant") {
        allow_keys(j, where, {"type", "c"});
        pot::Constant c;
        read(j, "c", c.c, where);
        return c;
    }
    if (type == "bump") {
        allow_keys(j, where, {"type", "height", "radius", "center"});
        pot::RadialBump b;
        read(j, "height", b.height, where);
        read(j, "radius", b.radius, where);
        point("center", b.center);
        return b;
    }
    if (type == "slope") {
        allow_keys(j, where, {"type", "slope", "cap", "anchor"});
        pot::RadialSlope s;
        read(j, "slope", s.slope, where);
        read(j, "cap", s.cap, where);
        point("anchor", s.anchor);
        return s;
    }
    throw Error(ErrorKind::config, "unknown potential term type '" + type + "'");
}

}  // namespace

pot::PotentialSpec parse_potential(const json& j) {
    allow_keys(j, "potential", {"terms", "translate_cutoff"});
    pot::PotentialSpec spec;
    if (j.contains("terms")) {
        if (!j.at("terms").is_array()) throw Error(ErrorKind::config, "potential terms must be a list");
        for (const auto& t : j.at("terms")) spec.terms.push_back(parse_term(t));
    }
    read(j, "translate_cutoff", spec.translate_cutoff, "potential");
    return spec;
}

json potential_to_json(const pot::PotentialSpec& spec) {
    json terms = json::array();
    for (const auto& t : spec.terms) {
        if (std::holds_alternative<pot::Zero>(t)) terms.push_back({{"type", "zero"}});
        else if (auto* c = std::get_if<pot::Constant>(&t)) terms.push_back({{"type", "constant"}, {"c", c->c}});
        else if (auto* b = std::get_if<pot::RadialBump>(&t))
            terms.push_back({{"type", "bump"}, {"height", b->height}, {"radius", b->radius},
                             {"center", {b->center.x, b->center.y}}});
        else if (auto* s = std::get_if<pot::RadialSlope>(&t))
            terms.push_back({{"type", "slope"}, {"slope", s->slope}, {"cap", s->cap},
                             {"anchor", {s->anchor.x, s->anchor.y}}});
    }
    return json{{"terms", terms}, {"translate_cutoff", spec.translate_cutoff}};
}

ScenarioConfig default_config(const std::string& preset) {
    ScenarioConfig cfg;
    cfg.preset.name = preset;
    auto& s = cfg.settings;
    if (preset == "schottky_pair") {
        cfg.truncation.max_dist = 22.0;
        cfg.truncation.max_orbit_len = 20.0;
        s.entropy.word = "a";
    } else if (preset == "schottky_parabolic") {
        cfg.truncation.max_dist = 22.0;
        cfg.truncation.max_orbit_len = 26.0;
        s.R_grid = {0.5, 1.0, 1.5, 2.0, 3.0};
        s.entropy.word = "b";
    } else if (preset == "modular_group") {
        cfg.truncation.max_dist = 12.0;
        cfg.truncation.max_orbit_len = 10.0;
        s.exponent.value = 1.0;
        s.gurevic_infinity.R_grid = {0.5, 1.0};
        s.recurrence.R = 1.0;
        s.sweep.R = 1.0;
        s.sweep.perturbation = pot::PotentialSpec::bump(0.5, 0.3, hyp::make_point(0.0, 1.5));
        s.entropy.word = "bbba";
        s.excursion_check.R_outer = 2.0;
    } else if (preset == "custom") {
        s.entropy.word = "a";
    } else {
        throw Error(ErrorKind::config, "unknown preset '" + preset + "'");
    }
    return cfg;
}

ScenarioConfig parse_config(const json& j) {
    allow_keys(j, "config", {"preset", "potential", "analyses", "truncation", "settings", "seed"});
    if (!j.contains("preset")) throw Error(ErrorKind::config, "config needs a 'preset'");
    const auto& pj = j.at("preset");
    std::string name = pj.is_string() ? pj.get<std::string>() : pj.value("name", std::string());
    ScenarioConfig cfg = default_config(name);
    if (pj.is_object()) {
        allow_keys(pj, "preset", {"name", "translation_length", "c", "b_length", "generators"});
        read(pj, "translation_length", cfg.preset.translation_length, "preset");
        read(pj, "c", cfg.preset.c, "preset");
        read(pj, "b_length", cfg.preset.b_length, "preset");
        if (pj.contains("generators")) {
            if (name != "custom") throw Error(ErrorKind::config, "'generators' is only valid for the custom preset");
            for (const auto& g : pj.at("generators")) {
                allow_keys(g, "generator", {"name", "matrix"});
                cfg.preset.names.push_back(g.at("name").get<std::string>());
                auto m = g.at("matrix").get<std::vector<double>>();
                if (m.size() != 4) throw Error(ErrorKind::config, "generator matrix must have 4 entries");
                cfg.preset.matrices.push_back({m[0], m[1], m[2], m[3]});
            }
        }
    }
    if (name == "custom" && cfg.preset.matrices.empty()) throw Error(ErrorKind::config, "custom preset needs generators");
    if (j.contains("potential")) cfg.potential = parse_potential(j.at("potential"));
    if (j.contains("analyses")) {
        for (const auto& a : j.at("analyses")) {
            auto n = a.get<std::string>();
            const auto& known = analysis_names();
            if (std::find(known.begin(), known.end(), n) == known.end())
                throw Error(ErrorKind::config, "unknown analysis '" + n + "'");
            cfg.analyses.push_back(n);
        }
    }
    if (j.contains("truncation")) {
        const auto& t = j.at("truncation");
        allow_keys(t, "truncation", {"max_dist", "max_word_len", "max_elements", "max_orbit_len"});
        read(t, "max_dist", cfg.truncation.max_dist, "truncation");
        read(t, "max_word_len", cfg.truncation.max_word_len, "truncation");
        read(t, "max_elements", cfg.truncation.max_elements, "truncation");
        read(t, "max_orbit_len", cfg.truncation.max_orbit_len, "truncation");
    }
    read(j, "seed", cfg.seed, "config");
    if (j.contains("settings")) {
        const auto& sj = j.at("settings");
        auto& s = cfg.settings;
        allow_keys(sj, "settings", {"bin_width", "gamma_k_mode", "R_grid", "exponent", "gurevic", "gurevic_infinity",
                                    "sweep", "ps_check", "recurrence", "entropy", "excursion_check"});
        read(sj, "bin_width", s.bin_width, "settings");
        read(sj, "gamma_k_mode", s.gamma_k_mode, "settings");
        if (s.gamma_k_mode != "strict" && s.gamma_k_mode != "relaxed")
            throw Error(ErrorKind::config, "gamma_k_mode must be 'strict' or 'relaxed'");
        read_grid(sj, "R_grid", s.R_grid, "settings");
        if (sj.contains("exponent")) {
            const auto& x = sj.at("exponent");
            allow_keys(x, "settings.exponent", {"expected", "tolerance"});
            if (x.contains("expected")) s.exponent.value = x.at("expected").get<double>();
            read(x, "tolerance", s.exponent.tolerance, "settings.exponent");
        }
        if (sj.contains("gurevic")) {
            const auto& x = sj.at("gurevic");
            allow_keys(x, "settings.gurevic", {"R", "tolerance"});
            read(x, "R", s.gurevic.R, "settings.gurevic");
            read(x, "tolerance", s.gurevic.tolerance, "settings.gurevic");
        }
        if (sj.contains("gurevic_infinity")) {
            const auto& x = sj.at("gurevic_infinity");
            allow_keys(x, "settings.gurevic_infinity", {"R_grid", "alpha_grid", "tolerance"});
            read_grid(x, "R_grid", s.gurevic_infinity.R_grid, "settings.gurevic_infinity");
            read_grid(x, "alpha_grid", s.gurevic_infinity.alpha_grid, "settings.gurevic_infinity");
            read(x, "tolerance", s.gurevic_infinity.tolerance, "settings.gurevic_infinity");
        }
        if (sj.contains("sweep")) {
            const auto& x = sj.at("sweep");
            allow_keys(x, "settings.sweep", {"lambdas", "perturbation", "R"});
            read_grid(x, "lambdas", s.sweep.lambdas, "settings.sweep");
            if (x.contains("perturbation")) s.sweep.perturbation = parse_potential(x.at("perturbation"));
            read(x, "R", s.sweep.R, "settings.sweep");
        }
        if (sj.contains("ps_check")) {
            const auto& x = sj.at("ps_check");
            const std::string w = "settings.ps_check";
            allow_keys(x, w, {"epsilons", "R", "d_min", "d_max", "slope_tolerance", "equivariance_tolerance"});
            read_grid(x, "epsilons", s.ps_check.epsilons, w, false);
            read(x, "R", s.ps_check.R, w);
            read(x, "d_min", s.ps_check.d_min, w);
            read(x, "d_max", s.ps_check.d_max, w);
            read(x, "slope_tolerance", s.ps_check.slope_tolerance, w);
            read(x, "equivariance_tolerance", s.ps_check.equivariance_tolerance, w);
        }
        if (sj.contains("recurrence")) {
            const auto& x = sj.at("recurrence");
            const std::string w = "settings.recurrence";
            allow_keys(x, w, {"R", "T0", "T_step", "epsilon", "tolerance"});
            read(x, "R", s.recurrence.R, w);
            read(x, "T0", s.recurrence.T0, w);
            read(x, "T_step", s.recurrence.T_step, w);
            read(x, "epsilon", s.recurrence.epsilon, w);
            read(x, "tolerance", s.recurrence.tolerance, w);
            if (!(s.recurrence.T_step > 0.0)) throw Error(ErrorKind::config, "T_step must be positive");
        }
        if (sj.contains("entropy")) {
            const auto& x = sj.at("entropy");
            const std::string w = "settings.entropy";
            allow_keys(x, w, {"word", "samples", "T_grid", "epsilons", "delta", "step", "shift", "tolerance"});
            read(x, "word", s.entropy.word, w);
            read(x, "samples", s.entropy.samples, w);
            read_grid(x, "T_grid", s.entropy.T_grid, w);
            read_grid(x, "epsilons", s.entropy.epsilons, w, false);
            read(x, "delta", s.entropy.delta, w);
            read(x, "step", s.entropy.step, w);
            read(x, "shift", s.entropy.shift, w);
            read(x, "tolerance", s.entropy.tolerance, w);
        }
        if (sj.contains("excursion_check")) {
            const auto& x = sj.at("excursion_check");
            const std::string w = "settings.excursion_check";
            allow_keys(x, w, {"R_inner", "R_outer", "alphas", "slack"});
            read(x, "R_inner", s.excursion_check.R_inner, w);
            read(x, "R_outer", s.excursion_check.R_outer, w);
            read_grid(x, "alphas", s.excursion_check.alphas, w);
            read(x, "slack", s.excursion_check.slack, w);
        }
    }
    return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
    const auto& s = cfg.settings;
    json preset{{"name", cfg.preset.name}};
    if (cfg.preset.name == "schottky_pair") preset["translation_length"] = cfg.preset.translation_length;
    if (cfg.preset.name == "schottky_parabolic") {
        preset["c"] = cfg.preset.c;
        preset["b_length"] = cfg.preset.b_length;
    }
    if (cfg.preset.name == "custom") {
        json gens = json::array();
        for (std::size_t k = 0; k < cfg.preset.names.size(); ++k) {
            const auto& m = cfg.preset.matrices[k];
            gens.push_back({{"name", cfg.preset.names[k]}, {"matrix", {m[0], m[1], m[2], m[3]}}});
        }
        preset["generators"] = gens;
    }
    json exponent{{"tolerance", s.exponent.tolerance}};
    if (s.exponent.value) exponent["expected"] = *s.exponent.value;
    return json{
        {"preset", preset},
        {"potential", potential_to_json(cfg.potential)},
        {"analyses", cfg.analyses},
        {"truncation",
         {{"max_dist", cfg.truncation.max_dist},
          {"max_word_len", cfg.truncation.max_word_len},
          {"max_elements", cfg.truncation.max_elements},
          {"max_orbit_len", cfg.truncation.max_orbit_len}}},
        {"settings",
         {{"bin_width", s.bin_width},
          {"gamma_k_mode", s.gamma_k_mode},
          {"R_grid", s.R_grid},
          {"exponent", exponent},
          {"gurevic", {{"R", s.gurevic.R}, {"tolerance", s.gurevic.tolerance}}},
          {"gurevic_infinity",
           {{"R_grid", s.gurevic_infinity.R_grid},
            {"alpha_grid", s.gurevic_infinity.alpha_grid},
            {"tolerance", s.gurevic_infinity.tolerance}}},
          {"sweep",
           {{"lambdas", s.sweep.lambdas}, {"perturbation", potential_to_json(s.sweep.perturbation)}, {"R", s.sweep.R}}},
          {"ps_check",
           {{"epsilons", s.ps_check.epsilons},
            {"R", s.ps_check.R},
            {"d_min", s.ps_check.d_min},
            {"d_max", s.ps_check.d_max},
            {"slope_tolerance", s.ps_check.slope_tolerance},
            {"equivariance_tolerance", s.ps_check.equivariance_tolerance}}},
          {"recurrence",
           {{"R", s.recurrence.R},
            {"T0", s.recurrence.T0},
            {"T_step", s.recurrence.T_step},
            {"epsilon", s.recurrence.epsilon},
            {"tolerance", s.recurrence.tolerance}}},
          {"entropy",
           {{"word", s.entropy.word},
            {"samples", s.entropy.samples},
            {"T_grid", s.entropy.T_grid},
            {"epsilons", s.entropy.epsilons},
            {"delta", s.entropy.delta},
            {"step", s.entropy.step},
            {"shift", s.entropy.shift},
            {"tolerance", s.entropy.tolerance}}},
          {"excursion_check",
           {{"R_inner", s.excursion_check.R_inner},
            {"R_outer", s.excursion_check.R_outer},
            {"alphas", s.excursion_check.alphas},
            {"slack", s.excursion_check.slack}}}}},
        {"seed", cfg.seed}};
}

grp::Presentation build_presentation(const PresetConfig& p) {
    if (p.name == "schottky_pair") return grp::schottky_pair(p.translation_length);
    if (p.name == "schottky_parabolic") return grp::schottky_parabolic(p.c, p.b_length);
    if (p.name == "modular_group") return grp::modular_group();
    if (p.name == "custom") {
        std::vector<hyp::Isometry> gens;
        for (const auto& m : p.matrices) gens.push_back(hyp::Isometry::from_entries(m[0], m[1], m[2], m[3]));
        return grp::custom_presentation(p.names, gens);
    }
    throw Error(ErrorKind::config, "unknown preset '" + p.name + "'");
}

RunReport run_scenario(const ScenarioConfig& cfg) {
    Run run(cfg);
    auto& doc = run.report.doc;
    doc["schema"] = "thermo-report";
    doc["schema_version"] = kCsvSchemaVersion;
    doc["environment"] = {{"library", "thermo 1.0"},
#ifdef __VERSION__
                          {"compiler", __VERSION__},
#endif
                          {"cplusplus", static_cast<long>(__cplusplus)},
#ifdef NDEBUG
                          {"assertions", false}
#else
                          {"assertions", true}
#endif
    };
    doc["config"] = config_to_json(cfg);

    run.p = build_presentation(cfg.preset);
    json pres{{"name", run.p.name}, {"generators", run.p.generator_names}};
    json params = json::object();
    for (const auto& [k, v] : run.p.parameters) params[k] = v;
    pres["parameters"] = params;
    if (run.p.kind == grp::PresentationKind::free_schottky) {
        auto rep = grp::verify_schottky(run.p);
        pres["schottky_ok"] = rep.ok;
        pres["min_separation"] = rep.min_separation;
        if (!rep.ok) throw Error(ErrorKind::config, "ping-pong configuration rejected");
    }
    doc["presentation"] = pres;

    grp::EnumerationLimits lim;
    lim.max_dist = cfg.truncation.max_dist;
    lim.max_word_len = cfg.truncation.max_word_len;
    lim.max_elements = cfg.truncation.max_elements;
    run.db = grp::enumerate_orbit(run.p, lim);
    run.F = std::make_unique<pot::Potential>(cfg.potential, run.db);
    run.F->fill(run.db);
    run.index = std::make_unique<grp::OrbitIndex>(run.db);
    doc["enumeration"] = {{"elements", run.db.size()},
                          {"dedup", run.db.dedup_mode()},
                          {"potential", cfg.potential.str()},
                          {"index_complete_radius", run.index->complete_radius()},
                          {"truncation", truncation_json(run.db.truncation())}};

    json analyses = json::object();
    for (const auto& name : analysis_names()) {
        if (std::find(cfg.analyses.begin(), cfg.analyses.end(), name) == cfg.analyses.end()) continue;
        json block;
        try {
            if (name == "exponent") block = run.run_exponent();
            else if (name == "infinity") block = run.run_infinity();
            else if (name == "gurevic") block = run.run_gurevic();
            else if (name == "gurevic_infinity") block = run.run_gurevic_infinity();
            else if (name == "sweep") block = run.run_sweep();
            else if (name == "ps_check") block = run.run_ps_check();
            else if (name == "recurrence") block = run.run_recurrence();
            else if (name == "entropy") block = run.run_entropy();
            else if (name == "excursion_check") block = run.run_excursion();
            block["truncation"] = truncation_json(run.db.truncation());
            if (run.census) block["truncation"]["max_orbit_len"] = run.census->max_len;
        } catch (const std::exception& e) {
            block = json{{"error", std::string(e.what())}};
            run.check(name, "analysis completed", 0.0, "==", 1.0, false, e.what());
        }
        analyses[name] = block;
    }
    doc["analyses"] = analyses;

    json checks = json::array();
    auto& t = run.table("checks", {"analysis", "check", "value", "relation", "bound", "passed", "note"});
    for (const auto& c : run.checks) {
        checks.push_back({{"analysis", c.analysis},
                          {"check", c.name},
                          {"value", num(c.value)},
                          {"relation", c.relation},
                          {"bound", num(c.bound)},
                          {"passed", c.passed},
                          {"note", c.note}});
        t.rows.push_back({c.analysis, c.name, cell(c.value), c.relation, cell(c.bound), cell(c.passed), c.note});
        run.report.passed = run.report.passed && c.passed;
    }
    doc["checks"] = checks;
    doc["passed"] = run.report.passed;
    return std::move(run.report);
}

std::string report_text(const RunReport& r) { return r.doc.dump(2) + "\n"; }

std::string csv_text(const CsvTable& t) {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += '"';
            out += ch;
        }
        return out + "\"";
    };
    std::ostringstream os;
    os << "# thermo-csv v" << kCsvSchemaVersion << ' ' << t.name << '\n';
    for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? "," : "") << quote(t.columns[k]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << quote(row[k]);
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, const std::string& format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message());
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        auto path = (fs::path(dir) / name).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error(ErrorKind::io, "cannot write " + path);
        os << text;
        if (!os) throw Error(ErrorKind::io, "write failed for " + path);
        written.push_back(path);
    };
    if (format == "json") {
        put("report.json", report_text(r));
    } else if (format == "csv") {
        for (const auto& t : r.tables) put(t.name + ".csv", csv_text(t));
    } else {
        throw Error(ErrorKind::config, "unknown format '" + format + "' (json or csv)");
    }
    return written;
}

}  // namespace thermo::cli
