#include "thermo/orbits.hpp"

#include <algorithm>
#include <cmath>

namespace thermo::orb {

namespace {

struct Window {
    hyp::LineFrame frame;
    double lo, hi;
};

Window period_window(const Isometry& g, const grp::OrbitIndex& index, double R) {
    auto cls = hyp::analyze_isometry(g);
    if (cls.kind != hyp::IsometryKind::hyperbolic)
        throw Error(ErrorKind::domain, std::string("closed geodesic of a ") + hyp::to_string(cls.kind) + " element");
    auto frame = hyp::LineFrame::of(*cls.axis);
    double s = frame.foot(hyp::kOrigin);
    double half = 0.5 * cls.translation_length;
    double a = frame.distance_to_line(hyp::kOrigin);
    double reach = std::acosh(std::cosh(a) * std::cosh(half)) + R;
    if (reach > index.complete_radius() + 1e-9)
        throw Error(ErrorKind::horizon, "closed geodesic needs translates to distance " + std::to_string(reach) +
                                            ", database complete to " + std::to_string(index.complete_radius()));
    return {frame, s - half, s + half};
}

template <class Visit>
void near_window(const Window& w, const grp::OrbitIndex& index, double R, Visit&& visit) {
    for (std::size_t i : index.near_segment(w.frame.at(w.lo), w.frame.at(w.hi), R)) {
        Point q = index.point(i);
        double a = w.frame.distance_to_line(q);
        if (a <= R) visit(a, w.frame.foot(q));
    }
}

prs::AnnulusTable as_table(const std::vector<double>& t, const std::vector<double>& q, const std::vector<long>& n,
                           double width, double horizon) {
    prs::AnnulusTable tab;
    tab.width = width;
    tab.t = t;
    tab.q = q;
    tab.count = n;
    tab.horizon = horizon;
    return tab;
}

std::size_t bin_of(double len, double c) {
    auto k = static_cast<std::size_t>(std::ceil(len / c - 1e-12));
    return std::max<std::size_t>(k, 1) - 1;
}

ClassRep recenter_impl(const grp::Presentation& p, const ClassRep& rep) {
    auto cls = hyp::analyze_isometry(rep.matrix);
    if (cls.kind != hyp::IsometryKind::hyperbolic) return rep;
    auto frame = hyp::LineFrame::of(*cls.axis);
    auto letters = rep.word.letters();
    Isometry P, bestP;
    std::size_t best = 0;
    double bestd = frame.distance_to_line(hyp::kOrigin);
    for (std::size_t k = 1; k < letters.size(); ++k) {
        auto [gen, inv] = letters[k - 1];
        P = P * (inv ? p.generators[gen].inverse() : p.generators[gen]);
        double d = frame.distance_to_line(P.apply(hyp::kOrigin));
        if (d < bestd - 1e-12) bestd = d, best = k, bestP = P;
    }
    if (best == 0) return rep;
    ClassRep out = rep;
    grp::Word w;
    for (std::size_t k = 0; k < letters.size(); ++k) {
        auto [gen, inv] = letters[(best + k) % letters.size()];
        w.append(gen, inv ? -1 : 1);
    }
    out.word = w;
    out.matrix = bestP.inverse() * rep.matrix * bestP;
    return out;
}

double union_length(std::vector<std::pair<double, double>> iv) {
    std::sort(iv.begin(), iv.end());
    double total = 0.0, cur_lo = 0.0, cur_hi = -1e300;
    for (auto [lo, hi] : iv) {
        if (lo > cur_hi) {
            if (cur_hi > cur_lo) total += cur_hi - cur_lo;
            cur_lo = lo, cur_hi = hi;
        } else {
            cur_hi = std::max(cur_hi, hi);
        }
    }
    if (cur_hi > cur_lo) total += cur_hi - cur_lo;
    return total;
}

// Time in K and return counts for every R of a grid from one query at the
// largest radius.
void fill_grid(const Isometry& g, const std::vector<double>& R_grid, const grp::OrbitIndex& index,
               std::vector<double>& time, std::vector<long>& nK) {
    time.assign(R_grid.size(), 0.0);
    nK.assign(R_grid.size(), 0);
    if (R_grid.empty()) return;
    double Rmax = *std::max_element(R_grid.begin(), R_grid.end());
    auto w = period_window(g, index, Rmax);
    std::vector<std::pair<double, double>> near;  // (a, s0)
    near_window(w, index, Rmax, [&](double a, double s0) { near.emplace_back(a, s0); });
    std::vector<std::pair<double, double>> iv;
    for (std::size_t k = 0; k < R_grid.size(); ++k) {
        double R = R_grid[k];
        iv.clear();
        for (auto [a, s0] : near) {
            if (a > R) continue;
            if (s0 >= w.lo && s0 < w.hi) ++nK[k];
            double h = std::acosh(std::cosh(R) / std::cosh(a));
            double lo = std::max(w.lo, s0 - h), hi = std::min(w.hi, s0 + h);
            if (hi > lo) iv.emplace_back(lo, hi);
        }
        time[k] = union_length(iv);
    }
}

}  // namespace

ClassRep recenter(const grp::Presentation& p, const ClassRep& rep) { return recenter_impl(p, rep); }

double time_in_compact(const Isometry& g, double R, const grp::OrbitIndex& index) {
    std::vector<double> t;
    std::vector<long> n;
    fill_grid(g, {R}, index, t, n);
    return t[0];
}

long return_count_nK(const Isometry& g, double R, const grp::OrbitIndex& index) {
    std::vector<double> t;
    std::vector<long> n;
    fill_grid(g, {R}, index, t, n);
    return n[0];
}

double nK_constant(double R, const grp::OrbitIndex& index, double shortest) {
    if (2.0 * R + 1.0 > index.complete_radius())
        throw Error(ErrorKind::horizon, "return-count bound needs the ball of radius " + std::to_string(2.0 * R + 1.0));
    auto N = static_cast<double>(index.ball(hyp::kOrigin, 2.0 * R + 1.0).size());
    return N * (1.0 + 1.0 / shortest);
}

OrbitCensus build_periodic_orbits(const grp::Presentation& p, const grp::OrbitDatabase& db, const grp::OrbitIndex& index,
                                  double max_len, const std::vector<double>& R_grid, const pot::Potential* F) {
    auto classes = grp::conjugacy_classes(p, db, max_len);
    OrbitCensus out;
    out.R_grid = R_grid;
    out.max_len = max_len;
    out.unresolved = classes.unresolved;
    out.non_primitive = classes.non_primitive;
    out.orbits.reserve(classes.classes.size());
    for (const auto& c : classes.classes) {
        PeriodicOrbit orb;
        orb.rep = recenter(p, c);
        orb.length = c.length;
        auto cls = hyp::analyze_isometry(orb.rep.matrix);
        auto frame = hyp::LineFrame::of(*cls.axis);
        orb.axis_distance = frame.distance_to_line(hyp::kOrigin);
        orb.period_f = F ? F->period_integral(orb.rep.matrix) : 0.0;
        fill_grid(orb.rep.matrix, R_grid, index, orb.time_in_K, orb.nK);
        double reach = std::acosh(std::cosh(orb.axis_distance) * std::cosh(0.5 * orb.length));
        if (!R_grid.empty()) reach += *std::max_element(R_grid.begin(), R_grid.end());
        out.required_radius = std::max(out.required_radius, reach);
        out.orbits.push_back(std::move(orb));
    }
    if (!out.orbits.empty()) {
        out.shortest = out.orbits.front().length;
        for (std::size_t k = 0; k < R_grid.size(); ++k) {
            out.C_R.push_back(nK_constant(R_grid[k], index, out.shortest));
            bool ok = true;
            for (const auto& o : out.orbits)
                if (static_cast<double>(o.nK[k]) > std::ceil(out.C_R[k] * o.length)) ok = false;
            out.nK_bound_ok.push_back(ok);
        }
    }
    return out;
}

void fill_period_integrals(OrbitCensus& census, const pot::Potential& F) {
    for (auto& o : census.orbits) o.period_f = F.period_integral(o.rep.matrix);
}

GurevicTable gurevic_table(const OrbitCensus& census, std::size_t R_index, double c, double alpha) {
    if (R_index >= census.R_grid.size()) throw Error(ErrorKind::config, "R index outside the census grid");
    if (!(c > 0.0)) throw Error(ErrorKind::domain, "bin width must be positive");
    GurevicTable tab;
    tab.width = c;
    tab.R = census.R_grid[R_index];
    tab.alpha = alpha;
    tab.horizon = census.max_len;
    auto nb = static_cast<std::size_t>(std::ceil(census.max_len / c - 1e-12));
    tab.all.assign(nb, 0.0);
    tab.filtered.assign(nb, 0.0);
    tab.count_all.assign(nb, 0);
    tab.count_filtered.assign(nb, 0);
    for (std::size_t k = 0; k < nb; ++k) tab.t.push_back(c * static_cast<double>(k + 1));
    for (const auto& o : census.orbits) {
        double tk = o.time_in_K[R_index];
        if (tk <= 0.0) continue;
        std::size_t k = std::min(bin_of(o.length, c), nb - 1);
        double w = std::exp(o.period_f);
        tab.all[k] += w;
        ++tab.count_all[k];
        if (tk < alpha * o.length) {
            tab.filtered[k] += w;
            ++tab.count_filtered[k];
        }
    }
    return tab;
}

ExponentEstimate gurevic_pressure(const OrbitCensus& census, std::size_t R_index, double c, const prs::FitOptions& opt) {
    auto tab = gurevic_table(census, R_index, c);
    auto est = prs::fit_exponent(as_table(tab.t, tab.all, tab.count_all, c, tab.horizon), opt);
    est.method = "gurevic";
    return est;
}

ExponentEstimate gurevic_pressure_at_infinity(const OrbitCensus& census, std::size_t R_index, double alpha, double c,
                                              const prs::FitOptions& opt) {
    auto tab = gurevic_table(census, R_index, c, alpha);
    auto est = prs::fit_exponent(as_table(tab.t, tab.filtered, tab.count_filtered, c, tab.horizon), opt);
    if (!est.neg_inf) est.method = "gurevic-infinity";
    return est;
}

ExcursionCheck weighted_excursion_sum(const OrbitCensus& census, std::size_t inner, std::size_t outer, double alpha,
                                      double delta_K, double delta, double slack, double c, const prs::FitOptions& opt) {
    if (inner >= census.R_grid.size() || outer >= census.R_grid.size() || census.R_grid[outer] <= census.R_grid[inner])
        throw Error(ErrorKind::config, "excursion check needs R_inner < R_outer on the census grid");
    ExcursionCheck chk;
    chk.R_inner = census.R_grid[inner];
    chk.R_outer = census.R_grid[outer];
    chk.alpha = alpha;
    auto nb = static_cast<std::size_t>(std::ceil(census.max_len / c - 1e-12));
    std::vector<double> t(nb), q(nb, 0.0), lhs(nb, 0.0), rhs(nb, 0.0);
    std::vector<long> n(nb, 0);
    for (std::size_t k = 0; k < nb; ++k) t[k] = c * static_cast<double>(k + 1);
    for (const auto& o : census.orbits) {
        std::size_t k = std::min(bin_of(o.length, c), nb - 1);
        double w = std::exp(o.period_f);
        double ti = o.time_in_K[inner], to = o.time_in_K[outer];
        if (ti > 0.0 && to <= alpha * o.length) {
            q[k] += static_cast<double>(o.nK[inner]) * w;
            ++n[k];
            ++chk.orbits_used;
        }
        if (to > 0.0 && to < alpha * o.length) lhs[k] += w;
        if (ti > 0.0 && ti < 2.0 * alpha * o.length) rhs[k] += w;
    }
    for (std::size_t k = 0; k < nb; ++k)
        if (lhs[k] > 0.0) chk.nested_ratio = std::max(chk.nested_ratio, rhs[k] > 0.0 ? lhs[k] / rhs[k] / t[k] : 1e300);
    chk.bound = (1.0 - alpha) * delta_K + alpha * delta + slack;
    chk.growth = prs::fit_exponent(as_table(t, q, n, c, census.max_len), opt);
    chk.margin = chk.bound - chk.growth.value;
    chk.passed = chk.growth.neg_inf || chk.margin >= 0.0;
    return chk;
}

}  // namespace thermo::orb
