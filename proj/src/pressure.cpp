#include "thermo/pressure.hpp"

#include <algorithm>
#include <cmath>

namespace thermo::prs {

namespace {

// Neumaier compensated sum.
struct Accumulator {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

struct LineFit {
    double slope = 0.0, stderr_ = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - my - f.slope * (x[i] - mx);
        ssr += r * r;
    }
    f.stderr_ = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    return f;
}

bool stabilizes(Point q, Point o) { return hyp::dist(q, o) < 1e-9; }

// Violation by the translate at q of the segment from o (length d) in
// `frame` coordinates, s measured from o.
bool violates(Point q, const hyp::LineFrame& frame, double s_o, double d, double R, GammaKMode mode) {
    double a = frame.distance_to_line(q);
    if (a > R) return false;
    double s0 = frame.foot(q) - s_o;
    if (mode == GammaKMode::strict) {
        double clamp = std::clamp(s0, 0.0, d);
        double dd = clamp == s0 ? a : std::acosh(std::cosh(a) * std::cosh(s0 - clamp));
        return dd <= R;
    }
    double w = std::acosh(std::cosh(R) / std::cosh(a));
    return s0 - w < d - R && s0 + w > R;
}

}  // namespace

const char* to_string(GammaKMode mode) { return mode == GammaKMode::strict ? "strict" : "relaxed"; }

AnnulusTable annulus_sums(const OrbitDatabase& db, double c, const std::vector<double>& f, const std::vector<char>& mask) {
    if (!(c > 0.0)) throw Error(ErrorKind::domain, "bin width must be positive");
    const auto& els = db.elements();
    AnnulusTable tab;
    tab.width = c;
    tab.horizon = db.truncation().horizon;
    tab.truncation = db.truncation();
    double dmax = 0.0;
    for (const auto& e : els) dmax = std::max(dmax, e.d_o);
    auto nb = static_cast<std::size_t>(std::ceil(dmax / c - 1e-12));
    std::vector<Accumulator> acc(nb);
    tab.count.assign(nb, 0);
    for (std::size_t i = 0; i < els.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        double d = els[i].d_o;
        if (d <= 0.0) continue;
        auto k = static_cast<std::size_t>(std::ceil(d / c - 1e-12));
        k = std::max<std::size_t>(k, 1) - 1;
        if (k >= nb) k = nb - 1;
        acc[k].add(std::exp(f.empty() ? els[i].f_int : f[i]));
        ++tab.count[k];
    }
    for (std::size_t k = 0; k < nb; ++k) {
        tab.t.push_back(c * static_cast<double>(k + 1));
        tab.q.push_back(acc[k].value());
    }
    return tab;
}

ExponentEstimate fit_exponent(const AnnulusTable& tab, const FitOptions& opt) {
    ExponentEstimate est;
    est.truncation = tab.truncation;
    // −∞ sentinel: trailing empty run of complete bins.
    std::size_t last_complete = 0;
    bool any = false;
    for (std::size_t i = 0; i < tab.t.size(); ++i)
        if (tab.complete(i)) last_complete = i, any = true;
    if (!any) throw Error(ErrorKind::insufficient_data, "no complete bins");
    std::size_t run = 0;
    for (std::size_t i = last_complete + 1; i-- > 0;) {
        if (tab.q[i] > 0.0) break;
        ++run;
    }
    bool nonzero_before = run <= last_complete;
    if (run >= kSentinelBins && nonzero_before) {
        est.neg_inf = true;
        est.value = kNegInf;
        est.witness = tab.t[last_complete + 1 - run] - tab.width;
        est.t_max = tab.t[last_complete];
        est.method = "sentinel";
        return est;
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i <= last_complete; ++i)
        if (tab.q[i] > 0.0 && tab.t[i] >= opt.t_min - 1e-12) x.push_back(tab.t[i]), y.push_back(std::log(tab.q[i]) + opt.kappa * std::log(tab.t[i]));
    if (x.size() < opt.min_bins)
        throw Error(ErrorKind::insufficient_data, std::to_string(x.size()) + " usable bins (need " + std::to_string(opt.min_bins) + ")");
    std::size_t first;
    if (opt.window > 0.0) {
        first = x.size();
        while (first > 0 && x[first - 1] >= x.back() - opt.window - 1e-12) --first;
    } else {
        first = x.size() / 2;
    }
    first = std::min(first, x.size() - opt.min_bins);
    std::vector<double> xs(x.begin() + static_cast<long>(first), x.end()), ys(y.begin() + static_cast<long>(first), y.end());
    auto fit = least_squares(xs, ys);
    est.value = fit.slope;
    est.stderr_ = fit.stderr_;
    est.t_min = xs.front();
    est.t_max = xs.back();
    est.bins = xs.size();
    Accumulator cum;
    for (std::size_t i = 0; i <= last_complete; ++i) cum.add(tab.q[i]);
    est.cumulative = std::log(cum.value()) / tab.t[last_complete];
    return est;
}

bool gamma_k_test(const GroupElement& gamma, double R, const OrbitIndex& index, GammaKMode mode, const grp::Presentation* p) {
    double d = gamma.d_o;
    if (d <= 2.0 * R && mode == GammaKMode::relaxed) return true;
    double need = mode == GammaKMode::strict ? d + R : d;
    if (need > index.complete_radius() + 1e-9)
        throw Error(ErrorKind::horizon, "Γ_K test needs translates to distance " + std::to_string(need) +
                                            ", database complete to " + std::to_string(index.complete_radius()));
    Point q = gamma.matrix.apply(hyp::kOrigin);
    if (d == 0.0) return false;
    auto frame = hyp::LineFrame::through(hyp::kOrigin, q);
    double s_o = frame.foot(hyp::kOrigin);
    auto check = [&](Point x) {
        return !stabilizes(x, hyp::kOrigin) && !stabilizes(x, q) && violates(x, frame, s_o, d, R, mode);
    };
    // Prefix points of the word hug the segment and usually witness a violation at once.
    if (p) {
        Isometry m;
        const auto& syl = gamma.word.syllables();
        for (std::size_t i = 0; i + 1 < syl.size(); ++i) {
            m = m * p->power(syl[i].gen, syl[i].power);
            if (check(m.apply(hyp::kOrigin))) return false;
        }
    }
    for (std::size_t i : index.near_radial_segment(q, R))
        if (check(index.point(i))) return false;
    return true;
}

GammaKReport gamma_k_members(const OrbitDatabase& db, const OrbitIndex& index, double R, GammaKMode mode,
                             const grp::Presentation* p) {
    GammaKReport rep;
    rep.R = R;
    rep.mode = mode;
    rep.tested_to = index.complete_radius() - (mode == GammaKMode::strict ? R : 0.0);
    const auto& els = db.elements();
    rep.members.assign(els.size(), 0);
    for (std::size_t i = 0; i < els.size(); ++i) {
        if (els[i].d_o > rep.tested_to || els[i].d_o == 0.0) continue;
        if (gamma_k_test(els[i], R, index, mode, p)) {
            rep.members[i] = 1;
            ++rep.count;
        }
    }
    return rep;
}

RestrictedResult restricted_exponent(const OrbitDatabase& db, const GammaKReport& gk, double c, const std::vector<double>& f,
                                     const FitOptions& opt) {
    RestrictedResult res;
    res.R = gk.R;
    res.members = gk.count;
    auto tab = annulus_sums(db, c, f, gk.members);
    tab.horizon = std::min(tab.horizon, gk.tested_to);
    try {
        res.estimate = fit_exponent(tab, opt);
        res.ok = true;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::insufficient_data) throw;
        res.note = std::string(e.what()) + "; " + std::to_string(gk.count) + " members";
    }
    return res;
}

InfinityReport exponent_at_infinity(const OrbitDatabase& db, const OrbitIndex& index, const std::vector<double>& R_grid,
                                    GammaKMode mode, double c, const std::vector<double>& f, const FitOptions& opt,
                                    const grp::Presentation* p) {
    if (R_grid.empty() || !std::is_sorted(R_grid.begin(), R_grid.end()))
        throw Error(ErrorKind::config, "R grid must be nonempty and increasing");
    InfinityReport rep;
    auto full = fit_exponent(annulus_sums(db, c, f), opt);
    rep.full = full.value;
    rep.full_stderr = full.stderr_;
    for (double R : R_grid) {
        auto gk = gamma_k_members(db, index, R, mode, p);
        rep.per_R.push_back(restricted_exponent(db, gk, c, f, opt));
    }
    const RestrictedResult* prev = nullptr;
    for (const auto& r : rep.per_R) {
        if (!r.ok) continue;
        if (prev && r.estimate.value > prev->estimate.value + 2.0 * std::hypot(r.estimate.stderr_, prev->estimate.stderr_))
            rep.monotone = false;
        prev = &r;
    }
    const auto& last = rep.per_R.back();
    if (last.ok) {
        rep.summary = last.estimate.value;
        rep.summary_stderr = last.estimate.stderr_;
        rep.summary_R = last.R;
    } else if (prev) {
        rep.summary = prev->estimate.value;
        rep.summary_stderr = prev->estimate.stderr_;
        rep.summary_R = prev->R;
    } else {
        throw Error(ErrorKind::insufficient_data, "no radius gave a usable Γ_K fit: " + last.note);
    }
    if (rep.summary == kNegInf) {
        rep.gap = std::numeric_limits<double>::infinity();
        rep.gap_sigma = rep.full_stderr;
        rep.spr = true;
    } else {
        rep.gap = rep.full - rep.summary;
        rep.gap_sigma = std::hypot(rep.full_stderr, rep.summary_stderr);
        rep.spr = rep.gap > 3.0 * rep.gap_sigma;
    }
    return rep;
}

std::vector<double> orbit_integrals(const OrbitDatabase& db, const pot::Potential& F) {
    std::vector<double> f(db.size());
    const auto& els = db.elements();
    for (std::size_t i = 0; i < els.size(); ++i) f[i] = F.orbit_integral(els[i].matrix);
    return f;
}

SweepReport perturbation_sweep(const OrbitDatabase& db, const pot::PotentialSpec& F, const pot::PotentialSpec& A,
                               const std::vector<double>& lambdas, const GammaKReport& gk, double c, const FitOptions& opt,
                               const SweepTolerances& tol) {
    if (lambdas.empty() || !std::is_sorted(lambdas.begin(), lambdas.end()))
        throw Error(ErrorKind::config, "λ grid must be nonempty and increasing");
    if (A.support_radius() >= gk.R)
        throw Error(ErrorKind::config, "perturbation support radius " + std::to_string(A.support_radius()) +
                                           " must stay inside R = " + std::to_string(gk.R));
    SweepReport rep;
    rep.R = gk.R;
    pot::Potential base(F, db), bump(A, db);
    auto f0 = orbit_integrals(db, base), fa = orbit_integrals(db, bump);
    std::vector<double> f(db.size());
    for (double lambda : lambdas) {
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = f0[i] + lambda * fa[i];
        SweepRow row;
        row.lambda = lambda;
        row.full = fit_exponent(annulus_sums(db, c, f), opt);
        row.restricted = restricted_exponent(db, gk, c, f, opt);
        rep.rows.push_back(row);
    }
    const SweepRow* zero = nullptr;
    for (const auto& r : rep.rows)
        if (r.lambda == 0.0) zero = &r;
    if (!zero) throw Error(ErrorKind::config, "λ grid must contain 0");
    for (const auto& r : rep.rows) {
        if (!r.restricted.ok || !zero->restricted.ok) {
            rep.restricted_invariant = false;
            continue;
        }
        const auto& a = r.restricted.estimate;
        const auto& b = zero->restricted.estimate;
        if (a.neg_inf || b.neg_inf) {
            if (a.neg_inf != b.neg_inf) rep.restricted_invariant = false;
            continue;
        }
        if (std::abs(a.value - b.value) > tol.invariance_sigmas * std::hypot(a.stderr_, b.stderr_))
            rep.restricted_invariant = false;
    }
    rep.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        if (rep.rows[i].lambda < 0.0) continue;
        if (rep.rows[i + 1].full.value < rep.rows[i].full.value) rep.monotone = false;
    }
    for (std::size_t i = 0; i + 2 < rep.rows.size(); ++i) {
        const auto &a = rep.rows[i], &b = rep.rows[i + 1], &c2 = rep.rows[i + 2];
        double s1 = (b.full.value - a.full.value) / (b.lambda - a.lambda);
        double s2 = (c2.full.value - b.full.value) / (c2.lambda - b.lambda);
        rep.min_second_difference = std::min(rep.min_second_difference, s2 - s1);
    }
    if (rep.rows.size() >= 3) rep.convex = rep.min_second_difference >= -tol.convexity;
    for (const auto& r : rep.rows) {
        if (r.lambda >= 0.0 || !zero->restricted.ok) continue;
        double k = zero->restricted.estimate.value;
        rep.well_margin = r.full.value + tol.well - k;
        if (rep.well_margin < 0.0) rep.well_ok = false;
    }
    return rep;
}

}  // namespace thermo::prs
