#include "thermo/psmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "thermo/error.hpp"

namespace thermo::ps {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBaseTol = 1e-9;

const std::vector<double>& weights_or_stored(const grp::OrbitDatabase& db, const std::vector<double>& f,
                                             std::vector<double>& scratch) {
    if (!f.empty()) {
        if (f.size() != db.size()) throw Error(ErrorKind::config, "weight vector does not match the database");
        return f;
    }
    scratch.resize(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) scratch[i] = db.elements()[i].f_int;
    return scratch;
}

struct LineFit {
    double slope = 0.0;
    double stderr_ = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r = y[i] - my - fit.slope * (x[i] - mx);
            rss += r * r;
        }
        fit.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return fit;
}

}  // namespace

AtomicBoundaryMeasure::AtomicBoundaryMeasure(std::vector<Atom> atoms, double s, double log_normalizer)
    : atoms_(std::move(atoms)), s_(s), log_z_(log_normalizer) {
    std::stable_sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.angle < b.angle; });
    prefix_.assign(atoms_.size() + 1, 0.0);
    for (std::size_t i = 0; i < atoms_.size(); ++i)
        prefix_[i + 1] = prefix_[i] + (atoms_[i].at_base ? 0.0 : atoms_[i].weight);
}

double AtomicBoundaryMeasure::total() const {
    double t = 0.0;
    for (const auto& a : atoms_) t += a.weight;
    return t;
}

double AtomicBoundaryMeasure::arc_mass(double lo, double hi, std::size_t* count) const {
    if (!(hi >= lo)) throw Error(ErrorKind::domain, "arc needs hi >= lo");
    if (count) *count = 0;
    if (hi - lo >= 2.0 * kPi) {
        if (count)
            for (const auto& a : atoms_) *count += a.at_base ? 0 : 1;
        return prefix_.back();
    }
    // Split into pieces inside (−π, π].
    double shift = 2.0 * kPi * std::floor((lo + kPi) / (2.0 * kPi));
    lo -= shift;
    hi -= shift;
    auto piece = [&](double a, double b) {
        auto first = std::lower_bound(atoms_.begin(), atoms_.end(), a, [](const Atom& x, double v) { return x.angle < v; });
        auto last = std::upper_bound(atoms_.begin(), atoms_.end(), b, [](double v, const Atom& x) { return v < x.angle; });
        auto i = static_cast<std::size_t>(first - atoms_.begin());
        auto j = static_cast<std::size_t>(last - atoms_.begin());
        if (j <= i) return 0.0;
        if (count)
            for (std::size_t k = i; k < j; ++k) *count += atoms_[k].at_base ? 0 : 1;
        return prefix_[j] - prefix_[i];
    };
    if (hi <= kPi) return piece(lo, hi);
    return piece(lo, kPi) + piece(-kPi, hi - 2.0 * kPi);
}

AtomicBoundaryMeasure build_ps_measure(const grp::OrbitDatabase& db, double s, const std::vector<double>& f) {
    if (db.size() == 0) throw Error(ErrorKind::insufficient_data, "empty database");
    std::vector<double> scratch;
    const auto& fv = weights_or_stored(db, f, scratch);
    const auto& els = db.elements();
    std::vector<double> ex(els.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < els.size(); ++i) {
        ex[i] = -s * els[i].d_o + fv[i];
        top = std::max(top, ex[i]);
    }
    if (!std::isfinite(top)) throw Error(ErrorKind::domain, "all weights underflow; try a smaller s");
    double sum = 0.0;
    for (double e : ex) sum += std::exp(e - top);
    double log_z = top + std::log(sum);
    if (!std::isfinite(log_z) || log_z < -700.0)
        throw Error(ErrorKind::domain, "all weights underflow; try a smaller s");
    std::vector<Atom> atoms;
    atoms.reserve(els.size());
    for (std::size_t i = 0; i < els.size(); ++i) {
        Atom a;
        a.source = i;
        a.weight = std::exp(ex[i] - log_z);
        a.at_base = els[i].d_o < kBaseTol;
        a.angle = a.at_base ? 0.0 : hyp::polar_from_origin(els[i].matrix.apply(hyp::kOrigin)).theta;
        atoms.push_back(a);
    }
    return AtomicBoundaryMeasure(std::move(atoms), s, log_z);
}

ShadowReport shadow_mass_check(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                               const std::vector<std::size_t>& gammas, double R, const std::vector<double>& f) {
    std::vector<double> scratch;
    const auto& fv = weights_or_stored(db, f, scratch);
    ShadowReport rep;
    rep.R = R;
    std::vector<double> xs, ys;
    for (std::size_t g : gammas) {
        const auto& e = db.elements().at(g);
        if (!(R < e.d_o)) throw Error(ErrorKind::domain, "shadow check needs R below d(o, γo)");
        ShadowRow row;
        row.source = g;
        row.d_o = e.d_o;
        row.f = fv[g];
        double th = hyp::polar_from_origin(e.matrix.apply(hyp::kOrigin)).theta;
        double hw = hyp::shadow_halfangle(e.d_o, R);
        row.arc_mass = m.arc_mass(th - hw, th + hw, &row.arc_atoms);
        if (row.arc_mass > 0.0) {
            double log_r = std::log(row.arc_mass) + m.log_normalizer() + m.s() * e.d_o - row.f;
            row.ratio = std::exp(log_r);
            xs.push_back(e.d_o);
            ys.push_back(log_r);
        } else {
            row.empty = true;
            ++rep.flagged;
        }
        rep.rows.push_back(row);
    }
    bool first = true;
    for (const auto& r : rep.rows) {
        if (r.empty) continue;
        rep.max_ratio = first ? r.ratio : std::max(rep.max_ratio, r.ratio);
        rep.min_ratio = first ? r.ratio : std::min(rep.min_ratio, r.ratio);
        first = false;
    }
    if (xs.size() >= 2) {
        auto fit = least_squares(xs, ys);
        rep.slope = fit.slope;
        rep.slope_stderr = fit.stderr_;
    }
    return rep;
}

CocycleValue gibbs_cocycle(const BoundaryPoint& xi, Point x, Point y, const pot::Potential& F, double Z) {
    if (!(Z >= 20.0)) throw Error(ErrorKind::domain, "gibbs_cocycle needs Z >= 20");
    CocycleValue out;
    if (F.is_zero()) return out;
    Point z = hyp::geodesic_eval(hyp::GeodesicSegment{x, xi}, Z);
    out.value = F.segment_integral(x, z) - F.segment_integral(y, z);
    // The rays from x and y to ξ converge like e^{−t} past the distance d(x, y).
    double dxy = hyp::dist(x, y);
    out.tail_bound = 2.0 * (F.spec().lipschitz() + F.spec().sup_abs()) * std::exp(-(Z - dxy));
    return out;
}

DecayReport u_set_mass_decay(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                             const grp::OrbitIndex& index, double R, double T0, const std::vector<double>& T_grid) {
    if (T_grid.empty() || !std::is_sorted(T_grid.begin(), T_grid.end()) || T_grid.front() < T0)
        throw Error(ErrorKind::config, "T grid must be increasing and start at or after T0");
    if (!(R > 0.0)) throw Error(ErrorKind::domain, "R must be positive");
    double t_max = T_grid.back();
    if (t_max + R > index.complete_radius() + 1e-9)
        throw Error(ErrorKind::horizon, "U-set test needs translates to distance " + std::to_string(t_max + R) +
                                            ", database complete to " + std::to_string(index.complete_radius()));
    DecayReport rep;
    rep.R = R;
    rep.T0 = T0;
    rep.rows.resize(T_grid.size());
    for (std::size_t k = 0; k < T_grid.size(); ++k) rep.rows[k].T = T_grid[k];
    const auto& els = db.elements();
    for (const auto& a : m.atoms()) {
        if (a.at_base) continue;
        const auto& e = els[a.source];
        if (e.d_o < T_grid.front() + R) continue;
        Point q = e.matrix.apply(hyp::kOrigin);
        auto frame = hyp::LineFrame::through(hyp::kOrigin, q);
        double s_o = frame.foot(hyp::kOrigin);
        double reach = std::min(e.d_o, t_max);
        Point end = frame.at(s_o + reach);
        // First arclength in (T0, ·] covered by a ball g·B(o, R), g·o ≠ o.
        double hit = std::numeric_limits<double>::infinity();
        for (std::size_t i : index.near_radial_segment(end, R)) {
            Point x = index.point(i);
            if (hyp::dist(x, hyp::kOrigin) < kBaseTol) continue;
            double a_dist = frame.distance_to_line(x);
            if (a_dist >= R) continue;
            double w = std::acosh(std::cosh(R) / std::cosh(a_dist));
            double u = frame.foot(x) - s_o;
            double u0 = u - w, u1 = u + w;
            if (u1 <= T0) continue;
            hit = std::min(hit, std::max(u0, T0));
        }
        for (auto& row : rep.rows) {
            if (e.d_o < row.T + R) continue;
            row.eligible += a.weight;
            if (row.T <= T0 || row.T < hit) {
                row.mass += a.weight;
                ++row.atoms;
            }
        }
    }
    std::vector<double> xs, ys;
    for (const auto& row : rep.rows) {
        if (row.eligible <= 0.0) continue;
        if (row.mass <= 0.0) {
            if (!rep.vanishes) {
                rep.vanishes = true;
                rep.witness = row.T;
            }
            continue;
        }
        if (rep.vanishes) continue;
        xs.push_back(row.T);
        ys.push_back(std::log(row.fraction()));
    }
    rep.fit_points = xs.size();
    if (rep.vanishes) {
        rep.verdict = "super-exponential/finite: avoiding mass is 0 from T = " + std::to_string(rep.witness);
    } else if (xs.size() >= 3) {
        auto fit = least_squares(xs, ys);
        rep.alpha = -fit.slope;
        rep.alpha_stderr = fit.stderr_;
        rep.verdict = rep.alpha > 0.0 ? "exponential decay" : "no decay";
    } else {
        rep.verdict = "insufficient data";
    }
    return rep;
}

EquivarianceReport equivariance_check(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                                      const grp::Presentation& p, std::size_t generator, const pot::Potential& F,
                                      double d_cut, std::size_t arcs, std::size_t min_atoms) {
    if (generator >= p.generators.size()) throw Error(ErrorKind::config, "generator index out of range");
    if (arcs == 0) throw Error(ErrorKind::config, "need at least one arc");
    const auto& g = p.generators[generator];
    Point go = g.apply(hyp::kOrigin);
    double top = db.truncation().horizon - hyp::dist(hyp::kOrigin, go);
    if (!(top > d_cut)) throw Error(ErrorKind::horizon, "database too shallow for the equivariance check");
    double width = 2.0 * kPi / static_cast<double>(arcs);
    // Arc edges are offset so that no edge sits on a generator axis, where
    // whole rows of atoms lie.
    double offset = 0.381966 * width;
    auto arc_of = [&](double th) {
        double u = std::fmod(th + kPi - offset, 2.0 * kPi);
        if (u < 0.0) u += 2.0 * kPi;
        return std::min(static_cast<std::size_t>(u / width), arcs - 1);
    };
    // Pushed side: atoms γ with d(o, γo) in [d_cut, top], moved to g·ξ_γ.
    // Reference: atoms η with d(go, ηo) in the same range, i.e. the images
    // gγ themselves, so only the boundary approximation is tested.
    std::vector<double> pushed(arcs, 0.0), reference(arcs, 0.0);
    std::vector<std::size_t> count(arcs, 0);
    const auto& els = db.elements();
    for (const auto& a : m.atoms()) {
        if (a.at_base) continue;
        const auto& e = els.at(a.source);
        if (e.d_o >= d_cut && e.d_o <= top) {
            auto eta = g.apply(BoundaryPoint::from_angle(a.angle));
            double log_rn = -m.s() * hyp::busemann(eta, hyp::kOrigin, go);
            if (!F.is_zero()) log_rn += gibbs_cocycle(eta, hyp::kOrigin, go, F).value;
            pushed[arc_of(eta.angle())] += a.weight * std::exp(log_rn);
        }
        double dg = hyp::dist(go, e.matrix.apply(hyp::kOrigin));
        if (dg >= d_cut && dg <= top) {
            reference[arc_of(a.angle)] += a.weight;
            ++count[arc_of(a.angle)];
        }
    }
    EquivarianceReport rep;
    rep.generator = generator;
    for (std::size_t k = 0; k < arcs; ++k) {
        if (count[k] < min_atoms || reference[k] <= 0.0) continue;
        ++rep.arcs_checked;
        rep.max_relative_error = std::max(rep.max_relative_error, std::abs(pushed[k] - reference[k]) / reference[k]);
    }
    return rep;
}

}  // namespace thermo::ps
