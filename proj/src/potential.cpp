#include "thermo/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace thermo::pot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Antiderivative of (B − A cosh u)² in u.
double bump_antiderivative(double A, double B, double u) {
    return B * B * u - 2.0 * A * B * std::sinh(u) + A * A * (0.5 * u + 0.25 * std::sinh(2.0 * u));
}

template <class F>
double simpson(F&& f, double lo, double hi, double step) {
    if (hi <= lo) return 0.0;
    auto n = static_cast<long>(std::ceil((hi - lo) / step));
    n = std::max(2L, n + (n & 1));
    double h = (hi - lo) / static_cast<double>(n);
    double s = f(lo) + f(hi);
    for (long k = 1; k < n; ++k) s += (k & 1 ? 4.0 : 2.0) * f(lo + static_cast<double>(k) * h);
    return s * h / 3.0;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

grp::OrbitDatabase restrict_words(const grp::OrbitDatabase& db, long cutoff) {
    std::vector<grp::GroupElement> keep;
    for (const auto& e : db.elements())
        if (e.word.letter_length() <= cutoff) keep.push_back(e);
    return grp::OrbitDatabase(std::move(keep), db.truncation(), db.dedup_mode());
}

}  // namespace

double bump_profile(double d, double radius) {
    if (d >= radius) return 0.0;
    double v = (std::cosh(radius) - std::cosh(d)) / (std::cosh(radius) - 1.0);
    return v * v;
}

PotentialSpec PotentialSpec::scaled(double lambda) const {
    PotentialSpec out = *this;
    for (auto& t : out.terms) {
        if (auto* c = std::get_if<Constant>(&t)) c->c *= lambda;
        else if (auto* b = std::get_if<RadialBump>(&t)) b->height *= lambda;
        else if (auto* s = std::get_if<RadialSlope>(&t)) {
            s->cap *= lambda;
            s->slope *= lambda;
        }
    }
    return out;
}

PotentialSpec PotentialSpec::plus(const PotentialSpec& other) const {
    PotentialSpec out = *this;
    out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
    if (other.translate_cutoff != 0)
        out.translate_cutoff = translate_cutoff == 0 ? other.translate_cutoff : std::min(translate_cutoff, other.translate_cutoff);
    return out;
}

double PotentialSpec::constant_part() const {
    double c = 0.0;
    for (const auto& t : terms)
        if (auto* k = std::get_if<Constant>(&t)) c += k->c;
    return c;
}

bool PotentialSpec::is_constant() const {
    for (const auto& t : terms) {
        if (auto* b = std::get_if<RadialBump>(&t); b && b->height != 0.0) return false;
        if (auto* s = std::get_if<RadialSlope>(&t); s && s->cap != 0.0) return false;
    }
    return true;
}

double PotentialSpec::lipschitz() const {
    double L = 0.0;
    for (const auto& t : terms) {
        if (auto* b = std::get_if<RadialBump>(&t)) {
            double B = std::cosh(b->radius), K = B - 1.0, best = 0.0;
            for (int k = 0; k <= 2000; ++k) {
                double d = b->radius * k / 2000.0;
                best = std::max(best, 2.0 * (B - std::cosh(d)) * std::sinh(d) / (K * K));
            }
            L += std::abs(b->height) * best;
        } else if (auto* s = std::get_if<RadialSlope>(&t)) {
            L += std::abs(s->slope);
        }
    }
    return L;
}

double PotentialSpec::sup_abs() const {
    double s = 0.0;
    for (const auto& t : terms) {
        if (auto* c = std::get_if<Constant>(&t)) s += std::abs(c->c);
        else if (auto* b = std::get_if<RadialBump>(&t)) s += std::abs(b->height);
        else if (auto* r = std::get_if<RadialSlope>(&t)) s += std::abs(r->cap);
    }
    return s;
}

double PotentialSpec::support_radius() const {
    double s = 0.0;
    for (const auto& t : terms) {
        if (auto* b = std::get_if<RadialBump>(&t))
            s = std::max(s, b->radius + hyp::dist(hyp::kOrigin, b->center));
        else if (auto* r = std::get_if<RadialSlope>(&t))
            s = std::max(s, r->cap / r->slope + hyp::dist(hyp::kOrigin, r->anchor));
    }
    return s;
}

std::string PotentialSpec::str() const {
    if (terms.empty()) return "0";
    std::string out;
    for (const auto& t : terms) {
        if (!out.empty()) out += " + ";
        if (std::holds_alternative<Zero>(t)) out += "0";
        else if (auto* c = std::get_if<Constant>(&t)) out += fmt(c->c);
        else if (auto* b = std::get_if<RadialBump>(&t))
            out += "bump(h=" + fmt(b->height) + ", r=" + fmt(b->radius) + ", at " + fmt(b->center.x) + "+" + fmt(b->center.y) + "i)";
        else if (auto* s = std::get_if<RadialSlope>(&t))
            out += "slope(k=" + fmt(s->slope) + ", cap=" + fmt(s->cap) + ", at " + fmt(s->anchor.x) + "+" + fmt(s->anchor.y) + "i)";
    }
    return out;
}

QuotientDistanceField::QuotientDistanceField(const grp::OrbitDatabase& db, Point anchor, long translate_cutoff)
    : index_(translate_cutoff > 0 ? grp::OrbitIndex(restrict_words(db, translate_cutoff), anchor)
                                  : grp::OrbitIndex(db, anchor)) {}

double QuotientDistanceField::distance_capped(Point x, double cap) const {
    double best = cap;
    for (std::size_t i : index_.ball(x, cap)) best = std::min(best, hyp::dist(x, index_.point(i)));
    return best;
}

double QuotientDistanceField::distance(Point x) const {
    double bound = hyp::dist(x, index_.anchor());
    for (double r = 1.0; r < bound; r *= 2.0) {
        double d = distance_capped(x, r);
        if (d < r) return d;
    }
    return distance_capped(x, bound + 1e-12);
}

Potential::Potential(PotentialSpec spec, const grp::OrbitDatabase& db) : spec_(std::move(spec)) {
    for (const auto& t : spec_.terms) {
        if (auto* c = std::get_if<Constant>(&t)) {
            constant_ += c->c;
        } else if (auto* b = std::get_if<RadialBump>(&t)) {
            if (!(b->radius > 0.0)) throw Error(ErrorKind::config, "bump radius must be positive");
            if (b->height == 0.0) continue;
            auto f = std::make_shared<QuotientDistanceField>(db, b->center, spec_.translate_cutoff);
            radial_.push_back({0, b->height, b->radius, f});
        } else if (auto* s = std::get_if<RadialSlope>(&t)) {
            if (!(s->slope > 0.0) || !(s->cap >= 0.0)) throw Error(ErrorKind::config, "slope and cap must be positive");
            if (s->cap == 0.0) continue;
            auto f = std::make_shared<QuotientDistanceField>(db, s->anchor, spec_.translate_cutoff);
            radial_.push_back({1, s->slope, s->cap, f});
        }
    }
    // Lifted supports must be disjoint for the chord decomposition to be exact.
    for (const auto& r : radial_) {
        const auto& idx = r.field->index();
        if (idx.ball(idx.anchor(), 2.0 * r.reach()).size() > 1)
            throw Error(ErrorKind::config, "support radius " + fmt(r.reach()) + " exceeds half the translate separation");
    }
}

double Potential::complete_radius() const {
    double c = kInf;
    for (const auto& r : radial_) c = std::min(c, r.field->complete_radius());
    return c;
}

double Potential::radial_value(const Radial& t, double d) const {
    if (t.kind == 0) return t.a * bump_profile(d, t.b);
    return std::min(t.b, t.a * d);
}

double Potential::eval(Point x) const {
    double v = constant_;
    for (const auto& r : radial_) v += radial_value(r, r.field->distance_capped(x, r.reach()));
    return v;
}

double Potential::line_integral(Point x, Point y, double step) const {
    if (!(step > 0.0)) throw Error(ErrorKind::domain, "quadrature step must be positive");
    double len = hyp::dist(x, y);
    if (len == 0.0) return 0.0;
    hyp::GeodesicSegment seg{x, y};
    return simpson([&](double t) { return eval(hyp::geodesic_eval(seg, std::min(t, len))); }, 0.0, len, step);
}

// ∫ over u in [u0, u1] of the radial term seen from a translate at distance a
// from the line, u measured from the foot of the perpendicular. For slopes
// the term is written as cap − (cap − slope·d)₊, so this returns the integral
// of the deficit, to be subtracted from cap·length.
double Potential::chord_integral(const Radial& t, double a, double u0, double u1) const {
    double A = std::cosh(a);
    if (t.kind == 0) {
        double B = std::cosh(t.b);
        if (A >= B) return 0.0;
        double w = std::acosh(B / A);
        double lo = std::max(u0, -w), hi = std::min(u1, w);
        if (hi <= lo) return 0.0;
        double K = B - 1.0;
        return t.a * (bump_antiderivative(A, B, hi) - bump_antiderivative(A, B, lo)) / (K * K);
    }
    double rho = t.b / t.a;
    double cr = std::cosh(rho);
    if (A >= cr) return 0.0;
    double w = std::acosh(cr / A);
    double lo = std::max(u0, -w), hi = std::min(u1, w);
    if (hi <= lo) return 0.0;
    auto f = [&](double u) { return std::max(0.0, t.b - t.a * std::acosh(std::max(1.0, A * std::cosh(u)))); };
    constexpr double kStep = 0.002;
    if (lo < 0.0 && hi > 0.0) return simpson(f, lo, 0.0, kStep) + simpson(f, 0.0, hi, kStep);
    return simpson(f, lo, hi, kStep);
}

double Potential::radial_segment_integral(const Radial& t, Point x, Point y, bool from_origin) const {
    const auto& idx = t.field->index();
    auto near = from_origin ? idx.near_radial_segment(y, t.reach()) : idx.near_segment(x, y, t.reach());
    if (near.empty()) return 0.0;
    auto frame = hyp::LineFrame::through(x, y);
    double sx = frame.foot(x), sy = frame.foot(y);
    double lo = std::min(sx, sy), hi = std::max(sx, sy);
    double s = 0.0;
    for (std::size_t i : near) {
        Point c = idx.point(i);
        double s0 = frame.foot(c);
        s += chord_integral(t, frame.distance_to_line(c), lo - s0, hi - s0);
    }
    return s;
}

double Potential::segment_integral(Point x, Point y) const {
    double len = hyp::dist(x, y);
    if (len == 0.0) return 0.0;
    double v = constant_ * len;
    bool radial = x.x == hyp::kOrigin.x && x.y == hyp::kOrigin.y;
    for (const auto& r : radial_) {
        double part = radial_segment_integral(r, x, y, radial);
        v += r.kind == 0 ? part : r.b * len - part;
    }
    return v;
}

double Potential::orbit_integral(const Isometry& g) const {
    Point q = g.apply(hyp::kOrigin);
    double d = hyp::dist(hyp::kOrigin, q);
    if (d == 0.0) return 0.0;
    double v = constant_ * d;
    if (radial_.empty()) return v;
    Point qi = g.inverse().apply(hyp::kOrigin);
    Point m1 = hyp::geodesic_eval(hyp::GeodesicSegment{hyp::kOrigin, q}, 0.5 * d);
    Point m2 = hyp::geodesic_eval(hyp::GeodesicSegment{hyp::kOrigin, qi}, 0.5 * d);
    for (const auto& r : radial_) {
        double part = radial_segment_integral(r, hyp::kOrigin, m1, true) + radial_segment_integral(r, hyp::kOrigin, m2, true);
        v += r.kind == 0 ? part : r.b * d - part;
    }
    return v;
}

double Potential::period_integral(const Isometry& g) const {
    auto cls = hyp::analyze_isometry(g);
    if (cls.kind != hyp::IsometryKind::hyperbolic)
        throw Error(ErrorKind::domain, std::string("period integral of a ") + hyp::to_string(cls.kind) + " element");
    double len = cls.translation_length;
    if (radial_.empty()) return constant_ * len;
    auto frame = hyp::LineFrame::of(*cls.axis);
    double s = frame.foot(hyp::kOrigin);
    return segment_integral(frame.at(s - 0.5 * len), frame.at(s + 0.5 * len));
}

void Potential::fill(grp::OrbitDatabase& db) const {
    for (auto& e : db.mutable_elements()) e.f_int = orbit_integral(e.matrix);
}

}  // namespace thermo::pot
