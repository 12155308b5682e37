#include "thermo/hypgeom.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>


namespace thermo::hyp {

namespace {

constexpr double kPi = std::numbers::pi;

using Mat = std::array<double, 4>;

Mat mul(const Mat& x, const Mat& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

Mat adj(const Mat& x) { return {x[3], -x[1], -x[2], x[0]}; }

// Unnormalized matrix sending (x1, x2, x3) to (0, 1, ∞).
Mat to_standard(const BoundaryPoint x[3]) {
    if (x[0].is_infinity()) {
        double x2 = x[1].value(), x3 = x[2].value();
        return {0.0, x2 - x3, 1.0, -x3};
    }
    if (x[1].is_infinity()) {
        double x1 = x[0].value(), x3 = x[2].value();
        return {1.0, -x1, 1.0, -x3};
    }
    if (x[2].is_infinity()) {
        double x1 = x[0].value(), x2 = x[1].value();
        return {1.0, -x1, 0.0, x2 - x1};
    }
    double x1 = x[0].value(), x2 = x[1].value(), x3 = x[2].value();
    return {x2 - x3, -x1 * (x2 - x3), x2 - x1, -x3 * (x2 - x1)};
}

// Maps p to i by an affine isometry.
Isometry normalize_to_origin(Point p) {
    double s = std::sqrt(p.y);
    return Isometry::from_entries(1.0 / s, -p.x / s, 0.0, s);
}

double wrap_angle(double t) {
    t = std::remainder(t, 2.0 * kPi);
    if (t <= -kPi) t += 2.0 * kPi;
    return t;
}

}  // namespace

Point make_point(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y))
        throw Error(ErrorKind::domain, "point coordinates must be finite");
    if (!(y > 0.0)) throw Error(ErrorKind::domain, "point must satisfy y > 0");
    return {x, y};
}

Point make_point(cplx z) { return make_point(z.real(), z.imag()); }

// ---------------------------------------------------------------- boundary

BoundaryPoint BoundaryPoint::real(double v) {
    if (!std::isfinite(v)) return infinity();
    BoundaryPoint p;
    p.inf_ = false;
    p.v_ = v;
    return p;
}

BoundaryPoint BoundaryPoint::infinity() { return BoundaryPoint(); }

BoundaryPoint BoundaryPoint::from_angle(double theta) {
    double half = 0.5 * wrap_angle(theta);
    double s = std::sin(half);
    if (s == 0.0) return infinity();
    return real(-std::cos(half) / s);
}

double BoundaryPoint::value() const {
    if (inf_) throw Error(ErrorKind::domain, "boundary point at infinity has no real value");
    return v_;
}

double BoundaryPoint::angle() const {
    if (inf_) return 0.0;
    double t = std::atan2(-2.0 * v_, v_ * v_ - 1.0);
    return t <= -kPi ? kPi : t;
}

// ---------------------------------------------------------------- isometry

Isometry::Isometry(double a, double b, double c, double d) : m_{a, b, c, d} { canonicalize(); }

Isometry Isometry::from_entries(double a, double b, double c, double d) {
    for (double v : {a, b, c, d})
        if (!std::isfinite(v)) throw Error(ErrorKind::domain, "matrix entries must be finite");
    double det = a * d - b * c;
    double scale = std::max(1.0, a * a + b * b + c * c + d * d);
    if (std::abs(det - 1.0) > 1e-12 * scale)
        throw Error(ErrorKind::domain, "matrix determinant must be 1");
    return Isometry(a, b, c, d);
}

void Isometry::canonicalize() {
    double scale = std::sqrt(frobenius2());
    for (double v : m_) {
        if (std::abs(v) > 1e-13 * scale) {
            if (v < 0.0)
                for (double& w : m_) w = -w;
            return;
        }
    }
}

double Isometry::frobenius2() const {
    return m_[0] * m_[0] + m_[1] * m_[1] + m_[2] * m_[2] + m_[3] * m_[3];
}

Isometry Isometry::operator*(const Isometry& r) const {
    return Isometry(m_[0] * r.m_[0] + m_[1] * r.m_[2], m_[0] * r.m_[1] + m_[1] * r.m_[3],
                    m_[2] * r.m_[0] + m_[3] * r.m_[2], m_[2] * r.m_[1] + m_[3] * r.m_[3]);
}

Isometry Isometry::inverse() const { return Isometry(m_[3], -m_[1], -m_[2], m_[0]); }

Point Isometry::apply(Point p) const {
    // Im(gz) = y / |cz + d|^2 for unit determinant.
    cplx z = p.z();
    cplx den = m_[2] * z + m_[3];
    cplx w = (m_[0] * z + m_[1]) / den;
    return {w.real(), p.y / std::norm(den)};
}

BoundaryPoint Isometry::apply(const BoundaryPoint& xi) const {
    if (xi.is_infinity()) {
        if (m_[2] == 0.0) return BoundaryPoint::infinity();
        return BoundaryPoint::real(m_[0] / m_[2]);
    }
    double x = xi.value();
    double den = m_[2] * x + m_[3];
    if (den == 0.0) return BoundaryPoint::infinity();
    return BoundaryPoint::real((m_[0] * x + m_[1]) / den);
}

double Isometry::distance_to(const Isometry& o) const {
    double plus = 0.0, minus = 0.0;
    for (int i = 0; i < 4; ++i) {
        plus += (m_[i] - o.m_[i]) * (m_[i] - o.m_[i]);
        minus += (m_[i] + o.m_[i]) * (m_[i] + o.m_[i]);
    }
    return std::sqrt(std::min(plus, minus));
}

const char* to_string(IsometryKind kind) {
    switch (kind) {
    case IsometryKind::identity: return "identity";
    case IsometryKind::elliptic: return "elliptic";
    case IsometryKind::parabolic: return "parabolic";
    case IsometryKind::hyperbolic: return "hyperbolic";
    }
    return "?";
}

// ---------------------------------------------------------------- metric

double dist(Point p, Point q) {
    if (!(p.y > 0.0) || !(q.y > 0.0)) throw Error(ErrorKind::domain, "dist: points need y > 0");
    double e = std::hypot(p.x - q.x, p.y - q.y);
    return 2.0 * std::asinh(e / (2.0 * std::sqrt(p.y * q.y)));
}

Point mobius_apply(const Isometry& g, Point p) { return g.apply(p); }

IsometryClass analyze_isometry(const Isometry& g) {
    IsometryClass out;
    double tr = std::abs(g.trace());
    double scale = std::sqrt(g.frobenius2());
    if (tr > 2.0 + kClassifyTol) {
        out.kind = IsometryKind::hyperbolic;
        out.translation_length = 2.0 * std::acosh(0.5 * tr);
        double sgn = g.trace() > 0.0 ? 1.0 : -1.0;
        double a = sgn * g.a(), b = sgn * g.b(), c = sgn * g.c(), d = sgn * g.d();
        double root = std::sqrt((tr - 2.0) * (tr + 2.0));
        auto fixed = [&](double lambda) {
            // eigenvector candidates (b, λ - a) and (λ - d, c)
            double u1 = b, u2 = lambda - a;
            double v1 = lambda - d, v2 = c;
            if (std::hypot(u1, u2) < std::hypot(v1, v2)) {
                u1 = v1;
                u2 = v2;
            }
            if (std::abs(u2) <= 1e-15 * std::abs(u1)) return BoundaryPoint::infinity();
            return BoundaryPoint::real(u1 / u2);
        };
        double big = 0.5 * (tr + root);
        double small = 1.0 / big;
        out.axis = GeodesicSegment{fixed(small), fixed(big)};
        return out;
    }
    if (tr >= 2.0 - kClassifyTol) {
        bool ident = std::abs(g.b()) <= kClassifyTol * scale && std::abs(g.c()) <= kClassifyTol * scale &&
                     std::abs(g.a() - g.d()) <= kClassifyTol * scale;
        out.kind = ident ? IsometryKind::identity : IsometryKind::parabolic;
        return out;
    }
    out.kind = IsometryKind::elliptic;
    return out;
}

double busemann(const BoundaryPoint& xi, Point x, Point y) {
    if (xi.is_infinity()) return std::log(y.y) - std::log(x.y);
    double v = xi.value();
    double nx = (x.x - v) * (x.x - v) + x.y * x.y;
    double ny = (y.x - v) * (y.x - v) + y.y * y.y;
    return std::log(y.y) - std::log(ny) - std::log(x.y) + std::log(nx);
}

// ---------------------------------------------------------------- polar

Isometry rotation_about_origin(double theta) {
    double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    return Isometry::from_entries(c, s, -s, c);
}

Isometry translation_through_origin(double theta, double length) {
    double e = std::exp(0.5 * length);
    Isometry boost = Isometry::from_entries(e, 0.0, 0.0, 1.0 / e);
    Isometry rot = rotation_about_origin(theta);
    return rot * boost * rot.inverse();
}

Polar polar_from_origin(Point p) {
    double r = dist(kOrigin, p);
    double th = std::atan2(-2.0 * p.x, p.x * p.x + p.y * p.y - 1.0);
    return {r, th};
}

Point from_polar(double r, double theta) {
    if (r < 0.0) throw Error(ErrorKind::domain, "from_polar: negative radius");
    return rotation_about_origin(theta).apply(Point{0.0, std::exp(r)});
}

// ---------------------------------------------------------------- frames

LineFrame::LineFrame(const BoundaryPoint& u, const BoundaryPoint& v) {
    if (u == v) throw Error(ErrorKind::domain, "geodesic endpoints must differ");
    if (u.is_infinity()) {
        double vv = v.value();
        to_ = Isometry::from_entries(0.0, -1.0, 1.0, -vv);
    } else if (v.is_infinity()) {
        to_ = Isometry::from_entries(1.0, -u.value(), 0.0, 1.0);
    } else {
        double uu = u.value(), vv = v.value();
        if (uu > vv) {
            double s = 1.0 / std::sqrt(uu - vv);
            to_ = Isometry::from_entries(s, -uu * s, s, -vv * s);
        } else {
            double s = 1.0 / std::sqrt(vv - uu);
            to_ = Isometry::from_entries(-s, uu * s, s, -vv * s);
        }
    }
    from_ = to_.inverse();
}

std::pair<BoundaryPoint, BoundaryPoint> geodesic_endpoints(Point p, Point q) {
    Isometry n = normalize_to_origin(p);
    Point qq = n.apply(q);
    if (dist(kOrigin, qq) == 0.0) throw Error(ErrorKind::domain, "geodesic through coincident points");
    double th = polar_from_origin(qq).theta;
    Isometry back = n.inverse();
    return {back.apply(BoundaryPoint::from_angle(th + kPi)), back.apply(BoundaryPoint::from_angle(th))};
}

LineFrame LineFrame::through(Point p, Point q) {
    auto [u, v] = geodesic_endpoints(p, q);
    return LineFrame(u, v);
}

LineFrame LineFrame::of(const GeodesicSegment& s) {
    const Point* ps = std::get_if<Point>(&s.start);
    const Point* pe = std::get_if<Point>(&s.end);
    if (ps && pe) return through(*ps, *pe);
    if (!ps && !pe) return LineFrame(std::get<BoundaryPoint>(s.start), std::get<BoundaryPoint>(s.end));
    if (ps) {
        const BoundaryPoint& xi = std::get<BoundaryPoint>(s.end);
        Isometry n = normalize_to_origin(*ps);
        double th = n.apply(xi).angle();
        return LineFrame(n.inverse().apply(BoundaryPoint::from_angle(th + kPi)), xi);
    }
    const BoundaryPoint& xi = std::get<BoundaryPoint>(s.start);
    Isometry n = normalize_to_origin(*pe);
    double th = n.apply(xi).angle();
    return LineFrame(xi, n.inverse().apply(BoundaryPoint::from_angle(th + kPi)));
}

double LineFrame::foot(Point p) const {
    Point w = to_.apply(p);
    return std::log(std::hypot(w.x, w.y));
}

double LineFrame::distance_to_line(Point p) const {
    Point w = to_.apply(p);
    return std::asinh(std::abs(w.x) / w.y);
}

Point LineFrame::at(double s) const { return from_.apply(Point{0.0, std::exp(s)}); }

int LineFrame::side(Point p) const {
    Point w = to_.apply(p);
    if (w.x > 0.0) return 1;
    if (w.x < 0.0) return -1;
    return 0;
}

// ---------------------------------------------------------------- segments

namespace {

// Arclength coordinates (in the frame) of the segment endpoints.
std::pair<double, double> frame_range(const LineFrame& f, const GeodesicSegment& s) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double lo = -inf, hi = inf;
    if (auto p = std::get_if<Point>(&s.start)) lo = f.foot(*p);
    if (auto p = std::get_if<Point>(&s.end)) hi = f.foot(*p);
    return {lo, hi};
}

}  // namespace

double segment_length(const GeodesicSegment& s) {
    const Point* ps = std::get_if<Point>(&s.start);
    const Point* pe = std::get_if<Point>(&s.end);
    if (ps && pe) return dist(*ps, *pe);
    return std::numeric_limits<double>::infinity();
}

double point_segment_distance(Point p, const GeodesicSegment& s) {
    const Point* ps = std::get_if<Point>(&s.start);
    const Point* pe = std::get_if<Point>(&s.end);
    if (ps && pe && dist(*ps, *pe) == 0.0) return dist(p, *ps);
    LineFrame f = LineFrame::of(s);
    auto [lo, hi] = frame_range(f, s);
    double t = f.foot(p);
    if (t >= lo && t <= hi) return f.distance_to_line(p);
    return dist(p, f.at(t < lo ? lo : hi));
}

Point geodesic_eval(const GeodesicSegment& s, double t) {
    const Point* ps = std::get_if<Point>(&s.start);
    if (!ps) throw Error(ErrorKind::domain, "geodesic_eval needs an interior start point");
    double len = segment_length(s);
    double slack = 1e-12 * std::max(1.0, std::isfinite(len) ? len : 1.0);
    if (t < -slack || t > len + slack)
        throw Error(ErrorKind::domain, "geodesic_eval: arclength outside [0, length]");
    if (len == 0.0) return *ps;
    t = std::clamp(t, 0.0, len);
    LineFrame f = LineFrame::of(s);
    return f.at(f.foot(*ps) + t);
}

double shadow_halfangle(double d, double R) {
    if (!(d > 0.0) || !(R > 0.0)) throw Error(ErrorKind::domain, "shadow_halfangle needs d > 0 and R > 0");
    if (R >= d) return kPi;
    // sinh R / sinh d, stable for large d
    double ratio = std::exp(R - d) * (-std::expm1(-2.0 * R)) / (-std::expm1(-2.0 * d));
    return std::asin(std::min(1.0, ratio));
}

// ---------------------------------------------------------------- triples

Isometry mobius_from_triples(const BoundaryPoint x[3], const BoundaryPoint y[3]) {
    Mat m = mul(adj(to_standard(y)), to_standard(x));
    double det = m[0] * m[3] - m[1] * m[2];
    if (!(det > 0.0)) throw Error(ErrorKind::domain, "triples have opposite cyclic orders");
    double s = 1.0 / std::sqrt(det);
    return Isometry::from_entries(m[0] * s, m[1] * s, m[2] * s, m[3] * s);
}

// ---------------------------------------------------------------- half-planes

namespace {

constexpr double kZeroTol = 1e-9;

// Position of a boundary point relative to the imaginary axis of a frame:
// 0 when it is (numerically) an endpoint of the axis.
int frame_sign(const BoundaryPoint& xi) {
    if (xi.is_infinity()) return 0;
    double v = xi.value();
    if (std::abs(v) <= kZeroTol || std::abs(v) >= 1.0 / kZeroTol) return 0;
    return v > 0.0 ? 1 : -1;
}

}  // namespace

HalfPlane::HalfPlane(const BoundaryPoint& e1, const BoundaryPoint& e2, Point inside)
    : e1_(e1), e2_(e2), inside_(inside) {
    if (LineFrame(e1_, e2_).side(inside_) == 0)
        throw Error(ErrorKind::domain, "half-plane sample point lies on its boundary");
}

HalfPlane HalfPlane::half_disk(double center, double radius) {
    return HalfPlane(BoundaryPoint::real(center - radius), BoundaryPoint::real(center + radius),
                     Point{center, 0.5 * radius});
}

HalfPlane HalfPlane::outside_half_disk(double center, double radius) {
    return HalfPlane(BoundaryPoint::real(center - radius), BoundaryPoint::real(center + radius),
                     Point{center, 2.0 * radius});
}

HalfPlane HalfPlane::vertical(double x0, bool right) {
    return HalfPlane(BoundaryPoint::real(x0), BoundaryPoint::infinity(),
                     Point{right ? x0 + 1.0 : x0 - 1.0, 1.0});
}

bool HalfPlane::contains(Point p) const {
    LineFrame f(e1_, e2_);
    int s = f.side(p);
    return s != 0 && s == f.side(inside_);
}

HalfPlane HalfPlane::image(const Isometry& g) const {
    return HalfPlane(g.apply(e1_), g.apply(e2_), g.apply(inside_));
}

HalfPlane HalfPlane::complement() const {
    LineFrame f(e1_, e2_);
    Point w = f.to_frame().apply(inside_);
    return HalfPlane(e1_, e2_, f.from_frame().apply(Point{-w.x, w.y}));
}

double HalfPlane::distance_to(Point p) const {
    if (contains(p)) return 0.0;
    return LineFrame(e1_, e2_).distance_to_line(p);
}

bool half_plane_nested(const HalfPlane& inner, const HalfPlane& outer) {
    LineFrame f(outer.e1(), outer.e2());
    int s = f.side(outer.inside());
    int s1 = frame_sign(f.to_frame().apply(inner.e1()));
    int s2 = frame_sign(f.to_frame().apply(inner.e2()));
    if ((s1 != 0 && s1 != s) || (s2 != 0 && s2 != s)) return false;
    // a point deep in the complement of `outer`
    Point probe = f.from_frame().apply(Point{-static_cast<double>(s), 1.0});
    return !inner.contains(probe);
}

bool half_planes_disjoint(const HalfPlane& h1, const HalfPlane& h2) {
    LineFrame f(h1.e1(), h1.e2());
    int s = f.side(h1.inside());
    int s1 = frame_sign(f.to_frame().apply(h2.e1()));
    int s2 = frame_sign(f.to_frame().apply(h2.e2()));
    if ((s1 != 0 && s1 == s) || (s2 != 0 && s2 == s)) return false;
    Point probe = f.from_frame().apply(Point{static_cast<double>(s), 1.0});
    return !h2.contains(probe);
}

double half_plane_distance(const HalfPlane& h1, const HalfPlane& h2) {
    if (!half_planes_disjoint(h1, h2)) return 0.0;
    LineFrame f(h1.e1(), h1.e2());
    BoundaryPoint a = f.to_frame().apply(h2.e1());
    BoundaryPoint b = f.to_frame().apply(h2.e2());
    if (frame_sign(a) == 0 || frame_sign(b) == 0) return 0.0;
    double p = std::abs(a.value()), q = std::abs(b.value());
    if (p > q) std::swap(p, q);
    return std::acosh((p + q) / (q - p));
}

}  // namespace thermo::hyp
