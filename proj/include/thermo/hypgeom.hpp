#pragma once

// Hyperbolic plane kernel. Computations run in the upper half-plane; the
// disk model (Cayley map sending o = i to the center) is used for boundary
// angles, directions and shadows.

#include <complex>
#include <optional>
#include <variant>

#include "thermo/error.hpp"

namespace thermo::hyp {

using cplx = std::complex<double>;

/// |tr| must exceed 2 by this much before an element is called hyperbolic.
inline constexpr double kClassifyTol = 1e-9;
/// Tolerance used by identity checks on geometric quantities.
inline constexpr double kGeomTol = 1e-9;

struct Point {
    double x = 0.0;
    double y = 1.0;

    cplx z() const { return {x, y}; }
};

/// Validating constructor: y > 0 and both coordinates finite.
Point make_point(double x, double y);
Point make_point(cplx z);

/// The base point o = i.
inline constexpr Point kOrigin{0.0, 1.0};

/// A point of R ∪ {∞}, interconvertible with an angle on the unit circle
/// of the disk model.
class BoundaryPoint {
public:
    BoundaryPoint() = default;
    static BoundaryPoint real(double v);
    static BoundaryPoint infinity();
    /// Disk-model angle; 0 is the point at infinity.
    static BoundaryPoint from_angle(double theta);

    bool is_infinity() const { return inf_; }
    double value() const;
    /// Angle in (-π, π] of the image under the Cayley map.
    double angle() const;

    friend bool operator==(const BoundaryPoint& a, const BoundaryPoint& b) {
        return a.inf_ == b.inf_ && (a.inf_ || a.v_ == b.v_);
    }

private:
    bool inf_ = true;
    double v_ = 0.0;
};

/// Orientation-preserving isometry: a unit-determinant real matrix modulo
/// sign, stored with its first nonzero entry positive.
class Isometry {
public:
    Isometry() = default;

    /// Validates ad - bc = 1 (relative to the entry scale) and canonicalizes the sign.
    static Isometry from_entries(double a, double b, double c, double d);

    double a() const { return m_[0]; }
    double b() const { return m_[1]; }
    double c() const { return m_[2]; }
    double d() const { return m_[3]; }

    double trace() const { return m_[0] + m_[3]; }
    double frobenius2() const;
    double determinant() const { return m_[0] * m_[3] - m_[1] * m_[2]; }

    Isometry operator*(const Isometry& rhs) const;
    Isometry inverse() const;

    Point apply(Point p) const;
    BoundaryPoint apply(const BoundaryPoint& xi) const;

    /// Frobenius distance between the canonical representatives.
    double distance_to(const Isometry& other) const;

private:
    Isometry(double a, double b, double c, double d);
    void canonicalize();

    double m_[4] = {1.0, 0.0, 0.0, 1.0};
};

using Endpoint = std::variant<Point, BoundaryPoint>;

/// Oriented geodesic segment from `start` to `end`. Either endpoint may lie on
/// the boundary, giving rays and complete geodesics.
struct GeodesicSegment {
    Endpoint start;
    Endpoint end;
};

enum class IsometryKind { identity, elliptic, parabolic, hyperbolic };

const char* to_string(IsometryKind kind);

struct IsometryClass {
    IsometryKind kind = IsometryKind::identity;
    double translation_length = 0.0;
    /// Repelling fixed point first, attracting second (hyperbolic only).
    std::optional<GeodesicSegment> axis;
};

double dist(Point p, Point q);
Point mobius_apply(const Isometry& g, Point p);
IsometryClass analyze_isometry(const Isometry& g);

/// β_ξ(x, y) = lim_{z→ξ} d(x, z) - d(y, z).
double busemann(const BoundaryPoint& xi, Point x, Point y);

double point_segment_distance(Point p, const GeodesicSegment& s);
/// Length of the segment; +∞ when an endpoint is on the boundary.
double segment_length(const GeodesicSegment& s);
/// Unit-speed parametrization from the (interior) start point.
Point geodesic_eval(const GeodesicSegment& s, double t);

/// Half-angle, seen from o, of the shadow of a ball of radius R whose
/// center is at distance d from o.
double shadow_halfangle(double d, double R);

/// Polar coordinates about o: r = d(o, p), theta = disk-model direction.
struct Polar {
    double r = 0.0;
    double theta = 0.0;
};

Polar polar_from_origin(Point p);
Point from_polar(double r, double theta);
/// Rotation about o by `theta` in the disk model.
Isometry rotation_about_origin(double theta);
/// Hyperbolic element with axis through o in direction `theta` and the given
/// translation length; attracting fixed point in direction `theta`.
Isometry translation_through_origin(double theta, double length);

/// Möbius frame that sends an oriented geodesic (u → v) to the imaginary
/// axis traversed upward: u ↦ 0, v ↦ ∞.
class LineFrame {
public:
    LineFrame(const BoundaryPoint& u, const BoundaryPoint& v);
    /// Frame of the complete geodesic through p then q.
    static LineFrame through(Point p, Point q);
    static LineFrame of(const GeodesicSegment& s);

    const Isometry& to_frame() const { return to_; }
    const Isometry& from_frame() const { return from_; }

    /// Signed arclength coordinate of the foot of the perpendicular from p.
    double foot(Point p) const;
    /// Distance from p to the complete geodesic.
    double distance_to_line(Point p) const;
    /// Point on the line at signed arclength coordinate s (log of height).
    Point at(double s) const;
    /// +1 for the right-hand side of the oriented line, -1 for the left, 0 on it.
    int side(Point p) const;

private:
    Isometry to_;
    Isometry from_;
};

/// Ordered endpoints (backward, forward) of the complete geodesic through p then q.
std::pair<BoundaryPoint, BoundaryPoint> geodesic_endpoints(Point p, Point q);

/// Möbius map sending (x1, x2, x3) to (y1, y2, y3); both triples must have
/// the same cyclic order on R ∪ {∞}.
Isometry mobius_from_triples(const BoundaryPoint x[3], const BoundaryPoint y[3]);

/// Open geodesic half-plane bounded by the geodesic with endpoints e1, e2,
/// on the side containing `inside`.
class HalfPlane {
public:
    HalfPlane(const BoundaryPoint& e1, const BoundaryPoint& e2, Point inside);
    /// Interior of the Euclidean half-disk |z - center| < radius.
    static HalfPlane half_disk(double center, double radius);
    /// Exterior of the Euclidean half-disk.
    static HalfPlane outside_half_disk(double center, double radius);
    /// {Re z > x0} if `right`, {Re z < x0} otherwise.
    static HalfPlane vertical(double x0, bool right);

    const BoundaryPoint& e1() const { return e1_; }
    const BoundaryPoint& e2() const { return e2_; }
    Point inside() const { return inside_; }

    bool contains(Point p) const;
    HalfPlane image(const Isometry& g) const;
    HalfPlane complement() const;
    /// 0 when p is inside, else the distance to the boundary geodesic.
    double distance_to(Point p) const;

private:
    BoundaryPoint e1_;
    BoundaryPoint e2_;
    Point inside_;
};

/// Distance between two half-planes; 0 when they intersect.
double half_plane_distance(const HalfPlane& h1, const HalfPlane& h2);
/// True when the open half-planes do not meet (closures may touch).
bool half_planes_disjoint(const HalfPlane& h1, const HalfPlane& h2);
/// True when h1 ⊆ closure(h2) (boundaries disjoint or equal).
bool half_plane_nested(const HalfPlane& inner, const HalfPlane& outer);

}  // namespace thermo::hyp
