#pragma once

// Γ-invariant potentials depending on the base point only, and their
// integrals along geodesics.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "thermo/group.hpp"

namespace thermo::pot {

using hyp::Isometry;
using hyp::Point;

struct Zero {};

struct Constant {
    double c = 0.0;
};

/// height · φ(d_M(x, center)) with φ(d) = ((cosh r − cosh d) / (cosh r − 1))²
/// for d < r and 0 beyond: C¹, with φ(0) = 1 and φ'(r) = 0.
struct RadialBump {
    Point center = hyp::kOrigin;
    double height = 1.0;
    double radius = 1.0;
};

/// min(cap, slope · d_M(x, anchor)).
struct RadialSlope {
    Point anchor = hyp::kOrigin;
    double slope = 1.0;
    double cap = 1.0;
};

using Term = std::variant<Zero, Constant, RadialBump, RadialSlope>;

struct PotentialSpec {
    std::vector<Term> terms;
    /// Only database elements with at most this many letters serve as
    /// translates; 0 means all of them.
    long translate_cutoff = 0;

    static PotentialSpec zero() { return {}; }
    static PotentialSpec constant(double c) { return {{Constant{c}}, 0}; }
    static PotentialSpec bump(double height, double radius, Point center = hyp::kOrigin) {
        return {{RadialBump{center, height, radius}}, 0};
    }

    /// This spec with every bump height and slope cap multiplied by lambda
    /// and constants multiplied by lambda.
    PotentialSpec scaled(double lambda) const;
    PotentialSpec plus(const PotentialSpec& other) const;

    /// Sum of the constant terms.
    double constant_part() const;
    bool is_constant() const;
    /// Lipschitz constant of the fiber-constant potential on H².
    double lipschitz() const;
    /// sup |F|.
    double sup_abs() const;
    /// Largest distance from a term's center at which it is non-constant.
    double support_radius() const;

    std::string str() const;
};

double bump_profile(double d, double radius);

/// d_M(x) = min over cached g of d(x, g · anchor).
class QuotientDistanceField {
public:
    QuotientDistanceField(const grp::OrbitDatabase& db, Point anchor, long translate_cutoff = 0);

    Point anchor() const { return index_.anchor(); }
    const grp::OrbitIndex& index() const { return index_; }
    std::size_t translates() const { return index_.size(); }
    /// Radius about o within which every translate is cached.
    double complete_radius() const { return index_.complete_radius(); }

    double distance(Point x) const;
    /// Distance if below `cap`, otherwise `cap`.
    double distance_capped(Point x, double cap) const;

private:
    grp::OrbitIndex index_;
};

/// A potential spec bound to the translates of an orbit database.
class Potential {
public:
    Potential(PotentialSpec spec, const grp::OrbitDatabase& db);

    const PotentialSpec& spec() const { return spec_; }
    bool is_zero() const { return spec_.terms.empty() || (spec_.is_constant() && spec_.constant_part() == 0.0); }
    /// Radius about o within which evaluation is exactly Γ-invariant.
    double complete_radius() const;

    double eval(Point x) const;
    /// Composite Simpson along the geodesic, panel width at most `step`.
    double line_integral(Point x, Point y, double step = 0.01) const;
    /// Chord decomposition: closed form for bumps and constants, Simpson
    /// restricted to chords for slopes.
    double segment_integral(Point x, Point y) const;
    /// ∫ over one period of the axis of g, centered at the foot of o.
    double period_integral(const Isometry& g) const;
    /// ∫_o^{go} F̃ using two half segments from o, so only translates within
    /// d(o, go) / 2 + support of o are needed.
    double orbit_integral(const Isometry& g) const;

    /// Fills f_int for every element of the database.
    void fill(grp::OrbitDatabase& db) const;

private:
    struct Radial {
        int kind;  // 0 bump, 1 slope
        double a, b;  // bump: height, radius; slope: slope, cap
        std::shared_ptr<QuotientDistanceField> field;
        double reach() const { return kind == 0 ? b : b / a; }
    };

    double radial_value(const Radial& t, double d) const;
    double chord_integral(const Radial& t, double a, double u0, double u1) const;
    double radial_segment_integral(const Radial& t, Point x, Point y, bool from_origin) const;

    PotentialSpec spec_;
    double constant_ = 0.0;
    std::vector<Radial> radial_;
};

}  // namespace thermo::pot
