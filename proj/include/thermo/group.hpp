#pragma once

// Group presentations, orbit enumeration and conjugacy classes.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermo/hypgeom.hpp"

namespace thermo::grp {

using hyp::Isometry;
using hyp::Point;

/// Run of one generator: gen^power, power != 0.
struct Syllable {
    int gen = 0;
    long power = 1;

    friend bool operator==(const Syllable&, const Syllable&) = default;
};

/// Total order on syllables: by generator, then by power.
bool syllable_less(const Syllable& a, const Syllable& b);

/// Reduced word stored run-length encoded. Generator i is written as the
/// letter 'a'+i, its inverse as the upper-case letter; runs as "a^5", "B^2".
class Word {
public:
    Word() = default;
    explicit Word(std::vector<Syllable> syl);

    const std::vector<Syllable>& syllables() const { return syl_; }
    bool empty() const { return syl_.empty(); }
    long letter_length() const;

    /// Appends gen^power, cancelling against the last syllable.
    void append(int gen, long power);
    void append(const Word& w);
    void pop_letter();
    Word inverse() const;

    /// Letters as (generator, inverse flag).
    std::vector<std::pair<int, bool>> letters() const;

    std::string str() const;
    static Word parse(const std::string& s);

    /// Shorter words first, then lexicographic on letters with a < A < b < B ...
    friend bool operator<(const Word& a, const Word& b);
    friend bool operator==(const Word& a, const Word& b) { return a.syl_ == b.syl_; }

private:
    std::vector<Syllable> syl_;
};

enum class PresentationKind { free_schottky, general };

/// g maps the complement of `source` onto the closure of `target`.
struct SchottkyPairing {
    hyp::HalfPlane source;
    hyp::HalfPlane target;
};

struct Presentation {
    /// Preset family: schottky_pair, schottky_parabolic, modular_group,
    /// symmetric_pairing or custom.
    std::string name;
    std::vector<std::string> generator_names;
    std::vector<Isometry> generators;
    PresentationKind kind = PresentationKind::general;
    bool exact_integer = false;
    std::vector<SchottkyPairing> schottky_disks;
    /// Preset parameters, for reports.
    std::vector<std::pair<std::string, double>> parameters;

    int rank() const { return static_cast<int>(generators.size()); }
    /// gen^power; powers are formed by repeated squaring.
    Isometry power(int gen, long p) const;
    Isometry evaluate(const Word& w) const;
    /// Disk containing x·o for the letter x = gen^{sign}.
    const hyp::HalfPlane& attracting_disk(int gen, bool inverse) const;
};

/// Two hyperbolic generators with perpendicular axes through o and equal
/// translation length; disks at distance length/2 from o.
Presentation schottky_pair(double translation_length = 2.5);
/// Parabolic z ↦ z + c paired with a hyperbolic generator with axis (-1, 1)
/// of the given translation length.
Presentation schottky_parabolic(double c = 2.5, double b_length = 6.0);
/// PSL(2, Z) generated by S and T.
Presentation modular_group();
/// Generators z ↦ x_k - r^2 / (z + x_k) pairing the half-disks of radius r
/// at -x_k and x_k.
Presentation symmetric_pairing(const std::vector<double>& centers, double radius);
Presentation custom_presentation(const std::vector<std::string>& names,
                                 const std::vector<Isometry>& generators,
                                 std::vector<SchottkyPairing> disks = {});

struct SchottkyMargin {
    std::string what;
    double value = 0.0;
};

struct SchottkyReport {
    bool ok = false;
    std::vector<std::string> failures;
    std::vector<SchottkyMargin> margins;
    /// Smallest hyperbolic distance between two disks (0 when tangent).
    double min_separation = 0.0;
};

SchottkyReport verify_schottky(const Presentation& p);

struct GroupElement {
    Word word;
    Isometry matrix;
    double d_o = 0.0;
    double f_int = 0.0;
};

struct Truncation {
    long max_word_len = 0;
    double max_dist = 0.0;
    /// All elements with d_o <= horizon are present.
    double horizon = 0.0;
    bool certified = false;
    long achieved_word_len = 0;
};

struct EnumerationLimits {
    long max_word_len = 14;
    double max_dist = 22.0;
    std::size_t max_elements = 20'000'000;
};

class OrbitDatabase {
public:
    OrbitDatabase() = default;
    OrbitDatabase(std::vector<GroupElement> elements, Truncation trunc, std::string dedup_mode);

    const std::vector<GroupElement>& elements() const { return elements_; }
    std::vector<GroupElement>& mutable_elements() { return elements_; }
    const Truncation& truncation() const { return trunc_; }
    const std::string& dedup_mode() const { return dedup_; }
    std::size_t size() const { return elements_.size(); }

    /// Index of the element with this matrix, if stored.
    std::optional<std::size_t> find(const Isometry& g) const;

    void write_csv(std::ostream& os) const;
    static OrbitDatabase read_csv(std::istream& is);

private:
    std::vector<GroupElement> elements_;
    Truncation trunc_;
    std::string dedup_;
};

OrbitDatabase enumerate_orbit(const Presentation& p, const EnumerationLimits& lim);

/// Hyperbolic conjugacy class representative.
struct ClassRep {
    Word word;
    Isometry matrix;
    double length = 0.0;
    bool primitive = true;
};

struct ClassCensus {
    std::vector<ClassRep> classes;  // primitive classes, sorted by (length, word)
    std::size_t unresolved = 0;
    std::size_t non_primitive = 0;
    double max_len = 0.0;
};

/// Primitive oriented closed geodesics with length <= max_len. The free case
/// enumerates necklaces directly and ignores `db`.
ClassCensus conjugacy_classes(const Presentation& p, const OrbitDatabase& db, double max_len);

/// Exact conjugacy invariant of a hyperbolic element of PSL(2, Z): the trace
/// and the smallest state (P, Q) of the periodic part of the minus continued
/// fraction of the attracting fixed point (P + sqrt D) / Q.
std::array<std::int64_t, 3> modular_class_invariant(const Isometry& g);

/// Canonical cyclic rotation (syllable level) of a cyclically reduced word,
/// and whether it is a proper power.
Word canonical_necklace(const Word& w);
bool is_proper_power(const Word& w);

/// Spatial index of the translates g·anchor, g in the database.
class OrbitIndex {
public:
    OrbitIndex() = default;
    OrbitIndex(const OrbitDatabase& db, Point anchor = hyp::kOrigin);

    Point anchor() const { return anchor_; }
    /// Radius (from o) up to which every translate is present.
    double complete_radius() const { return complete_radius_; }
    std::size_t size() const { return pts_.size(); }
    Point point(std::size_t i) const { return pts_[i]; }
    /// Database index of translate i.
    std::size_t element(std::size_t i) const { return elem_[i]; }

    /// Translates within rho of x.
    std::vector<std::size_t> ball(Point x, double rho) const;
    /// Translates within rho of the segment [o, q].
    std::vector<std::size_t> near_radial_segment(Point q, double rho) const;
    /// Translates within rho of the segment [p, q].
    std::vector<std::size_t> near_segment(Point p, Point q, double rho) const;

private:
    struct Entry {
        double theta;
        std::uint32_t id;
    };
    void collect(std::size_t shell, double theta, double halfwidth, std::vector<std::size_t>& out) const;

    Point anchor_ = hyp::kOrigin;
    double complete_radius_ = 0.0;
    std::vector<Point> pts_;
    std::vector<double> radius_;
    std::vector<std::size_t> elem_;
    std::vector<std::vector<Entry>> shells_;
};

}  // namespace thermo::grp
