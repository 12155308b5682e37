#pragma once

// Atomic approximations of Patterson–Sullivan–Gibbs densities: shadow
// ratios, the Gibbs cocycle, and the mass of boundary sets whose rays avoid
// the translates of a ball for a long time.

#include <string>
#include <vector>

#include "thermo/group.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"

namespace thermo::ps {

using hyp::BoundaryPoint;
using hyp::Point;

struct Atom {
    double angle = 0.0;
    double weight = 0.0;
    std::size_t source = 0;
    /// γo = o: no direction; kept for the total mass, ignored by arcs.
    bool at_base = false;
};

/// Σ e^{−s d(o,γo) + f(γ)} δ_{γo} / Z with h ≡ 1, atoms sorted by angle.
class AtomicBoundaryMeasure {
public:
    AtomicBoundaryMeasure() = default;
    AtomicBoundaryMeasure(std::vector<Atom> atoms, double s, double log_normalizer);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double s() const { return s_; }
    /// log Z, the log of the unnormalized total weight.
    double log_normalizer() const { return log_z_; }
    double total() const;

    /// Mass of the directed atoms with angle in the arc [lo, hi] (radians,
    /// any real numbers, hi − lo < 2π), and their number.
    double arc_mass(double lo, double hi, std::size_t* count = nullptr) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> prefix_;
    double s_ = 0.0;
    double log_z_ = 0.0;
};

/// `f` gives f(γ) per element (db f_int when empty).
AtomicBoundaryMeasure build_ps_measure(const grp::OrbitDatabase& db, double s, const std::vector<double>& f = {});

struct ShadowRow {
    std::size_t source = 0;
    double d_o = 0.0;
    double f = 0.0;
    double arc_mass = 0.0;
    std::size_t arc_atoms = 0;
    double ratio = 0.0;
    bool empty = false;
};

struct ShadowReport {
    double R = 0.0;
    std::vector<ShadowRow> rows;
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    /// Least-squares slope of log r against d_o over rows with mass.
    double slope = 0.0;
    double slope_stderr = 0.0;
    std::size_t flagged = 0;
};

/// r(γ) = m(direction(γo) ± shadow_halfangle(d_o, R)) / (e^{−s d_o + f} / Z).
ShadowReport shadow_mass_check(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                               const std::vector<std::size_t>& gammas, double R, const std::vector<double>& f = {});

struct CocycleValue {
    double value = 0.0;
    /// Bound on |value − limit|; decreasing in Z.
    double tail_bound = 0.0;
};

/// ρ_ξ^F(x, y) ≈ ∫_x^z F̃ − ∫_y^z F̃, z on [x, ξ) at distance Z from x.
CocycleValue gibbs_cocycle(const BoundaryPoint& xi, Point x, Point y, const pot::Potential& F, double Z = 20.0);

struct DecayRow {
    double T = 0.0;
    /// Atoms with d_o >= T + R whose segment avoids every ball g·B(o,R)
    /// (g·o ≠ o) on arclength (T0, T].
    double mass = 0.0;
    /// Mass of all atoms with d_o >= T + R.
    double eligible = 0.0;
    std::size_t atoms = 0;
    double fraction() const { return eligible > 0.0 ? mass / eligible : 0.0; }
};

struct DecayReport {
    double R = 0.0;
    double T0 = 0.0;
    std::vector<DecayRow> rows;
    /// Fitted rate: −slope of log fraction against T.
    double alpha = 0.0;
    double alpha_stderr = 0.0;
    std::size_t fit_points = 0;
    /// The avoiding mass vanished; witness is the first T with mass 0.
    bool vanishes = false;
    double witness = 0.0;
    std::string verdict;
};

DecayReport u_set_mass_decay(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                             const grp::OrbitIndex& index, double R, double T0, const std::vector<double>& T_grid);

struct EquivarianceReport {
    std::size_t generator = 0;
    std::size_t arcs_checked = 0;
    double max_relative_error = 0.0;
};

/// Pushes the atoms of m with d(o, γo) >= d_cut by a generator g (as
/// boundary directions) and reweights by e^{−s β_η(o, go) + ρ_η(o, go)};
/// compares with the atoms at distance >= d_cut from go on `arcs` equal
/// arcs, checking those with at least `min_atoms` atoms.
EquivarianceReport equivariance_check(const AtomicBoundaryMeasure& m, const grp::OrbitDatabase& db,
                                      const grp::Presentation& p, std::size_t generator, const pot::Potential& F,
                                      double d_cut = 8.0, std::size_t arcs = 64, std::size_t min_atoms = 50);

}  // namespace thermo::ps
