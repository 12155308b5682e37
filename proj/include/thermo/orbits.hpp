#pragma once

// Closed geodesics: lengths, period integrals, time spent in K = B(o, R)
// modulo Γ, return counts, and Gurevič-type growth rates.

#include <vector>

#include "thermo/group.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"

namespace thermo::orb {

using grp::ClassRep;
using hyp::Isometry;
using hyp::Point;
using prs::ExponentEstimate;

struct PeriodicOrbit {
    /// Representative whose axis passes closest to o among the cyclic
    /// rotations of its word.
    ClassRep rep;
    double length = 0.0;
    double axis_distance = 0.0;
    double period_f = 0.0;
    /// Indexed like OrbitCensus::R_grid.
    std::vector<double> time_in_K;
    std::vector<long> nK;
};

struct OrbitCensus {
    std::vector<PeriodicOrbit> orbits;  // sorted by (length, word)
    std::vector<double> R_grid;
    double max_len = 0.0;
    std::size_t unresolved = 0;
    std::size_t non_primitive = 0;
    /// Linear bound n_K(p) <= C_R ℓ(p), per R.
    std::vector<double> C_R;
    std::vector<bool> nK_bound_ok;
    /// Radius about o that the time and count queries required.
    double required_radius = 0.0;
    double shortest = 0.0;
};

/// Cyclic rotation of g's word (as a conjugate of `rep`) minimizing the
/// distance from o to the axis.
ClassRep recenter(const grp::Presentation& p, const ClassRep& rep);

/// Measure of {t in one period : d_M(axis point) <= R}, as the union of the
/// chords of the balls B(g·o, R) over a period window centered at the foot
/// of o.
double time_in_compact(const Isometry& g, double R, const grp::OrbitIndex& index);
/// Number of lifts of the closed geodesic of g whose axis meets B(o, R).
long return_count_nK(const Isometry& g, double R, const grp::OrbitIndex& index);
/// Bound constant C_R = N(2R + 1) (1 + 1/ℓ_min) with N(ρ) the number of
/// orbit points in B(o, ρ).
double nK_constant(double R, const grp::OrbitIndex& index, double shortest);

OrbitCensus build_periodic_orbits(const grp::Presentation& p, const grp::OrbitDatabase& db, const grp::OrbitIndex& index,
                                  double max_len, const std::vector<double>& R_grid, const pot::Potential* F = nullptr);

/// Recomputes period integrals for another potential.
void fill_period_integrals(OrbitCensus& census, const pot::Potential& F);

/// Per-bin sums Σ e^{∫_p F} over orbits meeting K (time_in_K > 0), with
/// length in (T − c, T]; the filtered variant keeps time_in_K < α ℓ.
struct GurevicTable {
    double width = 1.0;
    double R = 0.0;
    double alpha = 1.0;
    std::vector<double> t;
    std::vector<double> all;
    std::vector<double> filtered;
    std::vector<long> count_all;
    std::vector<long> count_filtered;
    double horizon = 0.0;
};

GurevicTable gurevic_table(const OrbitCensus& census, std::size_t R_index, double c, double alpha = 1.0);

/// The orbit count has a 1/T prefactor; fits use log(T · Q_T) by default.
inline constexpr double kGurevicKappa = 1.0;

ExponentEstimate gurevic_pressure(const OrbitCensus& census, std::size_t R_index, double c,
                                  const prs::FitOptions& opt = {.kappa = kGurevicKappa});
ExponentEstimate gurevic_pressure_at_infinity(const OrbitCensus& census, std::size_t R_index, double alpha, double c,
                                              const prs::FitOptions& opt = {.kappa = kGurevicKappa});

struct ExcursionCheck {
    double R_inner = 0.0;
    double R_outer = 0.0;
    double alpha = 0.0;
    ExponentEstimate growth;
    double bound = 0.0;
    double margin = 0.0;
    bool passed = false;
    /// Nested comparison: per bin, the (K, α) filtered sum is at most
    /// C''·T times the (K', 2α) filtered sum; worst observed ratio / T.
    double nested_ratio = 0.0;
    std::size_t orbits_used = 0;
};

/// Growth of Σ n_K(p) e^{∫_p F} over orbits meeting K = B(o, R_inner) with
/// time in B(o, R_outer) at most α ℓ(p), against (1 − α) δ_K + α δ + slack.
/// R indices refer to census.R_grid. The n_K weight offsets the 1/T of the
/// orbit count, so the default fit is on log Q_T.
ExcursionCheck weighted_excursion_sum(const OrbitCensus& census, std::size_t inner, std::size_t outer, double alpha,
                                      double delta_K, double delta, double slack, double c,
                                      const prs::FitOptions& opt = {});

}  // namespace thermo::orb
