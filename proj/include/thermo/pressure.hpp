#pragma once

// Annulus sums and critical exponents of the full group and of the
// elements whose orbit segments avoid a compact set.

#include <limits>
#include <string>
#include <vector>

#include "thermo/group.hpp"
#include "thermo/potential.hpp"

namespace thermo::prs {

using hyp::Isometry;
using hyp::Point;
using grp::GroupElement;
using grp::OrbitDatabase;
using grp::OrbitIndex;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Q_t = Σ e^{f(γ)} over d(o, γo) in (t − c, t], for t = c, 2c, ...
struct AnnulusTable {
    double width = 1.0;
    std::vector<double> t;
    std::vector<double> q;
    std::vector<long> count;
    /// Bins with t <= horizon are complete.
    double horizon = 0.0;
    grp::Truncation truncation;

    bool complete(std::size_t i) const { return t[i] <= horizon + 1e-12; }
};

/// Sums over the database; `f` gives the weight exponent per element (the
/// stored f_int when empty), `mask` restricts to a subset.
AnnulusTable annulus_sums(const OrbitDatabase& db, double c, const std::vector<double>& f = {},
                          const std::vector<char>& mask = {});

struct FitOptions {
    /// Fit only bins with t >= t_min.
    double t_min = 0.0;
    /// Trailing window length; 0 picks the later half of the usable bins.
    double window = 0.0;
    /// Fit log(t^kappa · Q_t) instead of log Q_t.
    double kappa = 0.0;
    std::size_t min_bins = 5;
};

struct ExponentEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    double t_min = 0.0;
    double t_max = 0.0;
    std::string method = "trailing-slope";
    /// log(Σ_{s<=t_max} Q_s) / t_max.
    double cumulative = 0.0;
    std::size_t bins = 0;
    /// −∞ sentinel: every complete bin from `witness` to the horizon is empty.
    bool neg_inf = false;
    double witness = 0.0;
    grp::Truncation truncation;

    double discrepancy() const { return value - cumulative; }
};

ExponentEstimate fit_exponent(const AnnulusTable& tab, const FitOptions& opt = {});

/// Trailing empty run needed before reporting the −∞ sentinel.
inline constexpr std::size_t kSentinelBins = 3;

enum class GammaKMode { strict, relaxed };

const char* to_string(GammaKMode mode);

/// Membership of γ in Γ_{B(o,R)}: strict — no translate g·o other than o and
/// γo lies within R of [o, γo]; relaxed — a translate only counts when its
/// R-ball meets the segment at arclength in (R, d − R).
bool gamma_k_test(const GroupElement& gamma, double R, const OrbitIndex& index, GammaKMode mode,
                  const grp::Presentation* p = nullptr);

struct GammaKReport {
    double R = 0.0;
    GammaKMode mode = GammaKMode::relaxed;
    std::vector<char> members;
    std::size_t count = 0;
    /// Elements beyond this distance were not tested (insufficient horizon).
    double tested_to = 0.0;
};

GammaKReport gamma_k_members(const OrbitDatabase& db, const OrbitIndex& index, double R, GammaKMode mode,
                             const grp::Presentation* p = nullptr);

struct RestrictedResult {
    double R = 0.0;
    ExponentEstimate estimate;
    std::size_t members = 0;
    bool ok = false;
    std::string note;
};

/// Exponent of the Γ_K annulus sums; the sentinel is reported in the
/// estimate, sparse data in `note` with ok = false.
RestrictedResult restricted_exponent(const OrbitDatabase& db, const GammaKReport& gk, double c,
                                     const std::vector<double>& f = {}, const FitOptions& opt = {});

struct InfinityReport {
    std::vector<RestrictedResult> per_R;
    /// Value at the largest R with a successful fit, or −∞.
    double summary = 0.0;
    double summary_stderr = 0.0;
    double summary_R = 0.0;
    bool monotone = true;
    double full = 0.0;
    double full_stderr = 0.0;
    /// δ̂_Γ − summary and its combined uncertainty.
    double gap = 0.0;
    double gap_sigma = 0.0;
    bool spr = false;
};

InfinityReport exponent_at_infinity(const OrbitDatabase& db, const OrbitIndex& index, const std::vector<double>& R_grid,
                                    GammaKMode mode, double c, const std::vector<double>& f = {},
                                    const FitOptions& opt = {}, const grp::Presentation* p = nullptr);

struct SweepRow {
    double lambda = 0.0;
    ExponentEstimate full;
    RestrictedResult restricted;
};

struct SweepReport {
    double R = 0.0;
    std::vector<SweepRow> rows;
    bool restricted_invariant = true;
    bool monotone = true;
    bool convex = true;
    double min_second_difference = 0.0;
    /// δ̂_{Γ_K}(F) ≤ δ̂_Γ(F − A) + tol, when a negative λ is on the grid.
    bool well_ok = true;
    double well_margin = 0.0;

    bool passed() const { return restricted_invariant && monotone && convex && well_ok; }
};

struct SweepTolerances {
    double invariance_sigmas = 2.0;
    double convexity = 0.02;
    double well = 0.03;
};

SweepReport perturbation_sweep(const OrbitDatabase& db, const pot::PotentialSpec& F, const pot::PotentialSpec& A,
                               const std::vector<double>& lambdas, const GammaKReport& gk, double c,
                               const FitOptions& opt = {}, const SweepTolerances& tol = {});

/// f(γ) = ∫_o^{γo} F̃ for every database element.
std::vector<double> orbit_integrals(const OrbitDatabase& db, const pot::Potential& F);

}  // namespace thermo::prs
