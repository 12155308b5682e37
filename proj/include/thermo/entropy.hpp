#pragma once

// Dynamical distances on the unit tangent bundle of the quotient, greedy
// spanning sets and Katok entropy / pressure estimates.

#include <cstdint>
#include <string>
#include <vector>

#include "thermo/group.hpp"
#include "thermo/potential.hpp"
#include "thermo/pressure.hpp"
#include "thermo/psmeasure.hpp"

namespace thermo::ent {

using hyp::BoundaryPoint;
using hyp::Isometry;
using hyp::Point;

/// Unit tangent vector: base point and the forward endpoint of its geodesic.
struct TangentSample {
    Point base;
    BoundaryPoint forward;
    double weight = 0.0;
    /// Element whose axis or orbit point defined the sample.
    std::size_t context = 0;
};

struct SampledMeasure {
    std::vector<TangentSample> samples;
    /// "closed-orbit uniform" or "atomic-PS-derived".
    std::string provenance;
    /// Set for measures without a trustworthy finite-sample estimate.
    bool diagnostic_only = false;
};

/// n equally spaced samples over one period of the axis of g, starting at
/// the foot of o.
SampledMeasure closed_orbit_measure(const Isometry& g, std::size_t n);
/// n samples at o pointing to atoms of m drawn with probability equal to
/// their weight; equal sample weights.
SampledMeasure ps_derived_measure(const ps::AtomicBoundaryMeasure& m, std::size_t n, std::uint64_t seed);

/// g^t v.
TangentSample flow(const TangentSample& v, double t);

/// Base points of a trajectory at t = k·step, each moved back near o by a
/// database element, for distance queries in the quotient.
struct Trajectory {
    double step = 0.0;
    std::vector<Point> points;
    /// ∫_0^{t_k} F along the trajectory (zeros without a potential).
    std::vector<double> integral;
};

class TranslateCache {
public:
    explicit TranslateCache(const grp::OrbitDatabase& db);

    const grp::OrbitIndex& index() const { return index_; }
    /// Element h with h·o nearest to x, and h^{-1}·x.
    std::pair<Isometry, Point> reduce(Point x) const;
    /// min over cached h of d(x, h·y), capped at `cap` (x, y near o).
    double distance(Point x, Point y, double cap) const;

private:
    const grp::OrbitDatabase* db_;
    grp::OrbitIndex index_;
};

Trajectory trajectory(const TangentSample& v, double T, double step, const TranslateCache& cache,
                      const pot::Potential* F = nullptr);

/// max over sampled t in [0, T] of the quotient distance between g^t v and
/// g^t w; values above `cap` are reported as `cap`.
double quotient_orbit_distance(const TangentSample& v, const TangentSample& w, double T, double step,
                               const TranslateCache& cache, double cap = 4.0);

struct SpanningResult {
    std::size_t count = 0;
    double covered_mass = 0.0;
    /// Σ over chosen centers of e^{∫_0^T F(g^t v)} (equals count when F is absent).
    double weight = 0.0;
    std::vector<std::size_t> centers;
};

/// Pairwise dynamical distances of a sampled measure for every T of a grid,
/// from one set of trajectories. Distances above `cap` are stored as `cap`.
class DynamicalDistances {
public:
    DynamicalDistances(const SampledMeasure& mu, const std::vector<double>& T_grid, double step,
                       const TranslateCache& cache, const pot::Potential* F = nullptr, double cap = 4.0);

    const std::vector<double>& T_grid() const { return T_; }
    std::size_t size() const { return n_; }
    double cap() const { return cap_; }
    double at(std::size_t t_index, std::size_t i, std::size_t j) const;
    /// ∫_0^T F(g^t v_i) for the grid time T.
    double integral(std::size_t t_index, std::size_t i) const { return integral_[t_index * n_ + i]; }

private:
    std::vector<double> T_;
    std::size_t n_ = 0;
    double cap_ = 0.0;
    std::vector<float> d_;
    std::vector<double> integral_;
};

/// Greedy cover by (ε, T)-balls until the covered mass reaches δ.
SpanningResult spanning_weight(const SampledMeasure& mu, const DynamicalDistances& dist, std::size_t t_index,
                               double delta, double eps);

struct KatokEstimate {
    prs::ExponentEstimate estimate;
    std::vector<double> T;
    std::vector<double> log_weight;
    /// "[0,T]": log S / T slope over the forward window.
    std::string normalization = "[0,T]";
    bool weighted = false;
    bool diagnostic_only = false;
};

/// Slope of log(spanning weight) against T over the grid (>= 4 points).
KatokEstimate katok_estimate(const SampledMeasure& mu, const DynamicalDistances& dist, double delta, double eps,
                             bool weighted = false);

}  // namespace thermo::ent
