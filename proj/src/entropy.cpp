#include "thermo/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "thermo/error.hpp"

namespace thermo::ent {

SampledMeasure closed_orbit_measure(const Isometry& g, std::size_t n) {
    auto cls = hyp::analyze_isometry(g);
    if (cls.kind != hyp::IsometryKind::hyperbolic) throw Error(ErrorKind::domain, "closed orbit needs a hyperbolic element");
    if (n == 0) throw Error(ErrorKind::config, "need at least one sample");
    auto frame = hyp::LineFrame::of(*cls.axis);
    auto forward = std::get<BoundaryPoint>(cls.axis->end);
    double s0 = frame.foot(hyp::kOrigin);
    SampledMeasure mu;
    mu.provenance = "closed-orbit uniform";
    for (std::size_t k = 0; k < n; ++k) {
        double s = s0 + cls.translation_length * static_cast<double>(k) / static_cast<double>(n);
        mu.samples.push_back({frame.at(s), forward, 1.0 / static_cast<double>(n), 0});
    }
    return mu;
}

SampledMeasure ps_derived_measure(const ps::AtomicBoundaryMeasure& m, std::size_t n, std::uint64_t seed) {
    std::vector<double> w;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < m.atoms().size(); ++i) {
        if (m.atoms()[i].at_base) continue;
        w.push_back(m.atoms()[i].weight);
        which.push_back(i);
    }
    if (w.empty() || n == 0) throw Error(ErrorKind::insufficient_data, "no directed atoms to sample");
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    SampledMeasure mu;
    mu.provenance = "atomic-PS-derived";
    mu.diagnostic_only = true;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = m.atoms()[which[pick(rng)]];
        mu.samples.push_back({hyp::kOrigin, BoundaryPoint::from_angle(a.angle), 1.0 / static_cast<double>(n), a.source});
    }
    return mu;
}

TangentSample flow(const TangentSample& v, double t) {
    TangentSample out = v;
    out.base = hyp::geodesic_eval(hyp::GeodesicSegment{v.base, v.forward}, t);
    return out;
}

TranslateCache::TranslateCache(const grp::OrbitDatabase& db) : db_(&db), index_(db) {}

std::pair<Isometry, Point> TranslateCache::reduce(Point x) const {
    double bound = hyp::dist(x, hyp::kOrigin);
    for (double r = 1.0;; r *= 2.0) {
        double rho = std::min(r, bound + 1e-9);
        if (bound + rho > index_.complete_radius())
            throw Error(ErrorKind::horizon, "trajectory left the cached translates");
        std::size_t best = index_.size();
        double bd = rho;
        for (std::size_t i : index_.ball(x, rho)) {
            double d = hyp::dist(x, index_.point(i));
            if (d <= bd) {
                bd = d;
                best = i;
            }
        }
        if (best < index_.size()) {
            const auto& h = db_->elements()[index_.element(best)].matrix;
            return {h, h.inverse().apply(x)};
        }
        if (rho >= bound) return {Isometry{}, x};
    }
}

double TranslateCache::distance(Point x, Point y, double cap) const {
    double best = std::min(cap, hyp::dist(x, y));
    double reach = best + hyp::dist(hyp::kOrigin, y);
    if (hyp::dist(hyp::kOrigin, x) + reach > index_.complete_radius())
        throw Error(ErrorKind::horizon, "quotient distance needs translates beyond the database");
    for (std::size_t i : index_.ball(x, reach)) {
        const auto& h = db_->elements()[index_.element(i)].matrix;
        best = std::min(best, hyp::dist(x, h.apply(y)));
    }
    return best;
}

Trajectory trajectory(const TangentSample& v, double T, double step, const TranslateCache& cache,
                      const pot::Potential* F) {
    if (!(step > 0.0) || !(T >= 0.0)) throw Error(ErrorKind::domain, "trajectory needs step > 0 and T >= 0");
    auto n = static_cast<std::size_t>(std::llround(T / step));
    Trajectory tr;
    tr.step = step;
    auto [h0, x] = cache.reduce(v.base);
    BoundaryPoint xi = h0.inverse().apply(v.forward);
    double acc = 0.0;
    tr.points.push_back(x);
    tr.integral.push_back(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        Point next = hyp::geodesic_eval(hyp::GeodesicSegment{x, xi}, step);
        if (F && !F->is_zero()) acc += F->segment_integral(x, next);
        auto [h, y] = cache.reduce(next);
        xi = h.inverse().apply(xi);
        x = y;
        tr.points.push_back(x);
        tr.integral.push_back(acc);
    }
    return tr;
}

double quotient_orbit_distance(const TangentSample& v, const TangentSample& w, double T, double step,
                               const TranslateCache& cache, double cap) {
    auto a = trajectory(v, T, step, cache);
    auto b = trajectory(w, T, step, cache);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.points.size() && worst < cap; ++k)
        worst = std::max(worst, cache.distance(a.points[k], b.points[k], cap));
    return worst;
}

DynamicalDistances::DynamicalDistances(const SampledMeasure& mu, const std::vector<double>& T_grid, double step,
                                       const TranslateCache& cache, const pot::Potential* F, double cap)
    : T_(T_grid), n_(mu.samples.size()), cap_(cap) {
    if (T_grid.empty() || !std::is_sorted(T_grid.begin(), T_grid.end()) || T_grid.front() < 0.0)
        throw Error(ErrorKind::config, "T grid must be nonempty, nonnegative and increasing");
    std::vector<Trajectory> tr;
    tr.reserve(n_);
    for (const auto& v : mu.samples) tr.push_back(trajectory(v, T_grid.back(), step, cache, F));
    std::vector<std::size_t> last;
    for (double T : T_grid) last.push_back(static_cast<std::size_t>(std::llround(T / step)));
    integral_.resize(T_grid.size() * n_);
    for (std::size_t t = 0; t < T_grid.size(); ++t)
        for (std::size_t i = 0; i < n_; ++i) integral_[t * n_ + i] = tr[i].integral[last[t]];
    d_.assign(T_grid.size() * n_ * n_, 0.0f);
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            double worst = 0.0;
            std::size_t k = 0;
            for (std::size_t t = 0; t < T_grid.size(); ++t) {
                for (; k <= last[t] && worst < cap; ++k)
                    worst = std::max(worst, cache.distance(tr[i].points[k], tr[j].points[k], cap));
                auto v = static_cast<float>(std::min(worst, cap));
                d_[(t * n_ + i) * n_ + j] = v;
                d_[(t * n_ + j) * n_ + i] = v;
            }
        }
    }
}

double DynamicalDistances::at(std::size_t t_index, std::size_t i, std::size_t j) const {
    return d_[(t_index * n_ + i) * n_ + j];
}

SpanningResult spanning_weight(const SampledMeasure& mu, const DynamicalDistances& dist, std::size_t t_index,
                               double delta, double eps) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::domain, "spanning_weight needs 0 < δ < 1");
    if (!(eps > 0.0) || eps >= dist.cap()) throw Error(ErrorKind::domain, "ε must be positive and below the distance cap");
    std::size_t n = mu.samples.size();
    if (dist.size() != n) throw Error(ErrorKind::config, "distance table does not match the measure");
    double total = 0.0;
    for (const auto& s : mu.samples) total += s.weight;
    if (total * (1.0 + 1e-12) < delta)
        throw Error(ErrorKind::insufficient_data, "δ unreachable: samples carry mass " + std::to_string(total));
    std::vector<char> covered(n, 0);
    SpanningResult res;
    while (res.covered_mass < delta * (1.0 - 1e-12)) {
        std::size_t best = n;
        double best_gain = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double gain = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (!covered[j] && (i == j || dist.at(t_index, i, j) <= eps)) gain += mu.samples[j].weight;
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (best == n) break;
        for (std::size_t j = 0; j < n; ++j)
            if (!covered[j] && (best == j || dist.at(t_index, best, j) <= eps)) {
                covered[j] = 1;
                res.covered_mass += mu.samples[j].weight;
            }
        res.centers.push_back(best);
        res.weight += std::exp(dist.integral(t_index, best));
    }
    res.count = res.centers.size();
    return res;
}

KatokEstimate katok_estimate(const SampledMeasure& mu, const DynamicalDistances& dist, double delta, double eps,
                             bool weighted) {
    const auto& Tg = dist.T_grid();
    if (Tg.size() < 4) throw Error(ErrorKind::insufficient_data, "Katok estimate needs at least 4 times");
    KatokEstimate out;
    out.weighted = weighted;
    out.diagnostic_only = mu.diagnostic_only;
    for (std::size_t t = 0; t < Tg.size(); ++t) {
        auto s = spanning_weight(mu, dist, t, delta, eps);
        out.T.push_back(Tg[t]);
        out.log_weight.push_back(std::log(weighted ? s.weight : static_cast<double>(s.count)));
    }
    auto n = static_cast<double>(Tg.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < Tg.size(); ++i) {
        mx += out.T[i];
        my += out.log_weight[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < Tg.size(); ++i) {
        sxx += (out.T[i] - mx) * (out.T[i] - mx);
        sxy += (out.T[i] - mx) * (out.log_weight[i] - my);
    }
    if (!(sxx > 0.0)) throw Error(ErrorKind::insufficient_data, "Katok estimate needs distinct times");
    double slope = sxy / sxx, rss = 0.0;
    for (std::size_t i = 0; i < Tg.size(); ++i) {
        double r = out.log_weight[i] - my - slope * (out.T[i] - mx);
        rss += r * r;
    }
    auto& e = out.estimate;
    e.value = slope;
    e.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
    e.t_min = Tg.front();
    e.t_max = Tg.back();
    e.method = weighted ? "katok-pressure" : "katok-entropy";
    e.bins = Tg.size();
    e.cumulative = Tg.back() > 0.0 ? out.log_weight.back() / Tg.back() : 0.0;
    return out;
}

}  // namespace thermo::ent
