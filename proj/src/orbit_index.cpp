#include <algorithm>
#include <cmath>
#include <numbers>

#include "thermo/group.hpp"

namespace thermo::grp {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

OrbitIndex::OrbitIndex(const OrbitDatabase& db, Point anchor) : anchor_(anchor) {
    complete_radius_ = db.truncation().horizon - hyp::dist(hyp::kOrigin, anchor);
    const auto& els = db.elements();
    pts_.reserve(els.size());
    radius_.reserve(els.size());
    elem_.reserve(els.size());
    std::vector<double> theta;
    theta.reserve(els.size());
    for (std::size_t i = 0; i < els.size(); ++i) {
        Point q = els[i].matrix.apply(anchor);
        auto pol = hyp::polar_from_origin(q);
        pts_.push_back(q);
        radius_.push_back(pol.r);
        theta.push_back(pol.theta);
        elem_.push_back(i);
    }
    double rmax = 0.0;
    for (double r : radius_) rmax = std::max(rmax, r);
    shells_.assign(static_cast<std::size_t>(rmax) + 1, {});
    for (std::size_t i = 0; i < pts_.size(); ++i)
        shells_[static_cast<std::size_t>(radius_[i])].push_back({theta[i], static_cast<std::uint32_t>(i)});
    for (auto& s : shells_)
        std::sort(s.begin(), s.end(), [](const Entry& a, const Entry& b) {
            return a.theta != b.theta ? a.theta < b.theta : a.id < b.id;
        });
}

void OrbitIndex::collect(std::size_t shell, double theta, double hw, std::vector<std::size_t>& out) const {
    if (shell >= shells_.size()) return;
    const auto& s = shells_[shell];
    if (hw >= kPi) {
        for (const auto& e : s) out.push_back(e.id);
        return;
    }
    auto scan = [&](double lo, double hi) {
        auto it = std::lower_bound(s.begin(), s.end(), lo, [](const Entry& e, double v) { return e.theta < v; });
        for (; it != s.end() && it->theta <= hi; ++it) out.push_back(it->id);
    };
    double lo = theta - hw, hi = theta + hw;
    if (lo < -kPi) {
        scan(-kPi, hi);
        scan(lo + 2.0 * kPi, kPi);
    } else if (hi > kPi) {
        scan(lo, kPi);
        scan(-kPi, hi - 2.0 * kPi);
    } else {
        scan(lo, hi);
    }
}

std::vector<std::size_t> OrbitIndex::ball(Point x, double rho) const {
    auto pol = hyp::polar_from_origin(x);
    std::vector<std::size_t> cand, out;
    double hw = pol.r <= rho ? kPi : std::asin(std::min(1.0, std::sinh(rho) / std::sinh(pol.r))) + 1e-12;
    double lo = std::max(0.0, pol.r - rho);
    for (auto k = static_cast<std::size_t>(lo); k <= static_cast<std::size_t>(pol.r + rho); ++k)
        collect(k, pol.theta, hw, cand);
    for (std::size_t i : cand)
        if (std::abs(radius_[i] - pol.r) <= rho + 1e-12 && hyp::dist(x, pts_[i]) <= rho) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> OrbitIndex::near_radial_segment(Point q, double rho) const {
    auto pol = hyp::polar_from_origin(q);
    std::vector<std::size_t> cand, out;
    for (std::size_t k = 0; k <= static_cast<std::size_t>(pol.r + rho); ++k) {
        double kk = static_cast<double>(k);
        double hw = kk <= rho ? kPi : std::asin(std::min(1.0, std::sinh(rho) / std::sinh(kk))) + 1e-12;
        collect(k, pol.theta, hw, cand);
    }
    hyp::GeodesicSegment seg{hyp::kOrigin, q};
    for (std::size_t i : cand)
        if (hyp::point_segment_distance(pts_[i], seg) <= rho) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> OrbitIndex::near_segment(Point p, Point q, double rho) const {
    double len = hyp::dist(p, q);
    std::vector<std::size_t> cand, out;
    if (len == 0.0) return ball(p, rho);
    hyp::GeodesicSegment seg{p, q};
    auto n = static_cast<std::size_t>(std::ceil(len));
    double h = len / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        Point m = hyp::geodesic_eval(seg, (static_cast<double>(k) + 0.5) * h);
        auto part = ball(m, rho + 0.5 * h + 1e-9);
        cand.insert(cand.end(), part.begin(), part.end());
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (std::size_t i : cand)
        if (hyp::point_segment_distance(pts_[i], seg) <= rho) out.push_back(i);
    return out;
}

}  // namespace thermo::grp
