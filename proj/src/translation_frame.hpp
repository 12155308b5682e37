#pragma once

#include <cmath>
#include <optional>

#include "thermo/hypgeom.hpp"

namespace thermo::grp::detail {

// Frame in which a parabolic element acts as z ↦ z + step.
struct TranslationFrame {
    hyp::LineFrame frame;
    double step;
};

inline std::optional<TranslationFrame> translation_frame(const hyp::Isometry& g) {
    if (hyp::analyze_isometry(g).kind != hyp::IsometryKind::parabolic) return std::nullopt;
    hyp::BoundaryPoint xi = std::abs(g.c()) < 1e-15 * std::sqrt(g.frobenius2())
                                ? hyp::BoundaryPoint::infinity()
                                : hyp::BoundaryPoint::real((g.a() - g.d()) / (2.0 * g.c()));
    hyp::BoundaryPoint other =
        xi.is_infinity() ? hyp::BoundaryPoint::real(0.0) : hyp::BoundaryPoint::real(xi.value() + 1.0);
    hyp::LineFrame f(other, xi);
    hyp::Isometry conj = f.to_frame() * g * f.from_frame();
    return TranslationFrame{f, conj.b() / conj.d()};
}

// Euclidean center of a half-plane's boundary geodesic in frame coordinates
// (the foot when it is vertical).
inline double frame_center(const hyp::Isometry& to, const hyp::BoundaryPoint& e1, const hyp::BoundaryPoint& e2) {
    hyp::BoundaryPoint u = to.apply(e1), v = to.apply(e2);
    if (u.is_infinity()) return v.value();
    if (v.is_infinity()) return u.value();
    return 0.5 * (u.value() + v.value());
}

}  // namespace thermo::grp::detail
