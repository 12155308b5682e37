#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "thermo/group.hpp"
#include "translation_frame.hpp"

namespace thermo::grp {

using hyp::BoundaryPoint;
using hyp::HalfPlane;

// ---------------------------------------------------------------- necklaces

namespace {

bool same_class_matrix(const Isometry& g, const Isometry& h) {
    return g.distance_to(h) <= 1e-8 * std::max(1.0, std::sqrt(g.frobenius2()));
}

bool rotation_less(const std::vector<Syllable>& s, std::size_t i, std::size_t j) {
    std::size_t m = s.size();
    for (std::size_t k = 0; k < m; ++k) {
        const auto& x = s[(i + k) % m];
        const auto& y = s[(j + k) % m];
        if (syllable_less(x, y)) return true;
        if (syllable_less(y, x)) return false;
    }
    return false;
}

void check_cyclic(const Word& w) {
    const auto& s = w.syllables();
    if (s.size() >= 2 && s.front().gen == s.back().gen)
        throw Error(ErrorKind::domain, "word is not cyclically reduced at syllable level: " + w.str());
}

}  // namespace

Word canonical_necklace(const Word& w) {
    check_cyclic(w);
    const auto& s = w.syllables();
    if (s.size() <= 1) return w;
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (rotation_less(s, i, best)) best = i;
    std::vector<Syllable> out;
    for (std::size_t k = 0; k < s.size(); ++k) out.push_back(s[(best + k) % s.size()]);
    return Word(out);
}

bool is_proper_power(const Word& w) {
    check_cyclic(w);
    const auto& s = w.syllables();
    if (s.empty()) return false;
    if (s.size() == 1) return std::labs(s[0].power) > 1;
    std::size_t m = s.size();
    for (std::size_t p = 1; p < m; ++p) {
        if (m % p) continue;
        bool periodic = true;
        for (std::size_t k = 0; k + p < m && periodic; ++k) periodic = s[k] == s[k + p];
        if (periodic) return true;
    }
    return false;
}

namespace {

struct NecklaceSearch {
    const Presentation& p;
    double L;
    std::vector<HalfPlane> disks;  // attracting disk by letter code
    std::vector<Isometry> letters;
    std::vector<hyp::LineFrame> para_frame;  // per generator; sends the fixed point to ∞
    std::vector<double> para_step;           // translation of the generator in that frame
    std::vector<bool> parabolic;
    std::vector<ClassRep> out;
    std::size_t non_primitive = 0;

    // state for the current first letter
    std::optional<hyp::LineFrame> first_frame;  // frame of ∂D_{x1}
    int first_side = 0;                          // side of D_{x1} in that frame

    NecklaceSearch(const Presentation& pp, double len) : p(pp), L(len) {
        for (int g = 0; g < p.rank(); ++g) {
            for (bool inv : {false, true}) {
                disks.push_back(p.attracting_disk(g, inv));
                letters.push_back(inv ? p.generators[g].inverse() : p.generators[g]);
            }
            auto tf = detail::translation_frame(p.generators[g]);
            parabolic.push_back(tf.has_value());
            para_frame.push_back(tf ? tf->frame : hyp::LineFrame(BoundaryPoint::real(0.0), BoundaryPoint::infinity()));
            para_step.push_back(tf ? tf->step : 0.0);
        }
    }

    static int code(int gen, long sign) { return 2 * gen + (sign < 0 ? 1 : 0); }

    // Distance from the complement of D_{x1} to M·D_y, assuming M·D_y ⊂ D_{x1}.
    double bound(const Isometry& m, int y) const {
        const auto& d = disks[y];
        Isometry to = first_frame->to_frame() * m;
        BoundaryPoint u = to.apply(d.e1()), v = to.apply(d.e2());
        if (u.is_infinity() || v.is_infinity()) return 0.0;
        double a = u.value(), b = v.value();
        if (a == 0.0 || b == 0.0 || (a > 0.0) != (b > 0.0)) return 0.0;
        if ((a > 0.0 ? 1 : -1) != first_side) return 0.0;
        a = std::abs(a);
        b = std::abs(b);
        if (a > b) std::swap(a, b);
        return std::acosh((a + b) / (b - a));
    }

    // Lower bound on the length of any necklace extending the prefix m whose
    // last syllable uses generator `last`.
    double extension_bound(const Isometry& m, int last) const {
        double best = std::numeric_limits<double>::infinity();
        for (int y = 0; y < static_cast<int>(disks.size()); ++y)
            if (y / 2 != last) best = std::min(best, bound(m, y));
        return best;
    }

    // For a parabolic syllable h^k after prefix `pre`: true once every image
    // pre·h^k·D_y has moved past the center of the geodesic ∂D_{x1}, in the
    // frame where h is a translation, so the bound can only grow with |k|.
    bool past_center(const Isometry& pre, int h, long k) const {
        const auto& f = para_frame[h];
        Isometry back = f.to_frame() * pre.inverse() * first_frame->from_frame();
        // ∂D_{x1} is the imaginary axis in first_frame coordinates
        double xa = detail::frame_center(back, BoundaryPoint::real(0.0), BoundaryPoint::infinity());
        double step = para_step[h] * (k > 0 ? 1.0 : -1.0);
        Isometry hk = f.to_frame() * p.power(h, k);
        for (int y = 0; y < static_cast<int>(disks.size()); ++y) {
            if (y / 2 == h) continue;
            double xc = detail::frame_center(hk, disks[y].e1(), disks[y].e2());
            if ((xc - xa) * step <= 0.0) return false;
        }
        return true;
    }

    void emit(const std::vector<Syllable>& syl, const Isometry& m) {
        auto cls = hyp::analyze_isometry(m);
        if (cls.kind != hyp::IsometryKind::hyperbolic || cls.translation_length > L) return;
        Word w(syl);
        if (!(canonical_necklace(w) == w)) return;
        if (is_proper_power(w)) {
            ++non_primitive;
            return;
        }
        out.push_back({w, m, cls.translation_length, true});
    }

    void extend(const Isometry& m, std::vector<Syllable>& syl) {
        int last = syl.back().gen;
        if (syl.size() >= 2 && last != syl.front().gen) emit(syl, m);
        const Syllable first = syl.front();
        for (int h = 0; h < p.rank(); ++h) {
            if (h == last || h < first.gen) continue;
            for (long s : {1L, -1L}) {
                Isometry prev = m;  // m·h^{s(k-1)}
                for (long k = 1;; ++k) {
                    if (k > 50'000'000)
                        throw Error(ErrorKind::partial_result, "necklace syllable search did not terminate");
                    if (bound(prev, code(h, s)) > L) break;
                    Isometry cur = prev * letters[code(h, s)];
                    Syllable next{h, s * k};
                    bool allowed = !syllable_less(next, first);
                    double b = extension_bound(cur, h);
                    if (parabolic[h] && b > L && past_center(m, h, s * k)) break;
                    if (allowed && b <= L) {
                        syl.push_back(next);
                        extend(cur, syl);
                        syl.pop_back();
                    }
                    prev = cur;
                }
            }
        }
    }

    void run() {
        for (int g = 0; g < p.rank(); ++g) {
            // A lone parabolic syllable is never hyperbolic, and later
            // syllables may only use higher generators.
            if (parabolic[g] && g + 1 == p.rank()) continue;
            for (long s : {1L, -1L}) {
                int x1 = code(g, s);
                first_frame.emplace(disks[x1].e1(), disks[x1].e2());
                first_side = first_frame->side(disks[x1].inside());
                Isometry prev;  // g^{s(k-1)}
                for (long k = 1;; ++k) {
                    if (k > 50'000'000)
                        throw Error(ErrorKind::partial_result, "necklace syllable search did not terminate");
                    if (bound(prev, x1) > L) break;
                    Isometry cur = prev * letters[x1];
                    double b = extension_bound(cur, g);
                    if (!parabolic[g]) {
                        double len = hyp::analyze_isometry(cur).translation_length;
                        if (k == 1 && len <= L) {
                            out.push_back({Word({{g, s}}), cur, len, true});
                        } else if (len <= L) {
                            ++non_primitive;
                        }
                    }
                    if (parabolic[g] && b > L && past_center(Isometry(), g, s * k)) break;
                    if (b <= L) {
                        std::vector<Syllable> syl{{g, s * k}};
                        extend(cur, syl);
                    }
                    prev = cur;
                }
            }
        }
    }
};

void sort_classes(std::vector<ClassRep>& v) {
    std::sort(v.begin(), v.end(), [](const ClassRep& a, const ClassRep& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.word < b.word;
    });
}

// ---------------------------------------------------------------- general groups

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// k-th root of a hyperbolic element along its own axis.
Isometry hyperbolic_root(const Isometry& g, int k) {
    double tr = g.trace();
    double sgn = tr > 0 ? 1.0 : -1.0;
    double half = std::acosh(0.5 * std::abs(tr));  // ℓ/2
    double c1 = std::sinh(half / k) / std::sinh(half), c0 = std::cosh(half / k);
    double ch = std::cosh(half);
    double a = sgn * g.a(), b = sgn * g.b(), c = sgn * g.c(), d = sgn * g.d();
    return Isometry::from_entries(c1 * (a - ch) + c0, c1 * b, c1 * c, c1 * (d - ch) + c0);
}

bool is_power_in_group(const Isometry& g, const OrbitDatabase& db, bool exact_integer) {
    double len = hyp::analyze_isometry(g).translation_length;
    // an integer hyperbolic element has trace >= 3, so ℓ >= 2 acosh(3/2)
    int kmax = exact_integer ? static_cast<int>(len / (2.0 * std::acosh(1.5))) : 64;
    for (int k = 2; k <= kmax; ++k) {
        Isometry h;
        try {
            h = hyperbolic_root(g, k);
        } catch (const Error&) {
            continue;
        }
        if (exact_integer) {
            bool integral = true;
            for (double v : {h.a(), h.b(), h.c(), h.d()})
                if (std::abs(v - std::round(v)) > 1e-6) integral = false;
            if (!integral) continue;
            long a = std::lround(h.a()), b = std::lround(h.b()), c = std::lround(h.c()), d = std::lround(h.d());
            if (a * d - b * c == 1) return true;
        } else if (db.find(h)) {
            return true;
        }
    }
    return false;
}

ClassCensus general_classes(const Presentation& p, const OrbitDatabase& db, double L) {
    const auto& els = db.elements();
    std::vector<std::size_t> cand;
    std::vector<double> len;
    for (std::size_t i = 0; i < els.size(); ++i) {
        auto cls = hyp::analyze_isometry(els[i].matrix);
        if (cls.kind == hyp::IsometryKind::hyperbolic && cls.translation_length <= L) {
            cand.push_back(i);
            len.push_back(cls.translation_length);
        }
    }
    std::map<std::size_t, std::size_t> slot;  // db index -> candidate slot
    for (std::size_t k = 0; k < cand.size(); ++k) slot[cand[k]] = k;

    // bucket by |trace|
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), 0);
    auto abs_tr = [&](std::size_t k) { return std::abs(els[cand[k]].matrix.trace()); };
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        double tx = abs_tr(x), ty = abs_tr(y);
        return tx != ty ? tx < ty : x < y;
    });
    std::vector<std::vector<std::size_t>> buckets;
    for (std::size_t k : order) {
        if (buckets.empty() || abs_tr(k) - abs_tr(buckets.back().front()) > 1e-9 * abs_tr(k))
            buckets.emplace_back();
        buckets.back().push_back(k);
    }

    UnionFind uf(cand.size());
    std::vector<Isometry> conj;
    for (const auto& g : p.generators) conj.push_back(g);
    for (std::size_t k = 0; k < cand.size(); ++k) {
        const Isometry& g = els[cand[k]].matrix;
        for (const auto& s : conj)
            for (const Isometry& h : {s * g * s.inverse(), s.inverse() * g * s}) {
                auto j = db.find(h);
                if (!j) continue;
                auto it = slot.find(*j);
                if (it != slot.end()) uf.unite(k, it->second);
            }
    }

    ClassCensus census;
    census.max_len = L;
    bool modular = p.name == "modular_group";
    // short conjugators for the explicit search between leftover components
    std::size_t nconj = 0;
    while (nconj < els.size() && els[nconj].d_o <= 4.0) ++nconj;

    for (const auto& bucket : buckets) {
        std::map<std::size_t, std::vector<std::size_t>> comps;
        for (std::size_t k : bucket) comps[uf.find(k)].push_back(k);
        std::vector<std::size_t> roots;
        for (const auto& [r, m] : comps) roots.push_back(r);
        if (roots.size() > 1) {
            if (modular) {
                std::map<std::array<std::int64_t, 3>, std::size_t> by_inv;
                for (std::size_t r : roots) {
                    auto inv = modular_class_invariant(els[cand[r]].matrix);
                    auto [it, fresh] = by_inv.emplace(inv, r);
                    if (!fresh) uf.unite(r, it->second);
                }
            } else {
                for (std::size_t i = 0; i < roots.size(); ++i)
                    for (std::size_t j = i + 1; j < roots.size(); ++j) {
                        if (uf.find(roots[i]) == uf.find(roots[j])) continue;
                        const Isometry& gi = els[cand[roots[i]]].matrix;
                        const Isometry& gj = els[cand[roots[j]]].matrix;
                        for (std::size_t w = 1; w < nconj; ++w) {
                            const Isometry& h = els[w].matrix;
                            if (same_class_matrix(h * gi * h.inverse(), gj)) {
                                uf.unite(roots[i], roots[j]);
                                break;
                            }
                        }
                    }
            }
            comps.clear();
            for (std::size_t k : bucket) comps[uf.find(k)].push_back(k);
        }
        bool ambiguous = !modular && comps.size() > 1;
        for (const auto& [r, members] : comps) {
            std::size_t best = members.front();
            for (std::size_t k : members)
                if (cand[k] < cand[best]) best = k;  // db order is (d_o, word)
            const auto& e = els[cand[best]];
            if (ambiguous) {
                ++census.unresolved;
                continue;
            }
            if (is_power_in_group(e.matrix, db, p.exact_integer)) {
                ++census.non_primitive;
                continue;
            }
            census.classes.push_back({e.word, e.matrix, len[best], true});
        }
    }
    sort_classes(census.classes);
    return census;
}

}  // namespace

ClassCensus conjugacy_classes(const Presentation& p, const OrbitDatabase& db, double max_len) {
    if (!(max_len > 0.0)) throw Error(ErrorKind::domain, "max_len must be positive");
    if (p.kind == PresentationKind::free_schottky) {
        // The length bound is sharp only when the leading syllable is
        // hyperbolic, so the search runs with parabolic generators last and
        // the words are mapped back afterwards.
        std::vector<int> order(p.rank());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return !detail::translation_frame(p.generators[a]) && detail::translation_frame(p.generators[b]);
        });
        Presentation q = p;
        for (int i = 0; i < p.rank(); ++i) {
            q.generators[i] = p.generators[order[i]];
            q.generator_names[i] = p.generator_names[order[i]];
            q.schottky_disks[i] = p.schottky_disks[order[i]];
        }
        NecklaceSearch search(q, max_len);
        search.run();
        ClassCensus c;
        c.classes = std::move(search.out);
        for (auto& r : c.classes) {
            std::vector<Syllable> syl = r.word.syllables();
            for (auto& x : syl) x.gen = order[x.gen];
            Word w = canonical_necklace(Word(syl));
            if (!(w == Word(syl))) r.matrix = p.evaluate(w);
            r.word = w;
        }
        c.non_primitive = search.non_primitive;
        c.max_len = max_len;
        sort_classes(c.classes);
        return c;
    }
    return general_classes(p, db, max_len);
}

// ---------------------------------------------------------------- PSL(2, Z)

namespace {

std::int64_t isqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

std::array<std::int64_t, 3> modular_class_invariant(const Isometry& g) {
    std::int64_t a = std::llround(g.a()), b = std::llround(g.b()), c = std::llround(g.c()),
                 d = std::llround(g.d());
    if (a * d - b * c != 1) throw Error(ErrorKind::domain, "not an integer unimodular matrix");
    if (a + d < 0) a = -a, b = -b, c = -c, d = -d;
    std::int64_t t = a + d;
    if (t <= 2) throw Error(ErrorKind::domain, "modular_class_invariant needs a hyperbolic element");
    std::int64_t D = t * t - 4;
    std::int64_t s = isqrt(D);
    // attracting fixed point (a - d + sqrt D) / (2c)
    std::int64_t P = a - d, Q = 2 * c;
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> seen;
    std::vector<std::pair<std::int64_t, std::int64_t>> states;
    while (true) {
        auto key = std::make_pair(P, Q);
        auto it = seen.find(key);
        if (it != seen.end()) {
            auto lo = std::min_element(states.begin() + static_cast<std::ptrdiff_t>(it->second), states.end());
            return {t, lo->first, lo->second};
        }
        seen.emplace(key, states.size());
        states.push_back(key);
        // minus continued fraction step: n = ceil(x), x -> 1 / (n - x)
        std::int64_t fl = Q > 0 ? floor_div(P + s, Q) : floor_div(-P - s - 1, -Q);
        std::int64_t n = fl + 1;
        std::int64_t P1 = n * Q - P;
        std::int64_t Q1 = (P1 * P1 - D) / Q;
        P = P1;
        Q = Q1;
    }
}

}  // namespace thermo::grp
