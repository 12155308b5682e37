#include "thermo/group.hpp"
#include "translation_frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace thermo::grp {

using hyp::BoundaryPoint;
using hyp::HalfPlane;

// ---------------------------------------------------------------- words

bool syllable_less(const Syllable& a, const Syllable& b) {
    if (a.gen != b.gen) return a.gen < b.gen;
    return a.power < b.power;
}

Word::Word(std::vector<Syllable> syl) {
    for (const auto& s : syl) append(s.gen, s.power);
}

long Word::letter_length() const {
    long n = 0;
    for (const auto& s : syl_) n += std::labs(s.power);
    return n;
}

void Word::append(int gen, long power) {
    if (power == 0) return;
    if (!syl_.empty() && syl_.back().gen == gen) {
        syl_.back().power += power;
        if (syl_.back().power == 0) syl_.pop_back();
        return;
    }
    syl_.push_back({gen, power});
}

void Word::append(const Word& w) {
    for (const auto& s : w.syl_) append(s.gen, s.power);
}

void Word::pop_letter() {
    if (syl_.empty()) throw Error(ErrorKind::domain, "pop_letter on empty word");
    auto& b = syl_.back();
    b.power += b.power > 0 ? -1 : 1;
    if (b.power == 0) syl_.pop_back();
}

Word Word::inverse() const {
    Word w;
    for (auto it = syl_.rbegin(); it != syl_.rend(); ++it) w.syl_.push_back({it->gen, -it->power});
    return w;
}

std::vector<std::pair<int, bool>> Word::letters() const {
    std::vector<std::pair<int, bool>> out;
    for (const auto& s : syl_)
        for (long i = 0; i < std::labs(s.power); ++i) out.emplace_back(s.gen, s.power < 0);
    return out;
}

std::string Word::str() const {
    if (syl_.empty()) return "1";
    std::string out;
    for (const auto& s : syl_) {
        char c = static_cast<char>((s.power > 0 ? 'a' : 'A') + s.gen);
        out += c;
        if (std::labs(s.power) > 1) out += "^" + std::to_string(std::labs(s.power));
    }
    return out;
}

Word Word::parse(const std::string& s) {
    Word w;
    if (s == "1" || s.empty()) return w;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i++];
        int gen;
        long sign;
        if (c >= 'a' && c <= 'z') {
            gen = c - 'a';
            sign = 1;
        } else if (c >= 'A' && c <= 'Z') {
            gen = c - 'A';
            sign = -1;
        } else {
            throw Error(ErrorKind::io, "bad word '" + s + "'");
        }
        long p = 1;
        if (i < s.size() && s[i] == '^') {
            std::size_t j = ++i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (i == j) throw Error(ErrorKind::io, "bad word '" + s + "'");
            p = std::stol(s.substr(j, i - j));
        }
        w.append(gen, sign * p);
    }
    return w;
}

namespace {

// Letter codes 2*gen + inverse, ordered a < A < b < B.
int letter_code(int gen, bool inverse) { return 2 * gen + (inverse ? 1 : 0); }

}  // namespace

bool operator<(const Word& a, const Word& b) {
    long la = a.letter_length(), lb = b.letter_length();
    if (la != lb) return la < lb;
    std::size_t i = 0, j = 0;
    long ui = 0, uj = 0;  // letters consumed within the current syllables
    while (i < a.syl_.size() && j < b.syl_.size()) {
        const auto& x = a.syl_[i];
        const auto& y = b.syl_[j];
        int cx = letter_code(x.gen, x.power < 0), cy = letter_code(y.gen, y.power < 0);
        if (cx != cy) return cx < cy;
        long rx = std::labs(x.power) - ui, ry = std::labs(y.power) - uj;
        long step = std::min(rx, ry);
        ui += step;
        uj += step;
        if (ui == std::labs(x.power)) ++i, ui = 0;
        if (uj == std::labs(y.power)) ++j, uj = 0;
    }
    return false;
}

// ---------------------------------------------------------------- presentations

Isometry Presentation::power(int gen, long p) const {
    Isometry base = p < 0 ? generators.at(gen).inverse() : generators.at(gen);
    unsigned long n = static_cast<unsigned long>(std::labs(p));
    Isometry out;
    while (n) {
        if (n & 1) out = out * base;
        n >>= 1;
        if (n) base = base * base;
    }
    return out;
}

Isometry Presentation::evaluate(const Word& w) const {
    Isometry out;
    for (const auto& s : w.syllables()) out = out * power(s.gen, s.power);
    return out;
}

const HalfPlane& Presentation::attracting_disk(int gen, bool inverse) const {
    if (schottky_disks.empty()) throw Error(ErrorKind::config, "presentation has no Schottky disks");
    const auto& d = schottky_disks.at(gen);
    return inverse ? d.source : d.target;
}

Presentation schottky_pair(double ell) {
    if (!(ell / 2.0 > std::asinh(1.0)))
        throw Error(ErrorKind::config, "schottky_pair needs translation length > 2 asinh(1)");
    Presentation p;
    p.name = "schottky_pair";
    p.kind = PresentationKind::free_schottky;
    p.generator_names = {"a", "b"};
    double e = std::exp(0.5 * ell);
    Isometry a = Isometry::from_entries(e, 0.0, 0.0, 1.0 / e);
    Isometry r = hyp::rotation_about_origin(0.5 * std::numbers::pi);
    Isometry b = r * a * r.inverse();
    p.generators = {a, b};
    SchottkyPairing da{HalfPlane::half_disk(0.0, 1.0 / e), HalfPlane::outside_half_disk(0.0, e)};
    SchottkyPairing db{da.source.image(r), da.target.image(r)};
    p.schottky_disks = {da, db};
    p.parameters = {{"translation_length", ell}};
    return p;
}

Presentation schottky_parabolic(double c, double b_length) {
    double s = 0.5 * b_length;
    double center = 1.0 / std::tanh(s), radius = 1.0 / std::sinh(s);
    if (!(b_length > 0.0) || !(center + radius < 0.5 * c))
        throw Error(ErrorKind::config, "schottky_parabolic needs c > 2 coth(b_length / 4)");
    Presentation p;
    p.name = "schottky_parabolic";
    p.kind = PresentationKind::free_schottky;
    p.generator_names = {"t", "b"};
    Isometry t = Isometry::from_entries(1.0, c, 0.0, 1.0);
    Isometry b = Isometry::from_entries(std::cosh(s), std::sinh(s), std::sinh(s), std::cosh(s));
    p.generators = {t, b};
    SchottkyPairing dt{HalfPlane::vertical(-0.5 * c, false), HalfPlane::vertical(0.5 * c, true)};
    SchottkyPairing dbb{HalfPlane::half_disk(-center, radius), HalfPlane::half_disk(center, radius)};
    p.schottky_disks = {dt, dbb};
    p.parameters = {{"c", c}, {"b_length", b_length}};
    return p;
}

Presentation modular_group() {
    Presentation p;
    p.name = "modular_group";
    p.kind = PresentationKind::general;
    p.exact_integer = true;
    p.generator_names = {"S", "T"};
    p.generators = {Isometry::from_entries(0, -1, 1, 0), Isometry::from_entries(1, 1, 0, 1)};
    return p;
}

Presentation symmetric_pairing(const std::vector<double>& centers, double r) {
    Presentation p;
    p.name = "symmetric_pairing";
    p.kind = PresentationKind::free_schottky;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        double x = centers[k];
        if (!(x > r) || !(r > 0.0)) throw Error(ErrorKind::config, "symmetric_pairing needs centers > radius > 0");
        p.generator_names.push_back(std::string(1, static_cast<char>('a' + k)));
        p.generators.push_back(Isometry::from_entries(x / r, (x * x - r * r) / r, 1.0 / r, x / r));
        p.schottky_disks.push_back({HalfPlane::half_disk(-x, r), HalfPlane::half_disk(x, r)});
        p.parameters.push_back({"center_" + std::to_string(k), x});
    }
    p.parameters.push_back({"radius", r});
    return p;
}

Presentation custom_presentation(const std::vector<std::string>& names, const std::vector<Isometry>& gens,
                                 std::vector<SchottkyPairing> disks) {
    if (names.size() != gens.size() || gens.empty())
        throw Error(ErrorKind::config, "custom presentation needs one name per generator");
    Presentation p;
    p.name = "custom";
    p.generator_names = names;
    p.generators = gens;
    p.exact_integer = true;
    for (const auto& g : gens)
        for (double v : {g.a(), g.b(), g.c(), g.d()})
            if (v != std::round(v)) p.exact_integer = false;
    if (!disks.empty()) {
        if (disks.size() != gens.size()) throw Error(ErrorKind::config, "one disk pair per generator");
        p.schottky_disks = std::move(disks);
        p.kind = PresentationKind::free_schottky;
        auto rep = verify_schottky(p);
        if (!rep.ok) throw Error(ErrorKind::config, "Schottky verification failed: " + rep.failures.front());
    }
    return p;
}

SchottkyReport verify_schottky(const Presentation& p) {
    SchottkyReport rep;
    if (p.schottky_disks.size() != p.generators.size()) {
        rep.failures.push_back("missing Schottky disks");
        return rep;
    }
    std::vector<std::pair<std::string, const HalfPlane*>> disks;
    for (int g = 0; g < p.rank(); ++g) {
        disks.emplace_back(p.generator_names[g] + "-", &p.schottky_disks[g].source);
        disks.emplace_back(p.generator_names[g] + "+", &p.schottky_disks[g].target);
    }
    rep.min_separation = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t i = 0; i < disks.size(); ++i)
        for (std::size_t j = i + 1; j < disks.size(); ++j) {
            std::string what = disks[i].first + "/" + disks[j].first;
            if (!hyp::half_planes_disjoint(*disks[i].second, *disks[j].second)) {
                ok = false;
                rep.failures.push_back("disks overlap: " + what);
                rep.margins.push_back({what, 0.0});
                rep.min_separation = 0.0;
                continue;
            }
            double d = hyp::half_plane_distance(*disks[i].second, *disks[j].second);
            rep.margins.push_back({what, d});
            rep.min_separation = std::min(rep.min_separation, d);
        }
    for (int g = 0; g < p.rank(); ++g) {
        const auto& pair = p.schottky_disks[g];
        HalfPlane img = pair.source.complement().image(p.generators[g]);
        bool nested = hyp::half_plane_nested(img, pair.target);
        // 0 when the image boundary is the target boundary, positive when strictly inside
        double gap = nested ? hyp::half_plane_distance(pair.target.complement(), img) : 0.0;
        rep.margins.push_back({p.generator_names[g] + " image", gap});
        if (!nested) {
            ok = false;
            rep.failures.push_back(p.generator_names[g] + " does not map the exterior of its source disk into its target disk");
        }
    }
    rep.ok = ok;
    return rep;
}

// ---------------------------------------------------------------- database

namespace {

double displacement(const Isometry& g) { return hyp::dist(hyp::kOrigin, g.apply(hyp::kOrigin)); }

bool same_matrix(const Isometry& g, const Isometry& h) {
    return g.distance_to(h) <= 1e-8 * std::max(1.0, std::sqrt(g.frobenius2()));
}

void sort_elements(std::vector<GroupElement>& els) {
    std::sort(els.begin(), els.end(), [](const GroupElement& x, const GroupElement& y) {
        if (x.d_o != y.d_o) return x.d_o < y.d_o;
        return x.word < y.word;
    });
}

}  // namespace

OrbitDatabase::OrbitDatabase(std::vector<GroupElement> elements, Truncation trunc, std::string dedup_mode)
    : elements_(std::move(elements)), trunc_(trunc), dedup_(std::move(dedup_mode)) {
    sort_elements(elements_);
}

std::optional<std::size_t> OrbitDatabase::find(const Isometry& g) const {
    double d = displacement(g);
    double tol = 1e-7 * std::max(1.0, d);
    auto lo = std::lower_bound(elements_.begin(), elements_.end(), d - tol,
                               [](const GroupElement& e, double v) { return e.d_o < v; });
    for (auto it = lo; it != elements_.end() && it->d_o <= d + tol; ++it)
        if (same_matrix(it->matrix, g)) return static_cast<std::size_t>(it - elements_.begin());
    return std::nullopt;
}

void OrbitDatabase::write_csv(std::ostream& os) const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "# orbit database v1: max_word_len=%ld max_dist=%.17g horizon=%.17g certified=%d "
                  "achieved_word_len=%ld dedup=%s\n",
                  trunc_.max_word_len, trunc_.max_dist, trunc_.horizon, trunc_.certified ? 1 : 0,
                  trunc_.achieved_word_len, dedup_.c_str());
    os << buf;
    os << "word,a,b,c,d,d_o\n";
    for (const auto& e : elements_) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g\n", e.matrix.a(), e.matrix.b(),
                      e.matrix.c(), e.matrix.d(), e.d_o);
        os << e.word.str() << buf;
    }
}

OrbitDatabase OrbitDatabase::read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# orbit database v1:", 0) != 0)
        throw Error(ErrorKind::io, "not an orbit database file");
    Truncation t;
    char dedup[64] = {0};
    int cert = 0;
    if (std::sscanf(line.c_str(),
                    "# orbit database v1: max_word_len=%ld max_dist=%lf horizon=%lf certified=%d "
                    "achieved_word_len=%ld dedup=%63s",
                    &t.max_word_len, &t.max_dist, &t.horizon, &cert, &t.achieved_word_len, dedup) != 6)
        throw Error(ErrorKind::io, "bad orbit database header");
    t.certified = cert != 0;
    if (!std::getline(is, line) || line != "word,a,b,c,d,d_o") throw Error(ErrorKind::io, "bad column header");
    std::vector<GroupElement> els;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 6) throw Error(ErrorKind::io, "bad row: " + line);
        GroupElement e;
        e.word = Word::parse(f[0]);
        e.matrix = Isometry::from_entries(std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]));
        e.d_o = std::stod(f[5]);
        els.push_back(std::move(e));
    }
    return OrbitDatabase(std::move(els), t, dedup);
}

// ---------------------------------------------------------------- enumeration

namespace {

// Half-plane membership and distance through a precomputed frame.
struct DiskFrame {
    hyp::LineFrame frame;
    int side;

    explicit DiskFrame(const HalfPlane& h)
        : frame(h.e1(), h.e2()), side(frame.side(h.inside())) {}

    double distance(Point p) const {
        Point w = frame.to_frame().apply(p);
        if ((w.x > 0.0 ? 1 : -1) == side && w.x != 0.0) return 0.0;
        return std::asinh(std::abs(w.x) / w.y);
    }
};

struct FreeEnumerator {
    const Presentation& p;
    const EnumerationLimits& lim;
    std::vector<DiskFrame> disks;     // by letter code
    std::vector<Isometry> letters;    // by letter code
    std::vector<std::optional<detail::TranslationFrame>> tframes;  // parabolic generators
    std::vector<GroupElement> out;
    Word word;
    double frontier_min = std::numeric_limits<double>::infinity();
    long achieved = 0;

    FreeEnumerator(const Presentation& pp, const EnumerationLimits& l) : p(pp), lim(l) {
        for (int g = 0; g < p.rank(); ++g) {
            for (bool inv : {false, true}) {
                disks.emplace_back(p.attracting_disk(g, inv));
                letters.push_back(inv ? p.generators[g].inverse() : p.generators[g]);
            }
            tframes.push_back(detail::translation_frame(p.generators[g]));
        }
    }

    int nletters() const { return static_cast<int>(disks.size()); }

    void record(const Isometry& w, long len) {
        achieved = std::max(achieved, len);
        double d = displacement(w);
        if (d > lim.max_dist) return;
        if (out.size() >= lim.max_elements)
            throw Error(ErrorKind::partial_result, "element budget exceeded at word length " + std::to_string(len));
        out.push_back({word, w, d, 0.0});
    }

    // Visits the word prefix·x where prefix has matrix `prev`.
    void visit(const Isometry& prev, int x) {
        Point back = prev.inverse().apply(hyp::kOrigin);
        if (disks[x].distance(back) > lim.max_dist) return;
        if (tframes[x / 2]) {
            visit_parabolic(prev, x);
            return;
        }
        Isometry w = prev * letters[x];
        word.append(x / 2, (x & 1) ? -1 : 1);
        long len = word.letter_length();
        record(w, len);
        int inv = x ^ 1;
        if (len >= lim.max_word_len) {
            Point wb = w.inverse().apply(hyp::kOrigin);
            for (int y = 0; y < nletters(); ++y)
                if (y != inv) frontier_min = std::min(frontier_min, disks[y].distance(wb));
        } else {
            for (int y = 0; y < nletters(); ++y)
                if (y != inv) visit(w, y);
        }
        word.pop_letter();
    }

    // A whole syllable of a parabolic generator. In its translation frame the
    // images of o and of the other disks move rigidly, so once they have all
    // passed the prefix's view point and are beyond max_dist nothing further
    // can come back.
    void visit_parabolic(const Isometry& prev, int x) {
        int h = x / 2;
        long sign = (x & 1) ? -1 : 1;
        const auto& tf = *tframes[h];
        double step = tf.step * static_cast<double>(sign);
        const Isometry& to = tf.frame.to_frame();
        double qx = to.apply(prev.inverse().apply(hyp::kOrigin)).x;
        std::vector<double> centers{to.apply(hyp::kOrigin).x};
        for (int y = 0; y < nletters(); ++y)
            if (y / 2 != h) centers.push_back(detail::frame_center(to, disks[y].frame.from_frame().apply(hyp::BoundaryPoint::real(0.0)),
                                                                   disks[y].frame.from_frame().apply(hyp::BoundaryPoint::infinity())));
        Isometry w = prev;
        long k = 0;
        while (true) {
            ++k;
            w = w * letters[x];
            word.append(h, sign);
            long len = word.letter_length();
            record(w, len);
            double nearest = displacement(w);
            Point wb = w.inverse().apply(hyp::kOrigin);
            bool capped = len >= lim.max_word_len;
            for (int y = 0; y < nletters(); ++y) {
                if (y / 2 == h) continue;
                double cd = disks[y].distance(wb);
                nearest = std::min(nearest, cd);
                if (capped) {
                    frontier_min = std::min(frontier_min, cd);
                } else if (cd <= lim.max_dist) {
                    visit(w, y);
                }
            }
            if (capped) {
                frontier_min = std::min(frontier_min, disks[x].distance(wb));
                break;
            }
            bool passed = true;
            for (double c : centers)
                if ((c + static_cast<double>(k) * step - qx) * step <= 0.0) passed = false;
            if (passed && nearest > lim.max_dist) break;
        }
        word.append(h, -sign * k);
    }
};

struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 4>& k) const {
        std::size_t h = 1469598103934665603ull;
        for (auto v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
        return h;
    }
};

std::array<std::int64_t, 4> integer_key(const Isometry& g) {
    return {std::llround(g.a()), std::llround(g.b()), std::llround(g.c()), std::llround(g.d())};
}

OrbitDatabase enumerate_general(const Presentation& p, const EnumerationLimits& lim) {
    std::vector<GroupElement> els;
    els.push_back({Word(), Isometry(), 0.0, 0.0});
    std::unordered_set<std::array<std::int64_t, 4>, KeyHash> seen;
    std::multimap<double, std::size_t> by_dist;
    auto is_new = [&](const Isometry& g, double d) {
        if (p.exact_integer) return seen.insert(integer_key(g)).second;
        for (auto it = by_dist.lower_bound(d - 1e-7 * std::max(1.0, d));
             it != by_dist.end() && it->first <= d + 1e-7 * std::max(1.0, d); ++it)
            if (same_matrix(els[it->second].matrix, g)) return false;
        by_dist.emplace(d, els.size());
        return true;
    };
    is_new(Isometry(), 0.0);
    std::vector<std::size_t> frontier{0};
    long level = 0;
    while (!frontier.empty() && level < lim.max_word_len) {
        std::vector<std::size_t> next;
        for (std::size_t idx : frontier) {
            for (int g = 0; g < p.rank(); ++g)
                for (long s : {1L, -1L}) {
                    const auto& syl = els[idx].word.syllables();
                    if (!syl.empty() && syl.back().gen == g && (syl.back().power > 0) != (s > 0)) continue;
                    Isometry h = els[idx].matrix * (s > 0 ? p.generators[g] : p.generators[g].inverse());
                    double d = displacement(h);
                    if (d > lim.max_dist || !is_new(h, d)) continue;
                    if (els.size() >= lim.max_elements)
                        throw Error(ErrorKind::partial_result,
                                    "element budget exceeded at word length " + std::to_string(level + 1));
                    Word w = els[idx].word;
                    w.append(g, s);
                    els.push_back({std::move(w), h, d, 0.0});
                    next.push_back(els.size() - 1);
                }
        }
        frontier = std::move(next);
        ++level;
    }
    Truncation t;
    t.max_word_len = lim.max_word_len;
    t.max_dist = lim.max_dist;
    t.achieved_word_len = level;
    t.horizon = lim.max_dist;
    // For PSL(2, Z) with S, T every element is reached through elements of
    // no larger displacement, so distance pruning loses nothing.
    t.certified = p.name == "modular_group" && frontier.empty();
    return OrbitDatabase(std::move(els), t, p.exact_integer ? "exact-integer" : "frobenius-1e-8");
}

}  // namespace

OrbitDatabase enumerate_orbit(const Presentation& p, const EnumerationLimits& lim) {
    if (!(lim.max_dist > 0.0) || lim.max_word_len < 0)
        throw Error(ErrorKind::config, "truncation bounds must be positive");
    if (p.kind != PresentationKind::free_schottky) return enumerate_general(p, lim);

    auto rep = verify_schottky(p);
    if (!rep.ok) throw Error(ErrorKind::config, "Schottky verification failed: " + rep.failures.front());
    FreeEnumerator en(p, lim);
    en.out.push_back({Word(), Isometry(), 0.0, 0.0});
    if (lim.max_word_len == 0) {
        en.frontier_min = 0.0;
    } else {
        for (int x = 0; x < 2 * p.rank(); ++x) en.visit(Isometry(), x);
    }
    Truncation t;
    t.max_word_len = lim.max_word_len;
    t.max_dist = lim.max_dist;
    t.achieved_word_len = en.achieved;
    t.horizon = std::min(lim.max_dist, en.frontier_min);
    t.certified = true;
    return OrbitDatabase(std::move(en.out), t, "free-reduced-words");
}

}  // namespace thermo::grp
