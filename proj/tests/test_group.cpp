#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "thermo/group.hpp"

using namespace thermo;
using namespace thermo::grp;

namespace {

// All PSL(2, Z) matrices with a² + b² + c² + d² <= bound, one per ±pair.
std::size_t modular_ball_oracle(double D) {
    double bound = 2.0 * std::cosh(D) + 1e-9;
    auto m = static_cast<long>(std::floor(std::sqrt(bound)));
    std::set<std::array<long, 4>> seen;
    for (long a = -m; a <= m; ++a)
        for (long b = -m; b <= m; ++b)
            for (long c = -m; c <= m; ++c) {
                long rest = static_cast<long>(bound) - a * a - b * b - c * c;
                if (rest < 0) continue;
                for (long d = -m; d <= m; ++d) {
                    if (a * d - b * c != 1 || d * d > rest) continue;
                    std::array<long, 4> v{a, b, c, d}, w{-a, -b, -c, -d};
                    seen.insert(std::max(v, w));
                }
            }
    return seen.size();
}

// Cyclically reduced words over {0, 1, 2, 3} (x, X, y, Y) of length n.
void cyclic_words(int n, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    auto inv = [](int l) { return l ^ 1; };
    if (static_cast<int>(cur.size()) == n) {
        if (n > 1 && cur.back() == inv(cur.front())) return;
        out.push_back(cur);
        return;
    }
    for (int l = 0; l < 4; ++l) {
        if (!cur.empty() && l == inv(cur.back())) continue;
        cur.push_back(l);
        cyclic_words(n, cur, out);
        cur.pop_back();
    }
}

// Least rotation, as a necklace key.
std::vector<int> least_rotation(std::vector<int> w) {
    auto best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::rotate(w.begin(), w.begin() + 1, w.end());
        best = std::min(best, w);
    }
    return best;
}

std::vector<int> codes(const Word& w) {
    std::vector<int> out;
    for (auto [gen, inv] : w.letters()) out.push_back(2 * gen + (inv ? 1 : 0));
    return out;
}

std::string letters(const std::vector<int>& w) {
    std::string s;
    for (int l : w) s += static_cast<char>((l & 1 ? 'A' : 'a') + l / 2);
    return s;
}

bool is_power(const std::vector<int>& w) {
    auto n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool rep = true;
        for (std::size_t i = p; i < n && rep; ++i) rep = w[i] == w[i - p];
        if (rep) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("free enumeration has 4·3^(k-1) elements of word length k") {
    for (auto p : {schottky_pair(), schottky_parabolic()}) {
        auto db = enumerate_orbit(p, {.max_word_len = 6, .max_dist = 200.0});
        std::map<long, std::size_t> by_len;
        for (const auto& e : db.elements()) ++by_len[e.word.letter_length()];
        CHECK(by_len[0] == 1);
        for (long k = 1; k <= 6; ++k) CHECK(by_len[k] == 4 * static_cast<std::size_t>(std::pow(3, k - 1)));
        CHECK(db.truncation().achieved_word_len == 6);
    }
}

TEST_CASE("enumeration is complete up to the distance horizon") {
    auto p = schottky_parabolic();
    auto db = enumerate_orbit(p, {.max_word_len = 1'000'000, .max_dist = 12.0});
    CHECK(db.truncation().certified);
    CHECK(db.truncation().horizon == doctest::Approx(12.0));
    // Parabolic powers t^n have d(o, t^n o) = 2 asinh(n c / 2) and must all be present.
    for (long n = 1;; ++n) {
        double d = 2.0 * std::asinh(n * 2.5 / 2.0);
        if (d > 12.0) break;
        Word w;
        w.append(0, n);
        CHECK(db.find(p.evaluate(w)).has_value());
    }
    for (const auto& e : db.elements()) {
        CHECK(e.d_o <= 12.0 + 1e-9);
        CHECK(hyp::dist(hyp::kOrigin, e.matrix.apply(hyp::kOrigin)) == doctest::Approx(e.d_o).epsilon(1e-12));
    }
}

TEST_CASE("modular enumeration matches the integer-matrix oracle") {
    for (double D : {3.0, 5.0}) {
        auto db = enumerate_orbit(modular_group(), {.max_word_len = 1'000'000, .max_dist = D});
        CHECK(db.dedup_mode() == "exact-integer");
        CHECK(db.size() == modular_ball_oracle(D));
    }
}

TEST_CASE("free necklaces match the brute-force oracle") {
    auto p = schottky_pair();
    std::set<std::vector<int>> oracle;
    double longest = 0.0;
    for (int n = 1; n <= 3; ++n) {
        std::vector<int> cur;
        std::vector<std::vector<int>> ws;
        cyclic_words(n, cur, ws);
        for (const auto& w : ws) {
            if (is_power(w)) continue;
            oracle.insert(least_rotation(w));
            longest = std::max(longest, hyp::analyze_isometry(p.evaluate(Word::parse(letters(w)))).translation_length);
        }
    }
    auto census = conjugacy_classes(p, OrbitDatabase{}, longest + 0.01);
    std::set<std::vector<int>> got;
    for (const auto& c : census.classes)
        if (c.word.letter_length() <= 3) got.insert(least_rotation(codes(c.word)));
    // 4 + (12 - 4) / 2 + (28 - 4) / 3 primitive necklaces.
    CHECK(oracle.size() == 16);
    CHECK(got == oracle);
}

TEST_CASE("translation length is the same for every rotation of a necklace") {
    auto p = schottky_parabolic();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        int n = 2 + static_cast<int>(rng() % 6);
        const char* alphabet = "aAbB";
        while (static_cast<int>(s.size()) < n) {
            char c = alphabet[rng() % 4];
            if (!s.empty() && (c ^ 32) == s.back()) continue;
            s += c;
        }
        if ((s.front() ^ 32) == s.back()) continue;
        double l0 = hyp::analyze_isometry(p.evaluate(Word::parse(s))).translation_length;
        for (int r = 1; r < n; ++r) {
            std::string rot = s.substr(r) + s.substr(0, r);
            CHECK(hyp::analyze_isometry(p.evaluate(Word::parse(rot))).translation_length ==
                  doctest::Approx(l0).epsilon(1e-9));
        }
    }
}

TEST_CASE("orbit database CSV round trip") {
    auto db = enumerate_orbit(schottky_pair(), {.max_word_len = 1'000'000, .max_dist = 8.0});
    std::stringstream ss;
    db.write_csv(ss);
    auto back = OrbitDatabase::read_csv(ss);
    REQUIRE(back.size() == db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        const auto &a = db.elements()[i], &b = back.elements()[i];
        CHECK(a.word == b.word);
        CHECK(a.matrix.distance_to(b.matrix) == 0.0);
        CHECK(a.d_o == b.d_o);
    }
    CHECK(back.truncation().horizon == db.truncation().horizon);
}

TEST_CASE("orbit index ball queries agree with a linear scan") {
    auto db = enumerate_orbit(schottky_parabolic(), {.max_word_len = 1'000'000, .max_dist = 10.0});
    OrbitIndex index(db);
    CHECK(index.complete_radius() == doctest::Approx(10.0));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> r(0.0, 3.0), th(-3.14159, 3.14159), rho(0.1, 2.5);
    for (int trial = 0; trial < 300; ++trial) {
        Point x = hyp::from_polar(r(rng), th(rng));
        double q = rho(rng);
        auto got = index.ball(x, q);
        std::set<std::size_t> fast;
        for (std::size_t i : got) fast.insert(index.element(i));
        std::set<std::size_t> slow;
        for (std::size_t i = 0; i < db.size(); ++i)
            if (hyp::dist(x, db.elements()[i].matrix.apply(hyp::kOrigin)) <= q) slow.insert(i);
        // Points exactly on the sphere may go either way.
        for (std::size_t i : fast) CHECK(hyp::dist(x, db.elements()[i].matrix.apply(hyp::kOrigin)) <= q + 1e-9);
        for (std::size_t i : slow) CHECK(fast.count(i) == 1);
    }
}

TEST_CASE("schottky presets pass the ping-pong check") {
    CHECK(verify_schottky(schottky_pair()).ok);
    CHECK(verify_schottky(schottky_parabolic()).ok);
    CHECK(verify_schottky(symmetric_pairing({0.5, 2.0}, 0.3)).ok);
    CHECK_FALSE(verify_schottky(symmetric_pairing({0.5, 0.7}, 0.3)).ok);
}
