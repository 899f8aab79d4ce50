#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "glyphspot/matchers.hpp"
#include "oracles.hpp"

using namespace glyphspot;
using oracles::glyph_from_mask;
using oracles::random_mask;

namespace {

Glyph random_glyph(Rng& rng, int side = 32, double density = 0.2) {
    BinaryImage mask = random_mask(rng, side, side, density);
    if (mask.foreground_count() == 0) mask.set(side / 2, side / 2, true);
    return glyph_from_mask(std::move(mask));
}

}  // namespace

TEST_CASE("xor_dissimilarity of identical and complementary grids") {
    Rng rng(1);
    Glyph a = random_glyph(rng);
    CHECK(xor_dissimilarity(a, a) == 0.0);

    Glyph b = a;
    for (auto& m : b.grid.mask) m = m ? 0 : 1;
    CHECK(xor_dissimilarity(a, b) == 1.0);
}

TEST_CASE("xor_dissimilarity counts mismatching pixels") {
    BinaryImage ga(32, 32), gb(32, 32);
    // 16 disagreements on the diagonal.
    for (int i = 0; i < 16; ++i) ga.set(i, i, true);
    Glyph a = glyph_from_mask(ga), b = glyph_from_mask(gb);
    int manual = 0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            if (a.grid.get(x, y) != b.grid.get(x, y)) ++manual;
        }
    }
    CHECK(manual == 16);
    CHECK(xor_dissimilarity(a, b) == 16.0 / 1024.0);
    CHECK(xor_dissimilarity(a, b) == 0.015625);
}

TEST_CASE("xor_dissimilarity rejects mismatched sides") {
    Glyph a = glyph_from_mask(BinaryImage(16, 16));
    Glyph b = glyph_from_mask(BinaryImage(32, 32));
    CHECK_THROWS_AS(xor_dissimilarity(a, b), std::invalid_argument);
}

TEST_CASE("xor_dissimilarity is invariant under a shared pixel permutation") {
    Rng rng(2);
    Glyph a = random_glyph(rng), b = random_glyph(rng);
    double before = xor_dissimilarity(a, b);
    // Apply the same reversal to both grids.
    Glyph ar = a, br = b;
    std::reverse(ar.grid.mask.begin(), ar.grid.mask.end());
    std::reverse(br.grid.mask.begin(), br.grid.mask.end());
    CHECK(xor_dissimilarity(ar, br) == before);
}

TEST_CASE("edm_dissimilarity of identical glyphs is zero") {
    Rng rng(3);
    Glyph a = random_glyph(rng);
    CHECK(edm_dissimilarity(a, a) == 0.0);
}

TEST_CASE("edm_dissimilarity of two single pixels is their distance") {
    BinaryImage ga(8, 8), gb(8, 8);
    ga.set(0, 0, true);
    gb.set(3, 4, true);
    CHECK(edm_dissimilarity(glyph_from_mask(ga), glyph_from_mask(gb)) == 5.0);
}

TEST_CASE("edm_dissimilarity requires non-empty foreground") {
    Glyph a = glyph_from_mask(BinaryImage(8, 8));
    Glyph b = a;
    b.grid.set(1, 1, true);
    CHECK_THROWS_AS(edm_dissimilarity(a, b), std::invalid_argument);
}

TEST_CASE("edm_dissimilarity matches the brute-force oracle") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Glyph a = random_glyph(rng, 16, 0.15);
        Glyph b = random_glyph(rng, 16, 0.15);
        double fast = edm_dissimilarity(a, b);
        double slow = oracles::brute_force_edm(a, b);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        CHECK(std::abs(fast - slow) <= 1e-9);
        CHECK(edm_dissimilarity(b, a) == fast);
    }
}

TEST_CASE("edm_dissimilarity is zero exactly when foregrounds agree") {
    Rng rng(5);
    Glyph a = random_glyph(rng, 16, 0.2);
    Glyph b = a;
    CHECK(edm_dissimilarity(a, b) == 0.0);
    b.grid.set(0, 0, !b.grid.get(0, 0));
    CHECK(edm_dissimilarity(a, b) > 0.0);
}

TEST_CASE("vertical_profile counts per-column foreground") {
    Glyph empty = glyph_from_mask(BinaryImage(32, 32));
    Profile p = vertical_profile(empty);
    for (int v : p) CHECK(v == 0);

    BinaryImage col(32, 32);
    for (int y = 0; y < 32; ++y) col.set(5, y, true);
    Profile q = vertical_profile(glyph_from_mask(col));
    for (int j = 0; j < 32; ++j) CHECK(q[j] == (j == 5 ? 32 : 0));

    Profile full = vertical_profile(glyph_from_mask(BinaryImage(32, 32, true)));
    for (int v : full) CHECK(v == 32);
}

TEST_CASE("profile_dissimilarity basics") {
    Profile p(32, 0), q(32, 0);
    CHECK(profile_dissimilarity(p, q) == 0.0);
    q[7] = 32;
    CHECK(profile_dissimilarity(p, q) == 1.0);
    CHECK_THROWS_AS(profile_dissimilarity(p, Profile(16, 0)), std::invalid_argument);
}

TEST_CASE("profile_dissimilarity equals an explicit sum of squares") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        Profile p(32), q(32);
        for (int i = 0; i < 32; ++i) {
            p[i] = static_cast<int>(rng.next_below(33));
            q[i] = static_cast<int>(rng.next_below(33));
        }
        double sq = 0;
        for (int i = 0; i < 32; ++i) sq += double(p[i] - q[i]) * (p[i] - q[i]);
        CHECK(profile_dissimilarity(p, q) == std::sqrt(sq) / 32.0);
        CHECK(profile_dissimilarity(p, q) == profile_dissimilarity(q, p));
    }
}

TEST_CASE("dtw_distance basics") {
    CHECK(dtw_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(dtw_distance({0, 0, 1}, {0, 1}) == 0.0);
    CHECK(dtw_distance({1}, {3}) == 1.0);
    CHECK_THROWS_AS(dtw_distance({}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(dtw_distance({1, 2, 3, 4}, {1}, 1), std::invalid_argument);
}

TEST_CASE("dtw matches the exhaustive path oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Profile p(1 + rng.next_below(6)), q(1 + rng.next_below(6));
        for (int& v : p) v = static_cast<int>(rng.next_below(3));
        for (int& v : q) v = static_cast<int>(rng.next_below(3));
        CHECK(dtw_raw_cost(p, q) == oracles::dtw_enumerate(p, q));
    }
}

TEST_CASE("dtw raw cost doubles under column duplication of both profiles") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        Profile p(1 + rng.next_below(5)), q(1 + rng.next_below(5));
        for (int& v : p) v = static_cast<int>(rng.next_below(8));
        for (int& v : q) v = static_cast<int>(rng.next_below(8));
        Profile p2, q2;
        for (int v : p) {
            p2.push_back(v);
            p2.push_back(v);
        }
        for (int v : q) {
            q2.push_back(v);
            q2.push_back(v);
        }
        // Raw cost doubles with the lengths, so the normalized distance is
        // unchanged: the time-warp invariance of this step pattern.
        CHECK(dtw_raw_cost(p2, q2) == 2.0 * dtw_raw_cost(p, q));
        CHECK(dtw_distance(p2, q2) == dtw_distance(p, q));
    }
}

TEST_CASE("dtw raw cost never exceeds the identity alignment for equal lengths") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        Profile p(8), q(8);
        for (int& v : p) v = static_cast<int>(rng.next_below(32));
        for (int& v : q) v = static_cast<int>(rng.next_below(32));
        double l1 = 0;
        for (int i = 0; i < 8; ++i) l1 += std::abs(p[i] - q[i]);
        CHECK(dtw_raw_cost(p, q) <= l1 + 1e-12);
    }
}

TEST_CASE("dtw band at the exact length difference stays feasible") {
    Profile p{0, 1, 2, 3}, q{0, 3};
    CHECK(dtw_raw_cost(p, q, 2) >= dtw_raw_cost(p, q));
    CHECK(dtw_raw_cost(p, q, 3) == dtw_raw_cost(p, q, 3));
}

TEST_CASE("word_dissimilarity of identical sequences is zero") {
    Rng rng(10);
    std::vector<Glyph> seq{random_glyph(rng), random_glyph(rng), random_glyph(rng)};
    CHECK(word_dissimilarity(seq, seq, MatchMethod::Xor) == 0.0);
    CHECK(word_dissimilarity(seq, seq, MatchMethod::Edm) == 0.0);
}

TEST_CASE("word_dissimilarity of one flipped pixel") {
    Rng rng(11);
    Glyph a = random_glyph(rng);
    Glyph b = a;
    b.grid.set(3, 3, !b.grid.get(3, 3));
    std::vector<Glyph> sa{a}, sb{b};
    CHECK(word_dissimilarity(sa, sb, MatchMethod::Xor) == (1.0 / 1024.0) / 2.0);
}

TEST_CASE("word_dissimilarity rejects empty sequences") {
    Rng rng(12);
    std::vector<Glyph> seq{random_glyph(rng)};
    std::vector<Glyph> empty;
    CHECK_THROWS_AS(word_dissimilarity(seq, empty, MatchMethod::Xor), std::invalid_argument);
}

TEST_CASE("word_dissimilarity matches the alignment enumeration oracle") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Glyph> a{random_glyph(rng, 16), random_glyph(rng, 16),
                             random_glyph(rng, 16)};
        std::vector<Glyph> b{random_glyph(rng, 16), random_glyph(rng, 16)};
        for (MatchMethod m : {MatchMethod::Xor, MatchMethod::Edm}) {
            double skip = default_skip_penalty(m);
            double fast = word_dissimilarity(a, b, m, skip);
            double slow = oracles::word_alignment_enumerate(a, b, m, skip);
            CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        }
    }
}

TEST_CASE("all four measures are symmetric and zero on self") {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
        Glyph a = random_glyph(rng), b = random_glyph(rng);
        Profile pa = vertical_profile(a), pb = vertical_profile(b);
        CHECK(xor_dissimilarity(a, b) == xor_dissimilarity(b, a));
        CHECK(edm_dissimilarity(a, b) == edm_dissimilarity(b, a));
        CHECK(profile_dissimilarity(pa, pb) == profile_dissimilarity(pb, pa));
        CHECK(dtw_distance(pa, pb) == dtw_distance(pb, pa));
        CHECK(xor_dissimilarity(a, a) == 0.0);
        CHECK(edm_dissimilarity(a, a) == 0.0);
        CHECK(dtw_distance(pa, pa) == 0.0);
    }
}

TEST_CASE("records stream is sorted by query then value") {
    std::vector<DissimilarityRecord> records = {
        {"q2", "t1", MatchMethod::Xor, 0.5},
        {"q1", "t2", MatchMethod::Xor, 0.9},
        {"q1", "t3", MatchMethod::Xor, 0.1},
        {"q1", "t1", MatchMethod::Xor, 0.1},
    };
    std::ostringstream out;
    write_records_jsonl(out, records);
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].find("\"t1\"") != std::string::npos);
    CHECK(lines[0].find("\"q1\"") != std::string::npos);
    CHECK(lines[1].find("\"t3\"") != std::string::npos);
    CHECK(lines[2].find("\"t2\"") != std::string::npos);
    CHECK(lines[3].find("\"q2\"") != std::string::npos);
}
