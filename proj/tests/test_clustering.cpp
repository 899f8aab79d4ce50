#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "glyphspot/clustering.hpp"

using namespace glyphspot;

namespace {

std::vector<Vec> two_blobs() {
    return {{0.0, 0.0}, {0.0, 1.0}, {10.0, 10.0}, {10.0, 11.0}};
}

std::set<std::set<int>> partition_of(const std::vector<int>& labels) {
    std::map<int, std::set<int>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].insert(static_cast<int>(i));
    std::set<std::set<int>> out;
    for (auto& [k, v] : groups) out.insert(v);
    return out;
}

}  // namespace

TEST_CASE("kmeans with k equal to the point count reaches zero inertia") {
    std::vector<Vec> pts = {{0.0}, {1.0}, {2.0}, {5.0}};
    ClusterAssignment a = kmeans(pts, 4, 1);
    CHECK(a.inertia == 0.0);
    std::set<int> used(a.labels.begin(), a.labels.end());
    CHECK(used.size() == 4);
}

TEST_CASE("kmeans separates two blobs with inertia 1.0") {
    ClusterAssignment a = kmeans(two_blobs(), 2, 42);
    CHECK(a.labels[0] == a.labels[1]);
    CHECK(a.labels[2] == a.labels[3]);
    CHECK(a.labels[0] != a.labels[2]);
    // Each blob centroid at the midpoint: 0.25 squared distance per point.
    CHECK(a.inertia == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kmeans partition is stable across seeds on separated data") {
    ClusterAssignment a = kmeans(two_blobs(), 2, 1);
    ClusterAssignment b = kmeans(two_blobs(), 2, 2);
    CHECK(partition_of(a.labels) == partition_of(b.labels));
}

TEST_CASE("kmeans inertia never increases across iterations") {
    Rng rng(7);
    std::vector<Vec> pts;
    for (int i = 0; i < 60; ++i) {
        pts.push_back({rng.next_double() * 10, rng.next_double() * 10, rng.next_double()});
    }
    for (int k : {2, 5, 9}) {
        ClusterAssignment a = kmeans(pts, k, 3);
        for (std::size_t i = 1; i < a.inertia_trace.size(); ++i) {
            CHECK(a.inertia_trace[i] <= a.inertia_trace[i - 1] * (1.0 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("kmeans output is a partition with valid labels") {
    Rng rng(8);
    std::vector<Vec> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({rng.next_double(), rng.next_double()});
    ClusterAssignment a = kmeans(pts, 4, 9);
    CHECK(a.labels.size() == pts.size());
    for (int l : a.labels) {
        CHECK(l >= 0);
        CHECK(l < 4);
    }
    CHECK(a.centroids.size() == 4);
}

TEST_CASE("kmeans validates its inputs") {
    std::vector<Vec> pts = {{0.0}, {1.0}};
    CHECK_THROWS_AS(kmeans(pts, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(pts, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans({}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(pts, 1, 1, 0), std::invalid_argument);
}

TEST_CASE("kmeans is deterministic for a fixed seed") {
    Rng rng(10);
    std::vector<Vec> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({rng.next_double(), rng.next_double()});
    ClusterAssignment a = kmeans(pts, 5, 77);
    ClusterAssignment b = kmeans(pts, 5, 77);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    CHECK(a.centroids == b.centroids);
}

TEST_CASE("som converges to a single repeated input") {
    std::vector<Vec> pts = {{3.0, -2.0}};
    SomGrid grid = som_train(pts, 1, 1, 200, 5, 0.5, 0.5);
    CHECK(std::abs(grid.weight(0, 0)[0] - 3.0) <= 1e-3);
    CHECK(std::abs(grid.weight(0, 0)[1] + 2.0) <= 1e-3);
    CHECK(grid.trained_epochs == 200);
}

TEST_CASE("som rejects zero epochs and empty input") {
    std::vector<Vec> pts = {{1.0}};
    CHECK_THROWS_AS(som_train(pts, 1, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(som_train({}, 1, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("som training lowers quantization error") {
    std::vector<Vec> pts = two_blobs();
    // Untrained grid = the seeded initialization (epochs can't be 0, so
    // rebuild the init path by training zero-influence: compare against a
    // fresh random grid drawn with the same seed).
    SomGrid trained = som_train(pts, 2, 2, 50, 123);
    SomGrid init;
    init.rows = 2;
    init.cols = 2;
    Rng rng(123);
    Vec lo{0.0, 0.0}, hi{10.0, 11.0};
    init.weights.assign(4, Vec(2, 0.0));
    for (Vec& w : init.weights) {
        for (std::size_t d = 0; d < 2; ++d) w[d] = lo[d] + rng.next_double() * (hi[d] - lo[d]);
    }
    CHECK(som_quantization_error(trained, pts) <= som_quantization_error(init, pts));
}

TEST_CASE("som training is reproducible for a fixed seed") {
    Rng rng(11);
    std::vector<Vec> pts;
    for (int i = 0; i < 20; ++i) pts.push_back({rng.next_double(), rng.next_double()});
    SomGrid a = som_train(pts, 3, 3, 5, 99);
    SomGrid b = som_train(pts, 3, 3, 5, 99);
    CHECK(a.weights == b.weights);
}

TEST_CASE("som_map finds exact weights and breaks ties to node (0,0)") {
    SomGrid grid;
    grid.rows = 2;
    grid.cols = 2;
    grid.weights = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    CHECK(som_map(grid, {1.0, 0.0}) == std::pair{0, 1});
    CHECK(som_map(grid, {0.0, 1.0}) == std::pair{1, 0});

    grid.weights = {{5.0, 5.0}, {5.0, 5.0}, {5.0, 5.0}, {5.0, 5.0}};
    CHECK(som_map(grid, {1.0, 2.0}) == std::pair{0, 0});

    CHECK_THROWS_AS(som_map(grid, {1.0}), std::invalid_argument);
}

TEST_CASE("som_map agrees with an exhaustive scan") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        SomGrid grid;
        grid.rows = 3;
        grid.cols = 4;
        for (int i = 0; i < 12; ++i) {
            grid.weights.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
        }
        Vec v{rng.next_double(), rng.next_double(), rng.next_double()};
        auto [r, c] = som_map(grid, v);
        double best = std::numeric_limits<double>::infinity();
        int best_idx = 0;
        for (int i = 0; i < 12; ++i) {
            double s = 0;
            for (int d = 0; d < 3; ++d) {
                double diff = grid.weights[i][d] - v[d];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_idx = i;
            }
        }
        CHECK(r * 4 + c == best_idx);
    }
}

TEST_CASE("leader clustering degenerate thresholds") {
    std::vector<double> items = {0.0, 1.0, 2.0, 3.0};
    auto d = [&](std::size_t a, std::size_t b) { return std::abs(items[a] - items[b]); };
    auto singletons = leader_cluster(items.size(), d, 0.0);
    CHECK(singletons.size() == 4);
    auto everything = leader_cluster(items.size(), d, 3.0);
    CHECK(everything.size() == 1);
}

TEST_CASE("leader clustering follows the scan order") {
    // d(0,1)=0.1, d(0,2)=0.5, d(1,2)=0.5, tau=0.2 -> {0,1},{2}
    auto d = [](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        if (a == 0 && b == 1) return 0.1;
        return a == b ? 0.0 : 0.5;
    };
    auto classes = leader_cluster(3, d, 0.2);
    REQUIRE(classes.size() == 2);
    CHECK(classes[0] == std::vector<std::size_t>{0, 1});
    CHECK(classes[1] == std::vector<std::size_t>{2});
}

TEST_CASE("leader classes are disjoint, cover all items, and honor tau") {
    Rng rng(13);
    std::vector<Vec> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({rng.next_double() * 4});
    auto d = [&](std::size_t a, std::size_t b) { return std::abs(pts[a][0] - pts[b][0]); };
    auto classes = leader_cluster(pts.size(), d, 0.5);
    std::set<std::size_t> seen;
    for (const auto& cls : classes) {
        for (std::size_t i : cls) {
            CHECK(!seen.count(i));
            seen.insert(i);
            CHECK(d(cls.front(), i) <= 0.5);
        }
    }
    CHECK(seen.size() == pts.size());
}

TEST_CASE("leader clustering is order-dependent by design") {
    // Chain 0 - 0.4 - 0.8: scanning forward groups {0,1} and {2}; scanning
    // from the middle would group all three. The contract is the scan order.
    std::vector<double> items = {0.0, 0.4, 0.8};
    auto d = [&](std::size_t a, std::size_t b) { return std::abs(items[a] - items[b]); };
    auto classes = leader_cluster(items.size(), d, 0.5);
    REQUIRE(classes.size() == 2);
    CHECK(classes[0].size() == 2);

    std::vector<double> reordered = {0.4, 0.0, 0.8};
    auto d2 = [&](std::size_t a, std::size_t b) { return std::abs(reordered[a] - reordered[b]); };
    auto classes2 = leader_cluster(reordered.size(), d2, 0.5);
    CHECK(classes2.size() == 1);
}

TEST_CASE("leader rejects negative tau") {
    auto d = [](std::size_t, std::size_t) { return 0.0; };
    CHECK_THROWS_AS(leader_cluster(3, d, -0.1), std::invalid_argument);
}
