#include "glyphspot/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace glyphspot {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void check_vectors(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw std::invalid_argument("empty input");
    for (const Vec& v : vectors) {
        if (v.size() != vectors[0].size()) {
            throw std::invalid_argument("inconsistent vector dimensions");
        }
    }
}

std::vector<Vec> kmeanspp_init(const std::vector<Vec>& vectors, int k, Rng& rng) {
    const std::size_t n = vectors.size();
    std::vector<Vec> centroids;
    centroids.push_back(vectors[rng.next_below(n)]);
    std::vector<double> d2(n);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec& c : centroids) best = std::min(best, sq_dist(vectors[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total == 0.0) {
            pick = rng.next_below(n);
        } else {
            double r = rng.next_double() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (r < acc) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(vectors[pick]);
    }
    return centroids;
}

}  // namespace

ClusterAssignment kmeans(const std::vector<Vec>& vectors, int k, std::uint64_t seed,
                         int max_iter) {
    check_vectors(vectors);
    const std::size_t n = vectors.size();
    if (k < 1 || static_cast<std::size_t>(k) > n) throw std::invalid_argument("k out of range");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");

    Rng rng(seed);
    ClusterAssignment out;
    out.centroids = kmeanspp_init(vectors, k, rng);
    out.labels.assign(n, 0);

    auto assign = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(vectors[i], out.centroids[0]);
            for (int c = 1; c < k; ++c) {
                double d = sq_dist(vectors[i], out.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            out.labels[i] = best;
        }
    };
    auto inertia_of = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sq_dist(vectors[i], out.centroids[out.labels[i]]);
        return s;
    };

    assign();
    out.inertia = inertia_of();
    out.inertia_trace.push_back(out.inertia);

    const std::size_t dim = vectors[0].size();
    for (int iter = 0; iter < max_iter; ++iter) {
        // Update step: means of the current assignment.
        std::vector<Vec> sums(k, Vec(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) sums[out.labels[i]][d] += vectors[i][d];
            ++counts[out.labels[i]];
        }
        std::vector<char> taken(n, 0);
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t d = 0; d < dim; ++d) {
                    out.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
                }
            }
        }
        // Re-seed empty clusters with the point farthest from its centroid;
        // leaving the centroid where assignment put nothing cannot lower
        // inertia, moving it onto a point can.
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far_i = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                double d = sq_dist(vectors[i], out.centroids[out.labels[i]]);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            out.centroids[c] = vectors[far_i];
            taken[far_i] = 1;
        }

        std::vector<int> prev = out.labels;
        assign();
        out.inertia = inertia_of();
        out.inertia_trace.push_back(out.inertia);
        out.iterations = iter + 1;
        if (out.labels == prev) break;
    }
    return out;
}

SomGrid som_train(const std::vector<Vec>& vectors, int rows, int cols, int epochs,
                  std::uint64_t seed, double lr0, double radius0) {
    check_vectors(vectors);
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid dimensions must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    const std::size_t dim = vectors[0].size();
    if (radius0 <= 0.0) radius0 = std::max(0.5, std::max(rows, cols) / 2.0);

    Vec lo(dim, std::numeric_limits<double>::infinity());
    Vec hi(dim, -std::numeric_limits<double>::infinity());
    for (const Vec& v : vectors) {
        for (std::size_t d = 0; d < dim; ++d) {
            lo[d] = std::min(lo[d], v[d]);
            hi[d] = std::max(hi[d], v[d]);
        }
    }

    Rng rng(seed);
    SomGrid grid;
    grid.rows = rows;
    grid.cols = cols;
    grid.weights.assign(static_cast<std::size_t>(rows) * cols, Vec(dim, 0.0));
    for (Vec& w : grid.weights) {
        for (std::size_t d = 0; d < dim; ++d) w[d] = lo[d] + rng.next_double() * (hi[d] - lo[d]);
    }

    const std::size_t n = vectors.size();
    const double total_steps = static_cast<double>(epochs) * static_cast<double>(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::size_t step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t oi = 0; oi < n; ++oi, ++step) {
            const Vec& x = vectors[order[oi]];
            const double ratio =
                total_steps > 1.0 ? static_cast<double>(step) / (total_steps - 1.0) : 0.0;
            const double alpha = lr0 * std::pow(0.01, ratio);
            const double sigma = radius0 * std::pow(0.5 / radius0, ratio);

            auto [br, bc] = som_map(grid, x);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const double dg = static_cast<double>(r - br) * (r - br) +
                                      static_cast<double>(c - bc) * (c - bc);
                    const double hfac = std::exp(-dg / (2.0 * sigma * sigma));
                    Vec& w = grid.weights[static_cast<std::size_t>(r) * cols + c];
                    for (std::size_t d = 0; d < dim; ++d) w[d] += alpha * hfac * (x[d] - w[d]);
                }
            }
        }
    }
    grid.trained_epochs = epochs;
    return grid;
}

std::pair<int, int> som_map(const SomGrid& grid, const Vec& v) {
    if (grid.weights.empty() || grid.weights[0].size() != v.size()) {
        throw std::invalid_argument("som_map: dimension mismatch");
    }
    std::size_t best = 0;
    double best_d = sq_dist(grid.weights[0], v);
    for (std::size_t i = 1; i < grid.weights.size(); ++i) {
        double d = sq_dist(grid.weights[i], v);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {static_cast<int>(best) / grid.cols, static_cast<int>(best) % grid.cols};
}

double som_quantization_error(const SomGrid& grid, const std::vector<Vec>& vectors) {
    if (vectors.empty()) return 0.0;
    double total = 0.0;
    for (const Vec& v : vectors) {
        auto [r, c] = som_map(grid, v);
        total += std::sqrt(sq_dist(grid.weight(r, c), v));
    }
    return total / static_cast<double>(vectors.size());
}

std::vector<std::vector<std::size_t>> leader_cluster(
    std::size_t count, const std::function<double(std::size_t, std::size_t)>& dissimilarity,
    double tau) {
    if (tau < 0.0) throw std::invalid_argument("leader_cluster: tau must be >= 0");
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t i = 0; i < count; ++i) {
        bool placed = false;
        for (auto& cls : classes) {
            if (dissimilarity(cls.front(), i) <= tau) {
                cls.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back({i});
    }
    return classes;
}

}  // namespace glyphspot
