#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "glyphspot/rng.hpp"

namespace glyphspot {

using Vec = std::vector<double>;

struct ClusterAssignment {
    std::vector<int> labels;          // one per input vector, in [0, k)
    std::vector<Vec> centroids;       // k vectors
    double inertia = 0.0;             // sum of squared distances to assigned centroids
    std::vector<double> inertia_trace;  // inertia after init and after each Lloyd iteration
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding from the given seed. Stops when
// assignments are unchanged or after max_iter iterations. Empty clusters are
// re-seeded with the point farthest from its assigned centroid. Fully
// deterministic for fixed (inputs, k, seed).
ClusterAssignment kmeans(const std::vector<Vec>& vectors, int k, std::uint64_t seed,
                         int max_iter = 100);

struct SomGrid {
    int rows = 0;
    int cols = 0;
    std::vector<Vec> weights;  // row-major, rows*cols entries
    int trained_epochs = 0;

    const Vec& weight(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
};

// Self-organizing map with Gaussian neighborhood. Weights start uniform in
// the per-dimension data ranges; the learning rate decays exponentially from
// lr0 to lr0/100 and the radius from radius0 to 0.5 over all steps. Vectors
// are visited in a seeded shuffled order each epoch.
SomGrid som_train(const std::vector<Vec>& vectors, int rows, int cols, int epochs,
                  std::uint64_t seed, double lr0 = 0.5, double radius0 = 0.0);

// Best-matching unit; ties go to the lowest row-major node index.
std::pair<int, int> som_map(const SomGrid& grid, const Vec& v);

// Mean Euclidean distance of each vector to its BMU.
double som_quantization_error(const SomGrid& grid, const std::vector<Vec>& vectors);

// Single-pass threshold clustering: each item joins the first class whose
// founding member is within tau, else founds a new class. Returns member
// indices per class, in founding order. Order-dependent by design.
std::vector<std::vector<std::size_t>> leader_cluster(
    std::size_t count, const std::function<double(std::size_t, std::size_t)>& dissimilarity,
    double tau);

}  // namespace glyphspot
