#pragma once

// Independent brute-force oracles. These deliberately recompute everything
// the slow, obvious way and must not share code with the library paths they
// check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "glyphspot/image.hpp"
#include "glyphspot/matchers.hpp"
#include "glyphspot/rng.hpp"
#include "glyphspot/segment.hpp"

namespace oracles {

using glyphspot::BinaryImage;
using glyphspot::Glyph;
using glyphspot::GrayImage;

// All-pairs nearest foreground scan.
inline std::vector<double> brute_force_distance_field(const BinaryImage& bin) {
    std::vector<double> out(bin.mask.size(), static_cast<double>(bin.width + bin.height));
    std::vector<std::pair<int, int>> fg;
    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            if (bin.get(x, y)) fg.push_back({x, y});
        }
    }
    if (fg.empty()) return out;
    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            long long best = std::numeric_limits<long long>::max();
            for (const auto& [fx, fy] : fg) {
                long long dx = x - fx, dy = y - fy;
                best = std::min(best, dx * dx + dy * dy);
            }
            out[static_cast<std::size_t>(y) * bin.width + x] =
                std::sqrt(static_cast<double>(best));
        }
    }
    return out;
}

// Direct O(n^2 k^2) convolution with the outer product of the normalized 1-D
// Gaussian kernel, clamp-to-edge, rounded half up.
inline GrayImage direct_gaussian_2d(const GrayImage& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k1(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k1[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += k1[i + radius];
    }
    for (double& k : k1) k /= sum;

    GrayImage out(img.width, img.height);
    auto clampi = [](int v, int hi) { return std::clamp(v, 0, hi - 1); };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    acc += k1[dx + radius] * k1[dy + radius] *
                           img.at(clampi(x + dx, img.width), clampi(y + dy, img.height));
                }
            }
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(acc + 0.5), 0.0, 255.0));
        }
    }
    return out;
}

// Exhaustive scan of all 256 thresholds maximizing between-class variance
// (ties to the smallest threshold). Foreground is intensity < T.
inline int otsu_exhaustive(const GrayImage& img) {
    int best_t = 0;
    double best_var = -1.0;
    for (int t = 0; t <= 255; ++t) {
        double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
        for (std::uint8_t v : img.data) {
            if (v < t) {
                n0 += 1;
                s0 += v;
            } else {
                n1 += 1;
                s1 += v;
            }
        }
        double var = 0.0;
        if (n0 > 0 && n1 > 0) {
            double d = s0 / n0 - s1 / n1;
            var = n0 * n1 * d * d;
        }
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

// Per-mismatch-pixel nearest-ink search.
inline double brute_force_edm(const Glyph& a, const Glyph& b) {
    auto nearest = [](const BinaryImage& g, int x, int y) {
        long long best = std::numeric_limits<long long>::max();
        for (int fy = 0; fy < g.height; ++fy) {
            for (int fx = 0; fx < g.width; ++fx) {
                if (!g.get(fx, fy)) continue;
                long long dx = x - fx, dy = y - fy;
                best = std::min(best, dx * dx + dy * dy);
            }
        }
        return std::sqrt(static_cast<double>(best));
    };
    double sum = 0.0;
    for (int y = 0; y < a.grid.height; ++y) {
        for (int x = 0; x < a.grid.width; ++x) {
            bool ia = a.grid.get(x, y), ib = b.grid.get(x, y);
            if (ia && !ib) sum += nearest(b.grid, x, y);
            if (ib && !ia) sum += nearest(a.grid, x, y);
        }
    }
    return sum / (a.grid.foreground_count() + b.grid.foreground_count());
}

// Exhaustive enumeration of all monotone warping paths with steps
// (1,0),(0,1),(1,1); every visited cell is charged. Exponential; lengths
// must stay small.
inline double dtw_enumerate(const std::vector<int>& p, const std::vector<int>& q) {
    const int m = static_cast<int>(p.size());
    const int n = static_cast<int>(q.size());
    double best = std::numeric_limits<double>::infinity();
    struct Frame {
        int i, j;
        double cost;
    };
    std::vector<Frame> stack{{0, 0, std::abs(static_cast<double>(p[0]) - q[0])}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.i == m - 1 && f.j == n - 1) {
            best = std::min(best, f.cost);
            continue;
        }
        auto push = [&](int ni, int nj) {
            if (ni >= m || nj >= n) return;
            stack.push_back({ni, nj, f.cost + std::abs(static_cast<double>(p[ni]) - q[nj])});
        };
        push(f.i + 1, f.j);
        push(f.i, f.j + 1);
        push(f.i + 1, f.j + 1);
    }
    return best;
}

// Same enumeration for glyph-sequence alignment with a skip penalty on
// non-diagonal steps.
inline double word_alignment_enumerate(std::span<const Glyph> a, std::span<const Glyph> b,
                                       glyphspot::MatchMethod method, double skip) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(b.size());
    auto cost = [&](int i, int j) {
        return method == glyphspot::MatchMethod::Edm ? glyphspot::edm_dissimilarity(a[i], b[j])
                                                     : glyphspot::xor_dissimilarity(a[i], b[j]);
    };
    double best = std::numeric_limits<double>::infinity();
    struct Frame {
        int i, j;
        double c;
    };
    std::vector<Frame> stack{{0, 0, cost(0, 0)}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.i == m - 1 && f.j == n - 1) {
            best = std::min(best, f.c);
            continue;
        }
        if (f.i + 1 < m && f.j + 1 < n) {
            stack.push_back({f.i + 1, f.j + 1, f.c + cost(f.i + 1, f.j + 1)});
        }
        if (f.i + 1 < m) stack.push_back({f.i + 1, f.j, f.c + cost(f.i + 1, f.j) + skip});
        if (f.j + 1 < n) stack.push_back({f.i, f.j + 1, f.c + cost(f.i, f.j + 1) + skip});
    }
    return best / (m + n);
}

// Independent DBC loop: per-pixel scatter into per-block min/max tables.
inline std::vector<std::pair<double, double>> dbc_points_oracle(const GrayImage& padded) {
    const int side = padded.width;
    std::vector<std::pair<double, double>> points;
    for (int s = 2; s <= side / 2; s *= 2) {
        const int cells = side / s;
        std::vector<int> lo(static_cast<std::size_t>(cells) * cells, 256);
        std::vector<int> hi(static_cast<std::size_t>(cells) * cells, -1);
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                std::size_t cell = static_cast<std::size_t>(y / s) * cells + x / s;
                lo[cell] = std::min(lo[cell], static_cast<int>(padded.at(x, y)));
                hi[cell] = std::max(hi[cell], static_cast<int>(padded.at(x, y)));
            }
        }
        const double box_h = s * 256.0 / side;
        long long total = 0;
        for (std::size_t c = 0; c < lo.size(); ++c) {
            total += static_cast<long long>(std::floor(hi[c] / box_h)) -
                     static_cast<long long>(std::floor(lo[c] / box_h)) + 1;
        }
        points.push_back({std::log(static_cast<double>(side) / s),
                          std::log(static_cast<double>(total))});
    }
    return points;
}

// Seeded random helpers shared by the tests.
inline BinaryImage random_mask(glyphspot::Rng& rng, int w, int h, double density) {
    BinaryImage bin(w, h);
    for (auto& m : bin.mask) m = rng.next_double() < density ? 1 : 0;
    return bin;
}

inline GrayImage random_gray(glyphspot::Rng& rng, int w, int h) {
    GrayImage img(w, h);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next_below(256));
    return img;
}

inline Glyph glyph_from_mask(BinaryImage mask, std::string id = "g") {
    Glyph g;
    g.source_id = std::move(id);
    g.box = glyphspot::Box{0, 0, mask.width, mask.height};
    g.grid = std::move(mask);
    return g;
}

}  // namespace oracles
