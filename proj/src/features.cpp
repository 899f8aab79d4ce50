#include "glyphspot/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>

namespace glyphspot {

std::string extractor_name(Extractor e) {
    return e == Extractor::FractalSig ? "fractal_sig" : "wavelet_energy";
}

FitDiagnostics fit_line(const std::vector<std::pair<double, double>>& points) {
    const std::size_t n = points.size();
    if (n < 2) throw std::invalid_argument("fit_line: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    FitDiagnostics fit;
    fit.points = points;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r2 = 1.0;  // constant data fitted exactly by a flat line
    } else {
        double ss_res = 0.0;
        for (const auto& [x, y] : points) {
            double e = y - (fit.slope * x + fit.intercept);
            ss_res += e * e;
        }
        fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

namespace {

// Smallest power of two >= n, floored at `floor_side` so every fit gets at
// least three dyadic scales.
int padded_side(int n, int floor_side = 16) {
    int s = floor_side;
    while (s < n) s *= 2;
    return s;
}

}  // namespace

FitDiagnostics box_counting_dimension(const BinaryImage& bin) {
    if (bin.foreground_count() == 0) {
        throw std::invalid_argument("box_counting_dimension: empty foreground");
    }
    const int side = padded_side(std::max(bin.width, bin.height));

    std::vector<std::pair<double, double>> points;
    for (int s = 2; s <= side / 2; s *= 2) {
        const int cells = side / s;
        long long occupied = 0;
        for (int by = 0; by < cells; ++by) {
            for (int bx = 0; bx < cells; ++bx) {
                bool hit = false;
                const int y1 = std::min((by + 1) * s, bin.height);
                const int x1 = std::min((bx + 1) * s, bin.width);
                for (int y = by * s; y < y1 && !hit; ++y) {
                    for (int x = bx * s; x < x1; ++x) {
                        if (bin.get(x, y)) {
                            hit = true;
                            break;
                        }
                    }
                }
                if (hit) ++occupied;
            }
        }
        points.push_back({std::log(1.0 / s), std::log(static_cast<double>(occupied))});
    }
    return fit_line(points);
}

namespace {

// Replicate-pads to a square power-of-two side.
GrayImage pad_replicate_pow2(const GrayImage& img, int floor_side) {
    const int side = padded_side(std::max(img.width, img.height), floor_side);
    if (side == img.width && side == img.height) return img;
    GrayImage out(side, side);
    for (int y = 0; y < side; ++y) {
        const int sy = std::min(y, img.height - 1);
        for (int x = 0; x < side; ++x) {
            out.at(x, y) = img.at(std::min(x, img.width - 1), sy);
        }
    }
    return out;
}

}  // namespace

FitDiagnostics dbc_dimension(const GrayImage& img) {
    const GrayImage padded = pad_replicate_pow2(img, 16);
    const int side = padded.width;
    const double gray_levels = 256.0;

    std::vector<std::pair<double, double>> points;
    for (int s = 2; s <= side / 2; s *= 2) {
        const double box_h = s * gray_levels / side;
        const int cells = side / s;
        long long boxes = 0;
        for (int by = 0; by < cells; ++by) {
            for (int bx = 0; bx < cells; ++bx) {
                std::uint8_t lo = 255, hi = 0;
                for (int y = by * s; y < (by + 1) * s; ++y) {
                    for (int x = bx * s; x < (bx + 1) * s; ++x) {
                        std::uint8_t v = padded.at(x, y);
                        lo = std::min(lo, v);
                        hi = std::max(hi, v);
                    }
                }
                boxes += static_cast<long long>(std::floor(hi / box_h)) -
                         static_cast<long long>(std::floor(lo / box_h)) + 1;
            }
        }
        points.push_back({std::log(static_cast<double>(side) / s),
                          std::log(static_cast<double>(boxes))});
    }
    return fit_line(points);
}

FeatureVector fractal_signature(const GrayImage& img, int k) {
    if (k < 1) throw std::invalid_argument("fractal_signature: k must be >= 1");
    if (img.width < 8 * k || img.height < 8 * k) {
        throw std::invalid_argument("fractal_signature: image too small for k");
    }
    FeatureVector fv;
    fv.extractor = Extractor::FractalSig;
    fv.params.grid_k = k;
    fv.params.side = img.width == img.height ? img.width : 0;
    fv.values.push_back(dbc_dimension(img).slope);
    for (int cy = 0; cy < k; ++cy) {
        const int y0 = cy * img.height / k;
        const int y1 = (cy + 1) * img.height / k;
        for (int cx = 0; cx < k; ++cx) {
            const int x0 = cx * img.width / k;
            const int x1 = (cx + 1) * img.width / k;
            GrayImage cell(x1 - x0, y1 - y0);
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) cell.at(x - x0, y - y0) = img.at(x, y);
            }
            fv.values.push_back(dbc_dimension(cell).slope);
        }
    }
    return fv;
}

std::vector<double> wavelet_subband_energies(const GrayImage& img, int levels) {
    if (levels < 1) throw std::invalid_argument("wavelet: levels must be >= 1");
    const int unit = 1 << levels;
    if (img.width < 1 || img.height < 1) throw std::invalid_argument("wavelet: empty image");
    if (unit > std::max(img.width, img.height)) {
        throw std::invalid_argument("wavelet: levels too large for image side");
    }

    // Pad each dimension up to a multiple of 2^L by edge replication.
    const int w = ((img.width + unit - 1) / unit) * unit;
    const int h = ((img.height + unit - 1) / unit) * unit;

    // Integer lifting: at level l the stored coefficients are 2^l times the
    // orthonormal ones, so each sub-band's energy is sum(c^2) / 4^l. Keeping
    // integers makes detail bands exactly invariant to constant offsets.
    std::vector<std::int64_t> buf(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int sy = std::min(y, img.height - 1);
        for (int x = 0; x < w; ++x) {
            buf[static_cast<std::size_t>(y) * w + x] = img.at(std::min(x, img.width - 1), sy);
        }
    }

    auto at = [&](int x, int y) -> std::int64_t& {
        return buf[static_cast<std::size_t>(y) * w + x];
    };

    std::vector<double> energies;
    int cw = w, ch = h;
    std::vector<std::int64_t> row;
    for (int level = 1; level <= levels; ++level) {
        // Rows: [sums | diffs].
        row.resize(cw);
        for (int y = 0; y < ch; ++y) {
            for (int x = 0; x < cw; ++x) row[x] = at(x, y);
            for (int x = 0; x < cw / 2; ++x) {
                at(x, y) = row[2 * x] + row[2 * x + 1];
                at(cw / 2 + x, y) = row[2 * x] - row[2 * x + 1];
            }
        }
        // Columns: [sums ; diffs].
        row.resize(ch);
        for (int x = 0; x < cw; ++x) {
            for (int y = 0; y < ch; ++y) row[y] = at(x, y);
            for (int y = 0; y < ch / 2; ++y) {
                at(x, y) = row[2 * y] + row[2 * y + 1];
                at(x, ch / 2 + y) = row[2 * y] - row[2 * y + 1];
            }
        }

        const double scale = std::pow(4.0, -level);
        auto band_energy = [&](int x0, int y0, int bw, int bh) {
            double e = 0.0;
            for (int y = y0; y < y0 + bh; ++y) {
                for (int x = x0; x < x0 + bw; ++x) {
                    double c = static_cast<double>(at(x, y));
                    e += c * c;
                }
            }
            return e * scale;
        };
        const int hw = cw / 2, hh = ch / 2;
        energies.push_back(band_energy(0, hh, hw, hh));   // LH: vertical detail
        energies.push_back(band_energy(hw, 0, hw, hh));   // HL: horizontal detail
        energies.push_back(band_energy(hw, hh, hw, hh));  // HH
        cw = hw;
        ch = hh;
    }
    const double scale = std::pow(4.0, -levels);
    double approx = 0.0;
    for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) {
            double c = static_cast<double>(at(x, y));
            approx += c * c;
        }
    }
    energies.push_back(approx * scale);
    return energies;
}

FeatureVector wavelet_energy_features(const GrayImage& img, int levels) {
    FeatureVector fv;
    fv.extractor = Extractor::WaveletEnergy;
    fv.params.levels = levels;
    fv.params.side = img.width == img.height ? img.width : 0;
    fv.values = wavelet_subband_energies(img, levels);
    double total = 0.0;
    for (double e : fv.values) total += e;
    if (total == 0.0) {
        std::fill(fv.values.begin(), fv.values.end(), 0.0);
        fv.values.back() = 1.0;
    } else {
        for (double& e : fv.values) e /= total;
    }
    return fv;
}

std::string classify_font_1nn(const FeatureVector& query,
                              const std::vector<LabeledFeature>& training) {
    if (training.empty()) throw std::invalid_argument("classify_font_1nn: empty training set");
    double best = std::numeric_limits<double>::infinity();
    const std::string* best_label = nullptr;
    for (const LabeledFeature& t : training) {
        if (t.features.extractor != query.extractor || !(t.features.params == query.params) ||
            t.features.values.size() != query.values.size()) {
            throw std::invalid_argument("classify_font_1nn: extractor/params mismatch");
        }
        double sq = 0.0;
        for (std::size_t i = 0; i < query.values.size(); ++i) {
            double d = query.values[i] - t.features.values[i];
            sq += d * d;
        }
        if (sq < best) {
            best = sq;
            best_label = &t.label;
        }
    }
    return *best_label;
}

void write_features_jsonl(std::ostream& out,
                          const std::vector<std::pair<std::string, FeatureVector>>& rows) {
    for (const auto& [id, fv] : rows) {
        nlohmann::json line = {
            {"glyph_id", id},
            {"extractor", extractor_name(fv.extractor)},
            {"params",
             {{"grid_k", fv.params.grid_k}, {"levels", fv.params.levels}, {"side", fv.params.side}}},
            {"values", fv.values},
        };
        out << line.dump() << "\n";
    }
}

}  // namespace glyphspot
