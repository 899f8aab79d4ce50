#pragma once

#include <string>
#include <vector>

#include "glyphspot/image.hpp"

namespace glyphspot {

enum class Extractor { FractalSig, WaveletEnergy };

std::string extractor_name(Extractor e);

struct FeatureParams {
    int grid_k = 0;   // fractal signature cells per side
    int levels = 0;   // wavelet decomposition levels
    int side = 0;     // canvas side the features were computed on, 0 if native

    bool operator==(const FeatureParams&) const = default;
};

struct FeatureVector {
    Extractor extractor = Extractor::FractalSig;
    std::vector<double> values;
    FeatureParams params;
};

// Log-log least-squares fit backing a fractal dimension estimate.
struct FitDiagnostics {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<std::pair<double, double>> points;  // (log scale, log count)
};

FitDiagnostics fit_line(const std::vector<std::pair<double, double>>& points);

// Binary box counting: pad with background to a power-of-two side (at least
// 16 so the fit has three scales), count occupied s x s boxes for
// s = 2..side/2, fit log N against log(1/s).
FitDiagnostics box_counting_dimension(const BinaryImage& bin);

// Differential box counting over the intensity surface (Sarkar-Chaudhuri
// style): per s x s block, count intensity boxes of height s*256/side
// between the block's min and max; fit log N_r against log(side/s). Edge
// replication pads to a power-of-two side (at least 16).
FitDiagnostics dbc_dimension(const GrayImage& img);

// [global DBC dimension, then DBC of each of the k x k cells, row-major].
// Requires image side >= 8k.
FeatureVector fractal_signature(const GrayImage& img, int k);

// Unnormalized energies of the 3L detail sub-bands plus the final
// approximation of an L-level orthonormal Haar transform, ordered
// [LH1, HL1, HH1, ..., LHL, HLL, HHL, approx]. Edge replication pads each
// dimension to a multiple of 2^L. Their sum equals the padded image's total
// energy (Parseval).
std::vector<double> wavelet_subband_energies(const GrayImage& img, int levels);

// Sub-band energies normalized to sum 1. A zero-energy image puts all its
// weight in the approximation slot.
FeatureVector wavelet_energy_features(const GrayImage& img, int levels);

struct LabeledFeature {
    FeatureVector features;
    std::string label;
};

// Label of the Euclidean-nearest training vector; ties break to the lowest
// training index. All vectors must share extractor and params.
std::string classify_font_1nn(const FeatureVector& query,
                              const std::vector<LabeledFeature>& training);

// JSON-lines serialization: {glyph_id, extractor, params, values} per line.
void write_features_jsonl(std::ostream& out,
                          const std::vector<std::pair<std::string, FeatureVector>>& rows);

}  // namespace glyphspot
