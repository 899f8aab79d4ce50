#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glyphspot/segment.hpp"

namespace glyphspot {

enum class MatchMethod { Xor, Edm, VProj, VProjDtw };

std::string method_name(MatchMethod m);
std::optional<MatchMethod> method_from_name(const std::string& name);

// Per-column foreground counts of a normalized glyph grid.
using Profile = std::vector<int>;

struct DissimilarityRecord {
    std::string query_id;
    std::string target_id;
    MatchMethod method = MatchMethod::Xor;
    double value = 0.0;
};

// Fraction of pixels where the two grids disagree, in [0, 1].
double xor_dissimilarity(const Glyph& a, const Glyph& b);

// Distance-weighted symmetric mismatch: every pixel that is ink in exactly
// one glyph costs its Euclidean distance to the other glyph's nearest ink;
// the sum is divided by the total ink count of both glyphs.
double edm_dissimilarity(const Glyph& a, const Glyph& b);

Profile vertical_profile(const Glyph& g);

// Euclidean distance between profiles divided by the grid side, so a full
// column of disagreement costs 1.
double profile_dissimilarity(const Profile& p, const Profile& q);

// Classic dynamic time warping with local cost |p_i - q_j| and steps
// (1,0),(0,1),(1,1); every visited cell is charged. `band` is an optional
// Sakoe-Chiba width |i - j| <= band.
double dtw_raw_cost(const Profile& p, const Profile& q,
                    std::optional<int> band = std::nullopt);

// dtw_raw_cost normalized by len(p) + len(q).
double dtw_distance(const Profile& p, const Profile& q,
                    std::optional<int> band = std::nullopt);

inline constexpr double kXorSkipPenalty = 0.25;
inline constexpr double kEdmSkipPenalty = 2.0;
double default_skip_penalty(MatchMethod char_method);

// DTW over two glyph sequences; local cost is the per-character
// dissimilarity, and horizontal/vertical steps add `skip_penalty` on top of
// the entered cell's cost. Normalized by len(a) + len(b).
double word_dissimilarity(std::span<const Glyph> a, std::span<const Glyph> b,
                          MatchMethod char_method, double skip_penalty);
double word_dissimilarity(std::span<const Glyph> a, std::span<const Glyph> b,
                          MatchMethod char_method);

// JSON-lines stream of records, one object per line, sorted by
// (query_id, value, target_id).
void write_records_jsonl(std::ostream& out, std::vector<DissimilarityRecord> records);

}  // namespace glyphspot
