#include "glyphspot/matchers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>

#include "glyphspot/imgcore.hpp"

namespace glyphspot {

std::string method_name(MatchMethod m) {
    switch (m) {
        case MatchMethod::Xor: return "xor";
        case MatchMethod::Edm: return "edm";
        case MatchMethod::VProj: return "vproj";
        case MatchMethod::VProjDtw: return "vproj_dtw";
    }
    return "?";
}

std::optional<MatchMethod> method_from_name(const std::string& name) {
    if (name == "xor") return MatchMethod::Xor;
    if (name == "edm") return MatchMethod::Edm;
    if (name == "vproj") return MatchMethod::VProj;
    if (name == "vproj_dtw") return MatchMethod::VProjDtw;
    return std::nullopt;
}

namespace {

void require_same_side(const Glyph& a, const Glyph& b) {
    if (a.grid.width != b.grid.width || a.grid.height != b.grid.height) {
        throw std::invalid_argument("glyph grids have different sides");
    }
}

}  // namespace

double xor_dissimilarity(const Glyph& a, const Glyph& b) {
    require_same_side(a, b);
    const std::size_t n = a.grid.mask.size();
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (a.grid.mask[i] != b.grid.mask[i]) ++mismatches;
    }
    return static_cast<double>(mismatches) / static_cast<double>(n);
}

double edm_dissimilarity(const Glyph& a, const Glyph& b) {
    require_same_side(a, b);
    const int fa = a.grid.foreground_count();
    const int fb = b.grid.foreground_count();
    if (fa == 0 || fb == 0) {
        throw std::invalid_argument("edm_dissimilarity: glyph with empty foreground");
    }
    DistanceField dta = distance_transform(a.grid);
    DistanceField dtb = distance_transform(b.grid);
    double sum = 0.0;
    const std::size_t n = a.grid.mask.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (a.grid.mask[i] && !b.grid.mask[i]) sum += dtb.dist[i];
        if (b.grid.mask[i] && !a.grid.mask[i]) sum += dta.dist[i];
    }
    return sum / static_cast<double>(fa + fb);
}

Profile vertical_profile(const Glyph& g) {
    Profile values(g.grid.width, 0);
    for (int y = 0; y < g.grid.height; ++y) {
        for (int x = 0; x < g.grid.width; ++x) {
            if (g.grid.get(x, y)) ++values[x];
        }
    }
    return values;
}

double profile_dissimilarity(const Profile& p, const Profile& q) {
    if (p.size() != q.size()) throw std::invalid_argument("profile lengths differ");
    double sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = static_cast<double>(p[i]) - static_cast<double>(q[i]);
        sq += d * d;
    }
    return std::sqrt(sq) / static_cast<double>(p.size());
}

double dtw_raw_cost(const Profile& p, const Profile& q, std::optional<int> band) {
    const int m = static_cast<int>(p.size());
    const int n = static_cast<int>(q.size());
    if (m == 0 || n == 0) throw std::invalid_argument("dtw: empty profile");
    if (band && *band < std::abs(m - n)) throw std::invalid_argument("dtw: infeasible band");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n, inf), cur(n, inf);
    for (int i = 0; i < m; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        for (int j = 0; j < n; ++j) {
            if (band && std::abs(i - j) > *band) continue;
            double c = std::abs(static_cast<double>(p[i]) - static_cast<double>(q[j]));
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = inf;
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
                if (i > 0) best = std::min(best, prev[j]);
                if (j > 0) best = std::min(best, cur[j - 1]);
            }
            cur[j] = best + c;
        }
        std::swap(prev, cur);
    }
    return prev[n - 1];
}

double dtw_distance(const Profile& p, const Profile& q, std::optional<int> band) {
    return dtw_raw_cost(p, q, band) / static_cast<double>(p.size() + q.size());
}

double default_skip_penalty(MatchMethod char_method) {
    return char_method == MatchMethod::Edm ? kEdmSkipPenalty : kXorSkipPenalty;
}

double word_dissimilarity(std::span<const Glyph> a, std::span<const Glyph> b,
                          MatchMethod char_method, double skip_penalty) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(b.size());
    if (m == 0 || n == 0) throw std::invalid_argument("word_dissimilarity: empty sequence");

    auto char_cost = [&](int i, int j) {
        return char_method == MatchMethod::Edm ? edm_dissimilarity(a[i], b[j])
                                               : xor_dissimilarity(a[i], b[j]);
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n, inf), cur(n, inf);
    for (int i = 0; i < m; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        for (int j = 0; j < n; ++j) {
            double c = char_cost(i, j);
            double best;
            if (i == 0 && j == 0) {
                best = c;
            } else {
                best = inf;
                if (i > 0 && j > 0) best = std::min(best, prev[j - 1] + c);
                if (i > 0) best = std::min(best, prev[j] + c + skip_penalty);
                if (j > 0) best = std::min(best, cur[j - 1] + c + skip_penalty);
            }
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[n - 1] / static_cast<double>(m + n);
}

double word_dissimilarity(std::span<const Glyph> a, std::span<const Glyph> b,
                          MatchMethod char_method) {
    return word_dissimilarity(a, b, char_method, default_skip_penalty(char_method));
}

void write_records_jsonl(std::ostream& out, std::vector<DissimilarityRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const DissimilarityRecord& a, const DissimilarityRecord& b) {
                  if (a.query_id != b.query_id) return a.query_id < b.query_id;
                  if (a.value != b.value) return a.value < b.value;
                  return a.target_id < b.target_id;
              });
    for (const DissimilarityRecord& r : records) {
        nlohmann::json line = {
            {"query_id", r.query_id},
            {"target_id", r.target_id},
            {"method", method_name(r.method)},
            {"value", r.value},
        };
        out << line.dump() << "\n";
    }
}

}  // namespace glyphspot
