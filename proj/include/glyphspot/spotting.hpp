#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "glyphspot/matchers.hpp"

namespace glyphspot {

// Precomputed per-glyph data for batch matching (distance transforms for
// EDM, column profiles for the projection methods).
class MatcherCache {
public:
    explicit MatcherCache(std::span<const Glyph> glyphs);

    std::size_t size() const { return glyphs_.size(); }
    const Glyph& glyph(std::size_t i) const { return glyphs_[i]; }
    const std::string& id(std::size_t i) const { return ids_[i]; }

    // Dissimilarity between two cached glyphs.
    double dissimilarity(std::size_t i, std::size_t j, MatchMethod method) const;

private:
    std::vector<Glyph> glyphs_;
    std::vector<std::string> ids_;
    std::vector<std::vector<double>> dt_;   // distance transform per glyph
    std::vector<int> fg_;                   // foreground counts
    std::vector<Profile> profiles_;
};

// Either a dissimilarity threshold or a result-count cap; exactly one.
struct SpotLimit {
    std::optional<double> tau;
    std::optional<std::size_t> top_k;

    static SpotLimit by_tau(double t) { return {t, std::nullopt}; }
    static SpotLimit by_top_k(std::size_t k) { return {std::nullopt, k}; }
};

struct SpotResult {
    std::string query_id;
    MatchMethod method = MatchMethod::Xor;
    std::vector<std::pair<std::string, double>> ranked;   // ascending by value, ties by id
    std::optional<double> threshold;
    std::vector<std::pair<std::string, double>> matches;  // prefix of ranked with value <= tau
};

// Ranks every corpus glyph against the query (the query's own id is
// excluded), ascending by dissimilarity with ties broken by glyph id.
SpotResult spot(const Glyph& query, std::span<const Glyph> corpus, MatchMethod method,
                const SpotLimit& limit);
SpotResult spot_cached(std::size_t query_index, const MatcherCache& cache, MatchMethod method,
                       const SpotLimit& limit);

using RelevanceTruth = std::map<std::string, std::set<std::string>>;

struct MethodEval {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double tau_used = 0.0;
    long long tp = 0, fp = 0, fn = 0;
    std::vector<std::tuple<double, double, double>> pr_curve;  // (tau, precision, recall)
};

struct EvalReport {
    std::map<std::string, MethodEval> per_method;  // keyed by method name
};

// Micro-averaged precision/recall over a batch of spot results (counts are
// pooled across queries before the ratios). Results may mix methods; each
// method is scored at its own threshold. Every query must appear in `truth`.
EvalReport evaluate(const std::vector<SpotResult>& results, const RelevanceTruth& truth);

enum class TauPolicy { BestF1, Fixed };

// Runs spot + evaluate for each method over the same queries. best_f1 picks
// each method's tau maximizing micro-F1 over the pooled sweep (ties go to
// the smaller tau); fixed applies `fixed_tau` to every method.
EvalReport compare_methods(const MatcherCache& cache, const std::vector<std::size_t>& query_indices,
                           const RelevanceTruth& truth, const std::vector<MatchMethod>& methods,
                           TauPolicy policy, double fixed_tau = 0.0);

// Reference precision/recall reported for xor / edm / vproj on the original
// (unavailable) corpus; carried in reports as an annotation, never asserted.
struct BaselineEntry {
    double precision;
    double recall;
};
const std::map<std::string, BaselineEntry>& reference_baseline();

std::string eval_report_to_json(const EvalReport& report, bool include_baseline = true);

// Fixed-width table, methods as columns, Precision/Recall rows, two-decimal
// percentages.
std::string eval_report_to_table(const EvalReport& report, bool include_baseline = true);

}  // namespace glyphspot
