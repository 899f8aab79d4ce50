#include "glyphspot/spotting.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "glyphspot/imgcore.hpp"
#include "glyphspot/parallel.hpp"

namespace glyphspot {

MatcherCache::MatcherCache(std::span<const Glyph> glyphs)
    : glyphs_(glyphs.begin(), glyphs.end()) {
    const std::size_t n = glyphs_.size();
    ids_.resize(n);
    dt_.resize(n);
    fg_.resize(n);
    profiles_.resize(n);
    parallel_for(n, [&](std::size_t i) {
        ids_[i] = glyph_uid(glyphs_[i]);
        dt_[i] = distance_transform(glyphs_[i].grid).dist;
        fg_[i] = glyphs_[i].grid.foreground_count();
        profiles_[i] = vertical_profile(glyphs_[i]);
    });
}

double MatcherCache::dissimilarity(std::size_t i, std::size_t j, MatchMethod method) const {
    const Glyph& a = glyphs_[i];
    const Glyph& b = glyphs_[j];
    switch (method) {
        case MatchMethod::Xor:
            return xor_dissimilarity(a, b);
        case MatchMethod::Edm: {
            if (fg_[i] == 0 || fg_[j] == 0) {
                throw std::invalid_argument("edm: glyph with empty foreground");
            }
            double sum = 0.0;
            const std::size_t n = a.grid.mask.size();
            for (std::size_t p = 0; p < n; ++p) {
                if (a.grid.mask[p] && !b.grid.mask[p]) sum += dt_[j][p];
                if (b.grid.mask[p] && !a.grid.mask[p]) sum += dt_[i][p];
            }
            return sum / static_cast<double>(fg_[i] + fg_[j]);
        }
        case MatchMethod::VProj:
            return profile_dissimilarity(profiles_[i], profiles_[j]);
        case MatchMethod::VProjDtw:
            return dtw_distance(profiles_[i], profiles_[j]);
    }
    throw std::invalid_argument("unknown method");
}

namespace {

SpotResult rank_and_limit(std::string query_id, MatchMethod method,
                          std::vector<std::pair<std::string, double>> scored,
                          const SpotLimit& limit) {
    if (limit.tau.has_value() == limit.top_k.has_value()) {
        throw std::invalid_argument("spot: exactly one of tau / top_k required");
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second < b.second : a.first < b.first;
    });

    SpotResult res;
    res.query_id = std::move(query_id);
    res.method = method;
    res.ranked = std::move(scored);
    if (limit.tau) {
        res.threshold = *limit.tau;
        for (const auto& entry : res.ranked) {
            if (entry.second <= *limit.tau) {
                res.matches.push_back(entry);
            } else {
                break;
            }
        }
    } else {
        const std::size_t k = std::min(*limit.top_k, res.ranked.size());
        res.matches.assign(res.ranked.begin(), res.ranked.begin() + k);
    }
    return res;
}

}  // namespace

SpotResult spot(const Glyph& query, std::span<const Glyph> corpus, MatchMethod method,
                const SpotLimit& limit) {
    if (corpus.empty()) throw std::invalid_argument("spot: empty corpus");
    std::vector<Glyph> all(corpus.begin(), corpus.end());
    all.push_back(query);
    MatcherCache cache(all);
    return spot_cached(all.size() - 1, cache, method, limit);
}

SpotResult spot_cached(std::size_t query_index, const MatcherCache& cache, MatchMethod method,
                       const SpotLimit& limit) {
    if (cache.size() < 2) throw std::invalid_argument("spot: empty corpus");
    const std::string& qid = cache.id(query_index);
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(cache.size() - 1);
    for (std::size_t j = 0; j < cache.size(); ++j) {
        if (j == query_index || cache.id(j) == qid) continue;
        scored.push_back({cache.id(j), cache.dissimilarity(query_index, j, method)});
    }
    return rank_and_limit(qid, method, std::move(scored), limit);
}

namespace {

struct PooledCounts {
    long long tp = 0, fp = 0, fn = 0;

    double precision() const {
        if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
        return static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    double recall() const {
        if (tp + fn == 0) return 1.0;  // no relevant items anywhere
        return static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    double f1() const {
        double p = precision(), r = recall();
        return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    }
};

const std::set<std::string>& relevant_for(const RelevanceTruth& truth, const std::string& query) {
    auto it = truth.find(query);
    if (it == truth.end()) {
        throw std::invalid_argument("evaluate: query missing from truth: " + query);
    }
    return it->second;
}

}  // namespace

EvalReport evaluate(const std::vector<SpotResult>& results, const RelevanceTruth& truth) {
    // Pool counts per method at each result's own threshold.
    std::map<std::string, PooledCounts> counts;
    std::map<std::string, double> taus;
    // Pooled (value, relevant) pairs per method for the PR sweep.
    std::map<std::string, std::vector<std::pair<double, bool>>> pooled;
    std::map<std::string, long long> total_relevant;

    for (const SpotResult& res : results) {
        const auto& relevant = relevant_for(truth, res.query_id);
        const std::string name = method_name(res.method);
        PooledCounts& pc = counts[name];
        long long tp = 0;
        for (const auto& [id, value] : res.matches) {
            if (relevant.count(id)) {
                ++tp;
            } else {
                ++pc.fp;
            }
        }
        pc.tp += tp;
        pc.fn += static_cast<long long>(relevant.size()) - tp;
        if (res.threshold) taus[name] = *res.threshold;

        auto& pool = pooled[name];
        for (const auto& [id, value] : res.ranked) {
            pool.push_back({value, relevant.count(id) > 0});
        }
        total_relevant[name] += static_cast<long long>(relevant.size());
    }

    EvalReport report;
    for (auto& [name, pc] : counts) {
        MethodEval ev;
        ev.precision = pc.precision();
        ev.recall = pc.recall();
        ev.f1 = pc.f1();
        ev.tp = pc.tp;
        ev.fp = pc.fp;
        ev.fn = pc.fn;
        ev.tau_used = taus.count(name) ? taus[name] : 0.0;

        auto& pool = pooled[name];
        std::sort(pool.begin(), pool.end());
        const long long relevant_total = total_relevant[name];
        long long tp = 0, retrieved = 0;
        std::size_t i = 0;
        while (i < pool.size()) {
            const double tau = pool[i].first;
            while (i < pool.size() && pool[i].first == tau) {
                ++retrieved;
                if (pool[i].second) ++tp;
                ++i;
            }
            PooledCounts at_tau{tp, retrieved - tp, relevant_total - tp};
            ev.pr_curve.push_back({tau, at_tau.precision(), at_tau.recall()});
        }
        report.per_method[name] = ev;
    }
    return report;
}

EvalReport compare_methods(const MatcherCache& cache, const std::vector<std::size_t>& query_indices,
                           const RelevanceTruth& truth, const std::vector<MatchMethod>& methods,
                           TauPolicy policy, double fixed_tau) {
    if (query_indices.empty()) throw std::invalid_argument("compare_methods: no queries");

    EvalReport report;
    for (MatchMethod method : methods) {
        // Full rankings once per query; thresholds are applied afterwards.
        std::vector<SpotResult> full(query_indices.size());
        parallel_for(query_indices.size(), [&](std::size_t qi) {
            full[qi] = spot_cached(query_indices[qi], cache, method,
                                   SpotLimit::by_top_k(cache.size()));
        });

        double tau = fixed_tau;
        if (policy == TauPolicy::BestF1) {
            // Sweep pooled distinct values; the F1-maximizing tau, ties low.
            std::vector<std::pair<double, bool>> pool;
            long long relevant_total = 0;
            for (const SpotResult& res : full) {
                const auto& relevant = relevant_for(truth, res.query_id);
                for (const auto& [id, value] : res.ranked) {
                    pool.push_back({value, relevant.count(id) > 0});
                }
                relevant_total += static_cast<long long>(relevant.size());
            }
            std::sort(pool.begin(), pool.end());
            double best_f1 = -1.0;
            long long tp = 0, retrieved = 0;
            std::size_t i = 0;
            while (i < pool.size()) {
                const double t = pool[i].first;
                while (i < pool.size() && pool[i].first == t) {
                    ++retrieved;
                    if (pool[i].second) ++tp;
                    ++i;
                }
                PooledCounts pc{tp, retrieved - tp, relevant_total - tp};
                if (pc.f1() > best_f1) {
                    best_f1 = pc.f1();
                    tau = t;
                }
            }
        }

        std::vector<SpotResult> thresholded;
        thresholded.reserve(full.size());
        for (SpotResult& res : full) {
            SpotResult t;
            t.query_id = res.query_id;
            t.method = res.method;
            t.ranked = std::move(res.ranked);
            t.threshold = tau;
            for (const auto& entry : t.ranked) {
                if (entry.second <= tau) {
                    t.matches.push_back(entry);
                } else {
                    break;
                }
            }
            thresholded.push_back(std::move(t));
        }
        EvalReport one = evaluate(thresholded, truth);
        for (auto& [name, ev] : one.per_method) report.per_method[name] = std::move(ev);
    }
    return report;
}

const std::map<std::string, BaselineEntry>& reference_baseline() {
    static const std::map<std::string, BaselineEntry> baseline = {
        {"xor", {0.6314, 0.5534}},
        {"edm", {0.7843, 0.7932}},
        {"vproj", {0.4167, 0.3446}},
    };
    return baseline;
}

namespace {

nlohmann::json report_json(const EvalReport& report, bool include_baseline) {
    nlohmann::json j;
    for (const auto& [name, ev] : report.per_method) {
        nlohmann::json m = {
            {"precision", ev.precision}, {"recall", ev.recall},   {"f1", ev.f1},
            {"tau_used", ev.tau_used},   {"tp", ev.tp},           {"fp", ev.fp},
            {"fn", ev.fn},
        };
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& [tau, p, r] : ev.pr_curve) {
            curve.push_back({{"tau", tau}, {"precision", p}, {"recall", r}});
        }
        m["pr_curve"] = curve;
        j["methods"][name] = m;
    }
    if (include_baseline) {
        for (const auto& [name, b] : reference_baseline()) {
            j["reference_baseline"][name] = {{"precision", b.precision}, {"recall", b.recall}};
        }
    }
    return j;
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report, bool include_baseline) {
    return report_json(report, include_baseline).dump(2);
}

std::string eval_report_to_table(const EvalReport& report, bool include_baseline) {
    std::ostringstream out;
    char buf[64];

    out << "Method    ";
    for (const auto& [name, ev] : report.per_method) {
        std::snprintf(buf, sizeof(buf), "%12s", name.c_str());
        out << buf;
    }
    out << "\nPrecision ";
    for (const auto& [name, ev] : report.per_method) {
        std::snprintf(buf, sizeof(buf), "%11.2f%%", 100.0 * ev.precision);
        out << buf;
    }
    out << "\nRecall    ";
    for (const auto& [name, ev] : report.per_method) {
        std::snprintf(buf, sizeof(buf), "%11.2f%%", 100.0 * ev.recall);
        out << buf;
    }
    out << "\n";
    if (include_baseline) {
        out << "\nReference baseline (reported, not reproduced here):\n";
        out << "Method    ";
        for (const auto& [name, b] : reference_baseline()) {
            std::snprintf(buf, sizeof(buf), "%12s", name.c_str());
            out << buf;
        }
        out << "\nPrecision ";
        for (const auto& [name, b] : reference_baseline()) {
            std::snprintf(buf, sizeof(buf), "%11.2f%%", 100.0 * b.precision);
            out << buf;
        }
        out << "\nRecall    ";
        for (const auto& [name, b] : reference_baseline()) {
            std::snprintf(buf, sizeof(buf), "%11.2f%%", 100.0 * b.recall);
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace glyphspot
