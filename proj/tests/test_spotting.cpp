#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "glyphspot/spotting.hpp"
#include "oracles.hpp"

using namespace glyphspot;
using oracles::glyph_from_mask;
using oracles::random_mask;

namespace {

std::vector<Glyph> small_corpus(Rng& rng, int count, int side = 16) {
    std::vector<Glyph> corpus;
    for (int i = 0; i < count; ++i) {
        BinaryImage mask = random_mask(rng, side, side, 0.25);
        if (mask.foreground_count() == 0) mask.set(1, 1, true);
        Glyph g = glyph_from_mask(std::move(mask), "page");
        g.box = Box{i * side, 0, side, side};  // distinct uids
        corpus.push_back(std::move(g));
    }
    return corpus;
}

}  // namespace

TEST_CASE("spot ranks an exact duplicate first with value zero") {
    Rng rng(1);
    std::vector<Glyph> corpus = small_corpus(rng, 10);
    Glyph query = corpus[4];
    query.box = Box{999, 999, 16, 16};  // distinct uid, same grid
    SpotResult res = spot(query, corpus, MatchMethod::Edm, SpotLimit::by_top_k(5));
    REQUIRE(!res.ranked.empty());
    CHECK(res.ranked[0].first == glyph_uid(corpus[4]));
    CHECK(res.ranked[0].second == 0.0);
    CHECK(res.matches.size() == 5);
}

TEST_CASE("spot with tau zero returns exactly the zero-dissimilarity glyphs") {
    Rng rng(2);
    std::vector<Glyph> corpus = small_corpus(rng, 8);
    corpus.push_back(corpus[0]);
    corpus.back().box = Box{500, 0, 16, 16};
    Glyph query = corpus[0];
    query.box = Box{999, 0, 16, 16};
    SpotResult res = spot(query, corpus, MatchMethod::Xor, SpotLimit::by_tau(0.0));
    REQUIRE(res.matches.size() == 2);
    for (const auto& [id, value] : res.matches) CHECK(value == 0.0);
}

TEST_CASE("spot excludes the query's own id") {
    Rng rng(3);
    std::vector<Glyph> corpus = small_corpus(rng, 6);
    MatcherCache cache(corpus);
    SpotResult res = spot_cached(2, cache, MatchMethod::Xor, SpotLimit::by_top_k(100));
    CHECK(res.ranked.size() == corpus.size() - 1);
    for (const auto& [id, value] : res.ranked) CHECK(id != glyph_uid(corpus[2]));
}

TEST_CASE("spot requires exactly one of tau and top_k") {
    Rng rng(4);
    std::vector<Glyph> corpus = small_corpus(rng, 4);
    CHECK_THROWS_AS(spot(corpus[0], corpus, MatchMethod::Xor, SpotLimit{}),
                    std::invalid_argument);
    SpotLimit both{0.5, 3};
    CHECK_THROWS_AS(spot(corpus[0], corpus, MatchMethod::Xor, both), std::invalid_argument);
    CHECK_THROWS_AS(spot(corpus[0], {}, MatchMethod::Xor, SpotLimit::by_tau(0.5)),
                    std::invalid_argument);
}

TEST_CASE("raising tau never removes a match") {
    Rng rng(5);
    std::vector<Glyph> corpus = small_corpus(rng, 12);
    MatcherCache cache(corpus);
    SpotResult lo = spot_cached(0, cache, MatchMethod::Edm, SpotLimit::by_tau(0.5));
    SpotResult hi = spot_cached(0, cache, MatchMethod::Edm, SpotLimit::by_tau(2.0));
    CHECK(hi.matches.size() >= lo.matches.size());
    for (std::size_t i = 0; i < lo.matches.size(); ++i) {
        CHECK(hi.matches[i] == lo.matches[i]);  // prefix property
    }
}

TEST_CASE("evaluate computes the toy precision/recall case") {
    // One query, 4 relevant, retrieve 5 of which 3 relevant.
    SpotResult res;
    res.query_id = "q";
    res.method = MatchMethod::Xor;
    res.ranked = {{"r1", 0.1}, {"r2", 0.2}, {"x1", 0.3}, {"r3", 0.4}, {"x2", 0.5}, {"r4", 0.9}};
    res.threshold = 0.5;
    res.matches = {res.ranked.begin(), res.ranked.begin() + 5};
    RelevanceTruth truth{{"q", {"r1", "r2", "r3", "r4"}}};
    EvalReport report = evaluate({res}, truth);
    const MethodEval& ev = report.per_method.at("xor");
    CHECK(ev.precision == 0.6);
    CHECK(ev.recall == 0.75);
    CHECK(ev.tp == 3);
    CHECK(ev.fp == 2);
    CHECK(ev.fn == 1);
}

TEST_CASE("evaluate scores perfect retrieval as 1/1") {
    SpotResult res;
    res.query_id = "q";
    res.method = MatchMethod::Edm;
    res.ranked = {{"r1", 0.0}, {"r2", 0.0}, {"x1", 3.0}};
    res.threshold = 0.0;
    res.matches = {res.ranked.begin(), res.ranked.begin() + 2};
    RelevanceTruth truth{{"q", {"r1", "r2"}}};
    EvalReport report = evaluate({res}, truth);
    CHECK(report.per_method.at("edm").precision == 1.0);
    CHECK(report.per_method.at("edm").recall == 1.0);
    CHECK(report.per_method.at("edm").f1 == 1.0);
}

TEST_CASE("evaluate rejects queries missing from the truth") {
    SpotResult res;
    res.query_id = "mystery";
    res.method = MatchMethod::Xor;
    CHECK_THROWS_AS(evaluate({res}, RelevanceTruth{}), std::invalid_argument);
}

TEST_CASE("evaluate is invariant under result order") {
    SpotResult a;
    a.query_id = "q1";
    a.method = MatchMethod::Xor;
    a.ranked = {{"r1", 0.1}, {"x1", 0.2}};
    a.threshold = 0.2;
    a.matches = a.ranked;
    SpotResult b;
    b.query_id = "q2";
    b.method = MatchMethod::Xor;
    b.ranked = {{"r2", 0.05}, {"x2", 0.3}};
    b.threshold = 0.2;
    b.matches = {b.ranked.begin(), b.ranked.begin() + 1};
    RelevanceTruth truth{{"q1", {"r1"}}, {"q2", {"r2", "r9"}}};

    EvalReport ab = evaluate({a, b}, truth);
    EvalReport ba = evaluate({b, a}, truth);
    CHECK(ab.per_method.at("xor").precision == ba.per_method.at("xor").precision);
    CHECK(ab.per_method.at("xor").recall == ba.per_method.at("xor").recall);
    CHECK(ab.per_method.at("xor").pr_curve == ba.per_method.at("xor").pr_curve);
}

TEST_CASE("evaluate counts satisfy the accounting identities") {
    Rng rng(6);
    std::vector<Glyph> corpus = small_corpus(rng, 15);
    corpus.push_back(corpus[1]);
    corpus.back().box = Box{800, 0, 16, 16};
    MatcherCache cache(corpus);
    RelevanceTruth truth;
    truth[cache.id(0)] = {cache.id(1), cache.id(15)};
    truth[cache.id(1)] = {cache.id(15)};
    std::vector<SpotResult> results;
    for (std::size_t q : {std::size_t{0}, std::size_t{1}}) {
        results.push_back(spot_cached(q, cache, MatchMethod::Xor, SpotLimit::by_tau(0.4)));
    }
    EvalReport report = evaluate(results, truth);
    const MethodEval& ev = report.per_method.at("xor");
    long long total_relevant = 3;
    CHECK(ev.tp + ev.fn == total_relevant);
    long long retrieved = 0;
    for (const SpotResult& r : results) retrieved += static_cast<long long>(r.matches.size());
    CHECK(ev.tp + ev.fp == retrieved);
}

TEST_CASE("pr curve recall is non-decreasing in tau") {
    Rng rng(7);
    std::vector<Glyph> corpus = small_corpus(rng, 20);
    MatcherCache cache(corpus);
    RelevanceTruth truth;
    truth[cache.id(0)] = {cache.id(3), cache.id(5), cache.id(7)};
    SpotResult res = spot_cached(0, cache, MatchMethod::Edm,
                                 SpotLimit::by_top_k(cache.size()));
    res.threshold = 1e18;
    res.matches = res.ranked;
    EvalReport report = evaluate({res}, truth);
    const auto& curve = report.per_method.at("edm").pr_curve;
    REQUIRE(!curve.empty());
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(std::get<2>(curve[i]) >= std::get<2>(curve[i - 1]));
        CHECK(std::get<0>(curve[i]) > std::get<0>(curve[i - 1]));
    }
}

TEST_CASE("compare_methods on a duplicate pair reaches perfect scores at tau 0") {
    Rng rng(8);
    std::vector<Glyph> corpus = small_corpus(rng, 10);
    corpus.push_back(corpus[2]);
    corpus.back().box = Box{700, 0, 16, 16};
    MatcherCache cache(corpus);
    RelevanceTruth truth;
    truth[cache.id(2)] = {cache.id(10)};
    EvalReport report = compare_methods(cache, {2}, truth, {MatchMethod::Edm}, TauPolicy::BestF1);
    const MethodEval& ev = report.per_method.at("edm");
    CHECK(ev.precision == 1.0);
    CHECK(ev.recall == 1.0);
    CHECK(ev.tau_used == 0.0);
}

TEST_CASE("a strictly monotone transform leaves the PR curve shape unchanged") {
    // Rank equivalence: only the tau axis moves.
    SpotResult base;
    base.query_id = "q";
    base.method = MatchMethod::Xor;
    base.ranked = {{"a", 0.1}, {"b", 0.2}, {"c", 0.35}, {"d", 0.5}};
    base.threshold = 1.0;
    base.matches = base.ranked;

    SpotResult transformed = base;
    transformed.method = MatchMethod::Edm;  // report under a different key
    for (auto& [id, v] : transformed.ranked) v = 3.0 * v + 1.0;
    transformed.matches = transformed.ranked;
    transformed.threshold = 4.0;

    RelevanceTruth truth{{"q", {"a", "c"}}};
    EvalReport report = evaluate({base, transformed}, truth);
    const auto& c1 = report.per_method.at("xor").pr_curve;
    const auto& c2 = report.per_method.at("edm").pr_curve;
    REQUIRE(c1.size() == c2.size());
    for (std::size_t i = 0; i < c1.size(); ++i) {
        CHECK(std::get<1>(c1[i]) == std::get<1>(c2[i]));
        CHECK(std::get<2>(c1[i]) == std::get<2>(c2[i]));
    }
}

TEST_CASE("fixed tau policy applies the same threshold to every method") {
    Rng rng(9);
    std::vector<Glyph> corpus = small_corpus(rng, 12);
    MatcherCache cache(corpus);
    RelevanceTruth truth;
    truth[cache.id(0)] = {cache.id(1)};
    EvalReport report = compare_methods(cache, {0}, truth,
                                        {MatchMethod::Xor, MatchMethod::VProj}, TauPolicy::Fixed,
                                        0.25);
    CHECK(report.per_method.at("xor").tau_used == 0.25);
    CHECK(report.per_method.at("vproj").tau_used == 0.25);
}

TEST_CASE("report serialization carries the reference baseline annotation") {
    SpotResult res;
    res.query_id = "q";
    res.method = MatchMethod::Xor;
    res.ranked = {{"a", 0.0}};
    res.threshold = 0.0;
    res.matches = res.ranked;
    EvalReport report = evaluate({res}, RelevanceTruth{{"q", {"a"}}});
    std::string json = eval_report_to_json(report);
    CHECK(json.find("reference_baseline") != std::string::npos);
    CHECK(json.find("0.7843") != std::string::npos);
    std::string table = eval_report_to_table(report);
    CHECK(table.find("Precision") != std::string::npos);
    CHECK(table.find("100.00%") != std::string::npos);
    CHECK(table.find("78.43%") != std::string::npos);
}
