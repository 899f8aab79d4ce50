#include "glyphspot/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "glyphspot/clustering.hpp"
#include "glyphspot/corpus.hpp"
#include "glyphspot/features.hpp"
#include "glyphspot/imgcore.hpp"
#include "glyphspot/matchers.hpp"
#include "glyphspot/parallel.hpp"
#include "glyphspot/rng.hpp"
#include "glyphspot/segment.hpp"
#include "glyphspot/spotting.hpp"

namespace glyphspot::cli {

namespace fs = std::filesystem;

namespace {

// ------------------------------------------------------- run metadata ----

struct RunMeta {
    std::string subcommand;
    std::map<std::string, std::string> params;
    std::map<std::string, std::string> input_digests;

    void input(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(buf.str())));
        input_digests[path.string()] = hex;
    }

    void write(const fs::path& path) const {
        nlohmann::json j;
        j["tool"] = "glyphspot";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["params"] = params;
        j["inputs"] = input_digests;
        fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
        std::ofstream out(path);
        out << j.dump(2) << "\n";
    }
};

fs::path meta_path_for(const fs::path& out, bool out_is_dir) {
    return out_is_dir ? out / "run.json" : fs::path(out.string() + ".run.json");
}

void write_text(const fs::path& path, const std::string& text) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure, "cannot write " + path.string());
    }
    out << text;
}

// ------------------------------------------------ corpus glyph loading ----

struct TierGlyphs {
    std::vector<Glyph> glyphs;   // labeled from the manifest
    int skipped_empty = 0;
};

BinaryImage binarize_page(const GrayImage& img, double sigma) {
    GrayImage smoothed = sigma > 0.0 ? gaussian_filter(img, sigma) : img;
    return remove_isolated_pixels(binarize_otsu(smoothed));
}

// Extracts normalized glyphs at the manifest's ground-truth boxes.
TierGlyphs load_tier_glyphs(const CorpusManifest& manifest, const fs::path& root,
                            const std::string& tier, int side, double sigma) {
    TierGlyphs out;
    std::vector<std::vector<Glyph>> per_page(manifest.pages.size());
    std::vector<int> skipped(manifest.pages.size(), 0);
    parallel_for(manifest.pages.size(), [&](std::size_t pi) {
        const PageEntry& page = manifest.pages[pi];
        GrayImage img = load_image(root / page.images.at(tier));
        BinaryImage bin = binarize_page(img, sigma);
        for (const GlyphTruth& truth : page.glyphs) {
            if (!tight_foreground_box(bin, truth.box)) {
                ++skipped[pi];
                continue;
            }
            Glyph g = normalize_glyph(bin, truth.box, side, page.page_id);
            g.label = truth.label;
            g.font_id = page.font_id;
            per_page[pi].push_back(std::move(g));
        }
    });
    for (std::size_t pi = 0; pi < per_page.size(); ++pi) {
        out.skipped_empty += skipped[pi];
        for (Glyph& g : per_page[pi]) out.glyphs.push_back(std::move(g));
    }
    return out;
}

// Recovered-box variant: runs the segmentation pipeline and labels the
// results by IoU >= 0.5 against the manifest.
TierGlyphs segment_tier_glyphs(const CorpusManifest& manifest, const fs::path& root,
                               const std::string& tier, int side, double sigma, int smear_h,
                               int smear_v, int min_gap, int min_line_gap,
                               const fs::path* persist_binarized) {
    TierGlyphs out;
    std::vector<std::vector<Glyph>> per_page(manifest.pages.size());
    parallel_for(manifest.pages.size(), [&](std::size_t pi) {
        const PageEntry& page = manifest.pages[pi];
        GrayImage img = load_image(root / page.images.at(tier));
        BinaryImage bin = binarize_page(img, sigma);
        if (persist_binarized) {
            GrayImage mask(bin.width, bin.height);
            for (std::size_t i = 0; i < bin.mask.size(); ++i) mask.data[i] = bin.mask[i] ? 0 : 255;
            save_image(mask, *persist_binarized / (page.page_id + ".pgm"), ImageFormat::Pgm);
        }
        for (const Box& box : segment_page_chars(bin, smear_h, smear_v, min_gap, min_line_gap)) {
            Glyph g = normalize_glyph(bin, box, side, page.page_id);
            double best_iou = 0.0;
            const GlyphTruth* best = nullptr;
            for (const GlyphTruth& truth : page.glyphs) {
                double iou = box_iou(g.box, truth.box);
                if (iou > best_iou) {
                    best_iou = iou;
                    best = &truth;
                }
            }
            if (best && best_iou >= 0.5) {
                g.label = best->label;
                g.font_id = page.font_id;
            }
            per_page[pi].push_back(std::move(g));
        }
    });
    for (auto& glyphs : per_page) {
        for (Glyph& g : glyphs) out.glyphs.push_back(std::move(g));
    }
    return out;
}

// ------------------------------------------------------ eval protocol ----

struct EvalSetup {
    std::vector<std::size_t> query_indices;
    RelevanceTruth truth;
};

// Queries are a seeded sample of glyphs whose (label, font) occurs at least
// twice; relevance = the other occurrences of the same (label, font).
EvalSetup make_eval_setup(const std::vector<Glyph>& glyphs, std::size_t query_count,
                          std::uint64_t seed) {
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
        if (!glyphs[i].label || !glyphs[i].font_id) continue;
        groups[{*glyphs[i].label, *glyphs[i].font_id}].push_back(i);
    }
    std::vector<std::size_t> eligible;
    for (const auto& [key, members] : groups) {
        if (members.size() < 2) continue;
        for (std::size_t i : members) eligible.push_back(i);
    }
    std::sort(eligible.begin(), eligible.end());
    Rng rng = Rng::derive(seed, "eval-queries");
    rng.shuffle(eligible);

    EvalSetup setup;
    for (std::size_t i = 0; i < eligible.size() && setup.query_indices.size() < query_count; ++i) {
        setup.query_indices.push_back(eligible[i]);
    }
    std::sort(setup.query_indices.begin(), setup.query_indices.end());

    for (std::size_t qi : setup.query_indices) {
        const Glyph& q = glyphs[qi];
        std::set<std::string> relevant;
        for (std::size_t j : groups[{*q.label, *q.font_id}]) {
            if (j != qi) relevant.insert(glyph_uid(glyphs[j]));
        }
        setup.truth[glyph_uid(q)] = std::move(relevant);
    }
    return setup;
}

std::vector<MatchMethod> parse_methods(const std::string& csv) {
    std::vector<MatchMethod> methods;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto m = method_from_name(item);
        if (!m) throw CLI::ValidationError("--methods", "unknown method: " + item);
        methods.push_back(*m);
    }
    if (methods.empty()) throw CLI::ValidationError("--methods", "no methods given");
    return methods;
}

// --------------------------------------------------- feature protocol ----

// Gray crop centered on a white square canvas, then resized to side x side.
GrayImage gray_crop_canvas(const GrayImage& page, const Box& box, int side) {
    const int canvas_side = std::max(box.w, box.h);
    GrayImage canvas(canvas_side, canvas_side, 255);
    const int off_x = (canvas_side - box.w) / 2;
    const int off_y = (canvas_side - box.h) / 2;
    for (int y = 0; y < box.h; ++y) {
        for (int x = 0; x < box.w; ++x) {
            canvas.at(off_x + x, off_y + y) = page.at(box.x + x, box.y + y);
        }
    }
    GrayImage out(side, side);
    for (int y = 0; y < side; ++y) {
        int sy = static_cast<int>((static_cast<long long>(2 * y + 1) * canvas_side) / (2 * side));
        for (int x = 0; x < side; ++x) {
            int sx = static_cast<int>((static_cast<long long>(2 * x + 1) * canvas_side) /
                                      (2 * side));
            out.at(x, y) = canvas.at(sx, sy);
        }
    }
    return out;
}

GrayImage bitmap_to_gray(const BinaryImage& bin) {
    GrayImage img(bin.width, bin.height, 255);
    for (std::size_t i = 0; i < bin.mask.size(); ++i) {
        if (bin.mask[i]) img.data[i] = 0;
    }
    return img;
}

FeatureVector extract_features(const GrayImage& canvas, Extractor extractor, int k, int levels) {
    FeatureVector fv = extractor == Extractor::FractalSig
                           ? fractal_signature(canvas, k)
                           : wavelet_energy_features(canvas, levels);
    return fv;
}

// One prototype per (font, character), rendered through the same canvas as
// page crops.
std::vector<LabeledFeature> atlas_prototypes(const GlyphAtlas& atlas, Extractor extractor,
                                             int feat_side, int k, int levels) {
    std::vector<LabeledFeature> protos;
    for (const auto& [font, chars] : atlas.fonts) {
        for (const auto& [ch, bitmap] : chars) {
            GrayImage gray = bitmap_to_gray(bitmap);
            BinaryImage bin(bitmap.width, bitmap.height);
            bin.mask = bitmap.mask;
            auto tight = tight_foreground_box(bin, Box{0, 0, bin.width, bin.height});
            GrayImage canvas = gray_crop_canvas(gray, *tight, feat_side);
            protos.push_back({extract_features(canvas, extractor, k, levels), font});
        }
    }
    return protos;
}

struct FontspotOutcome {
    double accuracy = 0.0;
    int total = 0;
};

FontspotOutcome fontspot_accuracy(const CorpusManifest& manifest, const fs::path& root,
                                  const std::string& tier, Extractor extractor, int feat_side,
                                  int k, int levels, std::size_t sample, std::uint64_t seed) {
    const std::vector<LabeledFeature> protos =
        atlas_prototypes(builtin_atlas(), extractor, feat_side, k, levels);

    struct Item {
        std::size_t page;
        std::size_t glyph;
    };
    std::vector<Item> items;
    for (std::size_t pi = 0; pi < manifest.pages.size(); ++pi) {
        for (std::size_t gi = 0; gi < manifest.pages[pi].glyphs.size(); ++gi) {
            items.push_back({pi, gi});
        }
    }
    Rng rng = Rng::derive(seed, "fontspot-sample");
    rng.shuffle(items);
    if (items.size() > sample) items.resize(sample);
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return a.page != b.page ? a.page < b.page : a.glyph < b.glyph;
    });

    // Group by page so each page image loads once.
    std::vector<int> correct_per_page(manifest.pages.size(), 0);
    std::vector<int> total_per_page(manifest.pages.size(), 0);
    std::vector<std::vector<std::size_t>> by_page(manifest.pages.size());
    for (const Item& it : items) by_page[it.page].push_back(it.glyph);

    parallel_for(manifest.pages.size(), [&](std::size_t pi) {
        if (by_page[pi].empty()) return;
        const PageEntry& page = manifest.pages[pi];
        GrayImage img = load_image(root / page.images.at(tier));
        for (std::size_t gi : by_page[pi]) {
            const GlyphTruth& truth = page.glyphs[gi];
            GrayImage canvas = gray_crop_canvas(img, truth.box, feat_side);
            FeatureVector fv = extract_features(canvas, extractor, k, levels);
            if (classify_font_1nn(fv, protos) == page.font_id) ++correct_per_page[pi];
            ++total_per_page[pi];
        }
    });

    FontspotOutcome out;
    int correct = 0;
    for (std::size_t pi = 0; pi < manifest.pages.size(); ++pi) {
        correct += correct_per_page[pi];
        out.total += total_per_page[pi];
    }
    out.accuracy = out.total > 0 ? static_cast<double>(correct) / out.total : 0.0;
    return out;
}

// ----------------------------------------------------------- commands ----

struct CommonOpts {
    std::uint64_t seed = 42;
    int side = kDefaultGlyphSide;
    double sigma = 1.0;
};

int cmd_synth(const fs::path& out, std::uint64_t seed) {
    CorpusManifest manifest = build_default_corpus(out, seed);
    RunMeta meta;
    meta.subcommand = "synth";
    meta.params["out"] = out.string();
    meta.params["seed"] = std::to_string(seed);
    meta.write(meta_path_for(out, true));
    std::cout << "corpus: " << manifest.pages.size() << " pages, " << manifest.glyph_count()
              << " glyphs, " << manifest.queries.size() << " queries -> " << out.string() << "\n";
    return 0;
}

int cmd_preprocess(const fs::path& in, const fs::path& out, double sigma, bool binarize) {
    GrayImage img = load_image(in);
    GrayImage smoothed = gaussian_filter(img, sigma);
    if (binarize) {
        BinaryImage bin = remove_isolated_pixels(binarize_otsu(smoothed));
        GrayImage mask(bin.width, bin.height);
        for (std::size_t i = 0; i < bin.mask.size(); ++i) mask.data[i] = bin.mask[i] ? 0 : 255;
        save_image(mask, out, format_from_extension(out));
    } else {
        save_image(smoothed, out, format_from_extension(out));
    }
    RunMeta meta;
    meta.subcommand = "preprocess";
    meta.params["in"] = in.string();
    meta.params["out"] = out.string();
    meta.params["sigma"] = std::to_string(sigma);
    meta.params["binarize"] = binarize ? "1" : "0";
    meta.input(in);
    meta.write(meta_path_for(out, false));
    return 0;
}

int cmd_segment(const fs::path& image, const fs::path& out, const CommonOpts& common, int smear_h,
                int smear_v, int min_gap, int min_line_gap) {
    GrayImage img = load_image(image);
    BinaryImage bin = binarize_page(img, common.sigma);
    const int sh = smear_h > 0 ? smear_h : 8 * estimate_stroke_width(bin);
    const int sv = smear_v > 0 ? smear_v : 12;
    std::vector<Glyph> glyphs;
    for (const Box& box : segment_page_chars(bin, sh, sv, min_gap, min_line_gap)) {
        glyphs.push_back(normalize_glyph(bin, box, common.side, image.stem().string()));
    }
    save_glyph_set(glyphs, out);
    RunMeta meta;
    meta.subcommand = "segment";
    meta.params["image"] = image.string();
    meta.params["out"] = out.string();
    meta.params["sigma"] = std::to_string(common.sigma);
    meta.params["side"] = std::to_string(common.side);
    meta.params["smear-h"] = std::to_string(sh);
    meta.params["smear-v"] = std::to_string(sv);
    meta.params["min-gap"] = std::to_string(min_gap);
    meta.params["min-line-gap"] = std::to_string(min_line_gap);
    meta.input(image);
    meta.write(meta_path_for(out, true));
    std::cout << "segmented " << glyphs.size() << " glyphs -> " << out.string() << "\n";
    return 0;
}

int cmd_features(const fs::path& glyph_dir, const fs::path& out, const std::string& extractor_name,
                 int feat_side, int k, int levels) {
    std::vector<Glyph> glyphs = load_glyph_set(glyph_dir);
    const Extractor extractor =
        extractor_name == "wavelet" ? Extractor::WaveletEnergy : Extractor::FractalSig;
    std::vector<std::pair<std::string, FeatureVector>> rows(glyphs.size());
    parallel_for(glyphs.size(), [&](std::size_t i) {
        GrayImage gray = bitmap_to_gray(glyphs[i].grid);
        GrayImage canvas = gray_crop_canvas(
            gray, Box{0, 0, gray.width, gray.height}, feat_side);
        rows[i] = {glyph_uid(glyphs[i]), extract_features(canvas, extractor, k, levels)};
    });
    std::ostringstream buf;
    write_features_jsonl(buf, rows);
    write_text(out, buf.str());
    RunMeta meta;
    meta.subcommand = "features";
    meta.params["glyphs"] = glyph_dir.string();
    meta.params["out"] = out.string();
    meta.params["extractor"] = extractor_name;
    meta.params["feat-side"] = std::to_string(feat_side);
    meta.params["k"] = std::to_string(k);
    meta.params["levels"] = std::to_string(levels);
    meta.write(meta_path_for(out, false));
    return 0;
}

int cmd_eval(const fs::path& corpus, const std::string& tier, const std::string& methods_csv,
             const std::string& tau_policy, double fixed_tau, std::size_t query_count,
             const CommonOpts& common, const fs::path& out_json, const fs::path& out_table) {
    CorpusManifest manifest = load_manifest(corpus / "manifest.json");
    if (!manifest.tiers.count(tier)) throw std::invalid_argument("unknown tier: " + tier);
    TierGlyphs tier_glyphs = load_tier_glyphs(manifest, corpus, tier, common.side, 0.0);
    EvalSetup setup = make_eval_setup(tier_glyphs.glyphs, query_count, common.seed);
    if (setup.query_indices.empty()) throw std::invalid_argument("no eligible queries in corpus");

    MatcherCache cache(tier_glyphs.glyphs);
    EvalReport report =
        compare_methods(cache, setup.query_indices, setup.truth, parse_methods(methods_csv),
                        tau_policy == "fixed" ? TauPolicy::Fixed : TauPolicy::BestF1, fixed_tau);

    write_text(out_json, eval_report_to_json(report) + "\n");
    write_text(out_table, eval_report_to_table(report));
    std::cout << eval_report_to_table(report);

    RunMeta meta;
    meta.subcommand = "eval";
    meta.params["corpus"] = corpus.string();
    meta.params["tier"] = tier;
    meta.params["methods"] = methods_csv;
    meta.params["tau-policy"] = tau_policy;
    meta.params["tau"] = std::to_string(fixed_tau);
    meta.params["queries"] = std::to_string(query_count);
    meta.params["seed"] = std::to_string(common.seed);
    meta.params["side"] = std::to_string(common.side);
    meta.input(corpus / "manifest.json");
    meta.write(meta_path_for(out_json, false));
    return 0;
}

int cmd_fontspot(const fs::path& corpus, const std::string& tier, const std::string& extractor,
                 int feat_side, int k, int levels, std::size_t sample, std::uint64_t seed,
                 const fs::path& out) {
    CorpusManifest manifest = load_manifest(corpus / "manifest.json");
    if (!manifest.tiers.count(tier)) throw std::invalid_argument("unknown tier: " + tier);

    nlohmann::json j;
    j["tier"] = tier;
    j["sample"] = sample;
    auto run_one = [&](Extractor e, const std::string& name) {
        FontspotOutcome res =
            fontspot_accuracy(manifest, corpus, tier, e, feat_side, k, levels, sample, seed);
        j["results"][name] = {{"accuracy", res.accuracy}, {"count", res.total}};
        std::cout << "fontspot " << name << " @" << tier << ": accuracy " << res.accuracy << " ("
                  << res.total << " glyphs)\n";
    };
    if (extractor == "fractal" || extractor == "both") run_one(Extractor::FractalSig, "fractal");
    if (extractor == "wavelet" || extractor == "both") run_one(Extractor::WaveletEnergy, "wavelet");
    write_text(out, j.dump(2) + "\n");

    RunMeta meta;
    meta.subcommand = "fontspot";
    meta.params["corpus"] = corpus.string();
    meta.params["tier"] = tier;
    meta.params["extractor"] = extractor;
    meta.params["feat-side"] = std::to_string(feat_side);
    meta.params["k"] = std::to_string(k);
    meta.params["levels"] = std::to_string(levels);
    meta.params["sample"] = std::to_string(sample);
    meta.params["seed"] = std::to_string(seed);
    meta.input(corpus / "manifest.json");
    meta.write(meta_path_for(out, false));
    return 0;
}

int cmd_cluster(const fs::path& corpus, const std::string& tier, const std::string& method,
                int k_clusters, int som_rows, int som_cols, int som_epochs, double tau,
                const std::string& char_method, const std::string& extractor, int feat_side,
                std::size_t sample, const CommonOpts& common, const fs::path& out) {
    CorpusManifest manifest = load_manifest(corpus / "manifest.json");
    if (!manifest.tiers.count(tier)) throw std::invalid_argument("unknown tier: " + tier);
    TierGlyphs tier_glyphs = load_tier_glyphs(manifest, corpus, tier, common.side, 0.0);
    std::vector<Glyph>& glyphs = tier_glyphs.glyphs;
    if (glyphs.size() > sample) glyphs.resize(sample);  // pages are in manifest order

    nlohmann::json j;
    j["method"] = method;
    j["seed"] = common.seed;
    std::vector<std::vector<std::size_t>> classes;

    if (method == "leader") {
        auto m = method_from_name(char_method);
        if (!m) throw std::invalid_argument("unknown char method: " + char_method);
        MatcherCache cache(glyphs);
        classes = leader_cluster(
            glyphs.size(),
            [&](std::size_t a, std::size_t b) { return cache.dissimilarity(a, b, *m); }, tau);
        j["params"] = {{"tau", tau}, {"char_method", char_method}};
    } else {
        const Extractor e =
            extractor == "wavelet" ? Extractor::WaveletEnergy : Extractor::FractalSig;
        std::vector<Vec> vectors(glyphs.size());
        parallel_for(glyphs.size(), [&](std::size_t i) {
            GrayImage gray = bitmap_to_gray(glyphs[i].grid);
            GrayImage canvas = gray_crop_canvas(gray, Box{0, 0, gray.width, gray.height},
                                                feat_side);
            vectors[i] = extract_features(canvas, e, 2, 3).values;
        });
        if (method == "kmeans") {
            ClusterAssignment result = kmeans(vectors, k_clusters, common.seed);
            classes.resize(k_clusters);
            for (std::size_t i = 0; i < result.labels.size(); ++i) {
                classes[result.labels[i]].push_back(i);
            }
            j["params"] = {{"k", k_clusters}, {"extractor", extractor}};
            j["inertia"] = result.inertia;
        } else if (method == "som") {
            SomGrid grid = som_train(vectors, som_rows, som_cols, som_epochs, common.seed);
            classes.resize(static_cast<std::size_t>(som_rows) * som_cols);
            for (std::size_t i = 0; i < vectors.size(); ++i) {
                auto [r, c] = som_map(grid, vectors[i]);
                classes[static_cast<std::size_t>(r) * som_cols + c].push_back(i);
            }
            j["params"] = {{"rows", som_rows},
                           {"cols", som_cols},
                           {"epochs", som_epochs},
                           {"extractor", extractor}};
            j["quantization_error"] = som_quantization_error(grid, vectors);
        } else {
            throw std::invalid_argument("unknown clustering method: " + method);
        }
    }

    j["classes"] = nlohmann::json::array();
    for (const auto& cls : classes) {
        if (cls.empty()) continue;
        nlohmann::json members = nlohmann::json::array();
        for (std::size_t i : cls) members.push_back(glyph_uid(glyphs[i]));
        j["classes"].push_back(members);
    }
    write_text(out, j.dump(2) + "\n");
    std::cout << "cluster " << method << ": " << j["classes"].size() << " classes over "
              << glyphs.size() << " glyphs\n";

    RunMeta meta;
    meta.subcommand = "cluster";
    meta.params["corpus"] = corpus.string();
    meta.params["tier"] = tier;
    meta.params["method"] = method;
    meta.params["seed"] = std::to_string(common.seed);
    meta.params["sample"] = std::to_string(sample);
    meta.input(corpus / "manifest.json");
    meta.write(meta_path_for(out, false));
    return 0;
}

int cmd_spot(const fs::path& corpus, const std::string& tier, const fs::path& query_image,
             const std::string& method_name_str, std::optional<double> tau,
             std::optional<std::size_t> top_k, bool word_mode, const CommonOpts& common,
             const fs::path& out) {
    auto method = method_from_name(method_name_str);
    if (!method) throw std::invalid_argument("unknown method: " + method_name_str);
    if (tau.has_value() == top_k.has_value()) {
        throw CLI::ValidationError("--tau/--top-k", "exactly one of tau / top-k required");
    }
    CorpusManifest manifest = load_manifest(corpus / "manifest.json");
    if (!manifest.tiers.count(tier)) throw std::invalid_argument("unknown tier: " + tier);

    GrayImage qimg = load_image(query_image);
    BinaryImage qbin = binarize_page(qimg, 0.0);
    const std::string query_id = query_image.stem().string();

    std::vector<DissimilarityRecord> records;
    if (!word_mode) {
        Glyph query = normalize_glyph(qbin, Box{0, 0, qbin.width, qbin.height}, common.side,
                                      query_id);
        TierGlyphs tier_glyphs = load_tier_glyphs(manifest, corpus, tier, common.side, 0.0);
        SpotLimit limit = tau ? SpotLimit::by_tau(*tau) : SpotLimit::by_top_k(*top_k);
        SpotResult res = spot(query, tier_glyphs.glyphs, *method, limit);
        for (const auto& [id, value] : res.matches) {
            records.push_back({res.query_id, id, *method, value});
        }
    } else {
        // Word mode: match the query's character sequence against every
        // corpus word with sequence DTW over the chosen character measure.
        if (*method != MatchMethod::Xor && *method != MatchMethod::Edm) {
            throw std::invalid_argument("word spotting supports xor or edm");
        }
        std::vector<Glyph> query_seq;
        for (const Box& box : segment_page_chars(qbin, 16, 12)) {
            query_seq.push_back(normalize_glyph(qbin, box, common.side, query_id));
        }
        if (query_seq.empty()) throw std::invalid_argument("query image has no glyphs");

        struct CorpusWord {
            std::string id;
            std::vector<Glyph> seq;
        };
        std::vector<CorpusWord> words;
        for (const PageEntry& page : manifest.pages) {
            GrayImage img = load_image(corpus / page.images.at(tier));
            BinaryImage bin = binarize_page(img, 0.0);
            for (std::size_t wi = 0; wi < page.words.size(); ++wi) {
                const WordTruth& w = page.words[wi];
                CorpusWord cw;
                cw.id = page.page_id + "#w" + std::to_string(wi);
                bool ok = true;
                for (int gi = w.first_glyph; gi < w.first_glyph + w.glyph_count; ++gi) {
                    const Box& box = page.glyphs[gi].box;
                    if (!tight_foreground_box(bin, box)) {
                        ok = false;
                        break;
                    }
                    cw.seq.push_back(normalize_glyph(bin, box, common.side, page.page_id));
                }
                if (ok && !cw.seq.empty()) words.push_back(std::move(cw));
            }
        }
        std::vector<double> values(words.size());
        parallel_for(words.size(), [&](std::size_t i) {
            values[i] = word_dissimilarity(query_seq, words[i].seq, *method);
        });
        for (std::size_t i = 0; i < words.size(); ++i) {
            records.push_back({query_id, words[i].id, *method, values[i]});
        }
        std::sort(records.begin(), records.end(),
                  [](const DissimilarityRecord& a, const DissimilarityRecord& b) {
                      return a.value != b.value ? a.value < b.value : a.target_id < b.target_id;
                  });
        if (tau) {
            std::erase_if(records, [&](const DissimilarityRecord& r) { return r.value > *tau; });
        } else if (records.size() > *top_k) {
            records.resize(*top_k);
        }
    }

    std::ostringstream buf;
    write_records_jsonl(buf, records);
    write_text(out, buf.str());
    std::cout << "spot: " << records.size() << " matches -> " << out.string() << "\n";

    RunMeta meta;
    meta.subcommand = "spot";
    meta.params["corpus"] = corpus.string();
    meta.params["tier"] = tier;
    meta.params["query-image"] = query_image.string();
    meta.params["method"] = method_name_str;
    if (tau) meta.params["tau"] = std::to_string(*tau);
    if (top_k) meta.params["top-k"] = std::to_string(*top_k);
    meta.params["word"] = word_mode ? "1" : "0";
    meta.params["seed"] = std::to_string(common.seed);
    meta.input(query_image);
    meta.input(corpus / "manifest.json");
    meta.write(meta_path_for(out, false));
    return 0;
}

int cmd_pipeline(const fs::path& corpus, const std::string& tier, const std::string& mode,
                 const std::string& methods_csv, std::size_t query_count, std::size_t record_top,
                 const CommonOpts& common, int feat_side, int k, int levels, std::size_t sample,
                 const fs::path& out) {
    CorpusManifest manifest = load_manifest(corpus / "manifest.json");
    if (!manifest.tiers.count(tier)) throw std::invalid_argument("unknown tier: " + tier);

    fs::create_directories(out / "binarized");
    const fs::path binarized_dir = out / "binarized";

    // Preprocess + segment + normalize, persisting each stage.
    TierGlyphs recovered = segment_tier_glyphs(manifest, corpus, tier, common.side, common.sigma,
                                               16, 12, 1, 1, &binarized_dir);
    save_glyph_set(recovered.glyphs, out / "glyphs");

    nlohmann::json summary;
    summary["tier"] = tier;
    summary["mode"] = mode;
    summary["glyphs"] = recovered.glyphs.size();

    if (mode == "spot") {
        EvalSetup setup = make_eval_setup(recovered.glyphs, query_count, common.seed);
        if (setup.query_indices.empty()) {
            throw std::invalid_argument("pipeline: no eligible queries");
        }
        MatcherCache cache(recovered.glyphs);
        const std::vector<MatchMethod> methods = parse_methods(methods_csv);
        EvalReport report = compare_methods(cache, setup.query_indices, setup.truth, methods,
                                            TauPolicy::BestF1);

        // Persist the top of each query's ranking as the match record stream.
        std::vector<DissimilarityRecord> records;
        for (MatchMethod m : methods) {
            for (std::size_t qi : setup.query_indices) {
                SpotResult res = spot_cached(qi, cache, m, SpotLimit::by_top_k(record_top));
                for (const auto& [id, value] : res.matches) {
                    records.push_back({res.query_id, id, m, value});
                }
            }
        }
        std::ostringstream buf;
        write_records_jsonl(buf, records);
        write_text(out / "records.jsonl", buf.str());
        write_text(out / "report.json", eval_report_to_json(report) + "\n");
        write_text(out / "report.txt", eval_report_to_table(report));
        std::cout << eval_report_to_table(report);
        summary["queries"] = setup.query_indices.size();
    } else if (mode == "fontspot") {
        nlohmann::json results;
        for (auto [e, name] : {std::pair{Extractor::FractalSig, "fractal"},
                               std::pair{Extractor::WaveletEnergy, "wavelet"}}) {
            FontspotOutcome res = fontspot_accuracy(manifest, corpus, tier, e, feat_side, k,
                                                    levels, sample, common.seed);
            results[name] = {{"accuracy", res.accuracy}, {"count", res.total}};
        }
        write_text(out / "report.json", results.dump(2) + "\n");
        summary["fontspot"] = results;
    } else if (mode == "cluster") {
        std::vector<Glyph> glyphs = recovered.glyphs;
        if (glyphs.size() > sample) glyphs.resize(sample);
        MatcherCache cache(glyphs);
        auto classes = leader_cluster(
            glyphs.size(),
            [&](std::size_t a, std::size_t b) {
                return cache.dissimilarity(a, b, MatchMethod::Edm);
            },
            1.0);
        nlohmann::json cj;
        cj["method"] = "leader";
        cj["params"] = {{"tau", 1.0}, {"char_method", "edm"}};
        cj["seed"] = common.seed;
        cj["classes"] = nlohmann::json::array();
        for (const auto& cls : classes) {
            nlohmann::json members = nlohmann::json::array();
            for (std::size_t i : cls) members.push_back(glyph_uid(glyphs[i]));
            cj["classes"].push_back(members);
        }
        write_text(out / "clusters.json", cj.dump(2) + "\n");
        summary["classes"] = classes.size();
    } else {
        throw std::invalid_argument("unknown pipeline mode: " + mode);
    }

    write_text(out / "summary.json", summary.dump(2) + "\n");

    RunMeta meta;
    meta.subcommand = "pipeline";
    meta.params["corpus"] = corpus.string();
    meta.params["tier"] = tier;
    meta.params["mode"] = mode;
    meta.params["methods"] = methods_csv;
    meta.params["queries"] = std::to_string(query_count);
    meta.params["record-top"] = std::to_string(record_top);
    meta.params["seed"] = std::to_string(common.seed);
    meta.params["sigma"] = std::to_string(common.sigma);
    meta.params["side"] = std::to_string(common.side);
    meta.params["feat-side"] = std::to_string(feat_side);
    meta.params["k"] = std::to_string(k);
    meta.params["levels"] = std::to_string(levels);
    meta.params["sample"] = std::to_string(sample);
    meta.params["out"] = out.string();
    meta.input(corpus / "manifest.json");
    meta.write(meta_path_for(out, true));
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"glyphspot: character/word spotting and font analysis for document images"};
    app.set_version_flag("--version", std::string("glyphspot ") + kVersion);
    app.set_config("--config", "", "key=value configuration file; flags win over the file");
    app.require_subcommand(1);

    CommonOpts common;

    // synth
    auto* synth = app.add_subcommand("synth", "generate the built-in synthetic corpus");
    fs::path synth_out;
    synth->add_option("--out", synth_out, "output corpus directory")->required();
    synth->add_option("--seed", common.seed, "generator seed");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "smooth and optionally binarize one image");
    fs::path pre_in, pre_out;
    bool pre_binarize = false;
    pre->add_option("--in", pre_in, "input image")->required();
    pre->add_option("--out", pre_out, "output image")->required();
    pre->add_option("--sigma", common.sigma, "gaussian sigma (0 disables)");
    pre->add_flag("--binarize", pre_binarize, "Otsu + isolated-pixel cleanup");

    // segment
    auto* seg = app.add_subcommand("segment", "segment one page into normalized glyphs");
    fs::path seg_image, seg_out;
    int seg_smear_h = 0, seg_smear_v = 0, seg_min_gap = 1, seg_min_line_gap = 1;
    seg->add_option("--image", seg_image, "page image")->required();
    seg->add_option("--out", seg_out, "output glyph directory")->required();
    seg->add_option("--sigma", common.sigma, "gaussian sigma before binarization");
    seg->add_option("--side", common.side, "normalized grid side");
    seg->add_option("--smear-h", seg_smear_h, "horizontal smear (0 = auto)");
    seg->add_option("--smear-v", seg_smear_v, "vertical smear (0 = auto)");
    seg->add_option("--min-gap", seg_min_gap, "columns separating characters");
    seg->add_option("--min-line-gap", seg_min_line_gap, "blank rows merging lines");

    // features
    auto* feat = app.add_subcommand("features", "extract feature vectors from a glyph set");
    fs::path feat_glyphs, feat_out;
    std::string feat_extractor = "fractal";
    int feat_side = 32, feat_k = 2, feat_levels = 3;
    feat->add_option("--glyphs", feat_glyphs, "glyph directory")->required();
    feat->add_option("--out", feat_out, "output JSONL file")->required();
    feat->add_option("--extractor", feat_extractor, "fractal | wavelet")
        ->check(CLI::IsMember({"fractal", "wavelet"}));
    feat->add_option("--feat-side", feat_side, "feature canvas side");
    feat->add_option("--k", feat_k, "fractal signature cells per side");
    feat->add_option("--levels", feat_levels, "wavelet levels");

    // spot
    auto* sp = app.add_subcommand("spot", "rank corpus glyphs or words against a query image");
    fs::path sp_corpus, sp_query, sp_out;
    std::string sp_tier = kTierClean, sp_method = "edm";
    double sp_tau = -1.0;
    long long sp_topk = -1;
    bool sp_word = false;
    sp->add_option("--corpus", sp_corpus, "corpus directory")->required();
    sp->add_option("--tier", sp_tier, "degradation tier");
    sp->add_option("--query-image", sp_query, "query image")->required();
    sp->add_option("--method", sp_method, "xor | edm | vproj | vproj_dtw");
    sp->add_option("--tau", sp_tau, "dissimilarity threshold");
    sp->add_option("--top-k", sp_topk, "result count cap");
    sp->add_flag("--word", sp_word, "treat the query as a word (sequence matching)");
    sp->add_option("--side", common.side, "normalized grid side");
    sp->add_option("--seed", common.seed, "seed recorded in metadata");
    sp->add_option("--out", sp_out, "output records JSONL")->required();

    // fontspot
    auto* fspot = app.add_subcommand("fontspot", "font classification accuracy against the atlas");
    fs::path fs_corpus, fs_out;
    std::string fs_tier = kTierClean, fs_extractor = "both";
    int fs_side = 32, fs_k = 2, fs_levels = 3;
    std::size_t fs_sample = 400;
    fspot->add_option("--corpus", fs_corpus, "corpus directory")->required();
    fspot->add_option("--tier", fs_tier, "degradation tier");
    fspot->add_option("--extractor", fs_extractor, "fractal | wavelet | both")
        ->check(CLI::IsMember({"fractal", "wavelet", "both"}));
    fspot->add_option("--feat-side", fs_side, "feature canvas side");
    fspot->add_option("--k", fs_k, "fractal signature cells per side");
    fspot->add_option("--levels", fs_levels, "wavelet levels");
    fspot->add_option("--sample", fs_sample, "glyph sample size");
    fspot->add_option("--seed", common.seed, "sampling seed");
    fspot->add_option("--out", fs_out, "output report JSON")->required();

    // cluster
    auto* clu = app.add_subcommand("cluster", "unsupervised glyph grouping");
    fs::path clu_corpus, clu_out;
    std::string clu_tier = kTierClean, clu_method = "leader", clu_char_method = "edm";
    std::string clu_extractor = "fractal";
    int clu_k = 26, clu_rows = 6, clu_cols = 6, clu_epochs = 10, clu_feat_side = 32;
    double clu_tau = 1.0;
    std::size_t clu_sample = 500;
    clu->add_option("--corpus", clu_corpus, "corpus directory")->required();
    clu->add_option("--tier", clu_tier, "degradation tier");
    clu->add_option("--method", clu_method, "kmeans | som | leader")
        ->check(CLI::IsMember({"kmeans", "som", "leader"}));
    clu->add_option("--k", clu_k, "kmeans cluster count");
    clu->add_option("--som-rows", clu_rows, "SOM grid rows");
    clu->add_option("--som-cols", clu_cols, "SOM grid cols");
    clu->add_option("--som-epochs", clu_epochs, "SOM training epochs");
    clu->add_option("--tau", clu_tau, "leader clustering threshold");
    clu->add_option("--char-method", clu_char_method, "leader dissimilarity: xor | edm");
    clu->add_option("--features", clu_extractor, "kmeans/som features: fractal | wavelet")
        ->check(CLI::IsMember({"fractal", "wavelet"}));
    clu->add_option("--feat-side", clu_feat_side, "feature canvas side");
    clu->add_option("--sample", clu_sample, "glyph sample size");
    clu->add_option("--seed", common.seed, "clustering seed");
    clu->add_option("--side", common.side, "normalized grid side");
    clu->add_option("--out", clu_out, "output JSON")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "precision/recall comparison of matching methods");
    fs::path ev_corpus, ev_json = "report.json", ev_table = "report.txt";
    std::string ev_tier = kTierMild, ev_methods = "xor,edm,vproj", ev_policy = "best-f1";
    double ev_tau = 0.0;
    std::size_t ev_queries = 100;
    ev->add_option("--corpus", ev_corpus, "corpus directory")->required();
    ev->add_option("--tier", ev_tier, "degradation tier");
    ev->add_option("--methods", ev_methods, "comma-separated method list");
    ev->add_option("--tau-policy", ev_policy, "best-f1 | fixed")
        ->check(CLI::IsMember({"best-f1", "fixed"}));
    ev->add_option("--tau", ev_tau, "threshold for --tau-policy fixed");
    ev->add_option("--queries", ev_queries, "query sample size");
    ev->add_option("--seed", common.seed, "query sampling seed");
    ev->add_option("--side", common.side, "normalized grid side");
    ev->add_option("--out-json", ev_json, "report JSON path");
    ev->add_option("--out-table", ev_table, "report table path");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "preprocess, segment, match, evaluate");
    fs::path pipe_corpus, pipe_out;
    std::string pipe_tier = kTierClean, pipe_mode = "spot", pipe_methods = "xor,edm";
    std::size_t pipe_queries = 40, pipe_record_top = 50, pipe_sample = 400;
    int pipe_feat_side = 32, pipe_k = 2, pipe_levels = 3;
    pipe->add_option("--corpus", pipe_corpus, "corpus directory")->required();
    pipe->add_option("--tier", pipe_tier, "degradation tier");
    pipe->add_option("--mode", pipe_mode, "spot | fontspot | cluster")
        ->check(CLI::IsMember({"spot", "fontspot", "cluster"}));
    pipe->add_option("--methods", pipe_methods, "comma-separated method list");
    pipe->add_option("--queries", pipe_queries, "query sample size");
    pipe->add_option("--record-top", pipe_record_top, "ranked records kept per query");
    pipe->add_option("--seed", common.seed, "run seed");
    pipe->add_option("--sigma", common.sigma, "gaussian sigma before binarization");
    pipe->add_option("--side", common.side, "normalized grid side");
    pipe->add_option("--feat-side", pipe_feat_side, "feature canvas side");
    pipe->add_option("--k", pipe_k, "fractal signature cells per side");
    pipe->add_option("--levels", pipe_levels, "wavelet levels");
    pipe->add_option("--sample", pipe_sample, "fontspot/cluster sample size");
    pipe->add_option("--out", pipe_out, "output directory")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_out, common.seed);
        if (pre->parsed()) return cmd_preprocess(pre_in, pre_out, common.sigma, pre_binarize);
        if (seg->parsed()) {
            return cmd_segment(seg_image, seg_out, common, seg_smear_h, seg_smear_v, seg_min_gap,
                               seg_min_line_gap);
        }
        if (feat->parsed()) {
            return cmd_features(feat_glyphs, feat_out, feat_extractor, feat_side, feat_k,
                                feat_levels);
        }
        if (sp->parsed()) {
            return cmd_spot(sp_corpus, sp_tier, sp_query, sp_method,
                            sp_tau >= 0 ? std::optional<double>(sp_tau) : std::nullopt,
                            sp_topk >= 0 ? std::optional<std::size_t>(sp_topk) : std::nullopt,
                            sp_word, common, sp_out);
        }
        if (fspot->parsed()) {
            return cmd_fontspot(fs_corpus, fs_tier, fs_extractor, fs_side, fs_k, fs_levels,
                                fs_sample, common.seed, fs_out);
        }
        if (clu->parsed()) {
            return cmd_cluster(clu_corpus, clu_tier, clu_method, clu_k, clu_rows, clu_cols,
                               clu_epochs, clu_tau, clu_char_method, clu_extractor, clu_feat_side,
                               clu_sample, common, clu_out);
        }
        if (ev->parsed()) {
            return cmd_eval(ev_corpus, ev_tier, ev_methods, ev_policy, ev_tau, ev_queries, common,
                            ev_json, ev_table);
        }
        if (pipe->parsed()) {
            return cmd_pipeline(pipe_corpus, pipe_tier, pipe_mode, pipe_methods, pipe_queries,
                                pipe_record_top, common, pipe_feat_side, pipe_k, pipe_levels,
                                pipe_sample, pipe_out);
        }
    } catch (const ImageIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.kind() == ImageIoError::Kind::NotFound ||
                e.kind() == ImageIoError::Kind::WriteFailure)
                   ? 3
                   : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace glyphspot::cli
