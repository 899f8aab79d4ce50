#include "glyphspot/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <set>
#include <stdexcept>

#include "glyphspot/imgcore.hpp"

namespace glyphspot {

const BinaryImage& GlyphAtlas::bitmap(const std::string& font, const std::string& ch) const {
    auto fit = fonts.find(font);
    if (fit == fonts.end()) throw std::invalid_argument("unknown font: " + font);
    auto cit = fit->second.find(ch);
    if (cit == fit->second.end()) {
        throw std::invalid_argument("font '" + font + "' has no character '" + ch + "'");
    }
    return cit->second;
}

GlyphAtlas load_atlas(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw ImageIoError(ImageIoError::Kind::NotFound, "atlas directory missing: " + dir.string());
    }
    GlyphAtlas atlas;
    std::set<std::string> alphabet;
    std::vector<std::string> font_names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        font_names.push_back(entry.path().filename().string());
    }
    std::sort(font_names.begin(), font_names.end());

    for (const std::string& font : font_names) {
        for (const auto& file : fs::directory_iterator(dir / font)) {
            if (!file.is_regular_file()) continue;
            const fs::path& p = file.path();
            std::string stem = p.stem().string();
            if (p.extension() != ".pgm" || stem.size() != 1) {
                std::cerr << "warning: ignoring unrecognized atlas file " << p << "\n";
                continue;
            }
            GrayImage img = load_image(p);
            BinaryImage bin(img.width, img.height);
            for (std::size_t i = 0; i < img.size(); ++i) bin.mask[i] = img.data[i] < 128 ? 1 : 0;
            if (bin.foreground_count() == 0) {
                throw std::invalid_argument("atlas bitmap empty: font '" + font +
                                            "' character '" + stem + "'");
            }
            atlas.fonts[font][stem] = std::move(bin);
            alphabet.insert(stem);
        }
    }
    if (atlas.fonts.empty()) throw std::invalid_argument("atlas has no font directories");
    for (const auto& [font, chars] : atlas.fonts) {
        for (const std::string& ch : alphabet) {
            if (!chars.count(ch)) {
                throw std::invalid_argument("font '" + font + "' is missing character '" + ch +
                                            "'");
            }
        }
    }
    atlas.alphabet.assign(alphabet.begin(), alphabet.end());
    return atlas;
}

BinaryImage dilate8(const BinaryImage& bin) {
    BinaryImage out(bin.width + 2, bin.height + 2);
    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            if (!bin.get(x, y)) continue;
            for (int dy = 0; dy <= 2; ++dy) {
                for (int dx = 0; dx <= 2; ++dx) out.set(x + dx, y + dy, true);
            }
        }
    }
    return out;
}

namespace {

int nn_center_index(int i, int src_len, int dst_len) {
    return static_cast<int>((static_cast<long long>(2 * i + 1) * src_len) / (2 * dst_len));
}

}  // namespace

BinaryImage shrink_horizontal(const BinaryImage& bin, double factor) {
    if (factor <= 0.0 || factor > 1.0) throw std::invalid_argument("shrink factor in (0,1]");
    const int new_w = std::max(1, static_cast<int>(std::floor(bin.width * factor + 0.5)));
    BinaryImage out(new_w, bin.height);
    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < new_w; ++x) {
            out.set(x, y, bin.get(nn_center_index(x, bin.width, new_w), y));
        }
    }
    return out;
}

BinaryImage shear_horizontal(const BinaryImage& bin, double slope) {
    if (slope < 0.0) throw std::invalid_argument("shear slope must be >= 0");
    auto offset = [&](int y) {
        return static_cast<int>(std::floor(slope * (bin.height - 1 - y) + 0.5));
    };
    const int max_off = offset(0);
    BinaryImage out(bin.width + max_off, bin.height);
    for (int y = 0; y < bin.height; ++y) {
        const int off = offset(y);
        for (int x = 0; x < bin.width; ++x) {
            if (bin.get(x, y)) out.set(x + off, y, true);
        }
    }
    return out;
}

// ---------------------------------------------------------- rendering ----

std::pair<GrayImage, PageEntry> synth_page(const GlyphAtlas& atlas,
                                           const std::vector<std::string>& text_lines,
                                           const std::string& font_id, const PageLayout& layout,
                                           std::uint64_t seed, const std::string& page_id) {
    const auto& font = atlas.fonts.count(font_id)
                           ? atlas.fonts.at(font_id)
                           : throw std::invalid_argument("unknown font: " + font_id);

    // Measure first: line widths/heights, then page extent.
    struct LinePlan {
        std::string text;
        int width = 0;
        int height = 0;
        bool paragraph_break = false;  // extra gap before this line
    };
    std::vector<LinePlan> plan;
    bool pending_break = false;
    for (const std::string& line : text_lines) {
        if (line.empty()) {
            pending_break = true;
            continue;
        }
        LinePlan lp;
        lp.text = line;
        lp.paragraph_break = pending_break;
        pending_break = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (c == ' ') {
                lp.width += layout.word_gap;
                continue;
            }
            const BinaryImage& bm = font.count(std::string(1, c))
                                        ? font.at(std::string(1, c))
                                        : throw std::invalid_argument(
                                              std::string("character not in alphabet: ") + c);
            if (i > 0 && line[i - 1] != ' ') lp.width += layout.glyph_gap;
            lp.width += bm.width;
            lp.height = std::max(lp.height, bm.height);
        }
        if (lp.width == 0) continue;
        plan.push_back(std::move(lp));
    }
    if (plan.empty()) throw std::invalid_argument("synth_page: no text");

    int page_w = 0, page_h = layout.margin * 2;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        page_w = std::max(page_w, plan[i].width);
        if (i > 0) page_h += plan[i].paragraph_break ? layout.paragraph_gap : layout.line_gap;
        page_h += plan[i].height;
    }
    page_w += layout.margin * 2;

    GrayImage page(page_w, page_h, 255);
    PageEntry entry;
    entry.page_id = page_id;
    entry.font_id = font_id;
    entry.width = page_w;
    entry.height = page_h;

    auto stamp = [&](const BinaryImage& bm, int ox, int oy) -> Box {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
        for (int y = 0; y < bm.height; ++y) {
            for (int x = 0; x < bm.width; ++x) {
                if (!bm.get(x, y)) continue;
                page.at(ox + x, oy + y) = 0;
                x0 = std::min(x0, ox + x);
                y0 = std::min(y0, oy + y);
                x1 = std::max(x1, ox + x);
                y1 = std::max(y1, oy + y);
            }
        }
        return Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    };

    struct BlockExtent {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
        bool used = false;
        void add(const Box& b) {
            x0 = std::min(x0, b.x);
            y0 = std::min(y0, b.y);
            x1 = std::max(x1, b.right() - 1);
            y1 = std::max(y1, b.bottom() - 1);
            used = true;
        }
        Box box() const { return Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1}; }
    };
    BlockExtent block;

    int cursor_y = layout.margin;
    for (std::size_t li = 0; li < plan.size(); ++li) {
        const LinePlan& lp = plan[li];
        if (li > 0) {
            if (lp.paragraph_break) {
                if (block.used) entry.blocks.push_back(block.box());
                block = BlockExtent{};
                cursor_y += layout.paragraph_gap;
            } else {
                cursor_y += layout.line_gap;
            }
        }

        int cursor_x = layout.margin;
        BlockExtent line_extent;
        WordTruth word;
        word.first_glyph = static_cast<int>(entry.glyphs.size());
        BlockExtent word_extent;
        auto flush_word = [&]() {
            if (word.text.empty()) return;
            word.box = word_extent.box();
            word.glyph_count = static_cast<int>(entry.glyphs.size()) - word.first_glyph;
            entry.words.push_back(word);
            word = WordTruth{};
            word.first_glyph = static_cast<int>(entry.glyphs.size());
            word_extent = BlockExtent{};
        };
        for (std::size_t i = 0; i < lp.text.size(); ++i) {
            char c = lp.text[i];
            if (c == ' ') {
                flush_word();
                cursor_x += layout.word_gap;
                continue;
            }
            if (i > 0 && lp.text[i - 1] != ' ') cursor_x += layout.glyph_gap;
            const BinaryImage& bm = font.at(std::string(1, c));
            Box tight = stamp(bm, cursor_x, cursor_y);
            entry.glyphs.push_back({tight, std::string(1, c)});
            word.text.push_back(c);
            word_extent.add(tight);
            line_extent.add(tight);
            block.add(tight);
            cursor_x += bm.width;
        }
        flush_word();
        if (line_extent.used) entry.lines.push_back(line_extent.box());
        cursor_y += lp.height;
    }
    if (block.used) entry.blocks.push_back(block.box());

    // Layout is deterministic; the seed is recorded so future jittered
    // variants stay reproducible.
    (void)seed;
    return {std::move(page), std::move(entry)};
}

GrayImage degrade(const GrayImage& img, const DegradeParams& params, std::uint64_t seed) {
    if (params.downsample_factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
    if (params.speckle_rate < 0.0 || params.speckle_rate > 1.0) {
        throw std::invalid_argument("speckle rate must be in [0,1]");
    }
    if (params.noise_sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");

    GrayImage out = img;
    if (params.noise_sigma > 0.0) {
        Rng rng = Rng::derive(seed, "noise");
        for (std::uint8_t& v : out.data) {
            double nv = std::floor(v + params.noise_sigma * rng.next_gaussian() + 0.5);
            v = static_cast<std::uint8_t>(std::clamp(nv, 0.0, 255.0));
        }
    }
    if (params.downsample_factor > 1) {
        const int f = params.downsample_factor;
        const int cw = (out.width + f - 1) / f;
        const int ch = (out.height + f - 1) / f;
        GrayImage cells(cw, ch);
        for (int cy = 0; cy < ch; ++cy) {
            for (int cx = 0; cx < cw; ++cx) {
                int sum = 0, count = 0;
                for (int y = cy * f; y < std::min((cy + 1) * f, out.height); ++y) {
                    for (int x = cx * f; x < std::min((cx + 1) * f, out.width); ++x) {
                        sum += out.at(x, y);
                        ++count;
                    }
                }
                cells.at(cx, cy) = static_cast<std::uint8_t>(
                    (2 * sum + count) / (2 * count));  // round half up
            }
        }
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) out.at(x, y) = cells.at(x / f, y / f);
        }
    }
    if (params.speckle_rate > 0.0) {
        Rng rng = Rng::derive(seed, "speckle");
        for (std::uint8_t& v : out.data) {
            if (rng.next_double() < params.speckle_rate) {
                v = rng.next_double() < 0.5 ? 0 : 255;
            }
        }
    }
    return out;
}

BinaryImage render_fractal_fixture(FractalFixture kind, int side) {
    if (side < 1 || (side & (side - 1)) != 0) {
        throw std::invalid_argument("fixture side must be a power of two");
    }
    BinaryImage out(side, side);
    switch (kind) {
        case FractalFixture::SierpinskiTriangle:
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    if ((x & y) == 0) out.set(x, y, true);
                }
            }
            break;
        case FractalFixture::FilledSquare:
            std::fill(out.mask.begin(), out.mask.end(), std::uint8_t{1});
            break;
        case FractalFixture::SinglePixel:
            out.set(side / 2, side / 2, true);
            break;
    }
    return out;
}

// ----------------------------------------------------- default corpus ----

namespace {

// Fixed vocabulary; covers all 26 letters so every atlas character appears
// in the corpus.
const std::vector<std::string> kVocabulary = {
    "the",    "and",    "for",    "are",   "but",   "not",    "you",    "all",
    "any",    "can",    "her",    "was",   "one",   "our",    "out",    "day",
    "get",    "has",    "him",    "his",   "how",   "man",    "new",    "now",
    "old",    "see",    "two",    "way",   "who",   "boy",    "did",    "its",
    "let",    "put",    "say",    "she",   "too",   "use",    "text",   "page",
    "font",   "word",   "line",   "king",  "stone", "quill",  "vellum", "scribe",
    "ink",    "map",    "glyph",  "mark",  "sign",  "seal",   "folio",  "verso",
    "recto",  "codex",  "print",  "press", "type",  "size",   "jazz",   "quiz",
    "vex",    "fox",    "jump",   "lazy",  "over",  "dog",    "pack",   "box",
    "very",   "just",   "form",   "much",  "great", "think",  "help",   "low",
    "year",   "came",   "show",   "every", "good",  "give",   "under",  "name",
    "sound",  "tell",   "men",    "small", "set",   "end",    "why",    "ask",
    "went",   "read",   "need",   "land",  "hand",  "high",   "keep",   "last",
    "early",  "book",   "letter", "paper", "study", "learn",  "write",  "place",
    "turn",   "cause",  "same",   "mean",  "move",  "right",  "left",   "home",
    "archive","margin", "quire",  "pigment","vault", "zeal",   "query",  "jewel",
    "axiom",  "vivid",  "banner", "scroll", "maker", "reader", "olden",  "quick",
    "brown",  "plume",  "sketch", "zone",   "relic", "craft",  "guild",  "index",
};

std::string make_page_text_line(Rng& rng, int target_width_chars) {
    std::string line;
    while (true) {
        const std::string& word = kVocabulary[rng.next_below(kVocabulary.size())];
        int extra = static_cast<int>(word.size()) + (line.empty() ? 0 : 1);
        if (!line.empty() &&
            static_cast<int>(line.size()) + extra > target_width_chars) {
            break;
        }
        if (!line.empty()) line.push_back(' ');
        line += word;
    }
    return line;
}

long long count_letters(const std::vector<std::string>& lines) {
    long long n = 0;
    for (const std::string& line : lines) {
        for (char c : line) {
            if (c != ' ') ++n;
        }
    }
    return n;
}

}  // namespace

long long CorpusManifest::glyph_count() const {
    long long n = 0;
    for (const PageEntry& p : pages) n += static_cast<long long>(p.glyphs.size());
    return n;
}

CorpusManifest build_default_corpus(const std::filesystem::path& out_dir, std::uint64_t seed) {
    namespace fs = std::filesystem;
    const GlyphAtlas& atlas = builtin_atlas();
    const PageLayout layout;

    CorpusManifest manifest;
    manifest.seed = seed;
    manifest.alphabet = atlas.alphabet;
    for (const auto& [font, chars] : atlas.fonts) manifest.fonts.push_back(font);
    manifest.tiers[kTierClean] = DegradeParams{0.0, 1, 0.0};
    manifest.tiers[kTierMild] = DegradeParams{5.0, 1, 0.0};
    manifest.tiers[kTierHeavy] = DegradeParams{15.0, 2, 0.002};

    fs::create_directories(out_dir / "queries");
    for (const auto& [tier, params] : manifest.tiers) {
        fs::create_directories(out_dir / "pages" / tier);
    }

    // Around 1770 letters per font, 2 paragraphs x 4 lines per page.
    constexpr long long kPerFontTarget = 1770;
    for (const std::string& font : manifest.fonts) {
        long long font_letters = 0;
        int page_idx = 0;
        while (font_letters < kPerFontTarget) {
            char idbuf[64];
            std::snprintf(idbuf, sizeof(idbuf), "%s_p%03d", font.c_str(), page_idx);
            const std::string page_id = idbuf;
            Rng rng = Rng::derive(seed, page_id);

            std::vector<std::string> text;
            for (int para = 0; para < 2; ++para) {
                if (para > 0) text.push_back("");
                for (int l = 0; l < 4; ++l) {
                    if (font_letters + count_letters(text) >= kPerFontTarget) break;
                    text.push_back(make_page_text_line(rng, 36));
                }
            }
            font_letters += count_letters(text);

            auto [master, entry] = synth_page(atlas, text, font, layout, seed, page_id);
            for (const auto& [tier, params] : manifest.tiers) {
                GrayImage img = degrade(master, params, fnv1a64(page_id) ^ seed);
                const std::string rel = "pages/" + tier + "/" + page_id + ".pgm";
                save_image(img, out_dir / rel, ImageFormat::Pgm);
                entry.images[tier] = rel;
            }
            manifest.pages.push_back(std::move(entry));
            ++page_idx;
        }
    }

    // Query set: 100 words that occur in the corpus, each rendered clean in
    // a seeded font choice.
    std::map<std::string, std::vector<std::pair<std::string, int>>> occurrences;
    for (const PageEntry& page : manifest.pages) {
        for (std::size_t wi = 0; wi < page.words.size(); ++wi) {
            occurrences[page.words[wi].text].push_back({page.page_id, static_cast<int>(wi)});
        }
    }
    std::vector<std::string> candidates;
    for (const auto& [word, occ] : occurrences) candidates.push_back(word);
    Rng qrng = Rng::derive(seed, "queries");
    qrng.shuffle(candidates);
    const std::size_t query_count = std::min<std::size_t>(100, candidates.size());
    std::vector<std::string> chosen(candidates.begin(), candidates.begin() + query_count);
    std::sort(chosen.begin(), chosen.end());

    for (std::size_t qi = 0; qi < chosen.size(); ++qi) {
        QueryEntry q;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "q%03zu", qi);
        q.query_id = idbuf;
        q.word = chosen[qi];
        q.font_id = manifest.fonts[qrng.next_below(manifest.fonts.size())];
        q.occurrences = occurrences[q.word];
        q.image = "queries/" + q.query_id + ".pgm";
        auto [img, entry] = synth_page(atlas, {q.word}, q.font_id, layout, seed, q.query_id);
        save_image(img, out_dir / q.image, ImageFormat::Pgm);
        manifest.queries.push_back(std::move(q));
    }

    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

// ------------------------------------------------------- manifest I/O ----

namespace {

nlohmann::json box_json(const Box& b) {
    return {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

Box box_from_json(const nlohmann::json& j) {
    return Box{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(),
               j.at("h").get<int>()};
}

}  // namespace

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["schema_version"] = manifest.schema_version;
    j["seed"] = manifest.seed;
    j["alphabet"] = manifest.alphabet;
    j["fonts"] = manifest.fonts;
    for (const auto& [tier, p] : manifest.tiers) {
        j["tiers"][tier] = {{"noise_sigma", p.noise_sigma},
                            {"downsample_factor", p.downsample_factor},
                            {"speckle_rate", p.speckle_rate}};
    }
    j["pages"] = nlohmann::json::array();
    for (const PageEntry& page : manifest.pages) {
        nlohmann::json pj;
        pj["page_id"] = page.page_id;
        pj["font_id"] = page.font_id;
        pj["width"] = page.width;
        pj["height"] = page.height;
        pj["images"] = page.images;
        pj["blocks"] = nlohmann::json::array();
        for (const Box& b : page.blocks) pj["blocks"].push_back(box_json(b));
        pj["lines"] = nlohmann::json::array();
        for (const Box& b : page.lines) pj["lines"].push_back(box_json(b));
        pj["glyphs"] = nlohmann::json::array();
        for (const GlyphTruth& g : page.glyphs) {
            pj["glyphs"].push_back({{"box", box_json(g.box)}, {"label", g.label}});
        }
        pj["words"] = nlohmann::json::array();
        for (const WordTruth& w : page.words) {
            pj["words"].push_back({{"text", w.text},
                                   {"box", box_json(w.box)},
                                   {"first_glyph", w.first_glyph},
                                   {"glyph_count", w.glyph_count}});
        }
        j["pages"].push_back(std::move(pj));
    }
    j["queries"] = nlohmann::json::array();
    for (const QueryEntry& q : manifest.queries) {
        nlohmann::json qj;
        qj["query_id"] = q.query_id;
        qj["word"] = q.word;
        qj["font_id"] = q.font_id;
        qj["image"] = q.image;
        qj["occurrences"] = nlohmann::json::array();
        for (const auto& [page_id, wi] : q.occurrences) {
            qj["occurrences"].push_back({{"page_id", page_id}, {"word_index", wi}});
        }
        j["queries"].push_back(std::move(qj));
    }

    std::ofstream out(path);
    if (!out) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure,
                           "cannot write manifest: " + path.string());
    }
    out << j.dump(2) << "\n";
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ImageIoError(ImageIoError::Kind::NotFound, "manifest not found: " + path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in);
    CorpusManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    m.fonts = j.at("fonts").get<std::vector<std::string>>();
    for (const auto& [tier, tj] : j.at("tiers").items()) {
        m.tiers[tier] = DegradeParams{tj.at("noise_sigma").get<double>(),
                                      tj.at("downsample_factor").get<int>(),
                                      tj.at("speckle_rate").get<double>()};
    }
    for (const auto& pj : j.at("pages")) {
        PageEntry page;
        page.page_id = pj.at("page_id").get<std::string>();
        page.font_id = pj.at("font_id").get<std::string>();
        page.width = pj.at("width").get<int>();
        page.height = pj.at("height").get<int>();
        page.images = pj.at("images").get<std::map<std::string, std::string>>();
        for (const auto& bj : pj.at("blocks")) page.blocks.push_back(box_from_json(bj));
        for (const auto& bj : pj.at("lines")) page.lines.push_back(box_from_json(bj));
        for (const auto& gj : pj.at("glyphs")) {
            page.glyphs.push_back(
                {box_from_json(gj.at("box")), gj.at("label").get<std::string>()});
        }
        for (const auto& wj : pj.at("words")) {
            WordTruth w;
            w.text = wj.at("text").get<std::string>();
            w.box = box_from_json(wj.at("box"));
            w.first_glyph = wj.at("first_glyph").get<int>();
            w.glyph_count = wj.at("glyph_count").get<int>();
            page.words.push_back(std::move(w));
        }
        m.pages.push_back(std::move(page));
    }
    for (const auto& qj : j.at("queries")) {
        QueryEntry q;
        q.query_id = qj.at("query_id").get<std::string>();
        q.word = qj.at("word").get<std::string>();
        q.font_id = qj.at("font_id").get<std::string>();
        q.image = qj.at("image").get<std::string>();
        for (const auto& oj : qj.at("occurrences")) {
            q.occurrences.push_back(
                {oj.at("page_id").get<std::string>(), oj.at("word_index").get<int>()});
        }
        m.queries.push_back(std::move(q));
    }
    return m;
}

}  // namespace glyphspot
