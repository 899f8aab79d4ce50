#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "glyphspot/image.hpp"
#include "glyphspot/rng.hpp"

namespace glyphspot {

// One bitmap per (font, character). Bitmaps share a common em height within
// a font so stamping aligns tops; tight bounds are recorded at stamp time.
struct GlyphAtlas {
    std::vector<std::string> alphabet;
    std::map<std::string, std::map<std::string, BinaryImage>> fonts;

    const BinaryImage& bitmap(const std::string& font, const std::string& ch) const;
};

// 26 lowercase Latin letters in four synthetic fonts: base, bold (1-pixel
// dilation), condensed (25% horizontal shrink), sheared (15% shear).
const GlyphAtlas& builtin_atlas();

// Loads <dir>/<font>/<char>.pgm for every font subdirectory. Every font must
// cover the union alphabet; unknown files are ignored with a warning.
GlyphAtlas load_atlas(const std::filesystem::path& dir);

BinaryImage dilate8(const BinaryImage& bin);
BinaryImage shrink_horizontal(const BinaryImage& bin, double factor);
BinaryImage shear_horizontal(const BinaryImage& bin, double slope);

struct PageLayout {
    int glyph_gap = 2;
    int word_gap = 6;
    int line_gap = 4;
    int paragraph_gap = 16;
    int margin = 8;
};

struct GlyphTruth {
    Box box;
    std::string label;
};

struct WordTruth {
    std::string text;
    Box box;
    int first_glyph = 0;
    int glyph_count = 0;
};

struct PageEntry {
    std::string page_id;
    std::string font_id;
    int width = 0;
    int height = 0;
    std::vector<Box> blocks;  // one per paragraph
    std::vector<Box> lines;
    std::vector<GlyphTruth> glyphs;
    std::vector<WordTruth> words;
    std::map<std::string, std::string> images;  // tier -> relative path
};

// Renders text lines (a-z and spaces; an empty line starts a new paragraph)
// onto a white page, ink = 0. The entry records the tight box of every
// stamped glyph plus line/block/word geometry.
std::pair<GrayImage, PageEntry> synth_page(const GlyphAtlas& atlas,
                                           const std::vector<std::string>& text_lines,
                                           const std::string& font_id, const PageLayout& layout,
                                           std::uint64_t seed, const std::string& page_id = "page");

struct DegradeParams {
    double noise_sigma = 0.0;
    int downsample_factor = 1;
    double speckle_rate = 0.0;
};

// In order: additive Gaussian noise clamped to [0,255]; box-filter
// downsample by the factor and nearest-neighbor upsample back; salt-and-
// pepper speckle. Deterministic per seed; neutral parameters are an exact
// identity.
GrayImage degrade(const GrayImage& img, const DegradeParams& params, std::uint64_t seed);

enum class FractalFixture { SierpinskiTriangle, FilledSquare, SinglePixel };

// Analytic rasters for the fractal estimators. The Sierpinski triangle uses
// the bitwise rule (x AND y) == 0. `side` must be a power of two.
BinaryImage render_fractal_fixture(FractalFixture kind, int side);

struct QueryEntry {
    std::string query_id;
    std::string word;
    std::string font_id;
    std::string image;                                      // relative path
    std::vector<std::pair<std::string, int>> occurrences;  // (page_id, word index)
};

struct CorpusManifest {
    int schema_version = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> alphabet;
    std::vector<std::string> fonts;
    std::map<std::string, DegradeParams> tiers;
    std::vector<PageEntry> pages;
    std::vector<QueryEntry> queries;

    long long glyph_count() const;
};

inline constexpr const char* kTierClean = "clean";
inline constexpr const char* kTierMild = "mild";
inline constexpr const char* kTierHeavy = "heavy";

// Writes <out>/pages/<tier>/*.pgm, <out>/queries/*.pgm and
// <out>/manifest.json: ~7000 character instances over 4 fonts in three
// degradation tiers (clean; mild sigma=5; heavy sigma=15, factor=2,
// speckle=0.002), plus 100 query word images with their occurrence truth.
// Byte-identical for a fixed seed.
CorpusManifest build_default_corpus(const std::filesystem::path& out_dir, std::uint64_t seed);

void save_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);
CorpusManifest load_manifest(const std::filesystem::path& path);

}  // namespace glyphspot
