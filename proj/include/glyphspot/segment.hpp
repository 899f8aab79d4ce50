#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glyphspot/image.hpp"

namespace glyphspot {

// A segmented character: where it came from, and its size-normalized grid.
struct Glyph {
    std::string source_id;
    Box box;
    BinaryImage grid;  // side x side, >= 1 foreground pixel
    std::optional<std::string> label;
    std::optional<std::string> font_id;
};

// Stable identifier derived from provenance; unique per (page, position).
std::string glyph_uid(const Glyph& g);

inline constexpr int kDefaultGlyphSide = 32;

// Text blocks via run-length smearing: background runs shorter than the
// smear length and bounded by ink on both sides are filled, horizontally
// then vertically; 8-connected components of the smeared mask are reported
// as bounding boxes of their ORIGINAL foreground, top-to-bottom then
// left-to-right. Components with fewer than 4 original pixels are dropped.
std::vector<Box> segment_blocks(const BinaryImage& bin, int smear_h, int smear_v);

// Lines inside a block by horizontal projection; blank-row runs shorter
// than min_line_gap merge adjacent lines. Boxes are tight around each
// line's foreground.
std::vector<Box> segment_lines(const BinaryImage& bin, const Box& block, int min_line_gap = 1);

// Characters inside a line by vertical projection; all-background column
// runs of length >= min_gap separate characters, shorter blanks are
// absorbed. Boxes are tight and reported left to right.
std::vector<Box> segment_chars(const BinaryImage& bin, const Box& line, int min_gap = 1);

// Crops to the tight foreground box inside `box`, scales nearest-neighbor so
// the larger dimension becomes `side`, and centers on a side x side
// background grid (extra margin pixel goes right/bottom). Throws on a box
// with no foreground.
Glyph normalize_glyph(const BinaryImage& bin, const Box& box, int side = kDefaultGlyphSide,
                      const std::string& source_id = {});

// Tight foreground bounding box within `box`, if any foreground exists.
std::optional<Box> tight_foreground_box(const BinaryImage& bin, const Box& box);

// Convenience: full pipeline over one page (blocks -> lines -> chars).
std::vector<Box> segment_page_chars(const BinaryImage& bin, int smear_h, int smear_v,
                                    int min_gap = 1, int min_line_gap = 1);

// Median horizontal foreground run length; 1 when the page is empty.
int estimate_stroke_width(const BinaryImage& bin);

// Serializes a glyph set as side x side PGM files plus a JSON manifest
// (source_id, box, label, font_id, grid file per glyph).
void save_glyph_set(const std::vector<Glyph>& glyphs, const std::filesystem::path& dir);
std::vector<Glyph> load_glyph_set(const std::filesystem::path& dir);

}  // namespace glyphspot
