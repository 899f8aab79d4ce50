#include "glyphspot/segment.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "glyphspot/imgcore.hpp"

namespace glyphspot {

std::string glyph_uid(const Glyph& g) {
    return g.source_id + "@" + std::to_string(g.box.x) + "," + std::to_string(g.box.y) + "+" +
           std::to_string(g.box.w) + "x" + std::to_string(g.box.h);
}

namespace {

// Fills background runs shorter than `len` when bounded by foreground on
// both ends of the run. Border-touching runs stay open so page margins do
// not smear into the text body.
void smear_rows(BinaryImage& img, int len) {
    if (len <= 0) return;
    for (int y = 0; y < img.height; ++y) {
        int last_ink = -1;
        for (int x = 0; x < img.width; ++x) {
            if (!img.get(x, y)) continue;
            if (last_ink >= 0 && x - last_ink - 1 > 0 && x - last_ink - 1 < len) {
                for (int k = last_ink + 1; k < x; ++k) img.set(k, y, true);
            }
            last_ink = x;
        }
    }
}

void smear_cols(BinaryImage& img, int len) {
    if (len <= 0) return;
    for (int x = 0; x < img.width; ++x) {
        int last_ink = -1;
        for (int y = 0; y < img.height; ++y) {
            if (!img.get(x, y)) continue;
            if (last_ink >= 0 && y - last_ink - 1 > 0 && y - last_ink - 1 < len) {
                for (int k = last_ink + 1; k < y; ++k) img.set(x, k, true);
            }
            last_ink = y;
        }
    }
}

}  // namespace

std::vector<Box> segment_blocks(const BinaryImage& bin, int smear_h, int smear_v) {
    if (smear_h < 0 || smear_v < 0) throw std::invalid_argument("smear lengths must be >= 0");

    BinaryImage smeared = bin;
    smear_rows(smeared, smear_h);
    smear_cols(smeared, smear_v);

    // 8-connected labeling of the smeared mask (iterative flood fill).
    const int w = bin.width, h = bin.height;
    std::vector<int> label(smeared.mask.size(), -1);
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            std::size_t idx0 = static_cast<std::size_t>(y0) * w + x0;
            if (!smeared.mask[idx0] || label[idx0] >= 0) continue;
            int id = next++;
            stack.push_back({x0, y0});
            label[idx0] = id;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (smeared.mask[nidx] && label[nidx] < 0) {
                            label[nidx] = id;
                            stack.push_back({nx, ny});
                        }
                    }
                }
            }
        }
    }

    // Bounding boxes over the original foreground per component.
    struct Extent {
        int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1, count = 0;
    };
    std::vector<Extent> ext(next);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (!bin.mask[idx]) continue;
            Extent& e = ext[label[idx]];
            e.x0 = std::min(e.x0, x);
            e.y0 = std::min(e.y0, y);
            e.x1 = std::max(e.x1, x);
            e.y1 = std::max(e.y1, y);
            ++e.count;
        }
    }
    std::vector<Box> boxes;
    for (const Extent& e : ext) {
        if (e.count < 4) continue;
        boxes.push_back({e.x0, e.y0, e.x1 - e.x0 + 1, e.y1 - e.y0 + 1});
    }
    std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    return boxes;
}

std::vector<Box> segment_lines(const BinaryImage& bin, const Box& block, int min_line_gap) {
    if (!block.inside(bin.width, bin.height)) throw std::invalid_argument("block outside image");

    std::vector<int> row_count(block.h, 0);
    for (int r = 0; r < block.h; ++r) {
        for (int c = 0; c < block.w; ++c) {
            if (bin.get(block.x + c, block.y + r)) ++row_count[r];
        }
    }

    // Occupied row runs, merging across blank runs shorter than min_line_gap.
    std::vector<std::pair<int, int>> runs;  // [start, end] inclusive, block-relative
    int r = 0;
    while (r < block.h) {
        if (row_count[r] == 0) {
            ++r;
            continue;
        }
        int start = r;
        while (r < block.h && row_count[r] > 0) ++r;
        runs.push_back({start, r - 1});
    }
    std::vector<std::pair<int, int>> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && run.first - merged.back().second - 1 < min_line_gap) {
            merged.back().second = run.second;
        } else {
            merged.push_back(run);
        }
    }

    std::vector<Box> lines;
    for (const auto& [r0, r1] : merged) {
        Box span{block.x, block.y + r0, block.w, r1 - r0 + 1};
        auto tight = tight_foreground_box(bin, span);
        if (tight) lines.push_back(*tight);
    }
    return lines;
}

std::vector<Box> segment_chars(const BinaryImage& bin, const Box& line, int min_gap) {
    if (!line.inside(bin.width, bin.height)) throw std::invalid_argument("line outside image");
    if (min_gap < 1) throw std::invalid_argument("min_gap must be >= 1");

    std::vector<int> col_count(line.w, 0);
    for (int c = 0; c < line.w; ++c) {
        for (int r = 0; r < line.h; ++r) {
            if (bin.get(line.x + c, line.y + r)) ++col_count[c];
        }
    }

    std::vector<std::pair<int, int>> runs;  // occupied column runs, line-relative
    int c = 0;
    while (c < line.w) {
        if (col_count[c] == 0) {
            ++c;
            continue;
        }
        int start = c;
        while (c < line.w && col_count[c] > 0) ++c;
        runs.push_back({start, c - 1});
    }
    // Blank runs shorter than min_gap are absorbed into the character.
    std::vector<std::pair<int, int>> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && run.first - merged.back().second - 1 < min_gap) {
            merged.back().second = run.second;
        } else {
            merged.push_back(run);
        }
    }

    std::vector<Box> chars;
    for (const auto& [c0, c1] : merged) {
        Box span{line.x + c0, line.y, c1 - c0 + 1, line.h};
        auto tight = tight_foreground_box(bin, span);
        if (tight) chars.push_back(*tight);
    }
    return chars;
}

std::optional<Box> tight_foreground_box(const BinaryImage& bin, const Box& box) {
    if (!box.inside(bin.width, bin.height)) throw std::invalid_argument("box outside image");
    int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
    for (int y = box.y; y < box.bottom(); ++y) {
        for (int x = box.x; x < box.right(); ++x) {
            if (!bin.get(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return Box{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace {

// Nearest neighbor with center sampling: out i reads src floor((i+0.5)*n/m).
int nn_source_index(int i, int src_len, int dst_len) {
    return static_cast<int>((static_cast<long long>(2 * i + 1) * src_len) / (2 * dst_len));
}

}  // namespace

Glyph normalize_glyph(const BinaryImage& bin, const Box& box, int side,
                      const std::string& source_id) {
    if (side < 1) throw std::invalid_argument("grid side must be >= 1");
    auto tight = tight_foreground_box(bin, box);
    if (!tight) throw std::invalid_argument("normalize_glyph: box has no foreground");

    const int cw = tight->w, ch = tight->h;
    int tw, th;
    if (cw >= ch) {
        tw = side;
        th = std::max(1, static_cast<int>(std::min<long long>(
                             side, (static_cast<long long>(ch) * side + cw / 2) / cw)));
    } else {
        th = side;
        tw = std::max(1, static_cast<int>(std::min<long long>(
                             side, (static_cast<long long>(cw) * side + ch / 2) / ch)));
    }

    BinaryImage grid(side, side);
    const int off_x = (side - tw) / 2;
    const int off_y = (side - th) / 2;
    for (int y = 0; y < th; ++y) {
        int sy = tight->y + nn_source_index(y, ch, th);
        for (int x = 0; x < tw; ++x) {
            int sx = tight->x + nn_source_index(x, cw, tw);
            if (bin.get(sx, sy)) grid.set(off_x + x, off_y + y, true);
        }
    }

    Glyph g;
    g.source_id = source_id;
    g.box = *tight;
    g.grid = std::move(grid);
    return g;
}

std::vector<Box> segment_page_chars(const BinaryImage& bin, int smear_h, int smear_v, int min_gap,
                                    int min_line_gap) {
    std::vector<Box> chars;
    for (const Box& block : segment_blocks(bin, smear_h, smear_v)) {
        for (const Box& line : segment_lines(bin, block, min_line_gap)) {
            for (const Box& ch : segment_chars(bin, line, min_gap)) chars.push_back(ch);
        }
    }
    return chars;
}

int estimate_stroke_width(const BinaryImage& bin) {
    std::vector<int> runs;
    for (int y = 0; y < bin.height; ++y) {
        int len = 0;
        for (int x = 0; x <= bin.width; ++x) {
            if (x < bin.width && bin.get(x, y)) {
                ++len;
            } else if (len > 0) {
                runs.push_back(len);
                len = 0;
            }
        }
    }
    if (runs.empty()) return 1;
    std::nth_element(runs.begin(), runs.begin() + runs.size() / 2, runs.end());
    return runs[runs.size() / 2];
}

void save_glyph_set(const std::vector<Glyph>& glyphs, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (std::size_t i = 0; i < glyphs.size(); ++i) {
        const Glyph& g = glyphs[i];
        char name[32];
        std::snprintf(name, sizeof(name), "g%05zu.pgm", i);
        GrayImage img(g.grid.width, g.grid.height);
        for (std::size_t p = 0; p < g.grid.mask.size(); ++p) {
            img.data[p] = g.grid.mask[p] ? 0 : 255;
        }
        save_image(img, dir / name, ImageFormat::Pgm);
        nlohmann::json entry = {
            {"source_id", g.source_id},
            {"box", {{"x", g.box.x}, {"y", g.box.y}, {"w", g.box.w}, {"h", g.box.h}}},
            {"grid", name},
        };
        if (g.label) entry["label"] = *g.label;
        if (g.font_id) entry["font_id"] = *g.font_id;
        manifest.push_back(entry);
    }
    std::ofstream out(dir / "glyphs.json");
    out << manifest.dump(2) << "\n";
}

std::vector<Glyph> load_glyph_set(const std::filesystem::path& dir) {
    std::ifstream in(dir / "glyphs.json");
    if (!in) throw ImageIoError(ImageIoError::Kind::NotFound, "missing glyph manifest in " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(in);
    std::vector<Glyph> glyphs;
    for (const auto& entry : manifest) {
        Glyph g;
        g.source_id = entry.at("source_id").get<std::string>();
        const auto& b = entry.at("box");
        g.box = Box{b.at("x").get<int>(), b.at("y").get<int>(), b.at("w").get<int>(),
                    b.at("h").get<int>()};
        if (entry.contains("label")) g.label = entry.at("label").get<std::string>();
        if (entry.contains("font_id")) g.font_id = entry.at("font_id").get<std::string>();
        GrayImage img = load_image(dir / entry.at("grid").get<std::string>());
        BinaryImage grid(img.width, img.height);
        for (std::size_t p = 0; p < img.size(); ++p) grid.mask[p] = img.data[p] < 128 ? 1 : 0;
        g.grid = std::move(grid);
        glyphs.push_back(std::move(g));
    }
    return glyphs;
}

}  // namespace glyphspot
