#include <array>
#include <stdexcept>

#include "glyphspot/corpus.hpp"

namespace glyphspot {

namespace {

// Base font, em height 13: ascenders in rows 0-2, x-height in rows 3-9,
// descenders in rows 10-12. Strokes are one pixel wide; the derived fonts
// (bold/condensed/sheared) are computed from these bitmaps.
struct LetterSpec {
    char ch;
    std::array<const char*, 13> rows;
};

constexpr std::array<LetterSpec, 26> kBaseLetters = {{
    {'a', {".....",
           ".....",
           ".....",
           ".###.",
           "....#",
           ".####",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           ".....",
           ".....",
           "....."}},
    {'b', {"#....",
           "#....",
           "#....",
           "#.##.",
           "##..#",
           "#...#",
           "#...#",
           "#...#",
           "##..#",
           "#.##.",
           ".....",
           ".....",
           "....."}},
    {'c', {".....",
           ".....",
           ".....",
           ".###.",
           "#...#",
           "#....",
           "#....",
           "#....",
           "#...#",
           ".###.",
           ".....",
           ".....",
           "....."}},
    {'d', {"....#",
           "....#",
           "....#",
           ".##.#",
           "#..##",
           "#...#",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           ".....",
           ".....",
           "....."}},
    {'e', {".....",
           ".....",
           ".....",
           ".###.",
           "#...#",
           "#...#",
           "#####",
           "#....",
           "#...#",
           ".###.",
           ".....",
           ".....",
           "....."}},
    {'f', {"..##",
           ".#..",
           ".#..",
           "###.",
           ".#..",
           ".#..",
           ".#..",
           ".#..",
           ".#..",
           ".#..",
           "....",
           "....",
           "...."}},
    {'g', {".....",
           ".....",
           ".....",
           ".###.",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           "....#",
           "#...#",
           ".###."}},
    {'h', {"#....",
           "#....",
           "#....",
           "#.##.",
           "##..#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           ".....",
           ".....",
           "....."}},
    {'i', {"...",
           ".#.",
           ".#.",
           "...",
           "##.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           "###",
           "...",
           "...",
           "..."}},
    {'j', {"...",
           "..#",
           "..#",
           "...",
           ".##",
           "..#",
           "..#",
           "..#",
           "..#",
           "..#",
           "..#",
           "#.#",
           ".#."}},
    {'k', {"#....",
           "#....",
           "#....",
           "#...#",
           "#..#.",
           "#.#..",
           "##...",
           "#.#..",
           "#..#.",
           "#...#",
           ".....",
           ".....",
           "....."}},
    {'l', {"##.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           ".#.",
           "###",
           "...",
           "...",
           "..."}},
    {'m', {".......",
           ".......",
           ".......",
           ".##.##.",
           "#..#..#",
           "#..#..#",
           "#..#..#",
           "#..#..#",
           "#..#..#",
           "#..#..#",
           ".......",
           ".......",
           "......."}},
    {'n', {".....",
           ".....",
           ".....",
           "#.##.",
           "##..#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           ".....",
           ".....",
           "....."}},
    {'o', {".....",
           ".....",
           ".....",
           ".###.",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           ".###.",
           ".....",
           ".....",
           "....."}},
    {'p', {".....",
           ".....",
           ".....",
           "#.##.",
           "##..#",
           "#...#",
           "#...#",
           "#...#",
           "##..#",
           "#.##.",
           "#....",
           "#....",
           "#...."}},
    {'q', {".....",
           ".....",
           ".....",
           ".##.#",
           "#..##",
           "#...#",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           "....#",
           "....#",
           "....#"}},
    {'r', {"....",
           "....",
           "....",
           "#.##",
           "##..",
           "#...",
           "#...",
           "#...",
           "#...",
           "#...",
           "....",
           "....",
           "...."}},
    {'s', {".....",
           ".....",
           ".....",
           ".####",
           "#....",
           "#....",
           ".###.",
           "....#",
           "....#",
           "####.",
           ".....",
           ".....",
           "....."}},
    {'t', {"....",
           ".#..",
           ".#..",
           "###.",
           ".#..",
           ".#..",
           ".#..",
           ".#..",
           ".#.#",
           "..##",
           "....",
           "....",
           "...."}},
    {'u', {".....",
           ".....",
           ".....",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           ".....",
           ".....",
           "....."}},
    {'v', {".....",
           ".....",
           ".....",
           "#...#",
           "#...#",
           "#...#",
           ".#.#.",
           ".#.#.",
           ".#.#.",
           "..#..",
           ".....",
           ".....",
           "....."}},
    {'w', {".......",
           ".......",
           ".......",
           "#.....#",
           "#.....#",
           "#..#..#",
           "#..#..#",
           "#.#.#.#",
           "##...##",
           ".#...#.",
           ".......",
           ".......",
           "......."}},
    {'x', {".....",
           ".....",
           ".....",
           "#...#",
           ".#.#.",
           ".#.#.",
           "..#..",
           ".#.#.",
           ".#.#.",
           "#...#",
           ".....",
           ".....",
           "....."}},
    {'y', {".....",
           ".....",
           ".....",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#...#",
           "#..##",
           ".##.#",
           "....#",
           "...#.",
           "###.."}},
    {'z', {".....",
           ".....",
           ".....",
           "#####",
           "....#",
           "...#.",
           "..#..",
           "..#..",
           ".#...",
           "#####",
           ".....",
           ".....",
           "....."}},
}};

BinaryImage bitmap_from_rows(const std::array<const char*, 13>& rows) {
    const int w = static_cast<int>(std::string_view(rows[0]).size());
    BinaryImage img(w, 13);
    for (int y = 0; y < 13; ++y) {
        std::string_view row(rows[y]);
        if (static_cast<int>(row.size()) != w) throw std::logic_error("ragged glyph rows");
        for (int x = 0; x < w; ++x) {
            if (row[x] == '#') img.set(x, y, true);
        }
    }
    return img;
}

GlyphAtlas make_builtin() {
    GlyphAtlas atlas;
    for (const LetterSpec& spec : kBaseLetters) {
        std::string ch(1, spec.ch);
        atlas.alphabet.push_back(ch);
        BinaryImage base = bitmap_from_rows(spec.rows);
        atlas.fonts["base"][ch] = base;
        atlas.fonts["bold"][ch] = dilate8(base);
        atlas.fonts["condensed"][ch] = shrink_horizontal(base, 0.75);
        atlas.fonts["sheared"][ch] = shear_horizontal(base, 0.15);
    }
    return atlas;
}

}  // namespace

const GlyphAtlas& builtin_atlas() {
    static const GlyphAtlas atlas = make_builtin();
    return atlas;
}

}  // namespace glyphspot
