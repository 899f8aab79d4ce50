#include "glyphspot/image.hpp"

#include <algorithm>

namespace glyphspot {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

BinaryImage::BinaryImage(int w, int h, bool fill) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("image dimensions must be >= 1");
    mask.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
}

int BinaryImage::foreground_count() const {
    return static_cast<int>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double box_iou(const Box& a, const Box& b) {
    int ix = std::max(a.x, b.x);
    int iy = std::max(a.y, b.y);
    int ix2 = std::min(a.right(), b.right());
    int iy2 = std::min(a.bottom(), b.bottom());
    if (ix2 <= ix || iy2 <= iy) return 0.0;
    double inter = static_cast<double>(ix2 - ix) * (iy2 - iy);
    double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return inter / uni;
}

}  // namespace glyphspot
