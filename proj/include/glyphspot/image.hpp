#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace glyphspot {

// 8-bit grayscale raster, row-major. 0 = black ink, 255 = white paper.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 255);

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }

    bool operator==(const GrayImage&) const = default;
};

// Boolean foreground raster; true = ink. Stored as bytes 0/1.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;

    BinaryImage() = default;
    BinaryImage(int w, int h, bool fill = false);

    bool get(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { mask[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    int foreground_count() const;

    bool operator==(const BinaryImage&) const = default;
};

// Per-pixel Euclidean distance to the nearest foreground pixel.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<double> dist;

    double at(int x, int y) const { return dist[static_cast<std::size_t>(y) * width + x]; }
};

// Axis-aligned rectangle, 0-based top-left corner, w/h >= 1.
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }    // exclusive
    int bottom() const { return y + h; }   // exclusive
    long long area() const { return static_cast<long long>(w) * h; }
    bool inside(int img_w, int img_h) const {
        return x >= 0 && y >= 0 && w >= 1 && h >= 1 && right() <= img_w && bottom() <= img_h;
    }
    bool operator==(const Box&) const = default;
};

double box_iou(const Box& a, const Box& b);

// Image file problems carry a kind so callers can tell a missing file from a
// corrupt one.
class ImageIoError : public std::runtime_error {
public:
    enum class Kind { NotFound, Malformed, UnsupportedDepth, WriteFailure };

    ImageIoError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

}  // namespace glyphspot
