#pragma once

#include <filesystem>

#include "glyphspot/image.hpp"

namespace glyphspot {

enum class ImageFormat { Pgm, Png };

// Reads PGM (P2/P5, maxval 255) or 8-bit PNG. RGB(A) PNG is reduced by
// luminance 0.299R + 0.587G + 0.114B, rounded half up. '#' comments in PGM
// headers are tolerated.
GrayImage load_image(const std::filesystem::path& path);

// Writes PGM (P5) or 8-bit grayscale PNG. load_image(save_image(x)) == x.
void save_image(const GrayImage& img, const std::filesystem::path& path, ImageFormat format);
ImageFormat format_from_extension(const std::filesystem::path& path);

// Separable Gaussian smoothing, kernel radius ceil(3*sigma), kernel
// renormalized to sum 1, clamp-to-edge borders, output rounded half up.
// sigma == 0 returns the input unchanged.
GrayImage gaussian_filter(const GrayImage& img, double sigma);

// Global Otsu threshold over the 256-bin histogram; foreground = intensity
// strictly below the threshold (ink is dark). Ties resolve to the smallest
// threshold, so a single-level image comes back all background.
BinaryImage binarize_otsu(const GrayImage& img);
int otsu_threshold(const GrayImage& img);

// Drops every foreground pixel with no foreground 8-neighbor. Single pass
// over the input raster; decisions never cascade.
BinaryImage remove_isolated_pixels(const BinaryImage& bin);

// Exact Euclidean distance to the nearest foreground pixel, zero on
// foreground. An image with no foreground yields width + height everywhere.
DistanceField distance_transform(const BinaryImage& bin);

}  // namespace glyphspot
