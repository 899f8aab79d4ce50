#include "glyphspot/imgcore.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace glyphspot {

namespace {

// ---------------------------------------------------------------- PGM ----

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        break;
    }
    if (c == EOF) return tok;
    tok.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
    }
    if (c == '#') in.unget();
    return tok;
}

long parse_header_int(const std::string& tok, const char* what) {
    if (tok.empty()) {
        throw ImageIoError(ImageIoError::Kind::Malformed,
                           std::string("malformed: missing ") + what);
    }
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ImageIoError(ImageIoError::Kind::Malformed,
                           std::string("malformed: bad ") + what + " '" + tok + "'");
    }
}

GrayImage load_pgm(std::istream& in, const std::string& magic) {
    long w = parse_header_int(next_pgm_token(in), "width");
    long h = parse_header_int(next_pgm_token(in), "height");
    long maxval = parse_header_int(next_pgm_token(in), "maxval");
    if (w < 1 || h < 1) {
        throw ImageIoError(ImageIoError::Kind::Malformed, "malformed: non-positive dimensions");
    }
    if (maxval != 255) {
        throw ImageIoError(ImageIoError::Kind::UnsupportedDepth,
                           "unsupported depth: maxval " + std::to_string(maxval) +
                               " (only 255 supported)");
    }
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const std::size_t n = img.size();
    if (magic == "P2") {
        for (std::size_t i = 0; i < n; ++i) {
            std::string tok = next_pgm_token(in);
            if (tok.empty()) {
                throw ImageIoError(ImageIoError::Kind::Malformed,
                                   "malformed: expected " + std::to_string(n) +
                                       " samples, got " + std::to_string(i));
            }
            long v = parse_header_int(tok, "sample");
            if (v < 0 || v > 255) {
                throw ImageIoError(ImageIoError::Kind::Malformed,
                                   "malformed: sample " + std::to_string(v) + " out of range");
            }
            img.data[i] = static_cast<std::uint8_t>(v);
        }
    } else {
        // P5: exactly one whitespace byte after maxval, then raw samples.
        in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n) {
            throw ImageIoError(ImageIoError::Kind::Malformed,
                               "malformed: expected " + std::to_string(n) + " samples, got " +
                                   std::to_string(in.gcount()));
        }
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure,
                           "cannot open for writing: " + path.string());
    }
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.size()));
    if (!out) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure, "write failed: " + path.string());
    }
}

// ---------------------------------------------------------------- PNG ----

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::floor(y + 0.5));
}

GrayImage load_png(const std::filesystem::path& path) {
    PngReadCloser ctx;
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) {
        throw ImageIoError(ImageIoError::Kind::NotFound, "file not found: " + path.string());
    }
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw ImageIoError(ImageIoError::Kind::Malformed, "malformed: bad PNG " + path.string());
    }
    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);

    const int depth = png_get_bit_depth(ctx.png, ctx.info);
    if (depth != 8) {
        throw ImageIoError(ImageIoError::Kind::UnsupportedDepth,
                           "unsupported depth: " + std::to_string(depth) +
                               "-bit PNG (only 8-bit supported)");
    }
    int color = png_get_color_type(ctx.png, ctx.info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(ctx.png);
        color = PNG_COLOR_TYPE_RGB;
    }
    png_read_update_info(ctx.png, ctx.info);

    const int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    const int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    std::vector<std::uint8_t> raw(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = raw.data() + rowbytes * y;
    png_read_image(ctx.png, rows.data());

    const int channels = static_cast<int>(rowbytes / w);
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = raw.data() + rowbytes * y;
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* px = row + static_cast<std::size_t>(x) * channels;
            switch (channels) {
                case 1: img.at(x, y) = px[0]; break;
                case 2: img.at(x, y) = px[0]; break;  // gray + alpha
                case 3:
                case 4: img.at(x, y) = luminance(px[0], px[1], px[2]); break;
                default:
                    throw ImageIoError(ImageIoError::Kind::Malformed,
                                       "malformed: unexpected channel count");
            }
        }
    }
    return img;
}

struct PngWriteCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngWriteCloser() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void save_png(const GrayImage& img, const std::filesystem::path& path) {
    PngWriteCloser ctx;
    ctx.fp = std::fopen(path.string().c_str(), "wb");
    if (!ctx.fp) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure,
                           "cannot open for writing: " + path.string());
    }
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw std::runtime_error("libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw ImageIoError(ImageIoError::Kind::WriteFailure, "write failed: " + path.string());
    }
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(ctx.png, const_cast<png_bytep>(img.data.data() +
                                                     static_cast<std::size_t>(y) * img.width));
    }
    png_write_end(ctx.png, nullptr);
}

bool has_png_signature(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    if (in.gcount() < 8) return false;
    return png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ImageIoError(ImageIoError::Kind::NotFound, "file not found: " + path.string());
    }
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 == 'P' && (m1 == '2' || m1 == '5')) {
        return load_pgm(in, std::string("P") + m1);
    }
    in.close();
    if (has_png_signature(path)) return load_png(path);
    throw ImageIoError(ImageIoError::Kind::Malformed,
                       "malformed: not a PGM or PNG file: " + path.string());
}

void save_image(const GrayImage& img, const std::filesystem::path& path, ImageFormat format) {
    if (format == ImageFormat::Pgm) {
        save_pgm(img, path);
    } else {
        save_png(img, path);
    }
}

ImageFormat format_from_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == ".png") return ImageFormat::Png;
    return ImageFormat::Pgm;
}

// ---------------------------------------------------------- filtering ----

GrayImage gaussian_filter(const GrayImage& img, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_filter: negative sigma");
    if (sigma == 0.0) return img;

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const int w = img.width, h = img.height;
    auto clamp = [](int v, int hi) { return v < 0 ? 0 : (v >= hi ? hi - 1 : v); };

    // Horizontal pass into doubles, vertical pass, round once at the end.
    std::vector<double> tmp(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * img.at(clamp(x + i, w), y);
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += kernel[i + radius] * tmp[static_cast<std::size_t>(clamp(y + i, h)) * w + x];
            }
            double v = std::floor(acc + 0.5);
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
        }
    }
    return out;
}

int otsu_threshold(const GrayImage& img) {
    std::int64_t hist[256] = {};
    for (std::uint8_t v : img.data) ++hist[v];
    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];

    // Foreground is the class strictly below T; scan all T, keep the first
    // maximum of the between-class variance.
    int best_t = 0;
    double best_var = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t <= 255; ++t) {
        if (t > 0) {
            w0 += hist[t - 1];
            sum0 += static_cast<double>(t - 1) * hist[t - 1];
        }
        double w1 = total - w0;
        double var = 0.0;
        if (w0 > 0.0 && w1 > 0.0) {
            double mu0 = sum0 / w0;
            double mu1 = (sum_all - sum0) / w1;
            var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        }
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

BinaryImage binarize_otsu(const GrayImage& img) {
    const int t = otsu_threshold(img);
    BinaryImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i) out.mask[i] = img.data[i] < t ? 1 : 0;
    return out;
}

BinaryImage remove_isolated_pixels(const BinaryImage& bin) {
    BinaryImage out = bin;
    const int w = bin.width, h = bin.height;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!bin.get(x, y)) continue;
            bool has_neighbor = false;
            for (int dy = -1; dy <= 1 && !has_neighbor; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (bin.get(nx, ny)) {
                        has_neighbor = true;
                        break;
                    }
                }
            }
            if (!has_neighbor) out.set(x, y, false);
        }
    }
    return out;
}

namespace {

// 1-D squared-distance transform by the lower envelope of parabolas
// (Felzenszwalb & Huttenlocher). Inputs are integers (or BIG); the result is
// exact for integer-valued f at integer grid points.
constexpr double kDtBig = 1e12;

void dt1d(const double* f, int n, double* d, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            s = ((f[q] + static_cast<double>(q) * q) -
                 (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = static_cast<double>(q) - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

DistanceField distance_transform(const BinaryImage& bin) {
    const int w = bin.width, h = bin.height;
    DistanceField field;
    field.width = w;
    field.height = h;
    field.dist.resize(bin.mask.size());

    if (bin.foreground_count() == 0) {
        std::fill(field.dist.begin(), field.dist.end(), static_cast<double>(w + h));
        return field;
    }

    std::vector<double> g(bin.mask.size());
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    // Columns first, then rows, over squared distances.
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = bin.get(x, y) ? 0.0 : kDtBig;
        dt1d(f.data(), h, d.data(), v.data(), z.data());
        for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = g[static_cast<std::size_t>(y) * w + x];
        dt1d(f.data(), w, d.data(), v.data(), z.data());
        for (int x = 0; x < w; ++x) {
            field.dist[static_cast<std::size_t>(y) * w + x] = std::sqrt(d[x]);
        }
    }
    return field;
}

}  // namespace glyphspot
