#pragma once

// Minimal raster plots written as binary PPM (P6).

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ksgd/io.hpp"

namespace ksgd {

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
};

struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;  ///< row-major, top row first

    Image(int w, int h);
    void set(int x, int y, Rgb c);
    Rgb get(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

void write_ppm(std::ostream& out, const Image& img);

/// log10 of every lp_u_* column and linf_u against t, one color per column.
/// Throws std::runtime_error when t or the norm columns are missing or not numeric.
Image render_series(const CsvTable& table, int width = 640, int height = 400);

/// Heat matrix of log10(sup_linf_u) over the first two axis columns (one row
/// for a single axis). Failed runs are drawn black.
Image render_sweep(const CsvTable& table, int cell = 24);

}  // namespace ksgd
