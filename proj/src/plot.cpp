#include "ksgd/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ksgd {

namespace {

double to_number(const std::string& s, const std::string& column)
{
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("column " + column + " has a non-numeric value '" + s + "'");
    return v;
}

const Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75}};

void line(Image& img, int x0, int y0, int x1, int y1, Rgb c)
{
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        img.set(x0, y0, c);
        if (x0 == x1 && y0 == y1)
            return;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

// Blue (low) to red (high) through white.
Rgb heat(double s)
{
    s = std::clamp(s, 0.0, 1.0);
    auto ch = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
    if (s < 0.5)
        return {ch(2 * s), ch(2 * s), 255};
    return {255, ch(2 - 2 * s), ch(2 - 2 * s)};
}

}  // namespace

Image::Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h)
{
    if (w <= 0 || h <= 0)
        throw std::invalid_argument("image size must be positive");
}

void Image::set(int x, int y, Rgb c)
{
    if (x >= 0 && y >= 0 && x < width && y < height)
        pixels[static_cast<std::size_t>(y) * width + x] = c;
}

void write_ppm(std::ostream& out, const Image& img)
{
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    for (const auto& p : img.pixels) {
        const char rgb[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(rgb, 3);
    }
}

Image render_series(const CsvTable& table, int width, int height)
{
    const int tc = table.column("t");
    if (tc < 0)
        throw std::runtime_error("series csv has no t column");
    std::vector<int> cols;
    for (std::size_t k = 0; k < table.header.size(); ++k)
        if (table.header[k].rfind("lp_u_", 0) == 0 || table.header[k] == "linf_u")
            cols.push_back(static_cast<int>(k));
    if (cols.empty())
        throw std::runtime_error("series csv has no norm columns");
    if (table.rows.empty())
        throw std::runtime_error("series csv has no rows");

    std::vector<double> t;
    std::vector<std::vector<double>> y(cols.size());
    for (const auto& row : table.rows) {
        t.push_back(to_number(row[tc], "t"));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const double v = to_number(row[cols[c]], table.header[cols[c]]);
            y[c].push_back(v > 0.0 ? std::log10(v) : std::numeric_limits<double>::quiet_NaN());
        }
    }
    double tmin = t.front(), tmax = t.back();
    double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
    for (const auto& s : y)
        for (double v : s)
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    if (!std::isfinite(ymin)) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    if (tmax - tmin <= 0.0)
        tmax = tmin + 1.0;

    Image img(width, height);
    const int m = 20;
    const Rgb axis{0, 0, 0};
    line(img, m, m, m, height - m, axis);
    line(img, m, height - m, width - m, height - m, axis);
    auto px = [&](double tv) { return m + static_cast<int>(std::lround((tv - tmin) / (tmax - tmin) * (width - 2 * m))); };
    auto py = [&](double yv) {
        return height - m - static_cast<int>(std::lround((yv - ymin) / (ymax - ymin) * (height - 2 * m)));
    };
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const Rgb color = kPalette[c % std::size(kPalette)];
        for (std::size_t k = 1; k < t.size(); ++k)
            if (std::isfinite(y[c][k - 1]) && std::isfinite(y[c][k]))
                line(img, px(t[k - 1]), py(y[c][k - 1]), px(t[k]), py(y[c][k]), color);
    }
    return img;
}

Image render_sweep(const CsvTable& table, int cell)
{
    const int status = table.column("status");
    const int value = table.column("sup_linf_u");
    if (status < 1 || value < 0)
        throw std::runtime_error("sweep csv needs axis columns followed by status and sup_linf_u");
    if (table.rows.empty())
        throw std::runtime_error("sweep csv has no rows");
    const bool two = status >= 2;
    std::vector<double> xs, ys;
    struct Point {
        double x, y, v;
        bool ok;
    };
    std::vector<Point> points;
    for (const auto& row : table.rows) {
        const double y = to_number(row[0], table.header[0]);
        const double x = two ? to_number(row[1], table.header[1]) : y;
        const double v = to_number(row[value], "sup_linf_u");
        points.push_back({x, two ? y : 0.0, v, row[status] != "Error" && std::isfinite(v) && v > 0.0});
        xs.push_back(x);
        ys.push_back(two ? y : 0.0);
    }
    for (auto* v : {&xs, &ys}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : points)
        if (p.ok) {
            lo = std::min(lo, std::log10(p.v));
            hi = std::max(hi, std::log10(p.v));
        }
    Image img(static_cast<int>(xs.size()) * cell, static_cast<int>(ys.size()) * cell);
    for (const auto& p : points) {
        const int cx = static_cast<int>(std::find(xs.begin(), xs.end(), p.x) - xs.begin());
        const int cy = static_cast<int>(ys.size() - 1 - (std::find(ys.begin(), ys.end(), p.y) - ys.begin()));
        const Rgb color = !p.ok ? Rgb{0, 0, 0} : heat(hi > lo ? (std::log10(p.v) - lo) / (hi - lo) : 0.5);
        for (int y = 0; y < cell; ++y)
            for (int x = 0; x < cell; ++x)
                img.set(cx * cell + x, cy * cell + y, color);
    }
    return img;
}

}  // namespace ksgd
