#include "sdeconv/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdeconv {

namespace {

struct Rgb {
    double r, g, b;
};

const Rgb kBackground{1.0, 1.0, 1.0};
const Rgb kAxis{0.25, 0.25, 0.25};
const Rgb kGrid{0.88, 0.88, 0.88};
const Rgb kText{0.15, 0.15, 0.15};
const Rgb kMedian{0.90, 0.45, 0.05};
const Rgb kPalette[] = {
    {0.15, 0.35, 0.80}, {0.85, 0.30, 0.10}, {0.15, 0.60, 0.25},
    {0.55, 0.25, 0.65}, {0.00, 0.55, 0.55}, {0.60, 0.42, 0.10},
};
constexpr int kPaletteSize = 6;

// 5x7 glyphs, row-major top-down, bit 4 = leftmost column. Digits,
// lowercase letters and the few symbols that appear in labels.
struct Glyph {
    char ch;
    std::uint8_t rows[7];
};

const Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'a', {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F}},
    {'b', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E}},
    {'c', {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E}},
    {'d', {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F}},
    {'e', {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E}},
    {'f', {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08}},
    {'g', {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'h', {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'i', {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E}},
    {'j', {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C}},
    {'k', {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12}},
    {'l', {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'m', {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11}},
    {'n', {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11}},
    {'o', {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E}},
    {'p', {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10}},
    {'q', {0x00, 0x00, 0x0D, 0x13, 0x0F, 0x01, 0x01}},
    {'r', {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10}},
    {'s', {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E}},
    {'t', {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06}},
    {'u', {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D}},
    {'v', {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'w', {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A}},
    {'x', {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11}},
    {'y', {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E}},
    {'z', {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
};

const std::uint8_t* find_glyph(char c) {
    for (const Glyph& g : kFont)
        if (g.ch == c) return g.rows;
    return nullptr;
}

class Canvas {
public:
    Canvas(int width, int height) : img_(width, height, 3) {
        fill(kBackground);
    }

    Image take() { return std::move(img_); }

    void fill(const Rgb& c) {
        for (int y = 0; y < img_.height(); ++y)
            for (int x = 0; x < img_.width(); ++x)
                set(x, y, c);
    }

    void set(int x, int y, const Rgb& c) {
        if (x < 0 || y < 0 || x >= img_.width() || y >= img_.height()) return;
        img_.at(x, y, 0) = c.r;
        img_.at(x, y, 1) = c.g;
        img_.at(x, y, 2) = c.b;
    }

    void fill_rect(int x0, int y0, int x1, int y1, const Rgb& c) {
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                set(x, y, c);
    }

    void line(int x0, int y0, int x1, int y1, const Rgb& c, int thickness = 1) {
        const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        int x = x0, y = y0;
        for (;;) {
            if (thickness <= 1) {
                set(x, y, c);
            } else {
                const int h = thickness / 2;
                fill_rect(x - h, y - h, x - h + thickness - 1, y - h + thickness - 1, c);
            }
            if (x == x1 && y == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) { err += dy; x += sx; }
            if (e2 <= dx) { err += dx; y += sy; }
        }
    }

    // Text is lowercased; unknown characters render as blanks.
    void text(int x, int y, const std::string& s, const Rgb& c, int scale = 1) {
        int cx = x;
        for (char raw : s) {
            const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
            const std::uint8_t* rows = find_glyph(ch);
            if (rows) {
                for (int ry = 0; ry < 7; ++ry)
                    for (int rx = 0; rx < 5; ++rx)
                        if (rows[ry] & (0x10 >> rx))
                            fill_rect(cx + rx * scale, y + ry * scale,
                                      cx + rx * scale + scale - 1, y + ry * scale + scale - 1, c);
            }
            cx += 6 * scale;
        }
    }

    static int text_width(const std::string& s, int scale = 1) {
        return static_cast<int>(s.size()) * 6 * scale;
    }

private:
    Image img_;
};

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct AxisRange {
    double lo = 0.0, hi = 1.0;
    double map(double v, double pix_lo, double pix_hi) const {
        const double t = (v - lo) / (hi - lo);
        return pix_lo + t * (pix_hi - pix_lo);
    }
};

AxisRange padded_range(double lo, double hi, double pad_fraction) {
    if (!(hi > lo)) {
        const double pad = std::max(1.0, std::abs(lo)) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * pad_fraction;
    return {lo - pad, hi + pad};
}

// 1/2/5 ladder producing roughly `target` ticks.
std::vector<double> nice_ticks(double lo, double hi, int target) {
    const double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    const double ratio = span / (step * target);
    if (ratio > 5.0) step *= 10.0;
    else if (ratio > 2.0) step *= 5.0;
    else if (ratio > 1.0) step *= 2.0;
    std::vector<double> ticks;
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step)
        ticks.push_back(v);
    return ticks;
}

struct Frame {
    int left, right, top, bottom; // plot area bounds in pixels
};

void draw_frame(Canvas& canvas, const Frame& f) {
    canvas.line(f.left, f.top, f.left, f.bottom, kAxis);
    canvas.line(f.left, f.bottom, f.right, f.bottom, kAxis);
}

void draw_y_axis(Canvas& canvas, const Frame& f, const AxisRange& range,
                 const std::string& label) {
    for (double tick : nice_ticks(range.lo, range.hi, 6)) {
        const int py = static_cast<int>(std::lround(range.map(tick, f.bottom, f.top)));
        canvas.line(f.left + 1, py, f.right, py, kGrid);
        canvas.line(f.left - 4, py, f.left, py, kAxis);
        const std::string s = short_number(tick);
        canvas.text(f.left - 8 - Canvas::text_width(s), py - 3, s, kText);
    }
    canvas.text(f.left - 4, f.top - 14, label, kText);
}

double finite_or(double v, double fallback) {
    return std::isfinite(v) ? v : fallback;
}

} // namespace

Image plot_series(const SweepSummary& summary, int width, int height) {
    if (summary.series.empty())
        throw std::invalid_argument("plot: no series data");

    double lx_lo = std::numeric_limits<double>::infinity();
    double lx_hi = -std::numeric_limits<double>::infinity();
    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -std::numeric_limits<double>::infinity();
    for (const ConfigSeries& s : summary.series)
        for (const LambdaPoint& p : s.points) {
            lx_lo = std::min(lx_lo, std::log10(p.lambda));
            lx_hi = std::max(lx_hi, std::log10(p.lambda));
            if (std::isfinite(p.median_db)) {
                y_lo = std::min(y_lo, p.median_db);
                y_hi = std::max(y_hi, p.median_db);
            }
        }
    if (!std::isfinite(lx_lo) || !std::isfinite(y_lo))
        throw std::invalid_argument("plot: no finite values to draw");

    Canvas canvas(width, height);
    const Frame f{70, width - 20, 24, height - 44};
    const AxisRange xr = padded_range(lx_lo, lx_hi, 0.04);
    const AxisRange yr = padded_range(y_lo, y_hi, 0.08);

    // Decade ticks on the log-lambda axis; fall back to the endpoints when
    // the grid spans less than one decade.
    std::vector<double> xticks;
    for (double d = std::ceil(xr.lo); d <= std::floor(xr.hi) + 1e-9; d += 1.0)
        xticks.push_back(d);
    if (xticks.size() < 2) xticks = {lx_lo, lx_hi};
    for (double tick : xticks) {
        const int px = static_cast<int>(std::lround(xr.map(tick, f.left, f.right)));
        canvas.line(px, f.top, px, f.bottom - 1, kGrid);
        canvas.line(px, f.bottom, px, f.bottom + 4, kAxis);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", std::pow(10.0, tick));
        canvas.text(px - Canvas::text_width(buf) / 2, f.bottom + 8, buf, kText);
    }
    draw_y_axis(canvas, f, yr, "psnr (db)");
    draw_frame(canvas, f);
    canvas.text((f.left + f.right) / 2 - Canvas::text_width("lambda") / 2, height - 12,
                "lambda", kText);

    int legend_y = f.top + 6;
    for (std::size_t i = 0; i < summary.series.size(); ++i) {
        const ConfigSeries& s = summary.series[i];
        const Rgb& color = kPalette[i % kPaletteSize];

        int prev_x = 0, prev_y = 0;
        bool have_prev = false;
        for (const LambdaPoint& p : s.points) {
            const double db = finite_or(p.median_db, yr.hi);
            const int px = static_cast<int>(std::lround(xr.map(std::log10(p.lambda), f.left, f.right)));
            const int py = static_cast<int>(std::lround(yr.map(db, f.bottom, f.top)));
            if (have_prev) canvas.line(prev_x, prev_y, px, py, color, 2);
            canvas.fill_rect(px - 2, py - 2, px + 2, py + 2, color);
            prev_x = px;
            prev_y = py;
            have_prev = true;
        }

        const int lx = f.right - 24 - Canvas::text_width(s.config_id);
        canvas.line(lx - 18, legend_y + 3, lx - 6, legend_y + 3, color, 2);
        canvas.text(lx, legend_y, s.config_id, kText);
        legend_y += 12;
    }
    return canvas.take();
}

Image plot_summary_bars(const SweepSummary& summary, int width, int height) {
    if (summary.configs.empty())
        throw std::invalid_argument("plot: no summary data");

    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -std::numeric_limits<double>::infinity();
    for (const ConfigSummary& c : summary.configs) {
        for (double v : {c.min_db, c.median_db, c.max_db})
            if (std::isfinite(v)) {
                y_lo = std::min(y_lo, v);
                y_hi = std::max(y_hi, v);
            }
    }
    if (!std::isfinite(y_lo))
        throw std::invalid_argument("plot: no finite values to draw");

    Canvas canvas(width, height);
    const Frame f{70, width - 20, 24, height - 44};
    const AxisRange yr = padded_range(y_lo, y_hi, 0.10);
    draw_y_axis(canvas, f, yr, "best psnr (db)");
    draw_frame(canvas, f);

    const int n = static_cast<int>(summary.configs.size());
    for (int i = 0; i < n; ++i) {
        const ConfigSummary& c = summary.configs[static_cast<std::size_t>(i)];
        const int cx = f.left + (f.right - f.left) * (2 * i + 1) / (2 * n);
        const int y_min = static_cast<int>(std::lround(yr.map(finite_or(c.min_db, yr.hi), f.bottom, f.top)));
        const int y_med = static_cast<int>(std::lround(yr.map(finite_or(c.median_db, yr.hi), f.bottom, f.top)));
        const int y_max = static_cast<int>(std::lround(yr.map(finite_or(c.max_db, yr.hi), f.bottom, f.top)));
        const Rgb& color = kPalette[i % kPaletteSize];

        canvas.line(cx, y_min, cx, y_max, color, 2);
        canvas.fill_rect(cx - 10, y_min - 1, cx + 10, y_min + 1, color);
        canvas.fill_rect(cx - 10, y_max - 1, cx + 10, y_max + 1, color);
        canvas.fill_rect(cx - 14, y_med - 2, cx + 14, y_med + 2, kMedian);

        const int tw = Canvas::text_width(c.config_id);
        canvas.text(cx - tw / 2, f.bottom + 8, c.config_id, kText);
    }
    return canvas.take();
}

} // namespace sdeconv
