#pragma once

// Contrast-limited adaptive histogram equalization.
//
// The image is cut into grid_cols x grid_rows tiles (the last tile on each
// axis absorbs the remainder pixels). Each tile gets a clipped-histogram
// equalization lookup table f. Every tile is split into four quadrants by
// the lines through its center, and a pixel is mapped by blending the tables
// of the tile centers around it:
//
//   inner quadrants (neighbours on both axes)   4-way bilinear blend
//   quadrants on the image edge (one axis)      2-way blend along the other axis
//   outermost corner quadrant                   f of the owning tile alone
//
// With x, y the distances to the left/right centers and r, s those to the
// top/bottom centers, the 4-way blend is
//
//   s/(s+r) * (y/(x+y) f_tl + x/(x+y) f_tr) + r/(r+s) * (y/(x+y) f_bl + x/(x+y) f_br)
//
// and the 2-way / single cases are the same expression with one or both axes
// collapsed onto a single center. Tile centers sit on half-pixel positions,
// so distances are carried in half-pixel integer units and the blend is
// evaluated exactly; rounding is half away from zero.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

struct ClaheConfig {
    int grid_cols = 8;
    int grid_rows = 8;
    // Multiple of the uniform bin height n_pixels / n_bins.
    double clip_limit = 2.0;
    int n_bins = 256;

    void validate() const {
        detail::require(grid_cols >= 1 && grid_rows >= 1, "CLAHE grid must be at least 1x1");
        detail::require(clip_limit > 0.0 && std::isfinite(clip_limit), "CLAHE clip limit must be > 0");
        detail::require(n_bins >= 2 && n_bins <= 256, "CLAHE bin count must be in [2, 256]");
    }

    friend bool operator==(const ClaheConfig&, const ClaheConfig&) = default;
};

/// Parses "<cols>x<rows>", e.g. "8x8".
inline std::pair<int, int> parse_grid(std::string_view text) {
    const auto x = text.find_first_of("xX");
    int cols = 0, rows = 0;
    auto parse = [](std::string_view s, int& out) {
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc{} && ptr == s.data() + s.size();
    };
    if (x == std::string_view::npos || !parse(text.substr(0, x), cols) || !parse(text.substr(x + 1), rows) ||
        cols < 1 || rows < 1)
        throw ContractViolation("grid must look like <cols>x<rows>, got '" + std::string(text) + "'");
    return {cols, rows};
}

inline std::string format_grid(int cols, int rows) {
    return std::to_string(cols) + "x" + std::to_string(rows);
}

enum class RegionClass { Corner, Border, Inner };

using Lut = std::array<std::uint8_t, 256>;

/// Absolute clip level: max(1, round(clip_limit * n_pixels / n_bins)).
inline std::uint64_t clip_level(double clip_limit, std::uint64_t n_pixels, std::size_t n_bins) {
    const double level = std::round(clip_limit * static_cast<double>(n_pixels) / static_cast<double>(n_bins));
    return level < 1.0 ? 1 : static_cast<std::uint64_t>(level);
}

/// Cuts every bin at the clip level and hands the excess back: each bin gets
/// floor(E / n_bins), then the lowest-indexed E mod n_bins bins get one more.
/// The total count is preserved.
inline std::vector<std::uint32_t> clip_histogram(std::span<const std::uint32_t> hist, double clip_limit,
                                                 std::uint64_t n_pixels) {
    std::vector<std::uint32_t> out(hist.begin(), hist.end());
    if (out.empty()) return out;
    const std::uint64_t limit = clip_level(clip_limit, n_pixels, out.size());
    std::uint64_t excess = 0;
    for (auto& bin : out) {
        if (bin > limit) {
            excess += bin - limit;
            bin = static_cast<std::uint32_t>(limit);
        }
    }
    const auto share = static_cast<std::uint32_t>(excess / out.size());
    const std::size_t remainder = excess % out.size();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += share + (i < remainder ? 1u : 0u);
    return out;
}

/// Tile geometry and per-tile lookup tables.
class TileGrid {
public:
    TileGrid(int width, int height, int cols, int rows)
        : width_(width), height_(height), cols_(cols), rows_(rows),
          x_edges_(edges(width, cols)), y_edges_(edges(height, rows)),
          luts_(static_cast<std::size_t>(cols) * rows) {
        classes_.reserve(luts_.size());
        for (int j = 0; j < rows; ++j)
            for (int i = 0; i < cols; ++i) classes_.push_back(classify(i, j));
    }

    int cols() const noexcept { return cols_; }
    int rows() const noexcept { return rows_; }
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t tile_count() const noexcept { return luts_.size(); }

    int tile_x0(int i) const noexcept { return x_edges_[i]; }
    int tile_y0(int j) const noexcept { return y_edges_[j]; }
    int tile_width(int i) const noexcept { return x_edges_[i + 1] - x_edges_[i]; }
    int tile_height(int j) const noexcept { return y_edges_[j + 1] - y_edges_[j]; }

    // Centers in doubled pixel coordinates (always integral).
    int center_x2(int i) const noexcept { return 2 * x_edges_[i] + tile_width(i) - 1; }
    int center_y2(int j) const noexcept { return 2 * y_edges_[j] + tile_height(j) - 1; }
    double center_x(int i) const noexcept { return center_x2(i) / 2.0; }
    double center_y(int j) const noexcept { return center_y2(j) / 2.0; }

    RegionClass region(int i, int j) const noexcept { return classes_[index(i, j)]; }
    Lut& lut(int i, int j) noexcept { return luts_[index(i, j)]; }
    const Lut& lut(int i, int j) const noexcept { return luts_[index(i, j)]; }

    std::size_t count(RegionClass c) const noexcept {
        return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
    }

private:
    static std::vector<int> edges(int extent, int n) {
        std::vector<int> e(static_cast<std::size_t>(n) + 1);
        const int base = extent / n;
        for (int k = 0; k < n; ++k) e[k] = k * base;
        e[n] = extent;
        return e;
    }

    RegionClass classify(int i, int j) const noexcept {
        const bool edge_x = i == 0 || i == cols_ - 1;
        const bool edge_y = j == 0 || j == rows_ - 1;
        if (edge_x && edge_y) return RegionClass::Corner;
        if (edge_x || edge_y) return RegionClass::Border;
        return RegionClass::Inner;
    }

    std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * cols_ + i; }

    int width_, height_, cols_, rows_;
    std::vector<int> x_edges_, y_edges_;
    std::vector<Lut> luts_;
    std::vector<RegionClass> classes_;
};

/// Blend geometry for one pixel. i_lo/i_hi (columns) and j_lo/j_hi (rows)
/// name the tiles whose tables are mixed; when an axis is collapsed the two
/// indices coincide. x, y are the distances to the left/right centers and
/// r, s to the top/bottom centers, in pixels.
struct InterpWeights {
    int i_lo, i_hi, j_lo, j_hi;
    double x, y, r, s;

    double w_top_left() const noexcept { return s / (s + r) * (y / (x + y)); }
    double w_top_right() const noexcept { return s / (s + r) * (x / (x + y)); }
    double w_bottom_left() const noexcept { return r / (r + s) * (y / (x + y)); }
    double w_bottom_right() const noexcept { return r / (r + s) * (x / (x + y)); }
};

namespace detail {

// One axis of the blend in half-pixel units: weight(lo) = d_hi / (d_lo + d_hi).
struct AxisBlend {
    int lo, hi;
    std::int64_t d_lo, d_hi;
};

template <typename CenterFn>
AxisBlend axis_blend(int p, int n, CenterFn center2) {
    const int p2 = 2 * p;
    if (p2 <= center2(0)) return {0, 0, 0, 1};
    if (p2 >= center2(n - 1)) return {n - 1, n - 1, 0, 1};
    int k = 0;
    while (center2(k + 1) <= p2) ++k;
    return {k, k + 1, p2 - center2(k), center2(k + 1) - p2};
}

inline std::vector<AxisBlend> column_blends(const TileGrid& g) {
    std::vector<AxisBlend> out(static_cast<std::size_t>(g.width()));
    for (int x = 0; x < g.width(); ++x)
        out[x] = axis_blend(x, g.cols(), [&](int i) { return g.center_x2(i); });
    return out;
}

inline std::vector<AxisBlend> row_blends(const TileGrid& g) {
    std::vector<AxisBlend> out(static_cast<std::size_t>(g.height()));
    for (int y = 0; y < g.height(); ++y)
        out[y] = axis_blend(y, g.rows(), [&](int j) { return g.center_y2(j); });
    return out;
}

}  // namespace detail

inline InterpWeights interp_weights(const TileGrid& g, int px, int py) {
    const auto bx = detail::axis_blend(px, g.cols(), [&](int i) { return g.center_x2(i); });
    const auto by = detail::axis_blend(py, g.rows(), [&](int j) { return g.center_y2(j); });
    return {bx.lo, bx.hi, by.lo, by.hi, bx.d_lo / 2.0, bx.d_hi / 2.0, by.d_lo / 2.0, by.d_hi / 2.0};
}

/// Per-tile histogram -> clip -> CDF -> f(v) = round(255 * CDF(bin(v))).
inline TileGrid build_tile_mappings(const ImageU8& img, const ClaheConfig& cfg) {
    cfg.validate();
    detail::require(img.channels() == 1, "CLAHE requires a 1-channel image");
    detail::require(img.width() >= cfg.grid_cols && img.height() >= cfg.grid_rows,
                    "image is smaller than the CLAHE grid");

    TileGrid grid(img.width(), img.height(), cfg.grid_cols, cfg.grid_rows);
    const auto n_bins = static_cast<std::size_t>(cfg.n_bins);
    std::array<std::uint16_t, 256> bin_of{};
    for (int v = 0; v < 256; ++v) bin_of[v] = static_cast<std::uint16_t>(v * cfg.n_bins / 256);

    std::vector<std::uint32_t> hist(n_bins);
    for (int j = 0; j < grid.rows(); ++j) {
        for (int i = 0; i < grid.cols(); ++i) {
            std::fill(hist.begin(), hist.end(), 0u);
            const int x0 = grid.tile_x0(i), y0 = grid.tile_y0(j);
            for (int y = y0; y < y0 + grid.tile_height(j); ++y) {
                const auto row = img.row(y);
                for (int x = x0; x < x0 + grid.tile_width(i); ++x) ++hist[bin_of[row[x]]];
            }
            const std::uint64_t n = static_cast<std::uint64_t>(grid.tile_width(i)) * grid.tile_height(j);
            const auto clipped = clip_histogram(hist, cfg.clip_limit, n);

            std::vector<std::uint8_t> level(n_bins);
            std::uint64_t cdf = 0;
            for (std::size_t b = 0; b < n_bins; ++b) {
                cdf += clipped[b];
                level[b] = static_cast<std::uint8_t>((510 * cdf + n) / (2 * n));
            }
            auto& lut = grid.lut(i, j);
            for (int v = 0; v < 256; ++v) lut[v] = level[bin_of[v]];
        }
    }
    return grid;
}

/// Maps every pixel through the blended tile tables of `grid`.
inline ImageU8 apply_tile_mappings(const ImageU8& img, const TileGrid& grid) {
    detail::require(img.channels() == 1 && img.width() == grid.width() && img.height() == grid.height(),
                    "image does not match the tile grid");
    const auto cols = detail::column_blends(grid);
    const auto rows = detail::row_blends(grid);
    ImageU8 out(img.width(), img.height(), 1);
    for (int y = 0; y < img.height(); ++y) {
        const auto& by = rows[y];
        const std::int64_t r = by.d_lo, s = by.d_hi;
        const auto src = img.row(y);
        auto dst = out.row(y);
        for (int x = 0; x < img.width(); ++x) {
            const auto& bx = cols[x];
            const std::int64_t xl = bx.d_lo, yr = bx.d_hi;
            const int v = src[x];
            const std::int64_t tl = grid.lut(bx.lo, by.lo)[v], tr = grid.lut(bx.hi, by.lo)[v];
            const std::int64_t bl = grid.lut(bx.lo, by.hi)[v], br = grid.lut(bx.hi, by.hi)[v];
            const std::int64_t num = s * (yr * tl + xl * tr) + r * (yr * bl + xl * br);
            const std::int64_t den = (s + r) * (xl + yr);
            dst[x] = static_cast<std::uint8_t>((2 * num + den) / (2 * den));
        }
    }
    return out;
}

inline ImageU8 apply_clahe(const ImageU8& img, const ClaheConfig& cfg = {}) {
    return apply_tile_mappings(img, build_tile_mappings(img, cfg));
}

}  // namespace vesselenh
