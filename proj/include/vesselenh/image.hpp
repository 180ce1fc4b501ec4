#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "vesselenh/error.hpp"

namespace vesselenh {

enum class Depth { U8, F32 };

template <typename T>
constexpr Depth depth_of() {
    if constexpr (std::is_same_v<T, std::uint8_t>) {
        return Depth::U8;
    } else {
        static_assert(std::is_floating_point_v<T>, "samples are uint8_t or floating point");
        return Depth::F32;
    }
}

/// Row-major raster of scalar samples, channel-interleaved when channels == 3.
///
/// A default-constructed image is empty (0x0) and only useful as a
/// placeholder; every other constructor enforces width, height >= 1 and
/// channels in {1, 3}.
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;

    Image(int width, int height, int channels, T fill = T{})
        : width_(width), height_(height), channels_(channels) {
        check_geometry();
        data_.assign(sample_count(), fill);
    }

    Image(int width, int height, int channels, std::vector<T> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
        check_geometry();
        detail::require(data_.size() == sample_count(),
                        "image data length must equal width * height * channels");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    static constexpr Depth depth() noexcept { return depth_of<T>(); }

    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t sample_count() const noexcept { return pixel_count() * channels_; }

    std::span<T> samples() noexcept { return data_; }
    std::span<const T> samples() const noexcept { return data_; }

    std::span<T> row(int y) noexcept {
        return std::span<T>(data_).subspan(row_offset(y), row_stride());
    }
    std::span<const T> row(int y) const noexcept {
        return std::span<const T>(data_).subspan(row_offset(y), row_stride());
    }

    T& operator()(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    const T& operator()(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    // Edge-replicating access; coordinates outside the raster clamp to it.
    const T& clamped(int x, int y, int c = 0) const noexcept {
        return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1), c);
    }

    bool same_geometry(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    void check_geometry() const {
        detail::require(width_ >= 1 && height_ >= 1, "image width and height must be >= 1");
        detail::require(channels_ == 1 || channels_ == 3, "image channels must be 1 or 3");
    }
    std::size_t row_stride() const noexcept {
        return static_cast<std::size_t>(width_) * channels_;
    }
    std::size_t row_offset(int y) const noexcept { return static_cast<std::size_t>(y) * row_stride(); }
    std::size_t index(int x, int y, int c) const noexcept {
        return row_offset(y) + static_cast<std::size_t>(x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

using ImageU8 = Image<std::uint8_t>;
using ImageF32 = Image<float>;

/// Region of interest: top-left corner (inclusive) plus extent.
struct Roi {
    int x0 = 0;
    int y0 = 0;
    int w = 1;
    int h = 1;

    friend bool operator==(const Roi&, const Roi&) = default;
};

inline bool roi_fits(const Roi& roi, int width, int height) noexcept {
    return roi.x0 >= 0 && roi.y0 >= 0 && roi.w >= 1 && roi.h >= 1 &&
           roi.x0 + roi.w <= width && roi.y0 + roi.h <= height;
}

template <typename T>
Image<T> extract_roi(const Image<T>& img, const Roi& roi) {
    detail::require(roi_fits(roi, img.width(), img.height()), "roi exceeds image bounds");
    Image<T> out(roi.w, roi.h, img.channels());
    const std::size_t span = static_cast<std::size_t>(roi.w) * img.channels();
    for (int y = 0; y < roi.h; ++y) {
        auto src = img.row(roi.y0 + y).subspan(static_cast<std::size_t>(roi.x0) * img.channels(), span);
        std::copy(src.begin(), src.end(), out.row(y).begin());
    }
    return out;
}

// Canonical quantization between the two depths: U8 -> F32 is v / 255,
// F32 -> U8 is round(v * 255) clamped to [0, 255].
inline float to_unit(std::uint8_t v) noexcept { return static_cast<float>(v) / 255.0f; }

inline std::uint8_t quantize_unit(double v) noexcept {
    const double scaled = std::round(v * 255.0);
    return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

inline ImageF32 to_f32(const ImageU8& img) {
    std::vector<float> data(img.sample_count());
    std::transform(img.samples().begin(), img.samples().end(), data.begin(), to_unit);
    return ImageF32(img.width(), img.height(), img.channels(), std::move(data));
}

template <typename T>
ImageU8 quantize(const Image<T>& img) {
    static_assert(std::is_floating_point_v<T>);
    std::vector<std::uint8_t> data(img.sample_count());
    std::transform(img.samples().begin(), img.samples().end(), data.begin(),
                   [](T v) { return quantize_unit(static_cast<double>(v)); });
    return ImageU8(img.width(), img.height(), img.channels(), std::move(data));
}

template <typename T>
bool is_normalized(const Image<T>& img) {
    if constexpr (std::is_same_v<T, std::uint8_t>) {
        return true;
    } else {
        return std::all_of(img.samples().begin(), img.samples().end(),
                           [](T v) { return v >= T(0) && v <= T(1); });
    }
}

}  // namespace vesselenh
