#pragma once

// RGB -> gray conversion that blends per-channel weighted averages with the
// total chrominance U + V:
//
//   Y  = 0.299 R + 0.587 G + 0.114 B
//   U  = (B - Y) * 0.565,  V = (R - Y) * 0.713,  UV = U + V
//   Xk = X * {0.299, 0.587, 0.114}           for X in {R, G, B}, k = 1..3
//   X4 = (X1 + X2 + X3) / 3
//   I1 = (R4 + G4 + B4 + UV) / 4
//
// Every coefficient has at most three decimals, so I1 is evaluated exactly as
// an integer fraction over 12'000'000. Quantization to U8 happens once:
// clamp to [0, 255], then round half away from zero.

#include <cstdint>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

struct GrayscaleOptions {
    // Reproduce the printed blue terms B2 = G * 0.587, B3 = G * 0.114.
    bool eq6_verbatim = false;
    // Multiply I1 by 4 before clamping (achromatic input then maps to itself).
    bool rescale = false;

    friend bool operator==(const GrayscaleOptions&, const GrayscaleOptions&) = default;
};

/// All named terms of the conversion, in double precision. Informational:
/// rgb_to_gray_pixel does not go through this struct.
struct GrayscaleIntermediates {
    double Y, U, V, UV;
    double R1, R2, R3, G1, G2, G3, B1, B2, B3;
    double R4, G4, B4;
    double I1;
};

inline GrayscaleIntermediates gray_intermediates(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                                                 const GrayscaleOptions& opts = {}) {
    GrayscaleIntermediates t{};
    const double R = r, G = g, B = b;
    t.Y = 0.299 * R + 0.587 * G + 0.114 * B;
    t.U = (B - t.Y) * 0.565;
    t.V = (R - t.Y) * 0.713;
    t.UV = t.U + t.V;
    t.R1 = R * 0.299, t.R2 = R * 0.587, t.R3 = R * 0.114;
    t.G1 = G * 0.299, t.G2 = G * 0.587, t.G3 = G * 0.114;
    const double blue_src = opts.eq6_verbatim ? G : B;
    t.B1 = B * 0.299, t.B2 = blue_src * 0.587, t.B3 = blue_src * 0.114;
    t.R4 = (t.R1 + t.R2 + t.R3) / 3.0;
    t.G4 = (t.G1 + t.G2 + t.G3) / 3.0;
    t.B4 = (t.B1 + t.B2 + t.B3) / 3.0;
    t.I1 = (t.R4 + t.G4 + t.B4 + t.UV) / 4.0;
    return t;
}

/// I1 as the exact fraction numerator / denominator.
struct ExactGray {
    std::int64_t numerator;
    std::int64_t denominator;
};

inline ExactGray gray_exact(std::uint8_t r, std::uint8_t g, std::uint8_t b, const GrayscaleOptions& opts = {}) {
    const std::int64_t R = r, G = g, B = b;
    // Quantities below are scaled by 1000 (Y, channel sums) or 1e6 (U, V).
    const std::int64_t y_milli = 299 * R + 587 * G + 114 * B;
    const std::int64_t u_micro = (1000 * B - y_milli) * 565;
    const std::int64_t v_micro = (1000 * R - y_milli) * 713;
    const std::int64_t blue_src = opts.eq6_verbatim ? G : B;
    const std::int64_t sum_milli = 1000 * R + 1000 * G + 299 * B + 701 * blue_src;
    // (sum_milli / 3000 + (u + v) / 1e6) / 4 == (1000 sum_milli + 3 (u + v)) / 12e6
    const std::int64_t numerator = 1000 * sum_milli + 3 * (u_micro + v_micro);
    return {numerator, opts.rescale ? 3'000'000 : 12'000'000};
}

inline std::uint8_t rgb_to_gray_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                                      const GrayscaleOptions& opts = {}) {
    const auto [num, den] = gray_exact(r, g, b, opts);
    if (num <= 0) return 0;
    if (num >= 255 * den) return 255;
    return static_cast<std::uint8_t>((2 * num + den) / (2 * den));
}

inline ImageU8 rgb_to_gray(const ImageU8& img, const GrayscaleOptions& opts = {}) {
    detail::require(img.channels() == 3, "rgb_to_gray requires a 3-channel image");
    ImageU8 out(img.width(), img.height(), 1);
    const auto src = img.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = rgb_to_gray_pixel(src[3 * i], src[3 * i + 1], src[3 * i + 2], opts);
    return out;
}

/// Plain Y (BT.601 luma), rounded. Alternative to the default conversion.
inline ImageU8 rgb_to_luma(const ImageU8& img) {
    detail::require(img.channels() == 3, "rgb_to_luma requires a 3-channel image");
    ImageU8 out(img.width(), img.height(), 1);
    const auto src = img.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const std::int64_t y_milli = 299 * src[3 * i] + 587 * src[3 * i + 1] + 114 * src[3 * i + 2];
        dst[i] = static_cast<std::uint8_t>((y_milli + 500) / 1000);
    }
    return out;
}

}  // namespace vesselenh
