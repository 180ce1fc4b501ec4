#pragma once

// Multiscale 2-D vesselness.
//
// At scale sigma the Hessian is taken from Gaussian second-derivative
// filters and multiplied by sigma^2 so responses are comparable across
// scales. With eigenvalues |l1| <= |l2|:
//
//   V = 0                                                   if l2 >= 0
//   V = exp(-Rb^2 / (2 beta^2)) * (1 - exp(-S^2 / (2 c^2)))  otherwise
//   Rb = |l1| / |l2|,  S = sqrt(l1^2 + l2^2)
//
// The l2 gate selects bright ridges; dark vessels are handled by negating
// the Hessian first. The multiscale response is the per-pixel maximum.
// The plate/tube ratio and its alpha weight only exist for volumes and are
// not evaluated here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "vesselenh/error.hpp"
#include "vesselenh/gaussian.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

struct FrangiConfig {
    std::vector<double> scales{1, 2, 3, 4, 5, 6, 7, 8};
    double alpha = 0.5;  // kept for configuration compatibility; unused in 2-D
    double beta = 0.5;
    // Background sensitivity. Empty means automatic: half the largest Hessian
    // Frobenius norm over the image and over every scale being evaluated.
    std::optional<double> c;
    bool dark_vessels = true;

    void validate() const {
        detail::require(!scales.empty(), "frangi needs at least one scale");
        for (std::size_t i = 0; i < scales.size(); ++i) {
            detail::require(scales[i] > 0.0 && std::isfinite(scales[i]), "frangi scales must be > 0");
            detail::require(i == 0 || scales[i] > scales[i - 1], "frangi scales must be strictly increasing");
        }
        detail::require(alpha > 0.0 && beta > 0.0, "frangi alpha and beta must be > 0");
        detail::require(!c || *c > 0.0, "frangi c must be > 0 or automatic");
    }

    friend bool operator==(const FrangiConfig&, const FrangiConfig&) = default;
};

/// Scale-normalized Hessian planes. The off-diagonal plane serves both slots.
struct HessianField {
    ImageF32 hxx;
    ImageF32 hxy;
    ImageF32 hyy;
    double sigma = 0.0;

    double frobenius_at(std::size_t i) const noexcept {
        const double a = hxx.samples()[i], b = hxy.samples()[i], d = hyy.samples()[i];
        return std::sqrt(a * a + 2.0 * b * b + d * d);
    }

    double max_frobenius() const noexcept {
        double m = 0.0;
        for (std::size_t i = 0; i < hxx.sample_count(); ++i) m = std::max(m, frobenius_at(i));
        return m;
    }
};

struct EigenPair {
    double l1;  // smaller magnitude
    double l2;  // larger magnitude
};

/// Closed-form eigenvalues m +- sqrt(d^2 + hxy^2) of [[hxx, hxy], [hxy, hyy]],
/// ordered by magnitude. On a magnitude tie the positive one is l1.
inline EigenPair eigen2x2(double hxx, double hxy, double hyy) noexcept {
    const double m = 0.5 * (hxx + hyy);
    const double d = 0.5 * (hxx - hyy);
    const double q = std::hypot(d, hxy);
    const double a = m + q;
    const double b = m - q;
    return std::abs(a) <= std::abs(b) ? EigenPair{a, b} : EigenPair{b, a};
}

inline double vesselness_from_eigen(const EigenPair& e, double beta, double c) noexcept {
    if (e.l2 >= 0.0 || std::abs(e.l2) < 1e-12 || c <= 0.0) return 0.0;
    const double rb = std::abs(e.l1) / std::abs(e.l2);
    const double s2 = e.l1 * e.l1 + e.l2 * e.l2;
    return std::exp(-rb * rb / (2.0 * beta * beta)) * (1.0 - std::exp(-s2 / (2.0 * c * c)));
}

template <typename T>
HessianField hessian_at_scale(const Image<T>& img, double sigma) {
    detail::require(sigma > 0.0 && std::isfinite(sigma), "hessian sigma must be > 0");
    const PlaneD plane = to_plane(img);
    const auto g = gaussian_kernel(sigma);
    const auto d1 = gaussian_d1_kernel(sigma);
    const auto d2 = gaussian_d2_kernel(sigma);

    const PlaneD xx = correlate_rows(correlate_cols(plane, g), d2);
    const PlaneD yy = correlate_cols(correlate_rows(plane, g), d2);
    const PlaneD xy = correlate_cols(correlate_rows(plane, d1), d1);

    const double norm = sigma * sigma;
    auto to_f32 = [&](const PlaneD& p) {
        std::vector<float> data(p.sample_count());
        std::transform(p.samples().begin(), p.samples().end(), data.begin(),
                       [norm](double v) { return static_cast<float>(v * norm); });
        return ImageF32(p.width(), p.height(), 1, std::move(data));
    };
    return {to_f32(xx), to_f32(xy), to_f32(yy), sigma};
}

/// Vesselness response plus, for multiscale runs, the index into the scale
/// list that produced each pixel's maximum.
struct VesselnessMap {
    ImageF32 response;
    std::vector<std::uint16_t> scale_index;
};

namespace detail {

inline ImageF32 response_from_hessian(const HessianField& h, double beta, double c, bool dark_vessels) {
    ImageF32 out(h.hxx.width(), h.hxx.height(), 1);
    const double sign = dark_vessels ? -1.0 : 1.0;
    const auto xx = h.hxx.samples(), xy = h.hxy.samples(), yy = h.hyy.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const auto e = eigen2x2(sign * xx[i], sign * xy[i], sign * yy[i]);
        dst[i] = static_cast<float>(vesselness_from_eigen(e, beta, c));
    }
    return out;
}

inline double resolve_c(const FrangiConfig& cfg, const std::vector<HessianField>& fields) {
    if (cfg.c) return *cfg.c;
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, f.max_frobenius());
    return 0.5 * m;
}

}  // namespace detail

/// Background sensitivity that a run with `cfg` on these Hessians uses.
inline double background_c(const FrangiConfig& cfg, const std::vector<HessianField>& fields) {
    return detail::resolve_c(cfg, fields);
}

template <typename T>
VesselnessMap vesselness_at_scale(const Image<T>& img, double sigma, const FrangiConfig& cfg) {
    FrangiConfig single = cfg;
    single.scales = {sigma};
    single.validate();
    std::vector<HessianField> fields;
    fields.push_back(hessian_at_scale(img, sigma));
    const double c = detail::resolve_c(cfg, fields);
    VesselnessMap map;
    map.response = detail::response_from_hessian(fields.front(), cfg.beta, c, cfg.dark_vessels);
    map.scale_index.assign(map.response.pixel_count(), 0);
    return map;
}

template <typename T>
VesselnessMap frangi_multiscale(const Image<T>& img, const FrangiConfig& cfg = {}) {
    cfg.validate();
    detail::require(img.channels() == 1, "frangi requires a 1-channel image");
    std::vector<HessianField> fields;
    fields.reserve(cfg.scales.size());
    for (double sigma : cfg.scales) fields.push_back(hessian_at_scale(img, sigma));
    const double c = detail::resolve_c(cfg, fields);

    VesselnessMap best;
    best.response = ImageF32(img.width(), img.height(), 1);
    best.scale_index.assign(best.response.pixel_count(), 0);
    auto dst = best.response.samples();
    for (std::size_t s = 0; s < fields.size(); ++s) {
        const auto v = detail::response_from_hessian(fields[s], cfg.beta, c, cfg.dark_vessels);
        const auto src = v.samples();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            if (s == 0 || src[i] > dst[i]) {
                dst[i] = src[i];
                best.scale_index[i] = static_cast<std::uint16_t>(s);
            }
        }
    }
    return best;
}

/// U8 rendering of a vesselness map: round(V * 255).
inline ImageU8 vesselness_to_u8(const VesselnessMap& map) { return quantize(map.response); }

}  // namespace vesselenh
