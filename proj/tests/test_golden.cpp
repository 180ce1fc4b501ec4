#include <gtest/gtest.h>

#include <filesystem>

#include "vesselenh/synthetic.hpp"
#include "vesselenh/vesselenh.hpp"

// Byte-for-byte regression against the committed fixtures in tests/golden.
// Regenerate them with tools/make_golden only after an intended change.

using namespace vesselenh;

namespace {

const std::filesystem::path kGolden = VESSELENH_GOLDEN_DIR;

std::vector<std::uint8_t> golden(const char* name) { return read_file_bytes(kGolden / name); }

}  // namespace

TEST(Golden, InputsAreReproducible) {
    EXPECT_EQ(encode_netpbm(synthetic::vein_phantom(96, 72, 0, 7, 3)), golden("phantom_rgb.ppm"));
    EXPECT_EQ(encode_netpbm(synthetic::vein_phantom(96, 72, 3, 11, 1)), golden("phantom_gray.pgm"));
}

TEST(Golden, Gray) {
    EXPECT_EQ(encode_netpbm(rgb_to_gray(read_image(kGolden / "phantom_rgb.ppm"))), golden("gray.pgm"));
}

TEST(Golden, Clahe) {
    EXPECT_EQ(encode_netpbm(apply_clahe(read_image(kGolden / "phantom_gray.pgm"), {8, 8, 2.0, 256})),
              golden("clahe_8x8.pgm"));
}

TEST(Golden, Median) {
    EXPECT_EQ(encode_netpbm(median_filter(read_image(kGolden / "phantom_gray.pgm"), {5})), golden("median_5.pgm"));
}

TEST(Golden, Frangi) {
    FrangiConfig cfg;
    cfg.scales = {1, 2, 3, 4};
    EXPECT_EQ(encode_netpbm(vesselness_to_u8(frangi_multiscale(read_image(kGolden / "phantom_gray.pgm"), cfg))),
              golden("frangi_1-4.pgm"));
}

TEST(Golden, Enhance) {
    EXPECT_EQ(encode_netpbm(run_stages(canonical_pipeline(), read_image(kGolden / "phantom_rgb.ppm"))),
              golden("enhance.pgm"));
}
