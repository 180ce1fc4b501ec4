// Regenerates the golden regression fixtures in tests/golden/.
//
//   make_golden <dir>
//
// Only rerun after an intentional change to an algorithm; the committed
// outputs are what the regression test holds the library to.

#include <filesystem>
#include <iostream>

#include "vesselenh/synthetic.hpp"
#include "vesselenh/vesselenh.hpp"

namespace fs = std::filesystem;
using namespace vesselenh;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_golden <dir>\n";
        return 2;
    }
    const fs::path dir = argv[1];
    fs::create_directories(dir);

    const ImageU8 rgb = synthetic::vein_phantom(96, 72, 0, 7, 3);
    const ImageU8 gray_in = synthetic::vein_phantom(96, 72, 3, 11, 1);
    write_image(rgb, dir / "phantom_rgb.ppm");
    write_image(gray_in, dir / "phantom_gray.pgm");

    write_image(rgb_to_gray(rgb), dir / "gray.pgm");
    write_image(apply_clahe(gray_in, ClaheConfig{8, 8, 2.0, 256}), dir / "clahe_8x8.pgm");
    write_image(median_filter(gray_in, MedianConfig{5}), dir / "median_5.pgm");
    FrangiConfig fc;
    fc.scales = {1, 2, 3, 4};
    write_image(vesselness_to_u8(frangi_multiscale(gray_in, fc)), dir / "frangi_1-4.pgm");
    write_image(run_stages(canonical_pipeline(), rgb), dir / "enhance.pgm");
    std::cout << "wrote fixtures to " << dir << "\n";
    return 0;
}
