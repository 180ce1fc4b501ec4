#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "vesselenh/image.hpp"

namespace testing_support {

// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("vesselenh-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline vesselenh::ImageU8 random_image(int w, int h, int c, std::mt19937& rng) {
    vesselenh::ImageU8 img(w, h, c);
    for (auto& v : img.samples()) v = static_cast<std::uint8_t>(rng() & 0xFF);
    return img;
}

}  // namespace testing_support
