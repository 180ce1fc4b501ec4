#pragma once

// Binary PGM (P5) / PPM (P6) codec, maxval 255 only.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"

namespace vesselenh {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

namespace detail {

class HeaderCursor {
public:
    explicit HeaderCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t pos() const noexcept { return pos_; }

    // Skips whitespace and '#' comments running to end of line.
    void skip_blank() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* field) {
        skip_blank();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) throw FormatError(std::string("header ") + field + " too large", start);
            ++pos_;
        }
        if (pos_ == start) throw FormatError(std::string("expected ") + field + " in header", start);
        return value;
    }

    void expect_single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw FormatError("expected whitespace after header", pos_);
        ++pos_;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ImageU8 decode_netpbm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw FormatError("not a binary PGM/PPM file (expected P5 or P6 magic)", 0);
    const int channels = bytes[1] == '5' ? 1 : 3;

    detail::HeaderCursor cur(bytes.subspan(2));
    const long width = cur.read_uint("width");
    const long height = cur.read_uint("height");
    const std::size_t maxval_at = cur.pos() + 2;
    const long maxval = cur.read_uint("maxval");
    if (width < 1 || height < 1) throw FormatError("image dimensions must be positive", maxval_at);
    if (maxval != 255) throw FormatError("unsupported maxval " + std::to_string(maxval), maxval_at);
    cur.expect_single_whitespace();

    const std::size_t header = cur.pos() + 2;
    const std::size_t payload = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
    if (bytes.size() - header < payload)
        throw FormatError("truncated payload: expected " + std::to_string(payload) + " bytes, found " +
                              std::to_string(bytes.size() - header),
                          bytes.size());

    auto first = bytes.begin() + static_cast<std::ptrdiff_t>(header);
    std::vector<std::uint8_t> data(first, first + static_cast<std::ptrdiff_t>(payload));
    return ImageU8(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

inline std::vector<std::uint8_t> encode_netpbm(const ImageU8& img) {
    detail::require(!img.empty(), "cannot encode an empty image");
    const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                               std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.samples().begin(), img.samples().end());
    return out;
}

inline ImageU8 read_image(const std::filesystem::path& path) {
    return decode_netpbm(read_file_bytes(path));
}

inline void write_image(const ImageU8& img, const std::filesystem::path& path) {
    write_file_bytes(path, encode_netpbm(img));
}

// Real-valued rasters have no on-disk representation; quantize() them first.
template <typename T>
    requires std::is_floating_point_v<T>
void write_image(const Image<T>&, const std::filesystem::path&) {
    throw ContractViolation("write_image requires a U8 image; quantize F32 images first");
}

}  // namespace vesselenh
