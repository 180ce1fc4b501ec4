#pragma once

// YUV4MPEG2 reader/writer. Supported colorspaces: 4:2:0 (all siting
// variants share the same plane layout) and mono. 4:2:0 frames decode to
// RGB with BT.601 full-range coefficients and nearest-neighbour chroma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vesselenh/error.hpp"
#include "vesselenh/image.hpp"
#include "vesselenh/netpbm.hpp"

namespace vesselenh {

struct FrameRate {
    int num = 25;
    int den = 1;

    double fps() const noexcept { return den == 0 ? 0.0 : static_cast<double>(num) / den; }
    friend bool operator==(const FrameRate&, const FrameRate&) = default;
};

/// Ordered frames sharing one geometry and channel count.
class VideoStream {
public:
    VideoStream() = default;
    VideoStream(int width, int height, FrameRate rate) : width_(width), height_(height), rate_(rate) {
        detail::require(width >= 1 && height >= 1, "video geometry must be positive");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    FrameRate frame_rate() const noexcept { return rate_; }
    std::size_t size() const noexcept { return frames_.size(); }
    bool empty() const noexcept { return frames_.empty(); }

    const ImageU8& operator[](std::size_t i) const { return frames_[i]; }
    const std::vector<ImageU8>& frames() const noexcept { return frames_; }
    auto begin() const noexcept { return frames_.begin(); }
    auto end() const noexcept { return frames_.end(); }

    void push_back(ImageU8 frame) {
        detail::require(frame.width() == width_ && frame.height() == height_,
                        "frame geometry differs from stream geometry");
        detail::require(frames_.empty() || frames_.front().channels() == frame.channels(),
                        "frame channel count differs from earlier frames");
        frames_.push_back(std::move(frame));
    }

    void reserve(std::size_t n) { frames_.reserve(n); }

private:
    int width_ = 0;
    int height_ = 0;
    FrameRate rate_{};
    std::vector<ImageU8> frames_;
};

enum class Y4mColorspace { C420, Mono };

namespace detail {

inline std::uint8_t clamp_u8(double v) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

struct Y4mHeader {
    int width = 0;
    int height = 0;
    FrameRate rate{};
    Y4mColorspace colorspace = Y4mColorspace::C420;

    std::size_t frame_bytes() const noexcept {
        const std::size_t luma = static_cast<std::size_t>(width) * height;
        if (colorspace == Y4mColorspace::Mono) return luma;
        const std::size_t chroma = static_cast<std::size_t>((width + 1) / 2) * ((height + 1) / 2);
        return luma + 2 * chroma;
    }
};

inline bool starts_with(std::span<const std::uint8_t> bytes, std::size_t pos, std::string_view token) {
    return bytes.size() - pos >= token.size() &&
           std::equal(token.begin(), token.end(), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
}

inline int parse_positive(std::string_view text, std::size_t offset, const char* what) {
    if (text.empty() || text.size() > 9 ||
        !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw FormatError(std::string("bad ") + what + " value '" + std::string(text) + "'", offset);
    return std::stoi(std::string(text));
}

// Parses "YUV4MPEG2 <tags>\n" starting at pos; advances pos past the newline.
inline Y4mHeader parse_y4m_header(std::span<const std::uint8_t> bytes, std::size_t& pos) {
    constexpr std::string_view magic = "YUV4MPEG2";
    if (!starts_with(bytes, pos, magic)) throw FormatError("missing YUV4MPEG2 magic", pos);
    pos += magic.size();

    Y4mHeader h;
    bool have_w = false, have_h = false;
    while (true) {
        if (pos >= bytes.size()) throw FormatError("unterminated stream header", pos);
        if (bytes[pos] == '\n') {
            ++pos;
            break;
        }
        if (bytes[pos] != ' ') throw FormatError("expected space between header tags", pos);
        ++pos;
        const std::size_t tag_at = pos;
        while (pos < bytes.size() && bytes[pos] != ' ' && bytes[pos] != '\n') ++pos;
        const std::string_view tag(reinterpret_cast<const char*>(bytes.data()) + tag_at, pos - tag_at);
        if (tag.empty()) throw FormatError("empty header tag", tag_at);
        const std::string_view value = tag.substr(1);
        switch (tag.front()) {
            case 'W':
                h.width = parse_positive(value, tag_at, "width");
                have_w = true;
                break;
            case 'H':
                h.height = parse_positive(value, tag_at, "height");
                have_h = true;
                break;
            case 'F': {
                const auto colon = value.find(':');
                if (colon == std::string_view::npos) throw FormatError("frame rate must be num:den", tag_at);
                h.rate.num = parse_positive(value.substr(0, colon), tag_at, "frame rate numerator");
                h.rate.den = parse_positive(value.substr(colon + 1), tag_at, "frame rate denominator");
                break;
            }
            case 'C':
                if (value == "mono") {
                    h.colorspace = Y4mColorspace::Mono;
                } else if (value == "420" || value == "420jpeg" || value == "420paldv" || value == "420mpeg2") {
                    h.colorspace = Y4mColorspace::C420;
                } else {
                    throw FormatError("unsupported colorspace tag 'C" + std::string(value) + "'", tag_at);
                }
                break;
            default:
                break;  // I, A, X and unknown tags carry nothing we need
        }
    }
    if (!have_w || !have_h || h.width < 1 || h.height < 1)
        throw FormatError("stream header lacks positive W and H", pos);
    return h;
}

inline ImageU8 decode_y4m_frame(std::span<const std::uint8_t> payload, const Y4mHeader& h) {
    const int w = h.width;
    const int ht = h.height;
    const std::size_t luma = static_cast<std::size_t>(w) * ht;
    if (h.colorspace == Y4mColorspace::Mono)
        return ImageU8(w, ht, 1, std::vector<std::uint8_t>(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(luma)));

    const int cw = (w + 1) / 2;
    const std::size_t chroma = static_cast<std::size_t>(cw) * ((ht + 1) / 2);
    const auto* yp = payload.data();
    const auto* up = yp + luma;
    const auto* vp = up + chroma;
    ImageU8 rgb(w, ht, 3);
    for (int y = 0; y < ht; ++y) {
        for (int x = 0; x < w; ++x) {
            const double Y = yp[static_cast<std::size_t>(y) * w + x];
            const std::size_t ci = static_cast<std::size_t>(y / 2) * cw + x / 2;
            const double cb = up[ci] - 128.0;
            const double cr = vp[ci] - 128.0;
            rgb(x, y, 0) = clamp_u8(Y + 1.402 * cr);
            rgb(x, y, 1) = clamp_u8(Y - 0.344136 * cb - 0.714136 * cr);
            rgb(x, y, 2) = clamp_u8(Y + 1.772 * cb);
        }
    }
    return rgb;
}

}  // namespace detail

/// Decodes a whole YUV4MPEG2 byte stream. A repeated stream header with the
/// same geometry (as produced by concatenating files) is accepted between
/// frames.
inline VideoStream decode_y4m(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    const auto header = detail::parse_y4m_header(bytes, pos);
    VideoStream stream(header.width, header.height, header.rate);
    const std::size_t frame_bytes = header.frame_bytes();

    while (pos < bytes.size()) {
        if (detail::starts_with(bytes, pos, "YUV4MPEG2")) {
            const std::size_t at = pos;
            const auto again = detail::parse_y4m_header(bytes, pos);
            if (again.width != header.width || again.height != header.height || again.colorspace != header.colorspace)
                throw FormatError("concatenated stream header changes geometry or colorspace", at);
            continue;
        }
        if (!detail::starts_with(bytes, pos, "FRAME")) throw FormatError("expected FRAME marker", pos);
        pos += 5;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;  // frame parameters are ignored
        if (pos >= bytes.size()) throw FormatError("unterminated FRAME header", pos);
        ++pos;
        if (bytes.size() - pos < frame_bytes)
            throw FormatError("short frame payload: expected " + std::to_string(frame_bytes) + " bytes, found " +
                                  std::to_string(bytes.size() - pos),
                              bytes.size());
        stream.push_back(detail::decode_y4m_frame(bytes.subspan(pos, frame_bytes), header));
        pos += frame_bytes;
    }
    return stream;
}

inline VideoStream read_y4m_frames(const std::filesystem::path& path) {
    return decode_y4m(read_file_bytes(path));
}

/// Encodes 1-channel streams as Cmono and 3-channel streams as C420jpeg
/// (BT.601 full range, chroma averaged over each 2x2 block).
inline std::vector<std::uint8_t> encode_y4m(const VideoStream& stream) {
    const int w = stream.width();
    const int h = stream.height();
    const bool mono = stream.empty() || stream[0].channels() == 1;
    const std::string header = "YUV4MPEG2 W" + std::to_string(w) + " H" + std::to_string(h) + " F" +
                               std::to_string(stream.frame_rate().num) + ":" +
                               std::to_string(stream.frame_rate().den) + " Ip A1:1 " +
                               (mono ? "Cmono" : "C420jpeg") + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());

    const int cw = (w + 1) / 2;
    const int ch = (h + 1) / 2;
    constexpr std::string_view marker = "FRAME\n";
    for (const auto& frame : stream) {
        out.insert(out.end(), marker.begin(), marker.end());
        if (mono) {
            out.insert(out.end(), frame.samples().begin(), frame.samples().end());
            continue;
        }
        const std::size_t base = out.size();
        const std::size_t luma = static_cast<std::size_t>(w) * h;
        const std::size_t chroma = static_cast<std::size_t>(cw) * ch;
        out.resize(base + luma + 2 * chroma);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[base + static_cast<std::size_t>(y) * w + x] =
                    detail::clamp_u8(0.299 * frame(x, y, 0) + 0.587 * frame(x, y, 1) + 0.114 * frame(x, y, 2));
        for (int cy = 0; cy < ch; ++cy) {
            for (int cx = 0; cx < cw; ++cx) {
                double cb = 0.0, cr = 0.0;
                int n = 0;
                for (int y = 2 * cy; y < std::min(h, 2 * cy + 2); ++y) {
                    for (int x = 2 * cx; x < std::min(w, 2 * cx + 2); ++x) {
                        const double r = frame(x, y, 0), g = frame(x, y, 1), b = frame(x, y, 2);
                        cb += 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
                        cr += 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
                        ++n;
                    }
                }
                const std::size_t ci = static_cast<std::size_t>(cy) * cw + cx;
                out[base + luma + ci] = detail::clamp_u8(cb / n);
                out[base + luma + chroma + ci] = detail::clamp_u8(cr / n);
            }
        }
    }
    return out;
}

inline void write_y4m(const VideoStream& stream, const std::filesystem::path& path) {
    write_file_bytes(path, encode_y4m(stream));
}

}  // namespace vesselenh
