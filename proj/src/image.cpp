#include "docex/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <sstream>

namespace docex {

cv::Mat load_image(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
    if (img.empty()) throw std::runtime_error("cannot read image: " + path);
    return img;
}

cv::Mat crop_image(const cv::Mat& page, const PixelRect& rect) {
    if (rect.left < 0 || rect.top < 0 || rect.width < 1 || rect.height < 1 ||
        rect.left + rect.width > page.cols || rect.top + rect.height > page.rows)
        throw std::invalid_argument("crop rect outside image bounds");
    return page(cv::Rect(rect.left, rect.top, rect.width, rect.height)).clone();
}

cv::Mat rotate_ccw(const cv::Mat& image, Rotation rotation) {
    cv::Mat out;
    switch (rotation) {
        case Rotation::R0:
            return image.clone();
        case Rotation::R90:
            cv::rotate(image, out, cv::ROTATE_90_COUNTERCLOCKWISE);
            return out;
        case Rotation::R180:
            cv::rotate(image, out, cv::ROTATE_180);
            return out;
        case Rotation::R270:
            cv::rotate(image, out, cv::ROTATE_90_CLOCKWISE);
            return out;
    }
    throw std::invalid_argument("bad rotation");
}

cv::Mat resize_max_dim(const cv::Mat& image, int max_dim) {
    const int longer = std::max(image.cols, image.rows);
    if (max_dim < 1 || longer <= max_dim) return image.clone();
    const double scale = static_cast<double>(max_dim) / longer;
    cv::Mat out;
    cv::resize(image, out,
               cv::Size(std::max(1, static_cast<int>(std::lround(image.cols * scale))),
                        std::max(1, static_cast<int>(std::lround(image.rows * scale)))),
               0, 0, cv::INTER_AREA);
    return out;
}

std::vector<std::uint8_t> encode_png(const cv::Mat& image) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", image, buf, {cv::IMWRITE_PNG_COMPRESSION, 3}))
        throw std::runtime_error("png encode failed");
    return buf;
}

namespace {
const char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += kB64[v & 63];
    }
    if (i + 1 == bytes.size()) {
        const std::uint32_t v = bytes[i] << 16;
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out += kB64[(v >> 18) & 63];
        out += kB64[(v >> 12) & 63];
        out += kB64[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    static int rev[256];
    static bool init = [] {
        for (int& r : rev) r = -1;
        for (int k = 0; k < 64; ++k) rev[static_cast<unsigned char>(kB64[k])] = k;
        return true;
    }();
    (void)init;
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (const char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = rev[static_cast<unsigned char>(c)];
        if (v < 0) throw std::invalid_argument("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

namespace {

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n, std::uint64_t h) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    for (int shift = 60; shift >= 0; shift -= 4) os << ((v >> shift) & 0xf);
    return os.str();
}

}  // namespace

std::string content_hash(const cv::Mat& image) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const int dims[3] = {image.cols, image.rows, image.channels()};
    h = fnv1a(reinterpret_cast<const std::uint8_t*>(dims), sizeof(dims), h);
    const std::size_t row_bytes = static_cast<std::size_t>(image.cols) * image.elemSize();
    for (int r = 0; r < image.rows; ++r)
        h = fnv1a(image.ptr<std::uint8_t>(r), row_bytes, h);
    return hex64(h);
}

std::string content_hash(const std::vector<std::uint8_t>& bytes) {
    return hex64(fnv1a(bytes.data(), bytes.size(), 0xcbf29ce484222325ULL));
}

}  // namespace docex
