// Copyright 2026 The texdr Authors
// SPDX-License-Identifier: Apache-2.0

#include "texdr/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "texdr/error.hpp"

namespace texdr::image {
namespace {

constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

cv::Mat decode(std::span<const std::uint8_t> bytes) {
    if (bytes.empty()) throw Error(ErrorCode::kIo, "empty image");
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat img = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    if (img.empty()) throw Error(ErrorCode::kIo, "undecodable image");
    return img;
}

Blob encode_png(const cv::Mat& img) {
    std::vector<std::uint8_t> out;
    // Fixed compression level keeps output byte-stable.
    if (!cv::imencode(".png", img, out, {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw Error(ErrorCode::kIo, "png encode failed");
    return out;
}

}  // namespace

bool is_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin());
}

std::optional<Size> png_size(std::span<const std::uint8_t> bytes) {
    // signature(8) + length(4) + "IHDR"(4) + width(4) + height(4)
    if (bytes.size() < 24 || !is_png(bytes)) return std::nullopt;
    if (bytes[12] != 'I' || bytes[13] != 'H' || bytes[14] != 'D' || bytes[15] != 'R') return std::nullopt;
    Size s{be32(bytes.data() + 16), be32(bytes.data() + 20)};
    if (s.width == 0 || s.height == 0) return std::nullopt;
    return s;
}

Blob to_png(std::span<const std::uint8_t> bytes) { return encode_png(decode(bytes)); }

Blob resize_png(std::span<const std::uint8_t> png, Size target) {
    cv::Mat img = decode(png);
    cv::Mat out;
    cv::resize(img, out, cv::Size(static_cast<int>(target.width), static_cast<int>(target.height)), 0, 0,
               cv::INTER_AREA);
    return encode_png(out);
}

Blob make_png(Size size, std::uint8_t gray) {
    cv::Mat img(static_cast<int>(size.height), static_cast<int>(size.width), CV_8UC1, cv::Scalar(gray));
    return encode_png(img);
}

}  // namespace texdr::image
