#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "reid/error.hpp"
#include "reid/image.hpp"

namespace reid {
namespace {

cv::Mat to_bgr_mat(const RgbImage& image) {
  cv::Mat mat(image.height, image.width, CV_8UC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      const Rgb& p = image.at(x, y);
      row[x] = cv::Vec3b(p.b, p.g, p.r);
    }
  }
  return mat;
}

RgbImage from_bgr_mat(const cv::Mat& mat) {
  RgbImage out(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mat.cols; ++x) out.at(x, y) = Rgb{row[x][2], row[x][1], row[x][0]};
  }
  return out;
}

std::vector<std::uint8_t> encode_with(const cv::Mat& mat, const std::string& ext,
                                      const std::vector<int>& params) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(ext, mat, buf, params)) throw Error(ErrorCode::IoError, "failed to encode " + ext);
  return buf;
}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::DecodeError, "empty image buffer");
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat mat = cv::imdecode(raw, cv::IMREAD_COLOR);
  if (mat.empty()) throw Error(ErrorCode::DecodeError, "image could not be decoded");
  return from_bgr_mat(mat);
}

LabelImage decode_label_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw Error(ErrorCode::DecodeError, "mask is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError, "libpng initialisation failed");
  }

  LabelImage out;
  PngReadCursor cursor{bytes, 0};
  std::vector<png_bytep> rows;
  // libpng reports errors by longjmp; nothing with a destructor may be
  // created between setjmp and the end of the decode below.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError, "corrupt mask PNG");
  }
  png_set_read_fn(png, &cursor, png_read_from_span);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::DecodeError, "mask PNG must be single-channel (gray or palette)");
  }
  if (bit_depth == 16) png_set_strip_16(png);
  if (bit_depth < 8) png_set_packing(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.labels.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = out.labels.data() + static_cast<std::size_t>(y) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  return encode_with(to_bgr_mat(image), ".png", {});
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
  return encode_with(to_bgr_mat(image), ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

std::vector<std::uint8_t> encode_label_png(const LabelImage& labels) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(labels.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "failed to encode mask PNG");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, labels.width, labels.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < labels.height; ++y)
    rows[y] = const_cast<png_bytep>(labels.labels.data() + static_cast<std::size_t>(y) * labels.width);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

GrayImage resize(const GrayImage& image, int width, int height) {
  cv::Mat src(image.height, image.width, CV_64FC1, const_cast<double*>(image.values.data()));
  cv::Mat dst;
  const bool shrinking = width <= image.width && height <= image.height;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const double* row = dst.ptr<double>(y);
    std::copy(row, row + width, out.values.begin() + static_cast<std::ptrdiff_t>(y) * width);
  }
  return out;
}

RgbImage resize(const RgbImage& image, int width, int height) {
  cv::Mat dst;
  const bool shrinking = width <= image.width && height <= image.height;
  cv::resize(to_bgr_mat(image), dst, cv::Size(width, height), 0, 0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
  return from_bgr_mat(dst);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

}  // namespace reid
