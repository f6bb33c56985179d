#pragma once

// Lossless image I/O: binary PGM (P5), binary PPM (P6) and 8-bit PNG.
// PNG goes through libpng; link the scorebin target to pick it up.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "scorebin/error.hpp"
#include "scorebin/image.hpp"

namespace scorebin {

enum class ImageFormat { png, pgm, ppm };

using AnyImage = std::variant<GrayImage, ColorImage>;
using Bytes = std::vector<std::uint8_t>;

inline const char* to_string(ImageFormat f) {
  switch (f) {
    case ImageFormat::png: return "png";
    case ImageFormat::pgm: return "pgm";
    case ImageFormat::ppm: return "ppm";
  }
  return "?";
}

/// Picks the format from a path's extension (case-insensitive).
inline ImageFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".pgm") return ImageFormat::pgm;
  if (ext == ".ppm") return ImageFormat::ppm;
  throw Error(ErrorCode::FormatMismatch,
              "cannot infer image format from extension of '" + path.string() + "'");
}

namespace detail {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

// ---------------------------------------------------------------- PNM

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then parses a decimal field.
  long next_field() {
    for (;;) {
      if (pos_ >= bytes_.size()) throw Error(ErrorCode::MalformedFile, "truncated PNM header");
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
    if (bytes_[pos_] == '-') throw Error(ErrorCode::MalformedFile, "negative PNM header field");
    if (!std::isdigit(bytes_[pos_])) throw Error(ErrorCode::MalformedFile, "non-numeric PNM header field");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw Error(ErrorCode::MalformedFile, "PNM header field too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedFile, "missing separator before PNM raster");
    }
    return pos_ + 1;
  }

  void skip(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline AnyImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool color = bytes[1] == '6';
  PnmHeaderReader reader(bytes);
  reader.skip(2);
  const long width = reader.next_field();
  const long height = reader.next_field();
  const long maxval = reader.next_field();
  if (width <= 0 || height <= 0) throw Error(ErrorCode::MalformedFile, "PNM dimensions must be positive");
  if (maxval <= 0 || maxval > 65535) throw Error(ErrorCode::MalformedFile, "PNM maxval out of range");
  if (maxval > 255) throw Error(ErrorCode::UnsupportedFormat, "16-bit PNM is not supported");

  const std::size_t offset = reader.raster_offset();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + count * channels) {
    throw Error(ErrorCode::MalformedFile, "truncated PNM raster");
  }
  const auto* raster = bytes.data() + offset;
  if (!color) {
    return GrayImage(width, height, std::vector<std::uint8_t>(raster, raster + count));
  }
  std::vector<Rgb> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = Rgb{raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]};
  }
  return ColorImage(width, height, std::move(data));
}

inline void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

inline std::string pnm_header(char kind, std::size_t w, std::size_t h) {
  return std::string("P") + kind + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

// ---------------------------------------------------------------- PNG

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

inline void png_read_bytes(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->bytes.size() - cur->pos < n) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes.data() + cur->pos, n);
  cur->pos += n;
}

inline void png_write_bytes(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

inline void png_record_error(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::strncpy(buf, msg, 255);
  buf[255] = '\0';
  png_longjmp(png, 1);
}

inline void png_ignore_warning(png_structp, png_const_charp) {}

inline AnyImage decode_png(std::span<const std::uint8_t> bytes) {
  char message[256] = "libpng error";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, message, png_record_error,
                                           png_ignore_warning);
  if (png == nullptr) throw Error(ErrorCode::IoError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }

  PngReadCursor cursor{bytes, 0};
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int color_type = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::MalformedFile, message);
  }

  png_set_read_fn(png, &cursor, png_read_bytes);
  png_read_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  std::string unsupported;
  if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
    unsupported = (color_type & PNG_COLOR_MASK_ALPHA) ? "PNG with alpha channel is not supported"
                                                      : "palette PNG is not supported";
  } else if (png_get_valid(png, info, PNG_INFO_tRNS)) {
    unsupported = "PNG with transparency is not supported";
  } else if (depth != 8) {
    unsupported = "only 8-bit PNG is supported (got " + std::to_string(depth) + "-bit)";
  }
  if (!unsupported.empty()) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::UnsupportedFormat, unsupported);
  }

  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raster.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raster.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (color_type == PNG_COLOR_TYPE_GRAY) {
    return GrayImage(width, height, std::move(raster));
  }
  std::vector<Rgb> data(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = Rgb{raster[3 * i], raster[3 * i + 1], raster[3 * i + 2]};
  }
  return ColorImage(width, height, std::move(data));
}

inline Bytes encode_png(std::size_t width, std::size_t height, int color_type,
                        std::span<const std::uint8_t> raster) {
  char message[256] = "libpng error";
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, message, png_record_error,
                                            png_ignore_warning);
  if (png == nullptr) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }

  Bytes out;
  std::vector<png_bytep> rows(height);
  const std::size_t stride = width * (color_type == PNG_COLOR_TYPE_RGB ? 3 : 1);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, message);
  }

  png_set_write_fn(png, &out, png_write_bytes, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(raster.data() + y * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline std::vector<std::uint8_t> interleave(const ColorImage& img) {
  std::vector<std::uint8_t> raw;
  raw.reserve(img.size() * 3);
  for (const Rgb& c : img.pixels()) {
    raw.push_back(c.r);
    raw.push_back(c.g);
    raw.push_back(c.b);
  }
  return raw;
}

}  // namespace detail

// ------------------------------------------------------------------ decode

/// Decodes PNG / P5 / P6 bytes, dispatching on magic bytes.
inline AnyImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, detail::kPngSignature)) {
    return detail::decode_png(bytes);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    return detail::decode_pnm(bytes);
  }
  throw Error(ErrorCode::UnsupportedFormat, "unrecognized image signature");
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, "no such file: '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for '" + path.string() + "'");
  return bytes;
}

inline AnyImage load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

inline GrayImage as_grayscale(const AnyImage& img) {
  if (const auto* gray = std::get_if<GrayImage>(&img)) return *gray;
  return to_grayscale(std::get<ColorImage>(img));
}

// ------------------------------------------------------------------ encode

inline Bytes encode_image(const GrayImage& img, ImageFormat format) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "cannot encode an empty image");
  switch (format) {
    case ImageFormat::pgm: {
      Bytes out;
      detail::append(out, detail::pnm_header('5', img.width(), img.height()));
      out.insert(out.end(), img.pixels().begin(), img.pixels().end());
      return out;
    }
    case ImageFormat::png:
      return detail::encode_png(img.width(), img.height(), PNG_COLOR_TYPE_GRAY, img.pixels());
    case ImageFormat::ppm:
      break;
  }
  throw Error(ErrorCode::FormatMismatch, "a grayscale image cannot be written as ppm");
}

inline Bytes encode_image(const ColorImage& img, ImageFormat format) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "cannot encode an empty image");
  const auto raw = detail::interleave(img);
  switch (format) {
    case ImageFormat::ppm: {
      Bytes out;
      detail::append(out, detail::pnm_header('6', img.width(), img.height()));
      out.insert(out.end(), raw.begin(), raw.end());
      return out;
    }
    case ImageFormat::png:
      return detail::encode_png(img.width(), img.height(), PNG_COLOR_TYPE_RGB, raw);
    case ImageFormat::pgm:
      break;
  }
  throw Error(ErrorCode::FormatMismatch, "a color image cannot be written as pgm");
}

inline Bytes encode_image(const BinaryImage& img, ImageFormat format) {
  return encode_image(to_gray(img), format);
}

inline Bytes encode_image(const AnyImage& img, ImageFormat format) {
  return std::visit([format](const auto& v) { return encode_image(v, format); }, img);
}

/// Writes to a sibling temporary and renames it over `path`, so a failed
/// write never leaves a partial file behind.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  namespace fs = std::filesystem;
  std::random_device rd;
  const fs::path tmp =
      path.string() + ".tmp" + std::to_string(std::uniform_int_distribution<unsigned>()(rd));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot create '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorCode::IoError, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw Error(ErrorCode::IoError, "cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

template <typename Image>
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format) {
  const Bytes bytes = encode_image(img, format);
  write_file_atomic(path, bytes);
}

template <typename Image>
void save_image(const Image& img, const std::filesystem::path& path) {
  save_image(img, path, format_from_path(path));
}

}  // namespace scorebin
