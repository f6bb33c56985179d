#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scorebin/error.hpp"

namespace scorebin {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Binary classification label. Saved as 0 (foreground) / 255 (background).
enum class Ink : std::uint8_t { background = 0, foreground = 1 };

/// Row-major 2-D grid. Pixel (x, y) lives at index y * width + x.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  Raster(std::size_t width, std::size_t height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != width_ * height_) {
      throw Error(ErrorCode::InvalidParam,
                  "pixel buffer holds " + std::to_string(data_.size()) + " values, expected " +
                      std::to_string(width_ * height_));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }

  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  std::span<T> row(std::size_t y) noexcept { return pixels().subspan(y * width_, width_); }
  std::span<const T> row(std::size_t y) const noexcept { return pixels().subspan(y * width_, width_); }

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Raster<std::uint8_t>;
using ColorImage = Raster<Rgb>;
using BinaryImage = Raster<Ink>;
/// Per-pixel real-valued map (means, deviations, thresholds, scores).
using RealMap = Raster<double>;

struct Extrema {
  std::uint8_t min_val = 0;
  std::uint8_t max_val = 0;

  friend bool operator==(const Extrema&, const Extrema&) = default;
};

/// Rounds half away from zero and clamps into the 8-bit range.
inline std::uint8_t quantize(double v) noexcept {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;  // also catches NaN
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

template <typename T, typename U>
void require_same_shape(const Raster<T>& a, const Raster<U>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

/// BT.601 luma.
inline std::uint8_t luma(Rgb c) noexcept {
  return quantize(0.299 * c.r + 0.587 * c.g + 0.114 * c.b);
}

inline GrayImage to_grayscale(const ColorImage& img) {
  GrayImage out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(), luma);
  return out;
}

inline ColorImage to_color(const GrayImage& img) {
  ColorImage out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [](std::uint8_t v) { return Rgb{v, v, v}; });
  return out;
}

inline Extrema global_extrema(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "global_extrema on an empty image");
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  return Extrema{*lo, *hi};
}

/// Foreground renders black (0), background white (255).
inline GrayImage to_gray(const BinaryImage& img) {
  GrayImage out(img.width(), img.height());
  std::transform(img.pixels().begin(), img.pixels().end(), out.pixels().begin(),
                 [](Ink v) -> std::uint8_t { return v == Ink::foreground ? 0 : 255; });
  return out;
}

inline std::size_t foreground_count(const BinaryImage& img) {
  return static_cast<std::size_t>(
      std::count(img.pixels().begin(), img.pixels().end(), Ink::foreground));
}

}  // namespace scorebin
