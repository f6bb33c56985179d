#pragma once

// Per-pixel windowed mean / standard deviation over an n x n window clamped
// to the image bounds. local_mean_std runs in O(1) per pixel off a pair of
// summed-area tables; naive_mean_std is the direct double loop kept as the
// equivalence oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scorebin/error.hpp"
#include "scorebin/image.hpp"
#include "scorebin/parallel.hpp"

namespace scorebin {

/// Side length of the square window. Always odd and at least 3.
class WindowSpec {
 public:
  explicit WindowSpec(int n) : n_(n) {
    if (n < 3 || n % 2 == 0) {
      throw Error(ErrorCode::InvalidParam,
                  "window must be an odd integer >= 3, got " + std::to_string(n));
    }
  }

  int size() const noexcept { return n_; }
  int half() const noexcept { return n_ / 2; }

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

 private:
  int n_;
};

/// Inclusive pixel rectangle [x0, x1] x [y0, y1].
struct Rect {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;

  std::size_t area() const noexcept { return (x1 - x0 + 1) * (y1 - y0 + 1); }
};

struct WindowSums {
  std::uint64_t value_sum = 0;
  std::uint64_t square_sum = 0;

  friend bool operator==(const WindowSums&, const WindowSums&) = default;
};

/// Exclusive-prefix summed-area tables of values and squared values.
/// Both tables are (width + 1) x (height + 1); row 0 and column 0 are zero.
class IntegralPair {
 public:
  IntegralPair(std::size_t width, std::size_t height)
      : width_(width),
        height_(height),
        sum_((width + 1) * (height + 1), 0),
        sum_sq_((width + 1) * (height + 1), 0) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  /// Table entry at (x, y) holds the total over pixels [0, x) x [0, y).
  std::uint64_t sum(std::size_t x, std::size_t y) const noexcept { return sum_[y * (width_ + 1) + x]; }
  std::uint64_t sum_sq(std::size_t x, std::size_t y) const noexcept {
    return sum_sq_[y * (width_ + 1) + x];
  }

  std::uint64_t& sum(std::size_t x, std::size_t y) noexcept { return sum_[y * (width_ + 1) + x]; }
  std::uint64_t& sum_sq(std::size_t x, std::size_t y) noexcept { return sum_sq_[y * (width_ + 1) + x]; }

  /// Unchecked four-lookup window total; see window_sum for the checked form.
  WindowSums sums(const Rect& r) const noexcept {
    const std::size_t stride = width_ + 1;
    const std::size_t a = r.y0 * stride + r.x0;
    const std::size_t b = r.y0 * stride + r.x1 + 1;
    const std::size_t c = (r.y1 + 1) * stride + r.x0;
    const std::size_t d = (r.y1 + 1) * stride + r.x1 + 1;
    return WindowSums{sum_[d] - sum_[b] - sum_[c] + sum_[a],
                      sum_sq_[d] - sum_sq_[b] - sum_sq_[c] + sum_sq_[a]};
  }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sum_sq_;
};

struct StatsMaps {
  RealMap mean;
  RealMap std;
  Raster<std::uint32_t> effective_count;
};

inline IntegralPair build_integral(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "build_integral on an empty image");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  IntegralPair ip(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    std::uint64_t row_sum = 0;
    std::uint64_t row_sq = 0;
    const auto src = img.row(y);
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint64_t v = src[x];
      row_sum += v;
      row_sq += v * v;
      ip.sum(x + 1, y + 1) = ip.sum(x + 1, y) + row_sum;
      ip.sum_sq(x + 1, y + 1) = ip.sum_sq(x + 1, y) + row_sq;
    }
  }
  return ip;
}

inline WindowSums window_sum(const IntegralPair& ip, const Rect& rect) {
  if (rect.x0 > rect.x1 || rect.y0 > rect.y1 || rect.x1 >= ip.width() || rect.y1 >= ip.height()) {
    throw Error(ErrorCode::RectOutOfBounds,
                "rect [" + std::to_string(rect.x0) + "," + std::to_string(rect.x1) + "]x[" +
                    std::to_string(rect.y0) + "," + std::to_string(rect.y1) + "] outside " +
                    std::to_string(ip.width()) + "x" + std::to_string(ip.height()));
  }
  return ip.sums(rect);
}

/// Window of side n centred on (x, y), clipped to a width x height image.
inline Rect clamped_window(std::size_t x, std::size_t y, std::size_t width, std::size_t height,
                           const WindowSpec& spec) noexcept {
  const auto half = static_cast<std::size_t>(spec.half());
  return Rect{x > half ? x - half : 0, y > half ? y - half : 0, std::min(width - 1, x + half),
              std::min(height - 1, y + half)};
}

inline StatsMaps local_mean_std(const GrayImage& img, const WindowSpec& spec) {
  const IntegralPair ip = build_integral(img);
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  StatsMaps out{RealMap(w, h), RealMap(w, h), Raster<std::uint32_t>(w, h)};

  parallel_rows(h, [&](std::size_t begin, std::size_t end) {
    for (std::size_t y = begin; y < end; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const Rect r = clamped_window(x, y, w, h, spec);
        const WindowSums s = ip.sums(r);
        const std::uint64_t count = r.area();
        // count * E[x^2] - (count * E[x])^2, exact in 128-bit integers.
        using wide = unsigned __int128;
        const wide spread = static_cast<wide>(count) * s.square_sum -
                            static_cast<wide>(s.value_sum) * s.value_sum;
        const double n = static_cast<double>(count);
        const double variance = std::max(0.0, static_cast<double>(spread) / (n * n));
        out.mean(x, y) = static_cast<double>(s.value_sum) / n;
        out.std(x, y) = std::sqrt(variance);
        out.effective_count(x, y) = static_cast<std::uint32_t>(count);
      }
    }
  });
  return out;
}

/// Direct per-pixel loop with a two-pass variance. Quadratic in n; use it to
/// check local_mean_std, not in production paths.
inline StatsMaps naive_mean_std(const GrayImage& img, const WindowSpec& spec) {
  if (img.empty()) throw Error(ErrorCode::EmptyImage, "naive_mean_std on an empty image");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  StatsMaps out{RealMap(w, h), RealMap(w, h), Raster<std::uint32_t>(w, h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const Rect r = clamped_window(x, y, w, h, spec);
      double total = 0.0;
      std::uint32_t count = 0;
      for (std::size_t yy = r.y0; yy <= r.y1; ++yy) {
        for (std::size_t xx = r.x0; xx <= r.x1; ++xx) {
          total += img(xx, yy);
          ++count;
        }
      }
      const double mean = total / count;
      double dev = 0.0;
      for (std::size_t yy = r.y0; yy <= r.y1; ++yy) {
        for (std::size_t xx = r.x0; xx <= r.x1; ++xx) {
          const double d = img(xx, yy) - mean;
          dev += d * d;
        }
      }
      out.mean(x, y) = mean;
      out.std(x, y) = std::sqrt(dev / count);
      out.effective_count(x, y) = count;
    }
  }
  return out;
}

}  // namespace scorebin
