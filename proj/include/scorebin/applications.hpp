#pragma once

// Applications driven by the confidence maps: score-rescued binarization,
// soft background cleanup, score-map export and texture transfer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "scorebin/error.hpp"
#include "scorebin/image.hpp"
#include "scorebin/parallel.hpp"
#include "scorebin/sauvola.hpp"

namespace scorebin {

// ------------------------------------------------------------ binarization

enum class Connectivity { four = 4, eight = 8 };

struct RescueParams {
  /// Minimum foreground confidence for a background pixel to be rescued.
  /// std::nullopt switches rescue off entirely.
  std::optional<double> tau = 0.7;
  bool require_connectivity = true;
  Connectivity connectivity = Connectivity::eight;
};

inline void validate(const RescueParams& params) {
  if (params.tau && !(*params.tau >= 0.0 && *params.tau <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "tau must lie in [0, 1], got " + std::to_string(*params.tau));
  }
}

/// Hysteresis rescue: background pixels with cf >= tau join the foreground,
/// when connectivity is required only if they reach a base foreground pixel
/// through other candidates.
inline BinaryImage score_binarize(const BinaryImage& base, const ConfidenceMaps& conf,
                                  const RescueParams& params) {
  validate(params);
  require_same_shape(base, conf.cf, "score_binarize");
  if (!params.tau) return base;
  const double tau = *params.tau;

  BinaryImage out = base;
  const std::size_t w = base.width();
  const std::size_t h = base.height();
  auto is_candidate = [&](std::size_t i) {
    return out[i] == Ink::background && conf.cf[i] >= tau;
  };

  if (!params.require_connectivity) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (is_candidate(i)) out[i] = Ink::foreground;
    }
    return out;
  }

  static constexpr std::array<std::array<int, 2>, 8> kOffsets = {
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
  const std::size_t neighbours = params.connectivity == Connectivity::four ? 4 : 8;

  auto for_each_neighbour = [&](std::size_t i, auto&& fn) {
    const auto x = static_cast<long>(i % w);
    const auto y = static_cast<long>(i / w);
    for (std::size_t k = 0; k < neighbours; ++k) {
      const long nx = x + kOffsets[k][0];
      const long ny = y + kOffsets[k][1];
      if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
      fn(static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx));
    }
  };

  // Seed with candidates touching base foreground, then flood through
  // candidates. The reached set is the union of candidate components that
  // touch the base foreground, independent of visiting order.
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_candidate(i)) continue;
    bool touches = false;
    for_each_neighbour(i, [&](std::size_t j) { touches = touches || base[j] == Ink::foreground; });
    if (touches) {
      out[i] = Ink::foreground;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    for_each_neighbour(i, [&](std::size_t j) {
      if (is_candidate(j)) {
        out[j] = Ink::foreground;
        frontier.push_back(j);
      }
    });
  }
  return out;
}

// ----------------------------------------------------------------- cleanup

struct CleanupParams {
  /// Shapes the blend weight: alpha = cb ^ gamma. Must be positive.
  double gamma = 1.0;
  Rgb background{255, 255, 255};
};

inline void validate(const CleanupParams& params) {
  if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
    throw Error(ErrorCode::InvalidParam, "gamma must be positive, got " + std::to_string(params.gamma));
  }
}

namespace detail {
inline std::uint8_t blend(double weight_a, double a, double b) noexcept {
  return quantize(weight_a * a + (1.0 - weight_a) * b);
}
}  // namespace detail

/// Pushes each pixel toward the background colour by cb ^ gamma.
inline GrayImage cleanup(const GrayImage& img, const ConfidenceMaps& conf, const CleanupParams& params) {
  validate(params);
  require_same_shape(img, conf.cb, "cleanup");
  const double bg = luma(params.background);
  GrayImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double alpha = std::pow(conf.cb[i], params.gamma);
    out[i] = detail::blend(alpha, bg, img[i]);
  }
  return out;
}

inline ColorImage cleanup(const ColorImage& img, const ConfidenceMaps& conf, const CleanupParams& params) {
  validate(params);
  require_same_shape(img, conf.cb, "cleanup");
  const Rgb bg = params.background;
  ColorImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double alpha = std::pow(conf.cb[i], params.gamma);
    const Rgb c = img[i];
    out[i] = Rgb{detail::blend(alpha, bg.r, c.r), detail::blend(alpha, bg.g, c.g),
                 detail::blend(alpha, bg.b, c.b)};
  }
  return out;
}

// ------------------------------------------------------------------ export

enum class ScoreKind { foreground, background };

/// Quantizes a confidence map to 8 bits (value = round(255 * score)).
inline GrayImage export_score_map(const ConfidenceMaps& conf, ScoreKind which) {
  const RealMap& src = which == ScoreKind::foreground ? conf.cf : conf.cb;
  GrayImage out(src.width(), src.height());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = quantize(src[i] * 255.0);
  return out;
}

// -------------------------------------------------------- texture transfer

enum class TextureFit { resize, tile };

namespace detail {

struct RgbReal {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// Texture resampled to width x height, kept in double precision.
inline Raster<RgbReal> fit_texture_real(const ColorImage& texture, std::size_t width,
                                        std::size_t height, TextureFit fit) {
  const std::size_t tw = texture.width();
  const std::size_t th = texture.height();
  Raster<RgbReal> out(width, height);
  if (fit == TextureFit::tile) {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const Rgb c = texture(x % tw, y % th);
        out(x, y) = RgbReal{double(c.r), double(c.g), double(c.b)};
      }
    }
    return out;
  }

  // Bilinear, pixel-centre aligned, edge-clamped.
  auto axis = [](std::size_t i, std::size_t dst, std::size_t src) {
    const double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(src) /
                           static_cast<double>(dst) - 0.5;
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(src - 1));
    const auto lo = static_cast<std::size_t>(std::floor(clamped));
    const std::size_t hi = std::min(lo + 1, src - 1);
    return std::tuple{lo, hi, clamped - static_cast<double>(lo)};
  };
  for (std::size_t y = 0; y < height; ++y) {
    const auto [y0, y1, fy] = axis(y, height, th);
    for (std::size_t x = 0; x < width; ++x) {
      const auto [x0, x1, fx] = axis(x, width, tw);
      const Rgb a = texture(x0, y0), b = texture(x1, y0), c = texture(x0, y1), d = texture(x1, y1);
      auto lerp2 = [&](double va, double vb, double vc, double vd) {
        const double top = va + fx * (vb - va);
        const double bottom = vc + fx * (vd - vc);
        return top + fy * (bottom - top);
      };
      out(x, y) = RgbReal{lerp2(a.r, b.r, c.r, d.r), lerp2(a.g, b.g, c.g, d.g),
                          lerp2(a.b, b.b, c.b, d.b)};
    }
  }
  return out;
}

}  // namespace detail

inline ColorImage fit_texture(const ColorImage& texture, std::size_t width, std::size_t height,
                              TextureFit fit) {
  if (texture.empty()) throw Error(ErrorCode::EmptyTexture, "texture image is empty");
  const auto real = detail::fit_texture_real(texture, width, height, fit);
  ColorImage out(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = Rgb{quantize(real[i].r), quantize(real[i].g), quantize(real[i].b)};
  }
  return out;
}

/// Composites the page over a new background: out = cf * page + cb * texture.
inline ColorImage texture_transfer(const ColorImage& img, const ConfidenceMaps& conf,
                                   const ColorImage& texture, TextureFit fit = TextureFit::resize) {
  require_same_shape(img, conf.cf, "texture_transfer");
  if (texture.empty()) throw Error(ErrorCode::EmptyTexture, "texture image is empty");
  const auto tex = detail::fit_texture_real(texture, img.width(), img.height(), fit);
  ColorImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double cf = conf.cf[i];
    const double cb = conf.cb[i];
    const Rgb c = img[i];
    out[i] = Rgb{quantize(cf * c.r + cb * tex[i].r), quantize(cf * c.g + cb * tex[i].g),
                 quantize(cf * c.b + cb * tex[i].b)};
  }
  return out;
}

inline ColorImage texture_transfer(const GrayImage& img, const ConfidenceMaps& conf,
                                   const ColorImage& texture, TextureFit fit = TextureFit::resize) {
  return texture_transfer(to_color(img), conf, texture, fit);
}

}  // namespace scorebin
