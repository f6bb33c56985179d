#pragma once

// Sauvola thresholding with per-pixel background / foreground confidence.
//
//   T(p)  = m(p) * (1 + k * (s(p) / R - 1)),   R = (max(I) - min(I)) / 2
//
//   Cb(p) = (I(p) - T(p)) / (max(I) - T(p))          if I(p) > T(p)
//         = 1 - (T(p) - I(p)) / (T(p) - min(I))      otherwise
//   Cf(p) = 1 - Cb(p)
//
// Degenerate cases are total: s / R is 0 when R == 0, and any fraction whose
// denominator is within 1e-12 of zero evaluates to 0. Note that Cb jumps at
// I == T (it tends to 1 from below and 0 from above); pixels exactly on the
// threshold are classified foreground yet receive Cb == 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "scorebin/error.hpp"
#include "scorebin/image.hpp"
#include "scorebin/parallel.hpp"
#include "scorebin/windowed_stats.hpp"

namespace scorebin {

struct SauvolaParams {
  double k = 0.2;
  WindowSpec window{31};
};

inline void validate(const SauvolaParams& params) {
  if (!(params.k >= 0.0 && params.k <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "k must lie in [0, 1], got " + std::to_string(params.k));
  }
}

struct ThresholdMap {
  RealMap t;
  double r = 0.0;  ///< dynamic range (max - min) / 2
};

struct ConfidenceMaps {
  RealMap cb;  ///< background confidence
  RealMap cf;  ///< foreground confidence, 1 - cb
};

inline double dynamic_range(const Extrema& e) noexcept {
  return (static_cast<double>(e.max_val) - static_cast<double>(e.min_val)) / 2.0;
}

inline double sauvola_threshold(double mean, double std, double k, double r) noexcept {
  const double ratio = r > 0.0 ? std / r : 0.0;
  return mean * (1.0 + k * (ratio - 1.0));
}

inline ThresholdMap threshold_map(const StatsMaps& stats, const Extrema& extrema,
                                  const SauvolaParams& params) {
  validate(params);
  require_same_shape(stats.mean, stats.std, "threshold_map mean vs std");
  const double r = dynamic_range(extrema);
  ThresholdMap out{RealMap(stats.mean.width(), stats.mean.height()), r};
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    out.t[i] = sauvola_threshold(stats.mean[i], stats.std[i], params.k, r);
  }
  return out;
}

/// Foreground iff I(p) <= T(p).
inline BinaryImage classify(const GrayImage& img, const ThresholdMap& tmap) {
  require_same_shape(img, tmap.t, "classify");
  BinaryImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = static_cast<double>(img[i]) <= tmap.t[i] ? Ink::foreground : Ink::background;
  }
  return out;
}

namespace detail {
constexpr double kDegenerateDenominator = 1e-12;

inline double fraction_or_zero(double num, double den) noexcept {
  return std::abs(den) <= kDegenerateDenominator ? 0.0 : num / den;
}
}  // namespace detail

/// Background confidence of a single pixel.
inline double background_confidence(double intensity, double threshold, const Extrema& extrema) noexcept {
  double cb;
  if (intensity > threshold) {
    cb = detail::fraction_or_zero(intensity - threshold, extrema.max_val - threshold);
  } else {
    cb = 1.0 - detail::fraction_or_zero(threshold - intensity, threshold - extrema.min_val);
  }
  return std::clamp(cb, 0.0, 1.0);
}

inline ConfidenceMaps confidence_maps(const GrayImage& img, const ThresholdMap& tmap,
                                      const Extrema& extrema) {
  require_same_shape(img, tmap.t, "confidence_maps");
  ConfidenceMaps out{RealMap(img.width(), img.height()), RealMap(img.width(), img.height())};
  parallel_rows(img.height(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin * img.width(); i < end * img.width(); ++i) {
      const double cb = background_confidence(img[i], tmap.t[i], extrema);
      out.cb[i] = cb;
      out.cf[i] = 1.0 - cb;
    }
  });
  return out;
}

/// Everything the score-based applications need from one grayscale page.
struct SauvolaAnalysis {
  Extrema extrema;
  ThresholdMap threshold;
  BinaryImage binary;
  ConfidenceMaps confidence;
};

inline SauvolaAnalysis analyze(const GrayImage& img, const SauvolaParams& params) {
  validate(params);
  const Extrema extrema = global_extrema(img);
  const StatsMaps stats = local_mean_std(img, params.window);
  ThresholdMap tmap = threshold_map(stats, extrema, params);
  BinaryImage binary = classify(img, tmap);
  ConfidenceMaps conf = confidence_maps(img, tmap, extrema);
  return SauvolaAnalysis{extrema, std::move(tmap), std::move(binary), std::move(conf)};
}

/// Plain Sauvola binarization, no scores involved.
inline BinaryImage sauvola_binarize(const GrayImage& img, const SauvolaParams& params) {
  validate(params);
  const Extrema extrema = global_extrema(img);
  return classify(img, threshold_map(local_mean_std(img, params.window), extrema, params));
}

}  // namespace scorebin
