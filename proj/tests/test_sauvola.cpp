#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "scorebin/sauvola.hpp"
#include "support/synthetic.hpp"

using namespace scorebin;
using Catch::Approx;
using scorebin::testing::Rng;

namespace {

StatsMaps single_pixel_stats(double mean, double std) {
  return StatsMaps{RealMap(1, 1, mean), RealMap(1, 1, std), Raster<std::uint32_t>(1, 1, 9)};
}

ThresholdMap flat_threshold(std::size_t w, std::size_t h, double t) {
  return ThresholdMap{RealMap(w, h, t), 0.0};
}

// Textbook Sauvola written from scratch: explicit window loops, two-pass
// variance, one threshold per pixel, foreground when I <= T.
BinaryImage reference_sauvola(const GrayImage& img, int n, double k) {
  const Extrema e = global_extrema(img);
  const double r = (e.max_val - e.min_val) / 2.0;
  const long half = n / 2;
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  BinaryImage out(img.width(), img.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double sum = 0;
      int count = 0;
      for (long yy = std::max(0L, y - half); yy <= std::min(h - 1, y + half); ++yy)
        for (long xx = std::max(0L, x - half); xx <= std::min(w - 1, x + half); ++xx) {
          sum += img(xx, yy);
          ++count;
        }
      const double m = sum / count;
      double var = 0;
      for (long yy = std::max(0L, y - half); yy <= std::min(h - 1, y + half); ++yy)
        for (long xx = std::max(0L, x - half); xx <= std::min(w - 1, x + half); ++xx)
          var += (img(xx, yy) - m) * (img(xx, yy) - m);
      const double s = std::sqrt(var / count);
      const double t = m * (1 + k * ((r > 0 ? s / r : 0.0) - 1));
      out(x, y) = img(x, y) <= t ? Ink::foreground : Ink::background;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("threshold formula spot values", "[sauvola]") {
  // 100 * (1 + 0.5 * (25.5 / 127.5 - 1)) = 100 * (1 + 0.5 * -0.8) = 60
  const Extrema e{0, 255};
  const ThresholdMap t = threshold_map(single_pixel_stats(100, 25.5), e, SauvolaParams{0.5, WindowSpec(3)});
  CHECK(t.r == 127.5);
  CHECK(t.t[0] == Approx(60.0).margin(1e-9));

  CHECK(threshold_map(single_pixel_stats(100, 25.5), e, SauvolaParams{0.0, WindowSpec(3)}).t[0] == 100.0);

  // Constant image: R = 0 makes s / R count as 0, so T = m (1 - k).
  const ThresholdMap flat = threshold_map(single_pixel_stats(100, 0), Extrema{100, 100},
                                          SauvolaParams{0.2, WindowSpec(3)});
  CHECK(flat.r == 0.0);
  CHECK(flat.t[0] == Approx(80.0).margin(1e-9));
}

TEST_CASE("k outside [0, 1] is rejected", "[sauvola]") {
  const auto stats = single_pixel_stats(1, 0);
  CHECK_THROWS_AS(threshold_map(stats, Extrema{0, 1}, SauvolaParams{1.5, WindowSpec(3)}), Error);
  CHECK_THROWS_AS(threshold_map(stats, Extrema{0, 1}, SauvolaParams{-0.1, WindowSpec(3)}), Error);
  CHECK_THROWS_AS(threshold_map(stats, Extrema{0, 1}, SauvolaParams{std::nan(""), WindowSpec(3)}), Error);
}

TEST_CASE("threshold stays within [m (1 - k), m] when the range is positive", "[sauvola][property]") {
  Rng rng(41);
  std::uniform_real_distribution<double> kd(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const GrayImage img = scorebin::testing::random_size_noise(rng, 48);
    const Extrema e = global_extrema(img);
    if (e.max_val == e.min_val) continue;
    const SauvolaParams p{kd(rng), WindowSpec(7)};
    const StatsMaps s = local_mean_std(img, p.window);
    const ThresholdMap t = threshold_map(s, e, p);
    for (std::size_t i = 0; i < img.size(); ++i) {
      REQUIRE(t.t[i] >= s.mean[i] * (1 - p.k) - 1e-9);
      REQUIRE(t.t[i] <= s.mean[i] + 1e-9);
    }
  }
}

TEST_CASE("classification boundary", "[sauvola]") {
  const GrayImage img(3, 1, std::vector<std::uint8_t>{59, 60, 61});
  const BinaryImage out = classify(img, flat_threshold(3, 1, 60.0));
  CHECK(out[0] == Ink::foreground);
  CHECK(out[1] == Ink::foreground);
  CHECK(out[2] == Ink::background);

  CHECK_THROWS_MATCHES(classify(img, flat_threshold(2, 2, 60.0)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == ErrorCode::DimensionMismatch; }));
}

TEST_CASE("background confidence spot values", "[sauvola]") {
  // Upper branch: (120 - 60) / (255 - 60)
  CHECK(background_confidence(120, 60, Extrema{0, 255}) == Approx(60.0 / 195.0).margin(1e-9));
  CHECK(background_confidence(120, 60, Extrema{0, 255}) == Approx(0.307692).margin(1e-6));
  // Lower branch: 1 - (60 - 30) / (60 - 0)
  CHECK(background_confidence(30, 60, Extrema{0, 255}) == Approx(0.5).margin(1e-9));
  // Numerator equals denominator.
  CHECK(background_confidence(200, 60, Extrema{10, 200}) == 1.0);
  // Pixel at the image minimum.
  CHECK(background_confidence(10, 60, Extrema{10, 200}) == 0.0);
  // On the threshold: lower branch with a zero fraction.
  CHECK(background_confidence(60, 60, Extrema{0, 255}) == 1.0);
}

TEST_CASE("confidence maps through the full pipeline", "[sauvola]") {
  const GrayImage img(2, 1, std::vector<std::uint8_t>{120, 30});
  const ThresholdMap t = flat_threshold(2, 1, 60.0);
  const ConfidenceMaps c = confidence_maps(img, t, Extrema{0, 255});
  CHECK(c.cb[0] == Approx(60.0 / 195.0).margin(1e-9));
  CHECK(c.cf[0] == Approx(1.0 - 60.0 / 195.0).margin(1e-9));
  CHECK(c.cf[0] == Approx(0.692308).margin(1e-6));
  CHECK(c.cb[1] == Approx(0.5).margin(1e-9));
  CHECK(c.cf[1] == Approx(0.5).margin(1e-9));

  CHECK_THROWS_AS(confidence_maps(img, flat_threshold(1, 2, 60.0), Extrema{0, 255}), Error);
}

TEST_CASE("degenerate denominators evaluate to zero", "[sauvola]") {
  // T == max(I): upper branch unreachable, but T just below max is not.
  CHECK(background_confidence(100, 100 - 1e-13, Extrema{0, 100}) == 0.0);
  // T == min(I) with I == T: lower branch fraction 0 / 0 -> 0, cb = 1.
  CHECK(background_confidence(0, 0, Extrema{0, 0}) == 1.0);
}

TEST_CASE("scores partition unity and stay finite on degenerate images", "[sauvola][property]") {
  for (const auto& [name, img] : scorebin::testing::adversarial_suite()) {
    INFO(name);
    for (double k : {0.0, 0.2, 1.0}) {
      const SauvolaAnalysis a = analyze(img, SauvolaParams{k, WindowSpec(3)});
      for (std::size_t i = 0; i < img.size(); ++i) {
        REQUIRE(std::isfinite(a.confidence.cb[i]));
        REQUIRE(std::isfinite(a.confidence.cf[i]));
        REQUIRE(a.confidence.cb[i] >= 0.0);
        REQUIRE(a.confidence.cb[i] <= 1.0);
        REQUIRE(a.confidence.cf[i] >= 0.0);
        REQUIRE(a.confidence.cf[i] <= 1.0);
        REQUIRE(std::abs(a.confidence.cb[i] + a.confidence.cf[i] - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("background confidence is monotone within each branch", "[sauvola][property]") {
  Rng rng(43);
  std::uniform_int_distribution<int> lo_d(0, 100), hi_d(150, 255);
  std::uniform_real_distribution<double> t_d(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Extrema e{static_cast<std::uint8_t>(lo_d(rng)), static_cast<std::uint8_t>(hi_d(rng))};
    const double t = e.min_val + t_d(rng) * (e.max_val - e.min_val);
    double prev_lower = -1.0;
    double prev_upper = -1.0;
    for (int i = e.min_val; i <= e.max_val; ++i) {
      const double cb = background_confidence(i, t, e);
      if (i <= t) {
        REQUIRE(cb > prev_lower);
        prev_lower = cb;
      } else {
        REQUIRE(cb > prev_upper);
        prev_upper = cb;
      }
    }
  }
}

TEST_CASE("score machinery leaves plain Sauvola untouched", "[sauvola][property]") {
  for (std::uint32_t seed = 0; seed < 4; ++seed) {
    scorebin::testing::PageStyle style;
    style.noise_sigma = 3.0 + seed;
    style.faint_fraction = 0.3;
    const GrayImage img = scorebin::testing::synthetic_page(seed, 96, 80, style).image;
    for (int n : {3, 15, 31}) {
      for (double k : {0.05, 0.2, 0.5}) {
        const SauvolaParams p{k, WindowSpec(n)};
        const BinaryImage expected = reference_sauvola(img, n, k);
        CHECK(sauvola_binarize(img, p) == expected);
        CHECK(analyze(img, p).binary == expected);
      }
    }
  }
}
