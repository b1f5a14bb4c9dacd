#include "doctest.h"

#include "arbor/wls.hpp"
#include "oracles/dense_wls.hpp"

#include <random>

using namespace arbor;

namespace {

ImageBuffer random_gray(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  ImageBuffer img(w, h, 1);
  for (auto& s : img.samples().reshaped()) s = static_cast<std::uint8_t>(dist(rng));
  return img;
}

DisparityMap noisy_disparity(int w, int h, std::uint64_t seed, double invalid_fraction) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DisparityMap d(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double value = 20.0 + 0.3 * u + noise(rng);
      d(u, v) = unit(rng) < invalid_fraction ? kInvalidDisparity : static_cast<float>(value);
    }
  }
  return d;
}

ConfidenceMap validity(const DisparityMap& d) {
  return d.values.unaryExpr([](float x) { return is_valid_disparity(x) ? 1.0f : 0.0f; });
}

Raster<double> as_double(const DisparityMap& d) { return d.values.cast<double>(); }

Raster<double> dense(const DisparityMap& d, const ImageBuffer& guide, const ConfidenceMap& conf,
                     const WlsParams& p) {
  Raster<double> target = d.values.cast<double>().max(0.0);
  return oracle::dense_wls(target, conf.cast<double>(), guide.samples().cast<double>(), p.lambda, p.sigma_color);
}

}  // namespace

TEST_CASE("params validation") {
  WlsParams p;
  CHECK_NOTHROW(p.validate());
  p.lambda = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = WlsParams{};
  p.sigma_color = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = WlsParams{};
  p.iterations = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("lambda zero keeps valid pixels") {
  const DisparityMap d = noisy_disparity(12, 9, 1, 0.0);
  WlsParams p;
  p.lambda = 0.0;
  const DisparityMap out = wls_refine(d, random_gray(12, 9, 2), validity(d), p);
  CHECK((out.values == d.values).all());
}

TEST_CASE("constant disparity is a fixed point") {
  const DisparityMap d(10, 8, 17.25f);
  ImageBuffer flat(10, 8, 1);
  flat.samples().setConstant(90);
  for (double lambda : {0.5, 8000.0}) {
    WlsParams p;
    p.lambda = lambda;
    for (const ImageBuffer& guide : {flat, random_gray(10, 8, 3)}) {
      const DisparityMap out = wls_refine(d, guide, validity(d), p);
      CHECK(((out.values - 17.25f).abs() <= 1e-6f).all());
    }
  }
}

TEST_CASE("holes are filled") {
  DisparityMap d(6, 3);
  d(1, 0) = 4.0f;
  d(4, 0) = 8.0f;
  const Raster<double> fill = scanline_fill(d);
  CHECK(fill(0, 0) == 4.0);
  CHECK(fill(0, 2) == 4.0);
  CHECK(fill(0, 3) == 8.0);
  CHECK(fill(0, 5) == 8.0);
  CHECK((fill.row(1) == fill.row(0)).all());
  CHECK((fill.row(2) == fill.row(0)).all());

  DisparityMap tie(3, 1);
  tie(0, 0) = 9.0f;
  tie(2, 0) = 5.0f;
  CHECK(scanline_fill(tie)(0, 1) == 5.0);

  const DisparityMap none(4, 4);
  CHECK_THROWS_AS(scanline_fill(none), Error);
  CHECK_THROWS_AS(wls_refine(none, random_gray(4, 4, 1), validity(none), WlsParams{}), Error);

  const DisparityMap out = wls_refine(d, random_gray(6, 3, 5), validity(d), WlsParams{});
  CHECK((out.values >= 0.0f).all());
}

TEST_CASE("energy does not increase across sweeps") {
  const DisparityMap d = noisy_disparity(16, 12, 4, 0.2);
  const ImageBuffer guide = random_gray(16, 12, 5);
  const ConfidenceMap conf = validity(d);
  for (double lambda : {1.0, 50.0, 8000.0}) {
    WlsParams p;
    p.lambda = lambda;
    p.sigma_color = 0.1;
    double prev = wls_energy(scanline_fill(d), d, guide, conf, p);
    for (int it = 1; it <= 12; ++it) {
      p.iterations = it;
      const double e = wls_energy(as_double(wls_refine(d, guide, conf, p)), d, guide, conf, p);
      CHECK(e <= prev * (1.0 + 1e-6));
      prev = e;
    }
  }
}

TEST_CASE("converges to the direct solve") {
  const DisparityMap d = noisy_disparity(14, 11, 6, 0.15);
  const ImageBuffer guide = random_gray(14, 11, 7);
  ConfidenceMap conf = validity(d);
  conf *= 0.8f;
  WlsParams p;
  p.lambda = 4.0;
  p.sigma_color = 0.2;
  p.iterations = 3000;
  const DisparityMap out = wls_refine(d, guide, conf, p);
  const Raster<double> ref = dense(d, guide, conf, p);
  CHECK((out.values.cast<double>() - ref).abs().maxCoeff() < 1e-3);
}

TEST_CASE("step guide smooths each side and keeps the edge") {
  const int w = 24;
  const int h = 16;
  ImageBuffer guide(w, h, 1);
  DisparityMap d(w, h);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.5);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const bool near = u >= 12;
      guide.at(u, v) = near ? 230 : 30;
      d(u, v) = static_cast<float>((near ? 40.0 : 20.0) + noise(rng));
    }
  }
  WlsParams p;
  p.sigma_color = 0.02;
  p.iterations = 4000;
  const ConfidenceMap conf = validity(d);
  const DisparityMap out = wls_refine(d, guide, conf, p);
  const Raster<double> ref = dense(d, guide, conf, p);
  CHECK((out.values.cast<double>() - ref).abs().maxCoeff() < 0.05);

  auto variance = [&](const Raster<float>& x, int u0, int u1) {
    const auto block = x.middleCols(u0, u1 - u0).cast<double>();
    return (block - block.mean()).square().mean();
  };
  CHECK(variance(out.values, 0, 12) <= 0.5 * variance(d.values, 0, 12));
  CHECK(variance(out.values, 12, 24) <= 0.5 * variance(d.values, 12, 24));
  for (int v = 0; v < h; ++v) {
    // The 30-disparity crossing stays between columns 11 and 12.
    int crossing = -1;
    for (int u = 0; u + 1 < w; ++u) {
      if (out(u, v) < 30.0f && out(u + 1, v) >= 30.0f) crossing = u;
    }
    CHECK(std::abs(crossing - 11) <= 1);
  }
}

TEST_CASE("confidence from lr") {
  const DisparityMap a(20, 3, 5.0f);
  const ConfidenceMap all = confidence_from_lr(a, DisparityMap(20, 3, 5.0f), 1.0);
  CHECK((all.rightCols(15) == 1.0f).all());
  CHECK((all.leftCols(5) == 0.0f).all());
  CHECK((confidence_from_lr(DisparityMap(20, 3), DisparityMap(20, 3), 1.0) == 0.0f).all());

  DisparityMap right(20, 3, 5.0f);
  for (int v = 0; v < 3; ++v) {
    for (int u = 0; u < 8; ++u) right(u, v) = 9.0f;
  }
  const ConfidenceMap half = confidence_from_lr(a, right, 1.0);
  for (int v = 0; v < 3; ++v) {
    for (int u = 0; u < 20; ++u) CHECK(half(v, u) == ((u >= 13) ? 1.0f : 0.0f));
  }
  CHECK_THROWS_AS(confidence_from_lr(a, DisparityMap(19, 3), 1.0), Error);
}

TEST_CASE("input checks") {
  const DisparityMap d = noisy_disparity(5, 5, 9, 0.0);
  ConfidenceMap conf = validity(d);
  CHECK_THROWS_AS(wls_refine(d, random_gray(4, 5, 1), conf, WlsParams{}), Error);
  conf(0, 0) = 1.5f;
  CHECK_THROWS_AS(wls_refine(d, random_gray(5, 5, 1), conf, WlsParams{}), Error);
  CHECK_THROWS_AS(wls_refine(d, ImageBuffer(5, 5, 3), validity(d), WlsParams{}), Error);
}
