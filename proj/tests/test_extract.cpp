#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qfnlos/errors.hpp"
#include "qfnlos/extract.hpp"
#include "qfnlos/rng.hpp"

using namespace qfnlos;

namespace {

/// psi(s) = a * exp(-i d^2 / (4 s^2)) on every pixel of a map.
ModulatedAlbedo synth_psi(const WallGrid& grid, double s,
                          const std::vector<double>& a, const std::vector<double>& d) {
  std::vector<std::complex<double>> data(grid.pixel_count());
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = std::polar(a[i], -d[i] * d[i] / (4.0 * s * s));
  return ModulatedAlbedo(grid, s, data);
}

double gauss(Rng& rng) {
  const double u1 = 1.0 - rng.next_double();
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

TEST_CASE("albedo is the per-pixel modulus") {
  const WallGrid grid(3, 3, 0.1);
  std::vector<std::complex<double>> zeros(grid.pixel_count());
  for (double v : extract_albedo(ModulatedAlbedo(grid, 0.05, zeros))) CHECK(v == 0.0);

  std::vector<double> a(grid.pixel_count()), d(grid.pixel_count());
  Rng rng(4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 2.5;
    d[i] = rng.next_double() * 3.0;  // any phase: modulus ignores it
  }
  const auto psi = synth_psi(grid, 0.07, a, d);
  for (double v : extract_albedo(psi)) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("default ds rule and the unambiguous range") {
  const double s = 0.05, d_max = 1.5;
  const double ds = default_ds(s, d_max);
  CHECK(ds == doctest::Approx(2.0 * kPi * s * s * s / (d_max * d_max)).epsilon(1e-15));
  // Half the range: the configured d_max fits, sqrt(2) * d_max wraps.
  CHECK(unambiguous_range_ok(d_max, s, s + ds));
  CHECK_FALSE(unambiguous_range_ok(1.5 * d_max, s, s + ds));
}

TEST_CASE("construct-then-invert recovers (a, d) to 1e-10") {
  const double s1 = 0.05;
  const double d_max = 1.2;
  const double s2 = s1 + default_ds(s1, d_max);
  const WallGrid grid(10, 10, 0.01);
  Rng rng(99);
  std::vector<double> a(grid.pixel_count()), d(grid.pixel_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.5 + rng.next_double();
    d[i] = (0.05 + 0.949 * rng.next_double()) * d_max;
  }
  const auto psi1 = synth_psi(grid, s1, a, d);
  const auto psi2 = synth_psi(grid, s2, a, d);

  DepthOptions opts;
  opts.albedo_rel_threshold = 0.05;
  const auto result = extract_depth(psi1, psi2, opts);
  const auto albedo = extract_albedo(psi1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(result.valid[i] == 1);
    CHECK(std::abs(result.depth[i] - d[i]) <= 1e-10 * d[i]);
    CHECK(std::abs(albedo[i] - a[i]) <= 1e-10 * a[i]);
  }
}

TEST_CASE("zero depth maps to zero") {
  const WallGrid grid(1, 1, 0.1);
  const auto psi1 = synth_psi(grid, 0.05, {1.0}, {0.0});
  const auto psi2 = synth_psi(grid, 0.051, {1.0}, {0.0});
  const auto result = extract_depth(psi1, psi2);
  CHECK(result.valid[0] == 1);
  CHECK(result.depth[0] == 0.0);
}

TEST_CASE("parameter and grid errors") {
  const WallGrid grid(2, 2, 0.1);
  const std::vector<double> a(4, 1.0), d(4, 0.5);
  const auto psi1 = synth_psi(grid, 0.05, a, d);
  const auto psi2 = synth_psi(grid, 0.06, a, d);
  CHECK_THROWS_AS(extract_depth(psi2, psi1, {}), ParameterError);  // s2 <= s1
  const WallGrid other(4, 1, 0.1);
  const auto psi3 = synth_psi(other, 0.06, a, d);
  CHECK_THROWS_AS(extract_depth(psi1, psi3, {}), DataError);

  DepthOptions opts;
  opts.albedo_rel_threshold = 0.0;
  CHECK_THROWS_AS(extract_depth(psi1, psi2, opts), ParameterError);
}

TEST_CASE("global phase and scale invariance") {
  const double s1 = 0.05, d_max = 1.0;
  const double s2 = s1 + default_ds(s1, d_max);
  const WallGrid grid(6, 6, 0.02);
  Rng rng(3);
  std::vector<double> a(grid.pixel_count()), d(grid.pixel_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 0.4 + rng.next_double();
    d[i] = (0.1 + 0.8 * rng.next_double()) * d_max;
  }
  const auto psi1 = synth_psi(grid, s1, a, d);
  const auto psi2 = synth_psi(grid, s2, a, d);
  const auto base = extract_depth(psi1, psi2);

  // Exact unit rotations (multiplication by i and by -1) leave depth bitwise
  // unchanged; arbitrary unit phases agree to rounding.
  for (const std::complex<double> c :
       {std::complex<double>(0.0, 1.0), std::complex<double>(-1.0, 0.0)}) {
    std::vector<std::complex<double>> r1(psi1.data().begin(), psi1.data().end());
    std::vector<std::complex<double>> r2(psi2.data().begin(), psi2.data().end());
    for (auto& z : r1) z *= c;
    for (auto& z : r2) z *= c;
    const auto rotated = extract_depth(ModulatedAlbedo(grid, s1, r1),
                                       ModulatedAlbedo(grid, s2, r2));
    for (std::size_t i = 0; i < base.depth.size(); ++i) {
      CHECK(rotated.depth[i] == base.depth[i]);
      CHECK(rotated.valid[i] == base.valid[i]);
    }
  }
  {
    const std::complex<double> c = std::polar(1.0, 1.2345);
    std::vector<std::complex<double>> r1(psi1.data().begin(), psi1.data().end());
    std::vector<std::complex<double>> r2(psi2.data().begin(), psi2.data().end());
    for (auto& z : r1) z *= c;
    for (auto& z : r2) z *= c;
    const auto rotated = extract_depth(ModulatedAlbedo(grid, s1, r1),
                                       ModulatedAlbedo(grid, s2, r2));
    for (std::size_t i = 0; i < base.depth.size(); ++i)
      CHECK(rotated.depth[i] == doctest::Approx(base.depth[i]).epsilon(1e-12));
  }
  {
    // Power-of-two scaling is exact: depth bitwise equal, albedo doubled.
    std::vector<std::complex<double>> r1(psi1.data().begin(), psi1.data().end());
    std::vector<std::complex<double>> r2(psi2.data().begin(), psi2.data().end());
    for (auto& z : r1) z *= 2.0;
    for (auto& z : r2) z *= 2.0;
    const ModulatedAlbedo m1(grid, s1, r1), m2(grid, s2, r2);
    const auto scaled = extract_depth(m1, m2);
    for (std::size_t i = 0; i < base.depth.size(); ++i) {
      CHECK(scaled.depth[i] == base.depth[i]);
      CHECK(scaled.valid[i] == base.valid[i]);
    }
    const auto albedo = extract_albedo(psi1);
    const auto albedo2 = extract_albedo(m1);
    for (std::size_t i = 0; i < albedo.size(); ++i)
      CHECK(albedo2[i] == 2.0 * albedo[i]);
  }
}

TEST_CASE("derivative estimator agrees with phase ratio for small d^2 beta") {
  const double s1 = 0.05;
  const WallGrid grid(1, 1, 0.1);
  for (double target : {0.02, 0.05, 0.1}) {
    // Choose d so that d^2 * beta == target exactly enough.
    const double d_max = 1.0;
    const double s2 = s1 + default_ds(s1, d_max);
    const double beta = unambiguous_beta(s1, s2);
    const double d = std::sqrt(target / beta);
    const auto psi1 = synth_psi(grid, s1, {1.0}, {d});
    const auto psi2 = synth_psi(grid, s2, {1.0}, {d});
    DepthOptions ratio_opts, deriv_opts;
    deriv_opts.estimator = DepthEstimator::kDerivative;
    const double d_ratio = extract_depth(psi1, psi2, ratio_opts).depth[0];
    const double d_deriv = extract_depth(psi1, psi2, deriv_opts).depth[0];
    CHECK(std::abs(d_ratio - d) <= 1e-10 * d);
    CHECK(std::abs(d_deriv - d_ratio) <= 0.01 * d_ratio);
  }
}

TEST_CASE("validity mask follows the albedo threshold") {
  const WallGrid grid(2, 1, 0.1);
  const auto psi1 = synth_psi(grid, 0.05, {1.0, 0.05}, {0.5, 0.5});
  const auto psi2 = synth_psi(grid, 0.0505, {1.0, 0.05}, {0.5, 0.5});
  DepthOptions opts;
  opts.albedo_rel_threshold = 0.1;
  const auto result = extract_depth(psi1, psi2, opts);
  CHECK(result.valid[0] == 1);
  CHECK(result.valid[1] == 0);
  CHECK(result.depth[1] == 0.0);  // invalid pixels carry depth 0

  const auto recon = extract_reconstruction(psi1, psi2, opts);
  CHECK(recon.valid[0] == 1);
  CHECK(recon.valid[1] == 0);
  CHECK(recon.albedo[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("wiener filter: identity, DC preservation, denoising") {
  const int n = 32;
  std::vector<double> clean(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dx = i - 15.5, dy = j - 15.5;
      clean[static_cast<std::size_t>(i) * n + j] =
          std::exp(-(dx * dx + dy * dy) / (2.0 * 9.0));
    }

  // npr = 0: the input comes back unchanged.
  const auto same = wiener_post_filter(clean, n, n, 0.0);
  for (std::size_t i = 0; i < clean.size(); ++i) CHECK(same[i] == clean[i]);

  // Constant map: DC is preserved.
  std::vector<double> flat(clean.size(), 3.25);
  const auto flat_out = wiener_post_filter(flat, n, n, 2.0);
  for (double v : flat_out) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));

  // Additive Gaussian noise at 10% of peak: filtering reduces the L2 error
  // on every seed.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(500 + seed);
    std::vector<double> noisy(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i)
      noisy[i] = clean[i] + 0.1 * gauss(rng);
    const auto filtered = wiener_post_filter(noisy, n, n, 1.0);
    double err_noisy = 0.0, err_filtered = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      err_noisy += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
      err_filtered += (filtered[i] - clean[i]) * (filtered[i] - clean[i]);
    }
    CHECK(err_filtered < err_noisy);
  }
}
