#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qfnlos/errors.hpp"
#include "qfnlos/rng.hpp"
#include "qfnlos/types.hpp"

using namespace qfnlos;

TEST_CASE("speed of light is the defined constant") {
  CHECK(speed_of_light() == 299792458.0);
  // Paper-style bin lengths to time steps.
  CHECK(bin_time_step(0.003) == 0.003 / 299792458.0);
  CHECK(bin_time_step(0.003) == doctest::Approx(1.0007e-11).epsilon(1e-4));
  CHECK(bin_time_step(0.0096) == doctest::Approx(3.2022e-11).epsilon(1e-4));
}

TEST_CASE("wall grid validates construction") {
  CHECK_THROWS_AS(WallGrid(0, 4, 0.1), ParameterError);
  CHECK_THROWS_AS(WallGrid(4, -1, 0.1), ParameterError);
  CHECK_THROWS_AS(WallGrid(4, 4, 0.0), ParameterError);
  CHECK_THROWS_AS(WallGrid(4, 4, -0.5), ParameterError);
  CHECK_THROWS_AS(WallGrid(4, 4, std::nan("")), ParameterError);
  CHECK_THROWS_AS(WallGrid(4, 4, 0.1, {std::nan(""), 0.0}), ParameterError);
}

TEST_CASE("pixel centers are exact on representable grids") {
  const WallGrid grid(8, 8, 0.25, {-1.0, 2.0});
  CHECK(grid.pixel_center(0, 0) == Vec2{-1.0, 2.0});
  CHECK(grid.pixel_center(3, 5) == Vec2{-0.25, 3.25});
}

TEST_CASE("grid index <-> coordinate round-trips exactly") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int nx = 1 + static_cast<int>(rng.next_u64() % 64);
    const int ny = 1 + static_cast<int>(rng.next_u64() % 64);
    const double pitch = 1e-4 + rng.next_double();
    const Vec2 origin{(rng.next_double() - 0.5) * 10.0,
                      (rng.next_double() - 0.5) * 10.0};
    const WallGrid grid(nx, ny, pitch, origin);
    for (int probe = 0; probe < 16; ++probe) {
      const int i = static_cast<int>(rng.next_u64() % static_cast<unsigned>(nx));
      const int j = static_cast<int>(rng.next_u64() % static_cast<unsigned>(ny));
      const auto [ri, rj] = grid.index_of(grid.pixel_center(i, j));
      CHECK(ri == i);
      CHECK(rj == j);
    }
  }
}

TEST_CASE("falloff exponent restricted to 2 and 4") {
  CHECK_NOTHROW(validate_falloff_k(2));
  CHECK_NOTHROW(validate_falloff_k(4));
  CHECK_THROWS_AS(validate_falloff_k(3), ParameterError);
  CHECK_THROWS_AS(validate_falloff_k(0), ParameterError);
}

TEST_CASE("transient histogram validates entries and parameters") {
  const WallGrid grid(2, 2, 0.1);
  CHECK_THROWS_AS(TransientHistogram(grid, 0, 0.01, 2), ParameterError);
  CHECK_THROWS_AS(TransientHistogram(grid, 4, 0.0, 2), ParameterError);
  CHECK_THROWS_AS(TransientHistogram(grid, 4, 0.01, 3), ParameterError);

  std::vector<double> bad(2 * 2 * 4, 0.0);
  bad[5] = -1.0;
  CHECK_THROWS_AS(TransientHistogram(grid, 4, 0.01, 2, bad), DataError);
  bad[5] = std::nan("");
  CHECK_THROWS_AS(TransientHistogram(grid, 4, 0.01, 2, bad), DataError);
  bad[5] = 0.0;
  bad.pop_back();
  CHECK_THROWS_AS(TransientHistogram(grid, 4, 0.01, 2, bad), DataError);

  const TransientHistogram hist(grid, 4, 0.01, 2);
  CHECK(hist.bin_center_path(0) == 0.5 * 0.01);
  CHECK(hist.bin_center_path(3) == 3.5 * 0.01);
  CHECK(hist.max_path() == 4 * 0.01);
}

TEST_CASE("field types validate entries") {
  const WallGrid grid(2, 2, 0.1);
  std::vector<std::complex<double>> data(4, {1.0, 0.0});
  CHECK_THROWS_AS(AggregatedField(grid, 0.0, 2, data), ParameterError);
  CHECK_THROWS_AS(AggregatedField(grid, 0.1, 5, data), ParameterError);
  data[2] = {std::nan(""), 0.0};
  CHECK_THROWS_AS(AggregatedField(grid, 0.1, 2, data), DataError);
  CHECK_THROWS_AS(ModulatedAlbedo(grid, 0.1, data), DataError);
  data[2] = {0.0, 0.0};
  CHECK_NOTHROW(AggregatedField(grid, 0.1, 2, data));
  CHECK_NOTHROW(ModulatedAlbedo(grid, 0.1, data));
}

TEST_CASE("scene surfels live in the hidden half-space") {
  CHECK_THROWS_AS(SceneSurfels({{0.0, 0.0, 0.0, 1.0}}), DataError);
  CHECK_THROWS_AS(SceneSurfels({{0.0, 0.0, -1.0, 1.0}}), DataError);
  CHECK_THROWS_AS(SceneSurfels({{0.0, 0.0, 1.0, -0.5}}), DataError);
  CHECK_NOTHROW(SceneSurfels({{0.0, 0.0, 1.0, 0.0}}));
}

TEST_CASE("photon event list validates pixels and paths") {
  const WallGrid grid(2, 2, 0.1);
  CHECK_THROWS_WITH_AS(PhotonEventList(grid, 2, {{0, 0, 1.0}, {2, 0, 1.0}}),
                       doctest::Contains("event 1"), DataError);
  CHECK_THROWS_AS(PhotonEventList(grid, 2, {{0, 0, 0.0}}), DataError);
  CHECK_NOTHROW(PhotonEventList(grid, 2, {{1, 1, 2.0}}));
}

TEST_CASE("reconstruction invariants") {
  const WallGrid grid(1, 2, 0.1);
  CHECK_NOTHROW(Reconstruction::checked(grid, {1.0, 0.0}, {0.5, 0.0}, {1, 0}));
  // depth must be 0 where invalid
  CHECK_THROWS_AS(Reconstruction::checked(grid, {1.0, 0.0}, {0.5, 0.3}, {1, 0}),
                  DataError);
  CHECK_THROWS_AS(Reconstruction::checked(grid, {-1.0, 0.0}, {0.5, 0.0}, {1, 0}),
                  DataError);
}

TEST_CASE("chirp sampling report") {
  // 256 x 256, pitch 1/256 m, s = 0.02 m: evaluate the report formula.
  const WallGrid grid(256, 256, 1.0 / 256.0);
  const double s = 0.02;
  const auto report = check_chirp_sampling(grid, s);
  const double expected = (255.0 / 256.0) * (1.0 / 256.0) / (2.0 * s * s);
  CHECK(report.max_phase_step == doctest::Approx(expected).epsilon(1e-12));
  CHECK(report.ok == (expected <= kPi));
  CHECK_FALSE(report.ok);  // 4.86 rad: aliased at this s

  // s -> infinity: kernel flattens, always ok.
  CHECK(check_chirp_sampling(grid, 1e9).ok);
  CHECK(check_chirp_sampling(grid, 1e9).max_phase_step ==
        doctest::Approx(0.0).epsilon(1e-18));

  // Densifying pixels at fixed extent halves the step.
  const WallGrid dense(511, 511, 1.0 / 512.0);
  const auto dense_report = check_chirp_sampling(dense, s);
  CHECK(dense_report.max_phase_step ==
        doctest::Approx(report.max_phase_step / 2.0).epsilon(1e-9));
}

TEST_CASE("thread cap setter") {
  const int before = max_threads();
  set_max_threads(4);
  CHECK(max_threads() == 4);
  set_max_threads(0);
  CHECK(max_threads() == 1);  // floor at one worker
  set_max_threads(before);
}
