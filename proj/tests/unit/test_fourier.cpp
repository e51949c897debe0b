#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ounls/fourier.hpp"

using namespace ounls;

TEST_CASE("grid coordinates and wavenumbers") {
  const BoxGrid g(1, 4.0, 16);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coordinate(0) == doctest::Approx(-4.0));
  CHECK(g.coordinate(8) == doctest::Approx(0.0));
  CHECK(g.wavenumber(1) == doctest::Approx(kPi / 4.0));
  CHECK(g.wavenumber(15) == doctest::Approx(-kPi / 4.0));
  CHECK(g.wavenumber(8) == doctest::Approx(-2.0 * kPi));
  const BoxGrid g2(2, 3.0, 8);
  CHECK(g2.size() == 64);
  CHECK(g2.cell_volume() == doctest::Approx(0.75 * 0.75));
  CHECK(g2.radius_squared(0) == doctest::Approx(18.0));
  CHECK(g2.unflatten(13) == std::vector<int>{1, 5});
  CHECK_THROWS_AS(BoxGrid(1, 1.0, 48), std::invalid_argument);
  CHECK_THROWS_AS(BoxGrid(3, 1.0, 8), std::invalid_argument);
}

TEST_CASE("two-thirds mask keeps |j| <= n/3 per axis") {
  // n = 64: |j| <= 21 leaves 43 modes per axis.
  const BoxGrid g(1, 1.0, 64);
  const auto m = two_thirds_mask(g);
  CHECK(std::accumulate(m.begin(), m.end(), 0.0) == doctest::Approx(43.0));
  const BoxGrid g2(2, 1.0, 64);
  const auto m2 = two_thirds_mask(g2);
  CHECK(std::accumulate(m2.begin(), m2.end(), 0.0) == doctest::Approx(43.0 * 43.0));
  const auto lap = laplacian_symbol(g);
  CHECK(lap[0] == 0.0);
  CHECK(lap[2] == doctest::Approx(-std::pow(2.0 * kPi, 2)));
}

TEST_CASE("discrete x norms") {
  const BoxGrid g(1, 2.0, 32);
  std::vector<cplx> c(32, cplx{0.0, 3.0});
  CHECK(x_norm(c, g, 2.0) == doctest::Approx(3.0 * std::sqrt(4.0)));
  CHECK(x_norm(c, g, 4.0) == doctest::Approx(3.0 * std::pow(4.0, 0.25)));
  CHECK(x_norm(c, g, INFINITY) == doctest::Approx(3.0));
  CHECK_THROWS_AS(x_norm(c, g, 0.5), std::invalid_argument);
}

TEST_CASE("unitary transform maps plane waves to single modes") {
  const BoxGrid g(1, kPi, 64);
  const std::size_t cols = 3;
  XTransform t(g, cols);
  std::vector<cplx> data(64 * cols);
  for (int i = 0; i < 64; ++i) {
    const double x = g.coordinate(i);
    data[i * cols + 0] = std::polar(1.0, 5.0 * x);
    data[i * cols + 1] = 1.0;
    data[i * cols + 2] = std::polar(1.0, -3.0 * x);
  }
  const auto original = data;
  t.forward(data);
  double energy = 0.0;
  for (const auto& v : data) energy += std::norm(v);
  CHECK(energy == doctest::Approx(3.0 * 64.0));
  // e^{ikx} with x = −π + ih picks up the phase e^{−ikπ}.
  CHECK(std::abs(data[5 * cols + 0]) == doctest::Approx(8.0));
  CHECK(std::abs(data[0 * cols + 1]) == doctest::Approx(8.0));
  CHECK(std::abs(data[61 * cols + 2]) == doctest::Approx(8.0));
  t.inverse(data);
  for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(data[i] - original[i]) < 1e-13);
}

TEST_CASE("two-dimensional transform is separable") {
  const BoxGrid g(2, kPi, 16);
  XTransform t(g, 1);
  std::vector<cplx> data(256);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) data[i * 16 + j] = std::polar(1.0, 2.0 * g.coordinate(i) - g.coordinate(j));
  t.forward(data);
  CHECK(std::abs(data[2 * 16 + 15]) == doctest::Approx(16.0));
  CHECK_THROWS_AS(t.forward(std::span<cplx>(data.data(), 10)), std::invalid_argument);
}
