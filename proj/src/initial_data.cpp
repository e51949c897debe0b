#include "ounls/initial_data.hpp"

#include <cmath>
#include <random>

#include "ounls/observables.hpp"

namespace ounls {

namespace {

Field gaussian(const Discretization& disc, const GaussianRecipe& g) {
  if (!(g.x_width > 0.0) || !(g.alpha_width > 0.0)) {
    throw ConfigError("gaussian widths must be positive");
  }
  const auto& grid = disc.grid();
  const auto nodes = disc.alpha_nodes();
  std::vector<double> alpha_part(nodes.size());
  for (std::size_t ia = 0; ia < nodes.size(); ++ia) {
    const double a = nodes[ia];
    alpha_part[ia] = std::exp(-a * a / (4.0 * g.alpha_width * g.alpha_width));
  }
  Field f = disc.make_field();
  for (std::size_t ix = 0; ix < f.n_x; ++ix) {
    const auto idx = grid.unflatten(ix);
    const double r2 = grid.radius_squared(ix);
    const double x1 = grid.coordinate(idx[0]);
    const cplx x_part = g.amplitude * std::exp(-r2 / (2.0 * g.x_width * g.x_width)) *
                        std::polar(1.0, g.wavenumber * x1);
    for (std::size_t ia = 0; ia < f.n_alpha; ++ia) f.at(ix, ia) = x_part * alpha_part[ia];
  }
  return f;
}

Field random_bandlimited(const Discretization& disc, const RandomRecipe& r) {
  if (r.band < 0) throw ConfigError("band must be nonnegative");
  const auto& grid = disc.grid();
  const int d = grid.dim();
  const int width = 2 * r.band + 1;
  const int x_modes = d == 1 ? width : width * width;
  const int a_modes = r.band + 1;

  std::mt19937_64 rng(r.seed);
  std::normal_distribution<double> normal;
  std::vector<cplx> c(static_cast<std::size_t>(x_modes * a_modes));
  for (auto& v : c) {
    const double re = normal(rng);
    const double im = normal(rng);
    v = cplx(re, im);
  }

  // α profiles ψ_n at the nodes.
  const auto nodes = disc.alpha_nodes();
  std::vector<double> psi(nodes.size() * a_modes);
  for (std::size_t ia = 0; ia < nodes.size(); ++ia) {
    const auto phi = HermiteBasis::functions_at(a_modes, nodes[ia]);
    const double damp = disc.is_div() ? std::exp(-nodes[ia] * nodes[ia] / 4.0) : 1.0;
    for (int n = 0; n < a_modes; ++n) psi[ia * a_modes + n] = phi[n] * damp;
  }

  Field f = disc.make_field();
  std::vector<cplx> amp(a_modes);
  for (std::size_t ix = 0; ix < f.n_x; ++ix) {
    const auto idx = grid.unflatten(ix);
    const double env = std::exp(-0.5 * grid.radius_squared(ix));
    std::fill(amp.begin(), amp.end(), cplx{});
    for (int m = 0; m < x_modes; ++m) {
      double phase = (m % width - r.band) * grid.coordinate(idx[0]);
      if (d == 2) phase += (m / width - r.band) * grid.coordinate(idx[1]);
      const cplx wave = env * std::polar(1.0, phase);
      for (int n = 0; n < a_modes; ++n) amp[n] += c[m * a_modes + n] * wave;
    }
    for (std::size_t ia = 0; ia < f.n_alpha; ++ia) {
      cplx s{};
      for (int n = 0; n < a_modes; ++n) s += amp[n] * psi[ia * a_modes + n];
      f.at(ix, ia) = s;
    }
  }
  const double m = mass(f, disc);
  if (m > 0.0) {
    const double k = r.amplitude / std::sqrt(m);
    for (auto& v : f.data) v *= k;
  }
  return f;
}

}  // namespace

Field make_initial(const Discretization& disc, const InitialRecipe& recipe) {
  if (const auto* g = std::get_if<GaussianRecipe>(&recipe)) return gaussian(disc, *g);
  return random_bandlimited(disc, std::get<RandomRecipe>(recipe));
}

std::uint64_t member_seed(std::uint64_t seed, std::size_t member) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

double l2x_h1alpha_norm(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  const double m = mass(field, disc);
  double grad = 0.0;
  if (disc.is_div()) {
    for (std::size_t ix = 0; ix < field.n_x; ++ix) grad += disc.div().gradient_form(field.column(ix));
  } else {
    const auto na = static_cast<Eigen::Index>(field.n_alpha);
    const auto nx = static_cast<Eigen::Index>(field.n_x);
    Eigen::Map<const Eigen::MatrixXcd> u(field.data.data(), na, nx);
    const Eigen::MatrixXcd c = disc.hermite().forward().cast<cplx>() * u;
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
      for (Eigen::Index n = 1; n < na; ++n) grad += static_cast<double>(n) * std::norm(c(n, ix));
    }
  }
  return std::sqrt(m + grad * disc.grid().cell_volume());
}

void scale_to_norm(Field& field, const Discretization& disc, double target) {
  const double n = l2x_h1alpha_norm(field, disc);
  if (n == 0.0) return;
  for (auto& v : field.data) v *= target / n;
}

}  // namespace ounls
