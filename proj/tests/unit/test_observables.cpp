#include <doctest.h>

#include <cmath>

#include "ounls/initial_data.hpp"
#include "ounls/observables.hpp"
#include "ounls/propagator.hpp"

using namespace ounls;

namespace {

// Closed forms for u = a e^{−x²/(2w²)} e^{−α²/(4v²)} in d = 1.
struct GaussianOracle {
  double a, w, v;
  double cx(double s) const { return std::sqrt(kPi / s); }  // ∫ e^{−s x²}
  // α integrals with or without the e^{−α²/2} measure.
  double alpha_mass(bool weighted) const { return cx(1.0 / (2 * v * v) + (weighted ? 0.5 : 0.0)); }
  double mass(bool weighted) const { return a * a * cx(1.0 / (w * w)) * alpha_mass(weighted); }
  double kinetic_x(bool weighted) const {
    return 0.5 * a * a * (std::sqrt(kPi) / (2.0 * w)) * alpha_mass(weighted);
  }
  double kinetic_alpha() const {
    const double c = 1.0 / (2 * v * v) + 0.5;
    return 0.5 * a * a * cx(1.0 / (w * w)) * (1.0 / (4 * std::pow(v, 4))) * std::sqrt(kPi) /
           (2.0 * std::pow(c, 1.5));
  }
  // ∫ g |u|^{p+2} with g = e^{−pα²/2} and the weighted measure (NonDiv), or g = 1 (Div).
  double power(int p, bool nondiv) const {
    const double q = p + 2;
    const double ca = q / (4 * v * v) + (nondiv ? 0.5 * p + 0.5 : 0.0);
    return std::pow(a, q) * cx(q / (2 * w * w)) * cx(ca);
  }
  double virial(bool weighted) const {
    return a * a * std::sqrt(kPi) * std::pow(w, 3) / 2.0 * alpha_mass(weighted);
  }
};

Discretization make(Model model, int p, Sign sign = Sign::Defocusing, int d = 1, int n_alpha = 64) {
  DiscretizationSpec s;
  s.n_x = d == 1 ? 512 : 128;
  s.n_alpha = n_alpha;
  s.div_nodes = 1601;
  s.div_half_width = 10.0;
  return Discretization(ModelSpec{model, d, p, sign, 1.0}, s);
}

double direct_morawetz(const Field& f, const Discretization& disc, Rho rho) {
  const auto& g = disc.grid();
  std::vector<double> m(f.n_x, 0.0);
  for (std::size_t ix = 0; ix < f.n_x; ++ix)
    for (std::size_t ia = 0; ia < f.n_alpha; ++ia) m[ix] += std::norm(f.at(ix, ia)) * disc.alpha_measure()[ia];
  double s = 0.0;
  for (std::size_t i = 0; i < f.n_x; ++i) {
    const auto pi = g.unflatten(i);
    for (std::size_t j = 0; j < f.n_x; ++j) {
      const auto pj = g.unflatten(j);
      double r2 = 0.0;
      for (std::size_t a = 0; a < pi.size(); ++a) r2 += std::pow((pi[a] - pj[a]) * g.spacing(), 2);
      const double r = rho == Rho::Abs ? std::sqrt(r2) : std::sqrt(1.0 + r2);
      s += r * m[i] * m[j];
    }
  }
  return s * g.cell_volume() * g.cell_volume();
}

}  // namespace

TEST_CASE("NonDiv Gaussian mass equals pi") {
  const auto disc = make(Model::NonDiv, 4);
  const Field f = make_initial(disc, GaussianRecipe{});
  CHECK(mass(f, disc) == doctest::Approx(kPi).epsilon(1e-8));
}

TEST_CASE("NonDiv energy terms match closed forms") {
  const GaussianOracle o{1.3, 1.2, 0.8};
  // Gauss quadrature of e^{−cα²} against e^{−α²/2} converges slowly; 128 modes
  // bring the power term below 1e-10.
  for (int p : {2, 4}) {
    const auto disc = make(Model::NonDiv, p, Sign::Defocusing, 1, 128);
    const Field f = make_initial(disc, GaussianRecipe{o.a, o.w, o.v, 0.0});
    const auto e = energy_parts(f, disc);
    CHECK(mass(f, disc) == doctest::Approx(o.mass(true)).epsilon(1e-10));
    CHECK(e.kinetic_x == doctest::Approx(o.kinetic_x(true)).epsilon(1e-10));
    CHECK(e.kinetic_alpha == doctest::Approx(o.kinetic_alpha()).epsilon(1e-10));
    CHECK(e.potential == doctest::Approx(o.power(p, true) / (p + 2)).epsilon(1e-10));
  }
}

TEST_CASE("Div p=2 energy terms match closed forms on a fine alpha grid") {
  const GaussianOracle o{1.1, 1.0, 1.0};
  for (Sign sign : {Sign::Defocusing, Sign::Focusing}) {
    const auto disc = make(Model::Div, 2, sign);
    const Field f = make_initial(disc, GaussianRecipe{o.a, o.w, o.v, 0.0});
    const auto e = energy_parts(f, disc);
    const double s = static_cast<int>(sign);
    CHECK(mass(f, disc) == doctest::Approx(o.mass(false)).epsilon(1e-10));
    CHECK(e.kinetic_x == doctest::Approx(o.kinetic_x(false)).epsilon(1e-10));
    CHECK(e.kinetic_alpha == doctest::Approx(o.kinetic_alpha()).epsilon(1e-5));
    CHECK(e.potential == doctest::Approx(s * o.power(2, false) / 4.0).epsilon(1e-10));
    CHECK(energy(f, disc) == doctest::Approx(e.total()));
    CHECK(h1_native(f, disc) ==
          doctest::Approx(std::sqrt(mass(f, disc) + 2 * e.kinetic_x + 2 * e.kinetic_alpha)));
  }
}

TEST_CASE("Gaussian virial moment") {
  const GaussianOracle o{0.9, 1.5, 1.0};
  const auto disc = make(Model::Div, 2);
  const Field f = make_initial(disc, GaussianRecipe{o.a, o.w, o.v, 0.0});
  CHECK(virial(f, disc) == doctest::Approx(o.virial(false)).epsilon(1e-10));
  CHECK(std::abs(virial_derivative(f, disc)) < 1e-12);
  const auto nd = make(Model::NonDiv, 2);
  CHECK(std::isnan(diagnose(make_initial(nd, GaussianRecipe{}), nd).virial));
  CHECK_THROWS(virial(make_initial(nd, GaussianRecipe{}), nd));
}

TEST_CASE("virial identity right side reduces at the mass-critical power") {
  // dp = 4: the power term drops, leaving 16(E − ½∫|∂_α u|² e^{−α²/2}).
  const auto disc = make(Model::Div, 4, Sign::Focusing);
  const Field f = make_initial(disc, GaussianRecipe{1.0, 1.0, 1.0, 0.7});
  const auto e = energy_parts(f, disc);
  CHECK(virial_rhs(f, disc) == doctest::Approx(16.0 * (e.kinetic_x + e.potential)).epsilon(1e-12));
  const auto sub = make(Model::Div, 2, Sign::Focusing);
  const Field g = make_initial(sub, GaussianRecipe{1.0, 1.0, 1.0, 0.7});
  // dp − 4 = −2 with focusing sign: 16[E − K_α − (−2)/(16) ∫|u|⁴].
  const auto eg = energy_parts(g, sub);
  CHECK(virial_rhs(g, sub) ==
        doctest::Approx(16.0 * (eg.total() - eg.kinetic_alpha + 2.0 / 16.0 * power_integral(g, sub))));
}

TEST_CASE("virial derivatives match centered differences along the flow") {
  DiscretizationSpec s;
  s.n_x = 256;
  s.div_nodes = 65;
  s.div_half_width = 8.0;
  const Discretization disc(ModelSpec{Model::Div, 1, 2, Sign::Focusing, 1.0}, s);
  const Field f = make_initial(disc, GaussianRecipe{1.0, 1.0, 1.0, 0.5});
  StepControl c;
  c.dt = 1e-4;
  const Stepper stepper(disc, c);
  const double h = 0.01;
  auto at = [&](double dt) {
    auto st = stepper.start(f);
    stepper.fused_steps(st, std::copysign(1e-4, dt), static_cast<std::size_t>(std::round(std::abs(dt) / 1e-4)));
    return virial(st.field, disc);
  };
  const double vp = at(h), v0 = virial(f, disc), vm = at(-h);
  CHECK((vp - vm) / (2 * h) == doctest::Approx(virial_derivative(f, disc)).epsilon(1e-4));
  CHECK((vp - 2 * v0 + vm) / (h * h) == doctest::Approx(virial_rhs(f, disc)).epsilon(1e-3));
}

TEST_CASE("Morawetz functional agrees with a direct double sum") {
  DiscretizationSpec s;
  s.n_x = 64;
  s.box_half_length = 6.0;
  s.n_alpha = 8;
  for (int d : {1, 2}) {
    if (d == 2) s.n_x = 16;
    const Discretization disc(ModelSpec{Model::NonDiv, d, 2, Sign::Defocusing, 1.0}, s);
    const Field f = make_initial(disc, RandomRecipe{7, 2, 1.0});
    for (Rho rho : {Rho::Abs, Rho::Bracket}) {
      CHECK(morawetz_I(f, disc, rho) == doctest::Approx(direct_morawetz(f, disc, rho)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Morawetz functional of a spike pair and under translation") {
  DiscretizationSpec s;
  s.n_x = 64;
  s.box_half_length = 16.0;
  s.n_alpha = 4;
  const Discretization disc(ModelSpec{Model::NonDiv, 1, 2, Sign::Defocusing, 1.0}, s);
  Field f = disc.make_field();
  f.at(10, 0) = 1.0;
  f.at(30, 0) = 1.0;
  const double w = disc.alpha_measure()[0], h = disc.grid().spacing();
  const double sep = 20 * h;
  CHECK(morawetz_I(f, disc, Rho::Abs) == doctest::Approx(2 * sep * w * w * h * h));
  CHECK(morawetz_I(f, disc, Rho::Bracket) ==
        doctest::Approx((2 * std::sqrt(1 + sep * sep) + 2.0) * w * w * h * h));
  Field g = disc.make_field();
  g.at(20, 0) = 1.0;
  g.at(40, 0) = 1.0;
  CHECK(morawetz_I(g, disc, Rho::Bracket) == doctest::Approx(morawetz_I(f, disc, Rho::Bracket)));
}

TEST_CASE("monitoring fractions for a centered Gaussian") {
  const auto disc = make(Model::NonDiv, 2);
  const Field f = make_initial(disc, GaussianRecipe{});
  CHECK(boundary_mass_fraction(f, disc) < kBoundaryMassWarning);
  CHECK(tail_mass_fraction(f, disc) < 1e-20);
  CHECK(x_spectral_tail_fraction(f, disc) < 1e-20);
  const auto rec = diagnose(f, disc);
  CHECK(rec.mass == doctest::Approx(mass(f, disc)));
  CHECK(rec.morawetz_dI_bound == doctest::Approx(morawetz_dI_bound(f, disc)));
  CHECK(morawetz_dI_bound(f, disc) ==
        doctest::Approx(std::pow(mass(f, disc), 1.5) * std::sqrt(x_gradient_squared(f, disc))));
}
