#include <doctest.h>

#include <cmath>
#include <limits>

#include "ounls/initial_data.hpp"
#include "ounls/propagator.hpp"

using namespace ounls;

namespace {

Discretization nondiv(int p = 4, double scale = 1.0, Dealias dealias = Dealias::None, int n_x = 128) {
  ModelSpec m{Model::NonDiv, 1, p, Sign::Defocusing, scale};
  DiscretizationSpec s;
  s.n_x = n_x;
  s.box_half_length = 8.0 * kPi;
  s.n_alpha = 16;
  s.dealias = dealias;
  return Discretization(m, s);
}

Discretization div(int p = 2, double scale = 1.0) {
  ModelSpec m{Model::Div, 1, p, Sign::Defocusing, scale};
  DiscretizationSpec s;
  s.n_x = 128;
  s.box_half_length = 8.0 * kPi;
  s.div_nodes = 33;
  s.div_half_width = 5.0;
  s.dealias = Dealias::None;
  return Discretization(m, s);
}

double max_diff(const Field& a, const Field& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) e = std::max(e, std::abs(a.data[i] - b.data[i]));
  return e;
}

Field step(const Discretization& disc, const Field& f, double dt, std::size_t n) {
  StepControl c;
  c.dt = dt;
  const Stepper s(disc, c);
  auto st = s.start(f);
  s.fused_steps(st, dt, n);
  return st.field;
}

}  // namespace

TEST_CASE("zero data stays zero") {
  const auto disc = nondiv();
  const Field zero = disc.make_field();
  const Field out = step(disc, zero, 1e-2, 10);
  CHECK(max_diff(out, zero) == 0.0);
  CHECK(out.time == doctest::Approx(0.1));
}

TEST_CASE("linear-only steps reproduce the exact plane-wave Hermite flow") {
  // e^{ikx} φ_n evolves by the phase e^{−i(k² + n)t}.
  const auto disc = nondiv(4, 0.0);
  const auto& b = disc.hermite();
  const double k = 3.0 * kPi / disc.grid().half_length();
  const int n = 5;
  Field f = disc.make_field();
  for (std::size_t ix = 0; ix < f.n_x; ++ix)
    for (std::size_t ia = 0; ia < f.n_alpha; ++ia)
      f.at(ix, ia) = std::polar(1.0, k * disc.grid().coordinate(static_cast<int>(ix))) * b.table()(ia, n);
  const double t = 0.37;
  const Field out = step(disc, f, t / 7.0, 7);
  Field exact = f;
  for (auto& v : exact.data) v *= std::polar(1.0, -(k * k + n) * t);
  CHECK(max_diff(out, exact) < 1e-11 * 10.0);
}

TEST_CASE("linear Div flow agrees with a fine Runge-Kutta integration") {
  const auto disc = div(2, 0.0);
  const Eigen::MatrixXd P = disc.div().dense_matrix();
  Eigen::VectorXcd v(P.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = disc.alpha_nodes()[i];
    v(i) = std::exp(-0.3 * (a - 1.0) * (a - 1.0));
  }
  Field f = disc.make_field();
  for (std::size_t ix = 0; ix < f.n_x; ++ix)
    for (std::size_t ia = 0; ia < f.n_alpha; ++ia) f.at(ix, ia) = v(ia);
  const double t = 0.5;
  const Field out = step(disc, f, t, 1);
  // Spatially constant data: only i P acts.
  const int n = 20000;
  const double h = t / n;
  const cplx I{0.0, 1.0};
  auto rhs = [&](const Eigen::VectorXcd& y) -> Eigen::VectorXcd { return I * (P.cast<cplx>() * y); };
  for (int s = 0; s < n; ++s) {
    const Eigen::VectorXcd k1 = rhs(v), k2 = rhs(v + 0.5 * h * k1), k3 = rhs(v + 0.5 * h * k2),
                           k4 = rhs(v + h * k3);
    v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  double e = 0.0;
  for (std::size_t ia = 0; ia < f.n_alpha; ++ia) e = std::max(e, std::abs(out.at(7, ia) - v(ia)));
  CHECK(e < 1e-10);
}

TEST_CASE("Strang splitting converges at second order") {
  const auto disc = nondiv(4, 1.0, Dealias::None, 256);
  const Field f = make_initial(disc, GaussianRecipe{1.5, 1.0, 1.0, 0.5});
  const double T = 0.4;
  const Field ref = step(disc, f, T / 1600, 1600);
  std::vector<double> err;
  for (int n : {50, 100, 200}) err.push_back(max_diff(step(disc, f, T / n, n), ref));
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double order = std::log2(err[i - 1] / err[i]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }
}

TEST_CASE("steps are reversible and conserve mass") {
  for (const auto& disc : {nondiv(4, 1.0), div(2, 1.0)}) {
    const Field f = make_initial(disc, GaussianRecipe{1.2, 1.0, 1.0, 1.0});
    const double m0 = mass(f, disc);
    StepControl c;
    c.dt = 1e-2;
    const Stepper s(disc, c);
    auto st = s.start(f);
    for (int i = 0; i < 20; ++i) {
      s.strang_step(st);
      CHECK(std::abs(mass(st.field, disc) - m0) < 1e-11 * m0);
    }
    s.fused_steps(st, -1e-2, 20);
    CHECK(std::abs(st.field.time) < 1e-14);
    CHECK(std::sqrt(mass([&] {
            Field d = st.field;
            for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= f.data[i];
            return d;
          }(), disc)) < 1e-9);
  }
}

TEST_CASE("nonfinite values raise the blow-up flag") {
  const auto disc = nondiv();
  Field f = make_initial(disc, GaussianRecipe{});
  f.data[17] = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  StepControl c;
  c.dt = 1e-3;
  const Stepper s(disc, c);
  auto st = s.start(f);
  s.strang_step(st);
  CHECK(st.blowup_flag);
  CHECK(st.blowup_reason == "nonfinite field values");
  REQUIRE(st.blowup_time_estimate.has_value());
}

TEST_CASE("norm growth threshold flags blow-up") {
  const auto disc = nondiv();
  Field f = make_initial(disc, GaussianRecipe{});
  const Stepper s(disc);
  auto st = s.start(f);
  for (auto& v : st.field.data) v *= 2000.0;
  CHECK(detect_blowup(st, disc, BlowupThresholds{}));
  CHECK(st.blowup_reason.find("H1") != std::string::npos);
}

TEST_CASE("integrate lands on every sample time") {
  const auto disc = nondiv(4, 1.0, Dealias::TwoThirds);
  const Field f = make_initial(disc, GaussianRecipe{0.5});
  StepControl c;
  c.dt = 0.03;
  const Stepper s(disc, c);
  const auto sched = uniform_schedule(0.5, 5);
  const auto res = integrate(f, s, 0.5, sched);
  REQUIRE(res.records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(res.records[i].time == doctest::Approx(sched[i]).epsilon(1e-14));
  CHECK_FALSE(res.final_state.blowup_flag);
  CHECK_THROWS_AS(integrate(f, s, 0.5, {0.2, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(f, s, 0.5, {}), std::invalid_argument);
}

TEST_CASE("adaptive stepping stays close to fixed stepping") {
  const auto disc = nondiv(4, 1.0, Dealias::None);
  const Field f = make_initial(disc, GaussianRecipe{1.0});
  StepControl fixed;
  fixed.dt = 1e-3;
  StepControl adaptive;
  adaptive.adaptive = true;
  adaptive.dt = 1e-2;
  const auto a = integrate(f, Stepper(disc, fixed), 0.2, {0.2});
  const auto b = integrate(f, Stepper(disc, adaptive), 0.2, {0.2});
  CHECK(max_diff(a.final_state.field, b.final_state.field) < 1e-4);
  CHECK(b.final_state.field.time == doctest::Approx(0.2));
}
