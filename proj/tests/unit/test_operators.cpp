#include <doctest.h>

#include <cmath>

#include "ounls/operators.hpp"

using namespace ounls;

TEST_CASE("div operator is symmetric with constants in its kernel") {
  const DivAlphaOperator op(41, 6.0);
  const Eigen::MatrixXd m = op.dense_matrix();
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(op.spacing() == doctest::Approx(0.3));
  CHECK(op.face_weights().size() == 40);
  CHECK(op.face_weights()[20] == doctest::Approx(std::exp(-0.5 * 0.15 * 0.15)));
}

TEST_CASE("div operator eigenpairs are orthonormal and nonpositive") {
  const DivAlphaOperator op(33, 5.0);
  const auto& v = op.eigenvectors();
  const auto& l = op.eigenvalues();
  CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(33, 33)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(l(32)) < 1e-12);
  for (int i = 1; i < 33; ++i) CHECK(l(i) >= l(i - 1));
  CHECK(l(0) < 0.0);
  const Eigen::MatrixXd recon = v * l.asDiagonal() * v.transpose();
  CHECK((recon - op.dense_matrix()).cwiseAbs().maxCoeff() < 1e-10);
  const DivAlphaOperator bare(33, 5.0, false);
  CHECK_FALSE(bare.has_eigenpairs());
}

TEST_CASE("gradient form agrees with -<u, P u>") {
  const DivAlphaOperator op(51, 4.0);
  std::vector<cplx> u(51), pu(51);
  for (int i = 0; i < 51; ++i) u[i] = {std::sin(op.nodes()[i]), 0.3 * op.nodes()[i]};
  op.apply(u, pu);
  cplx inner{};
  for (int i = 0; i < 51; ++i) inner += std::conj(u[i]) * pu[i];
  CHECK(op.gradient_form(u) == doctest::Approx(-inner.real() * op.spacing()).epsilon(1e-12));
  CHECK(std::abs(inner.imag()) < 1e-10);
}

TEST_CASE("conservative form approximates the weighted OU operator at second order") {
  // P f = e^{−α²/2}(f'' − α f'); for f = cos α both sides are explicit.
  auto exact = [](double a) { return std::exp(-0.5 * a * a) * (-std::cos(a) + a * std::sin(a)); };
  std::vector<double> h, err;
  for (int nodes : {65, 129, 257, 513}) {
    const DivAlphaOperator op(nodes, 8.0, false);
    std::vector<cplx> u(nodes), pu(nodes);
    for (int i = 0; i < nodes; ++i) u[i] = std::cos(op.nodes()[i]);
    op.apply(u, pu);
    double e = 0.0;
    for (int i = 1; i + 1 < nodes; ++i) e = std::max(e, std::abs(pu[i].real() - exact(op.nodes()[i])));
    h.push_back(op.spacing());
    err.push_back(e);
  }
  for (std::size_t k = 1; k < h.size(); ++k) {
    const double order = std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("identity check converges with the spectral OU side") {
  const auto basis = HermiteBasis::build(64);
  auto f = [](double a) { return a * a * a - a; };
  const double coarse = verify_div_identity(f, basis, DivAlphaOperator(129, 10.0, false));
  const double fine = verify_div_identity(f, basis, DivAlphaOperator(257, 10.0, false));
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("modal OU action scales each Hermite function by -n") {
  const auto b = HermiteBasis::build(16);
  for (int n : {0, 1, 5, 11}) {
    std::vector<cplx> nodal(16);
    for (int k = 0; k < 16; ++k) nodal[k] = b.table()(k, n);
    const auto out = apply_ou_modal(nodal, b);
    for (int k = 0; k < 16; ++k) {
      CHECK(std::abs(out[k] + static_cast<double>(n) * nodal[k]) <
            1e-9 * (1.0 + std::abs(nodal[k])));
    }
  }
}

TEST_CASE("nonlinear phase keeps the modulus and rotates by the local power") {
  std::vector<cplx> u = {{1.0, 0.0}, {0.0, 2.0}, {0.5, -0.5}};
  const std::vector<double> g = {1.0, 0.5, 2.0};
  const auto before = u;
  rotate_nonlinear_phase(u, g, 2, 1.0, 0.1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(u[i]) == doctest::Approx(std::abs(before[i])));
    const cplx expect = before[i] * std::polar(1.0, -g[i] * std::norm(before[i]) * 0.1);
    CHECK(std::abs(u[i] - expect) < 1e-15);
  }
}
