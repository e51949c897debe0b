#include "ounls/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace ounls {

DivAlphaOperator::DivAlphaOperator(int nodes, double half_width, bool with_eigenpairs)
    : half_width_(half_width) {
  if (nodes < 3) {
    throw std::invalid_argument("DivAlphaOperator: need at least 3 nodes, got " +
                                std::to_string(nodes));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("DivAlphaOperator: half width must be positive and finite");
  }
  spacing_ = 2.0 * half_width / (nodes - 1);
  nodes_.resize(nodes);
  for (int i = 0; i < nodes; ++i) nodes_[i] = -half_width + i * spacing_;
  faces_.resize(nodes - 1);
  for (int i = 0; i + 1 < nodes; ++i) {
    const double a = nodes_[i] + 0.5 * spacing_;
    faces_[i] = std::exp(-0.5 * a * a);
  }

  if (with_eigenpairs) {
    const double inv_h2 = 1.0 / (spacing_ * spacing_);
    Eigen::VectorXd diag(nodes);
    Eigen::VectorXd sub(nodes - 1);
    for (int i = 0; i < nodes; ++i) {
      const double left = i > 0 ? faces_[i - 1] : 0.0;
      const double right = i + 1 < nodes ? faces_[i] : 0.0;
      diag(i) = -(left + right) * inv_h2;
    }
    for (int i = 0; i + 1 < nodes; ++i) sub(i) = faces_[i] * inv_h2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
      throw NumericError("DivAlphaOperator: eigensolver did not converge");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
  }
}

void DivAlphaOperator::apply(std::span<const cplx> u, std::span<cplx> out) const {
  const std::size_t n = nodes_.size();
  if (u.size() != n || out.size() != n) {
    throw std::invalid_argument("apply_div_operator: profile length " +
                                std::to_string(u.size()) + " does not match grid size " +
                                std::to_string(n));
  }
  const double inv_h2 = 1.0 / (spacing_ * spacing_);
  for (std::size_t i = 0; i < n; ++i) {
    cplx flux_right = i + 1 < n ? faces_[i] * (u[i + 1] - u[i]) : cplx{};
    cplx flux_left = i > 0 ? faces_[i - 1] * (u[i] - u[i - 1]) : cplx{};
    out[i] = (flux_right - flux_left) * inv_h2;
  }
}

double DivAlphaOperator::gradient_form(std::span<const cplx> u) const {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) s += faces_[i] * std::norm(u[i + 1] - u[i]);
  return s / spacing_;
}

Eigen::MatrixXd DivAlphaOperator::dense_matrix() const {
  const int n = size();
  const double inv_h2 = 1.0 / (spacing_ * spacing_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const double f = faces_[i] * inv_h2;
    m(i, i) -= f;
    m(i + 1, i + 1) -= f;
    m(i, i + 1) += f;
    m(i + 1, i) += f;
  }
  return m;
}

const Eigen::MatrixXd& DivAlphaOperator::eigenvectors() const {
  if (!has_eigenpairs()) throw std::logic_error("DivAlphaOperator built without eigenpairs");
  return eigenvectors_;
}

const Eigen::VectorXd& DivAlphaOperator::eigenvalues() const {
  if (!has_eigenpairs()) throw std::logic_error("DivAlphaOperator built without eigenpairs");
  return eigenvalues_;
}

std::vector<cplx> apply_ou_modal(std::span<const cplx> nodal, const HermiteBasis& basis) {
  auto modal = hermite_forward(AlphaProfile::nodal({nodal.begin(), nodal.end()}), basis);
  for (std::size_t n = 0; n < modal.data.size(); ++n) modal.data[n] *= basis.eigenvalues()[n];
  return hermite_inverse(modal, basis).data;
}

std::vector<double> ou_resampled(const std::function<double(double)>& f,
                                 const HermiteBasis& basis, std::span<const double> at) {
  const int n = basis.size();
  Eigen::VectorXd values(n);
  for (int k = 0; k < n; ++k) values(k) = f(basis.nodes()[k]);
  Eigen::VectorXd coeffs = basis.forward() * values;
  for (int m = 0; m < n; ++m) coeffs(m) *= basis.eigenvalues()[m];
  std::vector<double> out(at.size());
  const std::span<const double> c(coeffs.data(), n);
  for (std::size_t i = 0; i < at.size(); ++i) out[i] = HermiteBasis::evaluate(c, at[i]);
  return out;
}

double verify_div_identity(const std::function<double(double)>& f,
                           const HermiteBasis& basis, const DivAlphaOperator& op) {
  const auto nodes = op.nodes();
  std::vector<cplx> sampled(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) sampled[i] = f(nodes[i]);
  std::vector<cplx> div_side(nodes.size());
  op.apply(sampled, div_side);
  const auto ou = ou_resampled(f, basis, nodes);
  double residual = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double rhs = std::exp(-0.5 * nodes[i] * nodes[i]) * ou[i];
    residual = std::max(residual, std::abs(div_side[i].real() - rhs) + std::abs(div_side[i].imag()));
  }
  return residual;
}

void rotate_nonlinear_phase(std::span<cplx> column, std::span<const double> g, int p,
                            double sign_times_scale, double dt) {
  const int half_p = p / 2;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double a2 = std::norm(column[i]);
    double ap = 1.0;
    for (int j = 0; j < half_p; ++j) ap *= a2;
    const double theta = -sign_times_scale * g[i] * ap * dt;
    column[i] *= cplx(std::cos(theta), std::sin(theta));
  }
}

}  // namespace ounls
