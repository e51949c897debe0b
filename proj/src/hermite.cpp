#include "ounls/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace ounls {

namespace {

// (2π)^{-1/4}
const double kPhi0 = 1.0 / std::sqrt(kSqrtTwoPi);

void require_length(const AlphaProfile& profile, const HermiteBasis& basis,
                    const char* what) {
  if (static_cast<int>(profile.data.size()) != basis.size()) {
    throw std::invalid_argument(std::string(what) + ": profile length " +
                                std::to_string(profile.data.size()) +
                                " does not match basis size " +
                                std::to_string(basis.size()));
  }
}

}  // namespace

std::vector<double> HermiteBasis::functions_at(int count, double alpha) {
  std::vector<double> phi(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return phi;
  phi[0] = kPhi0;
  if (count > 1) phi[1] = alpha * kPhi0;
  for (int n = 1; n + 1 < count; ++n) {
    phi[n + 1] = (alpha * phi[n] - std::sqrt(static_cast<double>(n)) * phi[n - 1]) /
                 std::sqrt(static_cast<double>(n + 1));
  }
  return phi;
}

HermiteBasis HermiteBasis::build(int n_alpha) {
  if (n_alpha < 2) {
    throw std::invalid_argument("build_basis: N_alpha must be at least 2, got " +
                                std::to_string(n_alpha));
  }
  const int n = n_alpha;

  // Golub–Welsch: Jacobi matrix of He_{k+1} = αHe_k − kHe_{k−1}.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("build_basis: Jacobi eigensolver did not converge");
  }

  HermiteBasis basis;
  basis.nodes_.resize(n);
  basis.weights_.resize(n);
  basis.eigenvalues_.resize(n);
  basis.table_.resize(n, n);

  for (int k = 0; k < n; ++k) {
    // Newton polish on φ_N, with φ_N' = √N φ_{N-1}.
    double x = solver.eigenvalues()(k);
    for (int it = 0; it < 3; ++it) {
      const auto phi = functions_at(n + 1, x);
      const double deriv = std::sqrt(static_cast<double>(n)) * phi[n - 1];
      if (deriv == 0.0 || !std::isfinite(deriv)) break;
      x -= phi[n] / deriv;
    }
    basis.nodes_[k] = x;
  }
  std::sort(basis.nodes_.begin(), basis.nodes_.end());

  for (int k = 0; k < n; ++k) {
    const auto phi = functions_at(n, basis.nodes_[k]);
    double christoffel = 0.0;
    for (int m = 0; m < n; ++m) {
      basis.table_(k, m) = phi[m];
      christoffel += phi[m] * phi[m];
    }
    const double w = 1.0 / christoffel;
    if (!std::isfinite(christoffel) || !(w > 0.0)) {
      throw NumericError("build_basis: ill-conditioned basis at N_alpha = " +
                         std::to_string(n) + " (non-positive quadrature weight)");
    }
    basis.weights_[k] = w;
  }
  for (int m = 0; m < n; ++m) basis.eigenvalues_[m] = -static_cast<double>(m);

  basis.forward_ = basis.table_.transpose();
  for (int k = 0; k < n; ++k) basis.forward_.col(k) *= basis.weights_[k];
  return basis;
}

AlphaProfile hermite_forward(const AlphaProfile& profile, const HermiteBasis& basis) {
  if (profile.rep != AlphaProfile::Representation::Nodal) {
    throw std::invalid_argument("hermite_forward: expected a nodal profile");
  }
  require_length(profile, basis, "hermite_forward");
  const int n = basis.size();
  Eigen::Map<const Eigen::VectorXcd> values(profile.data.data(), n);
  std::vector<cplx> coeffs(n);
  Eigen::Map<Eigen::VectorXcd>(coeffs.data(), n) = basis.forward().cast<cplx>() * values;
  return AlphaProfile::modal(std::move(coeffs));
}

AlphaProfile hermite_inverse(const AlphaProfile& profile, const HermiteBasis& basis) {
  if (profile.rep != AlphaProfile::Representation::Modal) {
    throw std::invalid_argument("hermite_inverse: expected a modal profile");
  }
  if (static_cast<int>(profile.data.size()) > basis.size()) {
    throw std::invalid_argument("hermite_inverse: " + std::to_string(profile.data.size()) +
                                " coefficients exceed basis size " +
                                std::to_string(basis.size()));
  }
  const int n = basis.size();
  const int m = static_cast<int>(profile.data.size());
  Eigen::Map<const Eigen::VectorXcd> coeffs(profile.data.data(), m);
  std::vector<cplx> values(n);
  Eigen::Map<Eigen::VectorXcd>(values.data(), n) =
      basis.table().leftCols(m).cast<cplx>() * coeffs;
  return AlphaProfile::nodal(std::move(values));
}

std::vector<cplx> modal_derivative(std::span<const cplx> coeffs) {
  std::vector<cplx> out(coeffs.size());
  for (std::size_t m = 0; m + 1 < coeffs.size(); ++m) {
    out[m] = std::sqrt(static_cast<double>(m + 1)) * coeffs[m + 1];
  }
  return out;
}

double tail_mass_fraction(std::span<const cplx> coeffs) {
  double total = 0.0;
  double tail = 0.0;
  const std::size_t start = coeffs.size() > 4 ? coeffs.size() - 4 : 0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const double a = std::norm(coeffs[n]);
    total += a;
    if (n >= start) tail += a;
  }
  return total > 0.0 ? tail / total : 0.0;
}

double weighted_norm(const AlphaProfile& profile, const HermiteBasis& basis,
                     WeightedNorm which) {
  require_length(profile, basis, "weighted_norm");
  const AlphaProfile modal = profile.rep == AlphaProfile::Representation::Modal
                                 ? profile
                                 : hermite_forward(profile, basis);
  double l2 = 0.0;
  double h1 = 0.0;
  for (std::size_t n = 0; n < modal.data.size(); ++n) {
    const double a = std::norm(modal.data[n]);
    l2 += a;
    h1 += static_cast<double>(n) * a;  // Σ |√(n) c_n|² = ‖∂_α u‖²_w
  }
  switch (which) {
    case WeightedNorm::L2w:
      return std::sqrt(l2);
    case WeightedNorm::H1wHomogeneous:
      return std::sqrt(h1);
    case WeightedNorm::H1w:
      return std::sqrt(l2 + h1);
  }
  throw std::invalid_argument("weighted_norm: unknown norm tag");
}

}  // namespace ounls
