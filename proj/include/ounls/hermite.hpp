#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ounls/types.hpp"

namespace ounls {

/// Gauss quadrature and normalized probabilists' Hermite functions for the
/// weight e^{-α²/2}.
///
/// φ_n = He_n / (n! √(2π))^{1/2} are orthonormal in L²(e^{-α²/2} dα) and are
/// eigenfunctions of the OU operator Δ_α − α∂_α with eigenvalue −n. Nodes and
/// weights integrate polynomials of degree ≤ 2N−1 exactly against the weight.
/// Immutable after construction.
class HermiteBasis {
 public:
  static HermiteBasis build(int n_alpha);

  int size() const { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> eigenvalues() const { return eigenvalues_; }

  /// table()(k, n) = φ_n(node_k).
  const Eigen::MatrixXd& table() const { return table_; }
  /// Maps nodal values to coefficients: forward()(n, k) = w_k φ_n(node_k).
  const Eigen::MatrixXd& forward() const { return forward_; }

  /// φ_0(α), …, φ_{count-1}(α) by the normalized three-term recurrence.
  static std::vector<double> functions_at(int count, double alpha);

  /// Evaluates the expansion Σ_n c_n φ_n at an arbitrary abscissa.
  template <typename Scalar>
  static Scalar evaluate(std::span<const Scalar> coeffs, double alpha);

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd table_;
  Eigen::MatrixXd forward_;
};

/// A slice u(·, α) in either nodal (values at the basis nodes) or modal
/// (Hermite coefficients) form.
struct AlphaProfile {
  enum class Representation { Nodal, Modal };

  Representation rep = Representation::Nodal;
  std::vector<cplx> data;

  static AlphaProfile nodal(std::vector<cplx> values) {
    return {Representation::Nodal, std::move(values)};
  }
  static AlphaProfile modal(std::vector<cplx> coeffs) {
    return {Representation::Modal, std::move(coeffs)};
  }
};

AlphaProfile hermite_forward(const AlphaProfile& profile, const HermiteBasis& basis);
AlphaProfile hermite_inverse(const AlphaProfile& profile, const HermiteBasis& basis);

enum class WeightedNorm { L2w, H1wHomogeneous, H1w };

/// ‖·‖_{𝓛²_α}, the 𝓗̇¹_α seminorm or the full 𝓗¹_α norm.
double weighted_norm(const AlphaProfile& profile, const HermiteBasis& basis,
                     WeightedNorm which);

/// Coefficients of ∂_α u: (∂u)_m = √(m+1) c_{m+1}; the last mode becomes 0.
std::vector<cplx> modal_derivative(std::span<const cplx> coeffs);

/// Σ_{n ≥ N-4} |c_n|² / Σ |c_n|² (0 for a zero profile).
double tail_mass_fraction(std::span<const cplx> coeffs);

inline constexpr double kTailMassWarning = 1e-8;

template <typename Scalar>
Scalar HermiteBasis::evaluate(std::span<const Scalar> coeffs, double alpha) {
  if (coeffs.empty()) return Scalar{};
  const auto phi = functions_at(static_cast<int>(coeffs.size()), alpha);
  Scalar sum{};
  for (std::size_t n = 0; n < coeffs.size(); ++n) sum += coeffs[n] * phi[n];
  return sum;
}

}  // namespace ounls
