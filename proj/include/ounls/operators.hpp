#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ounls/hermite.hpp"
#include "ounls/types.hpp"

namespace ounls {

/// Conservative second-difference discretization of P u = ∂_α(e^{−α²/2} ∂_α u)
/// on a uniform grid over [−A, A] with zero flux through the outer faces:
///
///   (P u)_i = [μ_{i+½}(u_{i+1} − u_i) − μ_{i−½}(u_i − u_{i−1})] / h²,
///
/// μ(α) = e^{−α²/2}. The matrix is symmetric negative semidefinite in the plain
/// sum inner product; its eigenpairs are computed once at construction.
class DivAlphaOperator {
 public:
  DivAlphaOperator(int nodes, double half_width, bool with_eigenpairs = true);

  int size() const { return static_cast<int>(nodes_.size()); }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  std::span<const double> nodes() const { return nodes_; }
  /// μ at the n−1 interior faces α_i + h/2.
  std::span<const double> face_weights() const { return faces_; }

  void apply(std::span<const cplx> u, std::span<cplx> out) const;
  /// Σ_i μ_{i+½}|u_{i+1} − u_i|² / h, the discrete ∫|∂_α u|² e^{−α²/2} dα.
  double gradient_form(std::span<const cplx> u) const;

  Eigen::MatrixXd dense_matrix() const;

  bool has_eigenpairs() const { return eigenvectors_.size() > 0; }
  /// Columns are orthonormal eigenvectors, eigenvalues in ascending order.
  const Eigen::MatrixXd& eigenvectors() const;
  const Eigen::VectorXd& eigenvalues() const;

 private:
  double half_width_;
  double spacing_;
  std::vector<double> nodes_;
  std::vector<double> faces_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;
};

/// Modal OU action on one α slice in nodal form: c_n ↦ −n c_n.
std::vector<cplx> apply_ou_modal(std::span<const cplx> nodal, const HermiteBasis& basis);

/// Evaluates (Δ_α − α∂_α) f at arbitrary abscissae from its band-limited
/// Hermite expansion on `basis`.
std::vector<double> ou_resampled(const std::function<double(double)>& f,
                                 const HermiteBasis& basis, std::span<const double> at);

/// max_i |(P f)(α_i) − e^{−α_i²/2} (OU f)(α_i)| over the uniform grid of `op`,
/// with the OU side computed spectrally on `basis`.
double verify_div_identity(const std::function<double(double)>& f,
                           const HermiteBasis& basis, const DivAlphaOperator& op);

/// Pointwise phase factor of the exact nonlinear substep:
/// u ↦ u·exp(−i·sign·scale·g(α)·|u|^p·dt).
void rotate_nonlinear_phase(std::span<cplx> column, std::span<const double> g,
                            int p, double sign_times_scale, double dt);

}  // namespace ounls
