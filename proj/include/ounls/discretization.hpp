#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ounls/fourier.hpp"
#include "ounls/hermite.hpp"
#include "ounls/operators.hpp"
#include "ounls/types.hpp"

namespace ounls {

enum class Dealias { TwoThirds, None };

/// Grid sizes and truncations for both directions.
struct DiscretizationSpec {
  int n_x = 256;                 // points per Euclidean axis
  double box_half_length = 0.0;  // 0 selects default_half_length(d)
  int n_alpha = 64;              // Hermite modes (NonDiv)
  int div_nodes = 513;           // uniform α nodes (Div)
  double div_half_width = 12.0;  // α ∈ [−A, A] (Div)
  Dealias dealias = Dealias::TwoThirds;

  static double default_half_length(int d) { return d == 1 ? 16.0 * kPi : 8.0 * kPi; }
  double resolved_half_length(int d) const {
    return box_half_length > 0.0 ? box_half_length : default_half_length(d);
  }
};

/// Complex samples u(x, α) on the tensor grid, α fastest:
/// data[ix * n_alpha + ia]. Always nodal between steps.
struct Field {
  std::size_t n_x = 0;
  std::size_t n_alpha = 0;
  std::vector<cplx> data;
  double time = 0.0;

  Field() = default;
  Field(std::size_t nx, std::size_t na) : n_x(nx), n_alpha(na), data(nx * na) {}

  cplx& at(std::size_t ix, std::size_t ia) { return data[ix * n_alpha + ia]; }
  const cplx& at(std::size_t ix, std::size_t ia) const { return data[ix * n_alpha + ia]; }
  std::span<cplx> column(std::size_t ix) { return {data.data() + ix * n_alpha, n_alpha}; }
  std::span<const cplx> column(std::size_t ix) const {
    return {data.data() + ix * n_alpha, n_alpha};
  }
  bool all_finite() const;
};

/// Everything needed to evaluate operators and functionals of one model on
/// one grid. Immutable after construction and shareable across threads.
class Discretization {
 public:
  Discretization(const ModelSpec& model, const DiscretizationSpec& spec);

  const ModelSpec& model() const { return model_; }
  const DiscretizationSpec& spec() const { return spec_; }
  const BoxGrid& grid() const { return grid_; }
  const XTransform& xfft() const { return *xfft_; }

  std::size_t x_size() const { return grid_.size(); }
  std::size_t alpha_size() const { return alpha_nodes_.size(); }
  std::span<const double> alpha_nodes() const { return alpha_nodes_; }
  /// Quadrature weights of the native α measure: Hermite weights (which carry
  /// e^{−α²/2}) for NonDiv, the uniform spacing for Div.
  std::span<const double> alpha_measure() const { return alpha_measure_; }
  /// g(α): e^{−pα²/2} for NonDiv, 1 for Div.
  std::span<const double> nonlinear_weight() const { return nonlinear_weight_; }
  std::span<const double> dealias_mask() const { return mask_; }

  const HermiteBasis& hermite() const;
  const DivAlphaOperator& div() const;
  bool is_div() const { return model_.model == Model::Div; }

  Field make_field() const { return Field(x_size(), alpha_size()); }
  void check_shape(const Field& f) const;

 private:
  ModelSpec model_;
  DiscretizationSpec spec_;
  BoxGrid grid_;
  std::unique_ptr<XTransform> xfft_;
  std::shared_ptr<const HermiteBasis> hermite_;
  std::shared_ptr<const DivAlphaOperator> div_;
  std::vector<double> alpha_nodes_;
  std::vector<double> alpha_measure_;
  std::vector<double> nonlinear_weight_;
  std::vector<double> mask_;
};

/// (Δ_α − α∂_α) applied modally to every x column of a NonDiv field.
Field apply_ou_nondiv(const Field& field, const HermiteBasis& basis);

/// Conservative P applied to every x column of a Div field.
Field apply_div_operator(const Field& field, const DivAlphaOperator& op);

/// Exact nonlinear substep over time dt; throws NumericError on nonfinite input.
Field apply_nonlinearity(const Field& field, const ModelSpec& spec,
                         std::span<const double> alpha_nodes, double dt);
/// In-place variant with a precomputed weight g(α).
void apply_nonlinearity_inplace(Field& field, const ModelSpec& spec,
                                std::span<const double> g, double dt);

/// Exact linear flow e^{tL} with L = i(Δ_x + OU) for NonDiv or i(Δ_x + P) for
/// Div, factorized as (x phase) ⊗ (α map).
class LinearPropagator {
 public:
  LinearPropagator(const Discretization& disc, double t);

  double time() const { return t_; }
  /// Applies the flow in place; with `dealias` the 2/3 mask is folded into the
  /// x phase (when the discretization enables it).
  void apply(Field& field, bool dealias = false) const;
  Field operator()(const Field& field) const {
    Field out = field;
    apply(out);
    return out;
  }

  std::span<const cplx> x_phase() const { return x_phase_; }
  const Eigen::MatrixXcd& alpha_map() const { return alpha_map_; }

 private:
  const Discretization* disc_;
  double t_;
  std::vector<cplx> x_phase_;
  std::vector<cplx> x_phase_masked_;
  Eigen::MatrixXcd alpha_map_;
};

LinearPropagator build_linear_propagator(const Discretization& disc, double t);

/// Applies the x-Fourier multiplier `symbol` (FFT order) to every α column.
void apply_x_multiplier(const Discretization& disc, Field& field, std::span<const cplx> symbol);

/// ∂_{x_axis} u via the spectral derivative (Nyquist derivative set to zero).
Field x_derivative(const Discretization& disc, const Field& field, int axis);

}  // namespace ounls
