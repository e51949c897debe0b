#pragma once

#include "ounls/discretization.hpp"

namespace ounls {

/// One sampled time of a run. Fields that a model does not define (the virial
/// pair for NonDiv) are NaN.
struct DiagnosticsRecord {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double h1_native = 0.0;
  double virial = 0.0;
  double virial_rhs = 0.0;
  double morawetz_I = 0.0;
  double morawetz_dI_bound = 0.0;
  double tail_mass_fraction = 0.0;
  double boundary_mass_fraction = 0.0;
};

/// Native mass: ∫|u|² dx dα (Div) or ∫|u|² e^{−α²/2} dx dα (NonDiv).
double mass(const Field& field, const Discretization& disc);

struct EnergyParts {
  double kinetic_x = 0.0;      // ½∫|∇_x u|² (native α measure)
  double kinetic_alpha = 0.0;  // ½∫|∂_α u|² e^{−α²/2} (both models)
  double potential = 0.0;      // ±1/(p+2) ∫ g(α)|u|^{p+2} (native α measure)
  double total() const { return kinetic_x + kinetic_alpha + potential; }
};

EnergyParts energy_parts(const Field& field, const Discretization& disc);
double energy(const Field& field, const Discretization& disc);

/// ∫|∇_x u|² in the native measure.
double x_gradient_squared(const Field& field, const Discretization& disc);
/// ∫ g(α)|u|^{p+2} in the native measure (unsigned).
double power_integral(const Field& field, const Discretization& disc);
/// (mass + ∫|∇_x u|² + ∫|∂_α u|² e^{−α²/2})^{1/2}.
double h1_native(const Field& field, const Discretization& disc);

/// V = ∫|x|²|u|² dx dα. Div only.
double virial(const Field& field, const Discretization& disc);
/// V' = 4 Im ∫ ū x·∇_x u dx dα. Div only.
double virial_derivative(const Field& field, const Discretization& disc);
/// Right side of the virial identity for V'':
/// 16[E − ½∫|∂_α u|²e^{−α²/2} + σ (dp−4)/(4(p+2)) ∫|u|^{p+2}], σ = ±1 the
/// defocusing/focusing sign. Div only.
double virial_rhs(const Field& field, const Discretization& disc);

enum class Rho { Abs, Bracket };

/// I_ρ = ∫∫ ρ(x−y) m(x) m(y) dx dy with m(x) = ∫|u|² (native α measure),
/// evaluated by zero-padded FFT convolution over true (non-periodic) offsets.
double morawetz_I(const Field& field, const Discretization& disc, Rho rho);
/// ‖u‖³_{L²} ‖∇_x u‖_{L²} in native norms.
double morawetz_dI_bound(const Field& field, const Discretization& disc);

/// NonDiv: Hermite tail fraction Σ_{n≥N−4}|c_n|²/Σ|c_n|² over all x.
/// Div: mass fraction on α nodes with |α| > 0.9·A.
double tail_mass_fraction(const Field& field, const Discretization& disc);
/// Mass fraction in the outer 10% annulus of the box (any |x_a| > 0.9 L).
double boundary_mass_fraction(const Field& field, const Discretization& disc);
/// Mass fraction in x modes whose largest axis index exceeds n/4, the top of
/// the band kept by the 2/3 rule. Grows when the field outruns the grid.
double x_spectral_tail_fraction(const Field& field, const Discretization& disc);

inline constexpr double kBoundaryMassWarning = 1e-8;

DiagnosticsRecord diagnose(const Field& field, const Discretization& disc, Rho rho = Rho::Bracket);

}  // namespace ounls
