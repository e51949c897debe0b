#pragma once

#include <cstdint>
#include <variant>

#include "ounls/discretization.hpp"

namespace ounls {

/// u₀ = a·exp(−|x|²/(2w_x²))·exp(−α²/(4w_α²))·e^{i k x₁}.
struct GaussianRecipe {
  double amplitude = 1.0;
  double x_width = 1.0;
  double alpha_width = 1.0;
  double wavenumber = 0.0;
};

/// Band-limited random data: e^{−|x|²/2} Σ c_{j,n} e^{i j·x} ψ_n(α) over
/// integer |j_a| ≤ band and n ≤ band, with c unit complex normals, rescaled to
/// native L² norm `amplitude`. ψ_n = φ_n for NonDiv and φ_n e^{−α²/4} for Div,
/// so both families are orthonormal in the model's native α measure.
struct RandomRecipe {
  std::uint64_t seed = 1;
  int band = 4;
  double amplitude = 1.0;
};

using InitialRecipe = std::variant<GaussianRecipe, RandomRecipe>;

Field make_initial(const Discretization& disc, const InitialRecipe& recipe);

/// Generator seed for ensemble member `member` of a run seeded with `seed`.
std::uint64_t member_seed(std::uint64_t seed, std::size_t member);

/// Native L²_x 𝓗¹_α norm (NonDiv: Σ (1+n)|c_n|² per x point; Div: mass plus
/// the discrete α gradient form).
double l2x_h1alpha_norm(const Field& field, const Discretization& disc);

/// Multiplies the field so that l2x_h1alpha_norm equals `target`.
void scale_to_norm(Field& field, const Discretization& disc, double target);

}  // namespace ounls
