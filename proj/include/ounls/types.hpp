#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ounls {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrtTwoPi = 2.5066282746310002;  // ∫ e^{-α²/2} dα

enum class Model { Div, NonDiv };

enum class Sign : int { Defocusing = 1, Focusing = -1 };

/// Which OU-NLS variant is being solved, and its nonlinearity.
///
/// `nonlinear_scale` multiplies the nonlinear phase; 0 turns the model into
/// the pure linear flow (used for splitting-exactness checks).
struct ModelSpec {
  Model model = Model::NonDiv;
  int d = 1;
  int p = 4;
  Sign sign = Sign::Defocusing;
  double nonlinear_scale = 1.0;

  double sign_value() const { return static_cast<int>(sign); }
  void validate() const;
};

std::string to_string(Model m);
std::string to_string(Sign s);

// Error classes map onto the CLI exit codes (1 config, 2 numeric, 3 I/O).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ounls
