#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ounls/initial_data.hpp"
#include "ounls/propagator.hpp"

namespace ounls {

/// Acceptance ceilings. Defaults are the pinned values of the verification plan.
struct Tolerances {
  double mass_drift = 1e-9;
  double energy_drift = 1e-5;
  double energy_ratio_low = 3.5;
  double energy_ratio_high = 4.5;
  double eigen_error = 1e-10;
  int eigen_modes = 48;
  double identity_order = 1.8;
  double ensemble_stability = 0.15;
  double morawetz_stability = 0.20;
  double scattering_factor = 0.1;
  double concavity = 1e-2;
  double blowup_factor = 1.5;
};

struct StrichartzPair {
  double q = 6.0;
  double r = 6.0;
};

/// Throws ConfigError unless 2/q + d/r = d/2, q, r ≥ 2 and (q, r, d) ≠ (2, ∞, 2).
void check_admissible(int d, StrichartzPair pair);

struct ScenarioConfig {
  std::string scenario = "simulate";
  ModelSpec model;
  DiscretizationSpec grid;
  InitialRecipe initial = GaussianRecipe{};
  double horizon = 1.0;
  double dt = 1e-3;
  bool adaptive = false;
  int samples = 10;  // uniform sample intervals on [0, horizon]
  Rho rho = Rho::Bracket;

  // Ensembles and resolution comparisons.
  int ensemble = 64;
  std::uint64_t seed = 1;
  int band = 4;
  int fine_factor = 2;
  std::vector<StrichartzPair> pairs = {{6.0, 6.0}, {8.0, 4.0}};
  int samples_per_unit = 64;
  std::vector<double> radii = {6.0, 9.0, 12.0};

  // Scattering.
  double delta = 0.05;
  std::vector<double> ladder = {2.0, 4.0, 8.0, 16.0};

  int threads = 1;
  std::string output = "out";
  Tolerances tol;

  void validate() const;
};

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

/// Numeric rows with named columns; serialized as delimited text.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RatioStats {
  std::size_t count = 0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

RatioStats summarize(std::span<const double> values);

/// Ratio statistics of one ensemble at a coarse and a fine resolution.
struct EnsembleReport {
  std::string label;
  RatioStats coarse;
  RatioStats fine;
  double relative_change = 0.0;  // |max_fine − max_coarse| / max_coarse
  double ceiling = 0.0;
  bool pass = false;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<Check> checks;
  std::vector<DiagnosticsRecord> records;
  Table table;
  std::vector<EnsembleReport> ensembles;
  std::optional<Field> field;  // scattering state u₊ when produced
  bool pass() const;
};

ScenarioReport run_simulate(const ScenarioConfig& cfg);
ScenarioReport run_conservation(const ScenarioConfig& cfg);
ScenarioReport run_identity(const ScenarioConfig& cfg);
ScenarioReport run_strichartz_ensemble(const ScenarioConfig& cfg);
ScenarioReport run_embedding_ensembles(const ScenarioConfig& cfg);
ScenarioReport run_scattering(const ScenarioConfig& cfg);
ScenarioReport run_blowup(const ScenarioConfig& cfg);
ScenarioReport run_morawetz(const ScenarioConfig& cfg);

/// Dispatches on cfg.scenario.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

/// The scenario list and configurations used by `all` and the acceptance suite.
std::vector<ScenarioConfig> acceptance_configs();

// Building blocks, exposed for tests and bindings.

/// max_{n<modes} max_k √w_k |OU φ_n − (−n) φ_n|(α_k). The √w_k scaling makes
/// the sampled φ_n an orthonormal matrix; unscaled nodal values reach e^{α²/4}
/// at the outer nodes.
double ou_eigen_error(const HermiteBasis& basis, int modes);

/// Least-squares slope of log(residual) against log(h), negated.
double fitted_order(std::span<const double> spacings, std::span<const double> residuals);

enum class StrichartzVariant { L2, Derivative, H1Alpha };

/// ‖D^k e^{itL} f‖_{L^q_t L^r_x X_α} / ‖D^k f‖_{L²_x X_α} over t ∈ [0, T] for
/// each pair, with X_α the native α-L² (or 𝓗¹_α for H1Alpha, NonDiv only) and
/// D = |∇_x| for the Derivative variant. Time norms use the composite
/// trapezoid rule on ⌈T·samples_per_unit⌉ intervals; q = ∞ takes the max.
std::vector<double> strichartz_ratios(const Discretization& disc, const Field& f,
                                      std::span<const StrichartzPair> pairs,
                                      StrichartzVariant variant, double horizon,
                                      int samples_per_unit);

/// sup_α |u| e^{−α²/2} over the Gauss nodes divided by ‖u‖_{𝓗¹_α}.
double sobolev_ratio(std::span<const cplx> coeffs, const HermiteBasis& basis);
/// ‖e^{−pα²/2}|u|^p u‖_{𝓗¹_α} / ‖u‖^{p+1}_{𝓗¹_α}, the left side projected
/// onto the basis by Gauss quadrature.
double nonlinear_ratio(std::span<const cplx> coeffs, const HermiteBasis& basis, int p);
/// The same ratio for u = e^{α²/8} truncated to [−A, A] (dense trapezoid),
/// with weight e^{−pα²/2} when `weighted`, else 1.
double counterexample_ratio(double radius, int p, bool weighted);

/// V(t) ≈ a t² + b t + c by least squares; sigma_a is the standard error of a.
struct QuadraticFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double sigma_a = 0.0;
  /// Positive root when a < −3σ_a (a certified concave fit).
  std::optional<double> root() const;
};

QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> v);

/// Runs `count` independent tasks on up to `threads` workers. Results are
/// stored by index, so the merged order never depends on scheduling.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace ounls
