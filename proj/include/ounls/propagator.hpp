#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ounls/discretization.hpp"
#include "ounls/observables.hpp"

namespace ounls {

struct BlowupThresholds {
  double norm_ratio_max = 1e3;  // native H¹ growth relative to t = 0
  double dt_min = 1e-8;
  /// Resolution-loss trigger: mass fraction in the upper quarter of the x
  /// spectrum (see x_spectral_tail_fraction). Values ≥ 1 disable it.
  double spectral_tail_max = 1e-3;
};

struct StepControl {
  double dt = 1e-3;
  bool adaptive = false;
  double dt_max = 1e-2;
  double tol_reject = 1e-8;  // halve dt above this one-vs-two-half-step gap
  double tol_grow = 1e-11;   // double dt below it
  int monitor_every = 10;    // steps between blow-up checks in fixed-step mode
};

struct StepperState {
  Field field;
  double dt = 1e-3;
  std::size_t step_count = 0;
  std::size_t rejected_count = 0;
  bool blowup_flag = false;
  std::optional<double> blowup_time_estimate;
  std::string blowup_reason;
  double initial_h1 = 0.0;
};

/// Strang splitting machinery for one discretization: half linear flow, exact
/// nonlinear phase, half linear flow. Propagators are cached per step size, so
/// a Stepper belongs to one integration at a time; the Discretization it
/// references can be shared.
class Stepper {
 public:
  Stepper(const Discretization& disc, StepControl control = {}, BlowupThresholds thresholds = {});

  const Discretization& disc() const { return *disc_; }
  const StepControl& control() const { return control_; }
  const BlowupThresholds& thresholds() const { return thresholds_; }

  StepperState start(Field initial) const;

  /// One step of size state.dt (which may be negative). Nonfinite values after
  /// the step raise the blow-up flag rather than throwing.
  void strang_step(StepperState& state) const;
  /// `count` consecutive steps of size dt with adjacent half flows fused.
  void fused_steps(StepperState& state, double dt, std::size_t count) const;

  const LinearPropagator& propagator(double t) const;

 private:
  const Discretization* disc_;
  StepControl control_;
  BlowupThresholds thresholds_;
  mutable std::map<double, std::unique_ptr<LinearPropagator>> cache_;
};

StepperState strang_step(StepperState state, const Stepper& stepper);

/// Re-evaluates the blow-up flag; records the first flagged time and reason.
bool detect_blowup(StepperState& state, const Discretization& disc,
                   const BlowupThresholds& thresholds);

struct IntegrateOptions {
  Rho rho = Rho::Bracket;
  bool full_diagnostics = true;  // false records time/mass/energy/h1 only
  std::function<void(const Field&)> on_sample;
};

struct IntegrationResult {
  std::vector<DiagnosticsRecord> records;
  StepperState final_state;
};

/// Advances to every sample time exactly and records diagnostics there.
/// Stops early (truncating the schedule) once the blow-up flag is raised.
IntegrationResult integrate(const Field& initial, const Stepper& stepper, double horizon,
                            const std::vector<double>& sample_times,
                            const IntegrateOptions& options = {});

/// n+1 equally spaced sample times on [0, horizon].
std::vector<double> uniform_schedule(double horizon, std::size_t intervals);

}  // namespace ounls
