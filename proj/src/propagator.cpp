#include "ounls/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ounls {

Stepper::Stepper(const Discretization& disc, StepControl control, BlowupThresholds thresholds)
    : disc_(&disc), control_(control), thresholds_(thresholds) {
  if (!(control_.dt != 0.0) || !std::isfinite(control_.dt)) {
    throw std::invalid_argument("Stepper: dt must be finite and nonzero");
  }
  if (control_.monitor_every < 1) control_.monitor_every = 1;
}

StepperState Stepper::start(Field initial) const {
  disc_->check_shape(initial);
  StepperState s;
  s.dt = control_.dt;
  s.field = std::move(initial);
  s.initial_h1 = s.field.all_finite() ? h1_native(s.field, *disc_) : 0.0;
  return s;
}

const LinearPropagator& Stepper::propagator(double t) const {
  auto it = cache_.find(t);
  if (it == cache_.end()) {
    if (cache_.size() > 16) cache_.clear();
    it = cache_.emplace(t, std::make_unique<LinearPropagator>(*disc_, t)).first;
  }
  return *it->second;
}

void Stepper::fused_steps(StepperState& state, double dt, std::size_t count) const {
  if (count == 0 || state.blowup_flag) return;
  const auto& half = propagator(0.5 * dt);
  const auto& full = propagator(dt);
  const auto g = disc_->nonlinear_weight();
  const double t0 = state.field.time;
  half.apply(state.field);
  for (std::size_t i = 0; i < count; ++i) {
    try {
      apply_nonlinearity_inplace(state.field, disc_->model(), g, dt);
    } catch (const NumericError&) {
      state.field.time = t0 + static_cast<double>(i) * dt;
      state.blowup_flag = true;
      state.blowup_time_estimate = state.field.time;
      state.blowup_reason = "nonfinite field values";
      return;
    }
    (i + 1 < count ? full : half).apply(state.field, true);
    ++state.step_count;
  }
  state.field.time = t0 + static_cast<double>(count) * dt;
  if (!state.field.all_finite()) {
    state.blowup_flag = true;
    state.blowup_time_estimate = state.field.time;
    state.blowup_reason = "nonfinite field values";
  }
}

void Stepper::strang_step(StepperState& state) const { fused_steps(state, state.dt, 1); }

StepperState strang_step(StepperState state, const Stepper& stepper) {
  stepper.strang_step(state);
  return state;
}

bool detect_blowup(StepperState& state, const Discretization& disc,
                   const BlowupThresholds& thresholds) {
  if (state.blowup_flag) return true;
  std::string reason;
  if (!state.field.all_finite()) {
    reason = "nonfinite field values";
  } else {
    const double h1 = h1_native(state.field, disc);
    if (state.initial_h1 > 0.0 && h1 > thresholds.norm_ratio_max * state.initial_h1) {
      std::ostringstream os;
      os << "native H1 norm grew by more than " << thresholds.norm_ratio_max;
      reason = os.str();
    } else if (thresholds.spectral_tail_max < 1.0 &&
               x_spectral_tail_fraction(state.field, disc) > thresholds.spectral_tail_max) {
      reason = "resolution loss (x spectral tail above threshold)";
    }
  }
  if (reason.empty()) return false;
  state.blowup_flag = true;
  state.blowup_time_estimate = state.field.time;
  state.blowup_reason = reason;
  return true;
}

namespace {

double difference_norm(const Field& a, const Field& b, const Discretization& disc) {
  Field diff = a;
  for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= b.data[i];
  return std::sqrt(mass(diff, disc));
}

void advance_fixed(StepperState& state, const Stepper& stepper, double target) {
  const double dt = stepper.control().dt;
  const double t0 = state.field.time;
  const double remaining = target - t0;
  if (remaining <= 0.0) return;
  auto full = static_cast<std::size_t>(std::floor(remaining / dt + 1e-9));
  double rest = remaining - static_cast<double>(full) * dt;
  if (std::abs(rest) < 1e-12 * std::max(1.0, std::abs(dt))) rest = 0.0;
  if (rest < 0.0) {
    --full;
    rest += dt;
  }
  const auto chunk = static_cast<std::size_t>(stepper.control().monitor_every);
  std::size_t done = 0;
  while (done < full && !state.blowup_flag) {
    const std::size_t n = std::min(chunk, full - done);
    stepper.fused_steps(state, dt, n);
    done += n;
    state.field.time = t0 + static_cast<double>(done) * dt;
    detect_blowup(state, stepper.disc(), stepper.thresholds());
  }
  if (!state.blowup_flag && rest > 0.0) {
    stepper.fused_steps(state, rest, 1);
    detect_blowup(state, stepper.disc(), stepper.thresholds());
  }
  if (!state.blowup_flag) state.field.time = target;
}

void advance_adaptive(StepperState& state, const Stepper& stepper, double target) {
  const auto& ctl = stepper.control();
  const auto& thr = stepper.thresholds();
  while (state.field.time < target && !state.blowup_flag) {
    const double h = std::min(state.dt, target - state.field.time);
    StepperState one = state;
    stepper.fused_steps(one, h, 1);
    StepperState two = state;
    stepper.fused_steps(two, 0.5 * h, 2);
    const double err = (one.blowup_flag || two.blowup_flag)
                           ? std::numeric_limits<double>::infinity()
                           : difference_norm(one.field, two.field, stepper.disc());
    if (err > ctl.tol_reject) {
      ++state.rejected_count;
      state.dt = 0.5 * h;
      if (state.dt < thr.dt_min) {
        state.dt = thr.dt_min;
        state.blowup_flag = true;
        state.blowup_time_estimate = state.field.time;
        state.blowup_reason = "step size reached dt_min with rejected steps";
      }
      continue;
    }
    const double t_new = state.field.time + h;
    two.step_count = state.step_count + 1;
    two.rejected_count = state.rejected_count;
    two.dt = state.dt;
    state = std::move(two);
    state.field.time = t_new;
    if (err < ctl.tol_grow) state.dt = std::min(2.0 * state.dt, ctl.dt_max);
    detect_blowup(state, stepper.disc(), thr);
  }
  if (!state.blowup_flag) state.field.time = target;
}

DiagnosticsRecord light_record(const Field& f, const Discretization& disc) {
  DiagnosticsRecord r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.time = f.time;
  r.mass = mass(f, disc);
  r.energy = energy(f, disc);
  r.h1_native = h1_native(f, disc);
  r.virial = disc.is_div() ? virial(f, disc) : nan;
  r.virial_rhs = disc.is_div() ? virial_rhs(f, disc) : nan;
  r.morawetz_I = nan;
  r.morawetz_dI_bound = nan;
  r.tail_mass_fraction = nan;
  r.boundary_mass_fraction = nan;
  return r;
}

}  // namespace

std::vector<double> uniform_schedule(double horizon, std::size_t intervals) {
  std::vector<double> t(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
  }
  return t;
}

IntegrationResult integrate(const Field& initial, const Stepper& stepper, double horizon,
                            const std::vector<double>& sample_times,
                            const IntegrateOptions& options) {
  if (!(horizon > 0.0)) throw std::invalid_argument("integrate: horizon must be positive");
  if (sample_times.empty()) throw std::invalid_argument("integrate: empty sample schedule");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double t = sample_times[i];
    if (t < initial.time - 1e-12 || t > horizon + 1e-12) {
      throw std::invalid_argument("integrate: sample time outside [start, horizon]");
    }
    if (i > 0 && t < sample_times[i - 1]) {
      throw std::invalid_argument("integrate: sample times must be sorted");
    }
  }

  IntegrationResult out;
  StepperState state = stepper.start(initial);
  const auto& disc = stepper.disc();
  for (double ts : sample_times) {
    if (stepper.control().adaptive) {
      advance_adaptive(state, stepper, ts);
    } else {
      advance_fixed(state, stepper, ts);
    }
    if (state.blowup_flag) break;
    out.records.push_back(options.full_diagnostics ? diagnose(state.field, disc, options.rho)
                                                   : light_record(state.field, disc));
    if (options.on_sample) options.on_sample(state.field);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace ounls
