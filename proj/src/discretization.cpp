#include "ounls/discretization.hpp"

#include <cmath>
#include <string>

namespace ounls {

void ModelSpec::validate() const {
  if (d < 1 || d > 2) {
    throw ConfigError("d must be 1 or 2, got " + std::to_string(d));
  }
  if (p <= 0 || p % 2 != 0) {
    throw ConfigError("p must be a positive even integer, got " + std::to_string(p));
  }
  if (!std::isfinite(nonlinear_scale)) {
    throw ConfigError("nonlinear scale must be finite");
  }
}

std::string to_string(Model m) { return m == Model::Div ? "div" : "nondiv"; }
std::string to_string(Sign s) { return s == Sign::Focusing ? "focusing" : "defocusing"; }

bool Field::all_finite() const {
  for (const auto& v : data) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

Discretization::Discretization(const ModelSpec& model, const DiscretizationSpec& spec)
    : model_(model),
      spec_(spec),
      grid_(model.d, spec.resolved_half_length(model.d), spec.n_x) {
  model_.validate();
  if (model_.model == Model::NonDiv) {
    hermite_ = std::make_shared<const HermiteBasis>(HermiteBasis::build(spec.n_alpha));
    alpha_nodes_.assign(hermite_->nodes().begin(), hermite_->nodes().end());
    alpha_measure_.assign(hermite_->weights().begin(), hermite_->weights().end());
    nonlinear_weight_.resize(alpha_nodes_.size());
    for (std::size_t k = 0; k < alpha_nodes_.size(); ++k) {
      const double a = alpha_nodes_[k];
      nonlinear_weight_[k] = std::exp(-0.5 * model_.p * a * a);
    }
  } else {
    div_ = std::make_shared<const DivAlphaOperator>(spec.div_nodes, spec.div_half_width, true);
    alpha_nodes_.assign(div_->nodes().begin(), div_->nodes().end());
    alpha_measure_.assign(alpha_nodes_.size(), div_->spacing());
    nonlinear_weight_.assign(alpha_nodes_.size(), 1.0);
  }
  mask_ = spec.dealias == Dealias::TwoThirds ? two_thirds_mask(grid_)
                                             : std::vector<double>(grid_.size(), 1.0);
  xfft_ = std::make_unique<XTransform>(grid_, alpha_nodes_.size());
}

const HermiteBasis& Discretization::hermite() const {
  if (!hermite_) throw std::logic_error("Discretization: Div model has no Hermite basis");
  return *hermite_;
}

const DivAlphaOperator& Discretization::div() const {
  if (!div_) throw std::logic_error("Discretization: NonDiv model has no Div operator");
  return *div_;
}

void Discretization::check_shape(const Field& f) const {
  if (f.n_x != x_size() || f.n_alpha != alpha_size() ||
      f.data.size() != x_size() * alpha_size()) {
    throw std::invalid_argument("field shape (" + std::to_string(f.n_x) + " x " +
                                std::to_string(f.n_alpha) + ") does not match discretization (" +
                                std::to_string(x_size()) + " x " +
                                std::to_string(alpha_size()) + ")");
  }
}

Field apply_ou_nondiv(const Field& field, const HermiteBasis& basis) {
  if (static_cast<int>(field.n_alpha) != basis.size()) {
    throw std::invalid_argument("apply_ou_nondiv: field has " + std::to_string(field.n_alpha) +
                                " alpha nodes, basis has " + std::to_string(basis.size()));
  }
  Field out = field;
  for (std::size_t ix = 0; ix < field.n_x; ++ix) {
    const auto col = apply_ou_modal(field.column(ix), basis);
    std::copy(col.begin(), col.end(), out.column(ix).begin());
  }
  return out;
}

Field apply_div_operator(const Field& field, const DivAlphaOperator& op) {
  if (static_cast<int>(field.n_alpha) != op.size()) {
    throw std::invalid_argument("apply_div_operator: field has " +
                                std::to_string(field.n_alpha) + " alpha nodes, grid has " +
                                std::to_string(op.size()));
  }
  Field out = field;
  for (std::size_t ix = 0; ix < field.n_x; ++ix) op.apply(field.column(ix), out.column(ix));
  return out;
}

void apply_nonlinearity_inplace(Field& field, const ModelSpec& spec, std::span<const double> g,
                                double dt) {
  if (g.size() != field.n_alpha) {
    throw std::invalid_argument("apply_nonlinearity: weight length mismatch");
  }
  if (!field.all_finite()) {
    throw NumericError("apply_nonlinearity: nonfinite field values (upstream blow-up)");
  }
  const double s = spec.sign_value() * spec.nonlinear_scale;
  if (dt == 0.0 || s == 0.0) return;
  for (std::size_t ix = 0; ix < field.n_x; ++ix) {
    rotate_nonlinear_phase(field.column(ix), g, spec.p, s, dt);
  }
}

Field apply_nonlinearity(const Field& field, const ModelSpec& spec,
                         std::span<const double> alpha_nodes, double dt) {
  std::vector<double> g(alpha_nodes.size(), 1.0);
  if (spec.model == Model::NonDiv) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      g[k] = std::exp(-0.5 * spec.p * alpha_nodes[k] * alpha_nodes[k]);
    }
  }
  Field out = field;
  apply_nonlinearity_inplace(out, spec, g, dt);
  return out;
}

LinearPropagator::LinearPropagator(const Discretization& disc, double t) : disc_(&disc), t_(t) {
  if (!std::isfinite(t)) throw std::invalid_argument("build_linear_propagator: nonfinite t");
  const auto& grid = disc.grid();
  x_phase_.resize(grid.size());
  x_phase_masked_.resize(grid.size());
  const auto mask = disc.dealias_mask();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double theta = -t * grid.wavenumber_squared(i);
    x_phase_[i] = cplx(std::cos(theta), std::sin(theta));
    x_phase_masked_[i] = x_phase_[i] * mask[i];
  }

  const int na = static_cast<int>(disc.alpha_size());
  if (disc.is_div()) {
    const auto& q = disc.div().eigenvectors();
    const auto& mu = disc.div().eigenvalues();
    Eigen::MatrixXcd scaled = q.cast<cplx>();
    for (int m = 0; m < na; ++m) {
      const double theta = t * mu(m);
      scaled.col(m) *= cplx(std::cos(theta), std::sin(theta));
    }
    alpha_map_ = scaled * q.transpose().cast<cplx>();
  } else {
    const auto& b = disc.hermite();
    Eigen::MatrixXcd scaled = b.table().cast<cplx>();
    for (int n = 0; n < na; ++n) {
      const double theta = t * b.eigenvalues()[n];
      scaled.col(n) *= cplx(std::cos(theta), std::sin(theta));
    }
    alpha_map_ = scaled * b.forward().cast<cplx>();
  }
}

void LinearPropagator::apply(Field& field, bool dealias) const {
  disc_->check_shape(field);
  const bool masked = dealias && disc_->spec().dealias == Dealias::TwoThirds;
  if (t_ == 0.0 && !masked) return;
  const auto na = static_cast<Eigen::Index>(field.n_alpha);
  const auto nx = static_cast<Eigen::Index>(field.n_x);
  Eigen::Map<Eigen::MatrixXcd> u(field.data.data(), na, nx);
  if (t_ != 0.0) {
    Eigen::MatrixXcd mapped(na, nx);
    mapped.noalias() = alpha_map_ * u;
    u = mapped;
  }
  apply_x_multiplier(*disc_, field, masked ? x_phase_masked_ : x_phase_);
}

LinearPropagator build_linear_propagator(const Discretization& disc, double t) {
  return LinearPropagator(disc, t);
}

void apply_x_multiplier(const Discretization& disc, Field& field, std::span<const cplx> symbol) {
  disc.xfft().forward(field.data);
  const std::size_t na = field.n_alpha;
  for (std::size_t ix = 0; ix < field.n_x; ++ix) {
    const cplx s = symbol[ix];
    cplx* col = field.data.data() + ix * na;
    for (std::size_t ia = 0; ia < na; ++ia) col[ia] *= s;
  }
  disc.xfft().inverse(field.data);
}

Field x_derivative(const Discretization& disc, const Field& field, int axis) {
  const auto& grid = disc.grid();
  const int n = grid.points_per_axis();
  std::vector<cplx> symbol(grid.size());
  for (std::size_t i = 0; i < symbol.size(); ++i) {
    const int idx = grid.unflatten(i)[axis];
    symbol[i] = idx == n / 2 ? cplx{} : cplx(0.0, grid.wavenumbers()[idx]);
  }
  Field out = field;
  apply_x_multiplier(disc, out, symbol);
  return out;
}

}  // namespace ounls
