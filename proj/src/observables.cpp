#include "ounls/observables.hpp"

#include <cmath>
#include <limits>

namespace ounls {

namespace {

std::vector<double> alpha_density(const Field& field, const Discretization& disc) {
  const auto w = disc.alpha_measure();
  std::vector<double> m(field.n_x, 0.0);
  for (std::size_t ix = 0; ix < field.n_x; ++ix) {
    const auto col = field.column(ix);
    double s = 0.0;
    for (std::size_t ia = 0; ia < col.size(); ++ia) s += w[ia] * std::norm(col[ia]);
    m[ix] = s;
  }
  return m;
}

double alpha_gradient_squared(const Field& field, const Discretization& disc) {
  double s = 0.0;
  if (disc.is_div()) {
    for (std::size_t ix = 0; ix < field.n_x; ++ix) s += disc.div().gradient_form(field.column(ix));
  } else {
    const auto& b = disc.hermite();
    const auto na = static_cast<Eigen::Index>(field.n_alpha);
    const auto nx = static_cast<Eigen::Index>(field.n_x);
    Eigen::Map<const Eigen::MatrixXcd> u(field.data.data(), na, nx);
    const Eigen::MatrixXcd c = b.forward().cast<cplx>() * u;
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
      for (Eigen::Index n = 1; n < na; ++n) s += static_cast<double>(n) * std::norm(c(n, ix));
    }
  }
  return s * disc.grid().cell_volume();
}

void require_div(const Discretization& disc, const char* what) {
  if (!disc.is_div()) {
    throw std::invalid_argument(std::string(what) +
                                ": the virial identity is only available for Model Div");
  }
}

double rho_value(Rho rho, double r2) {
  return rho == Rho::Abs ? std::sqrt(r2) : std::sqrt(1.0 + r2);
}

}  // namespace

double mass(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  double s = 0.0;
  for (double m : alpha_density(field, disc)) s += m;
  return s * disc.grid().cell_volume();
}

double x_gradient_squared(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  Field hat = field;
  disc.xfft().forward(hat.data);
  const auto w = disc.alpha_measure();
  const auto& grid = disc.grid();
  double s = 0.0;
  for (std::size_t ix = 0; ix < hat.n_x; ++ix) {
    const double k2 = grid.wavenumber_squared(ix);
    const auto col = hat.column(ix);
    double c = 0.0;
    for (std::size_t ia = 0; ia < col.size(); ++ia) c += w[ia] * std::norm(col[ia]);
    s += k2 * c;
  }
  return s * grid.cell_volume();
}

double power_integral(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  const auto w = disc.alpha_measure();
  const auto g = disc.nonlinear_weight();
  const int half = disc.model().p / 2 + 1;  // |u|^{p+2} = (|u|²)^{p/2+1}
  double s = 0.0;
  for (std::size_t ix = 0; ix < field.n_x; ++ix) {
    const auto col = field.column(ix);
    for (std::size_t ia = 0; ia < col.size(); ++ia) {
      const double a2 = std::norm(col[ia]);
      double v = 1.0;
      for (int j = 0; j < half; ++j) v *= a2;
      s += w[ia] * g[ia] * v;
    }
  }
  return s * disc.grid().cell_volume();
}

EnergyParts energy_parts(const Field& field, const Discretization& disc) {
  const auto& spec = disc.model();
  EnergyParts e;
  e.kinetic_x = 0.5 * x_gradient_squared(field, disc);
  e.kinetic_alpha = 0.5 * alpha_gradient_squared(field, disc);
  e.potential = spec.sign_value() * spec.nonlinear_scale / (spec.p + 2) * power_integral(field, disc);
  return e;
}

double energy(const Field& field, const Discretization& disc) {
  return energy_parts(field, disc).total();
}

double h1_native(const Field& field, const Discretization& disc) {
  return std::sqrt(mass(field, disc) + x_gradient_squared(field, disc) +
                   alpha_gradient_squared(field, disc));
}

double virial(const Field& field, const Discretization& disc) {
  require_div(disc, "virial");
  disc.check_shape(field);
  const auto m = alpha_density(field, disc);
  double s = 0.0;
  for (std::size_t ix = 0; ix < m.size(); ++ix) s += disc.grid().radius_squared(ix) * m[ix];
  return s * disc.grid().cell_volume();
}

double virial_derivative(const Field& field, const Discretization& disc) {
  require_div(disc, "virial_derivative");
  disc.check_shape(field);
  const auto& grid = disc.grid();
  const auto w = disc.alpha_measure();
  double s = 0.0;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const Field du = x_derivative(disc, field, axis);
    for (std::size_t ix = 0; ix < field.n_x; ++ix) {
      const double x = grid.coordinate(grid.unflatten(ix)[axis]);
      const auto u = field.column(ix);
      const auto d = du.column(ix);
      for (std::size_t ia = 0; ia < u.size(); ++ia) {
        s += w[ia] * x * (std::conj(u[ia]) * d[ia]).imag();
      }
    }
  }
  return 4.0 * s * grid.cell_volume();
}

double virial_rhs(const Field& field, const Discretization& disc) {
  require_div(disc, "virial_rhs");
  const auto& spec = disc.model();
  const auto parts = energy_parts(field, disc);
  const double dp = static_cast<double>(spec.d * spec.p);
  const double coeff = (dp - 4.0) / (4.0 * (spec.p + 2));
  const double sigma = spec.sign_value() * spec.nonlinear_scale;
  return 16.0 * (parts.total() - parts.kinetic_alpha +
                 sigma * coeff * power_integral(field, disc));
}

double morawetz_I(const Field& field, const Discretization& disc, Rho rho) {
  disc.check_shape(field);
  const auto& grid = disc.grid();
  const int n = grid.points_per_axis();
  const int d = grid.dim();
  const double h = grid.spacing();
  const auto m = alpha_density(field, disc);

  // Zero-padded linear convolution on a (2n)^d grid.
  const BoxGrid padded(d, 2.0 * grid.half_length(), 2 * n);
  const XTransform fft(padded, 1);
  std::vector<cplx> kernel(padded.size());
  std::vector<cplx> dens(padded.size());
  for (std::size_t i = 0; i < padded.size(); ++i) {
    const auto idx = padded.unflatten(i);
    double r2 = 0.0;
    bool reachable = true;  // offsets span −(n−1)…(n−1); index n is unused
    bool in_box = true;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      const int j = idx[a] < n ? idx[a] : idx[a] - 2 * n;
      reachable = reachable && idx[a] != n;
      r2 += (j * h) * (j * h);
      in_box = in_box && idx[a] < n;
      flat = flat * n + static_cast<std::size_t>(idx[a] % n);
    }
    kernel[i] = reachable ? rho_value(rho, r2) : 0.0;
    if (in_box) dens[i] = m[flat];
  }
  fft.forward(kernel);
  fft.forward(dens);
  const double scale = std::sqrt(static_cast<double>(padded.size()));
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] *= kernel[i] * scale;
  fft.inverse(dens);

  double s = 0.0;
  for (std::size_t i = 0; i < padded.size(); ++i) {
    const auto idx = padded.unflatten(i);
    bool in_box = true;
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) {
      in_box = in_box && idx[a] < n;
      flat = flat * n + static_cast<std::size_t>(idx[a]);
    }
    if (in_box) s += m[flat] * dens[i].real();
  }
  const double cell = grid.cell_volume();
  return s * cell * cell;
}

double morawetz_dI_bound(const Field& field, const Discretization& disc) {
  const double l2 = std::sqrt(mass(field, disc));
  return l2 * l2 * l2 * std::sqrt(x_gradient_squared(field, disc));
}

double tail_mass_fraction(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  if (disc.is_div()) {
    const auto nodes = disc.alpha_nodes();
    const double edge = 0.9 * disc.div().half_width();
    double total = 0.0;
    double tail = 0.0;
    for (std::size_t ix = 0; ix < field.n_x; ++ix) {
      const auto col = field.column(ix);
      for (std::size_t ia = 0; ia < col.size(); ++ia) {
        const double a = std::norm(col[ia]);
        total += a;
        if (std::abs(nodes[ia]) > edge) tail += a;
      }
    }
    return total > 0.0 ? tail / total : 0.0;
  }
  const auto& b = disc.hermite();
  const auto na = static_cast<Eigen::Index>(field.n_alpha);
  const auto nx = static_cast<Eigen::Index>(field.n_x);
  Eigen::Map<const Eigen::MatrixXcd> u(field.data.data(), na, nx);
  const Eigen::MatrixXcd c = b.forward().cast<cplx>() * u;
  double total = 0.0;
  double tail = 0.0;
  for (Eigen::Index ix = 0; ix < nx; ++ix) {
    for (Eigen::Index n = 0; n < na; ++n) {
      const double a = std::norm(c(n, ix));
      total += a;
      if (n >= std::max<Eigen::Index>(na - 4, 0)) tail += a;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

double boundary_mass_fraction(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  const auto& grid = disc.grid();
  const auto m = alpha_density(field, disc);
  const double edge = 0.9 * grid.half_length();
  double total = 0.0;
  double outer = 0.0;
  for (std::size_t ix = 0; ix < m.size(); ++ix) {
    total += m[ix];
    bool out = false;
    for (int idx : grid.unflatten(ix)) out = out || std::abs(grid.coordinate(idx)) > edge;
    if (out) outer += m[ix];
  }
  return total > 0.0 ? outer / total : 0.0;
}

double x_spectral_tail_fraction(const Field& field, const Discretization& disc) {
  disc.check_shape(field);
  Field hat = field;
  disc.xfft().forward(hat.data);
  const auto& grid = disc.grid();
  const int n = grid.points_per_axis();
  const auto w = disc.alpha_measure();
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t ix = 0; ix < hat.n_x; ++ix) {
    int jmax = 0;
    for (int idx : grid.unflatten(ix)) jmax = std::max(jmax, std::abs(idx < n / 2 ? idx : idx - n));
    const auto col = hat.column(ix);
    double c = 0.0;
    for (std::size_t ia = 0; ia < col.size(); ++ia) c += w[ia] * std::norm(col[ia]);
    total += c;
    if (jmax > n / 4) tail += c;
  }
  return total > 0.0 ? tail / total : 0.0;
}

DiagnosticsRecord diagnose(const Field& field, const Discretization& disc, Rho rho) {
  DiagnosticsRecord r;
  r.time = field.time;
  r.mass = mass(field, disc);
  r.energy = energy(field, disc);
  r.h1_native = h1_native(field, disc);
  if (disc.is_div()) {
    r.virial = virial(field, disc);
    r.virial_rhs = virial_rhs(field, disc);
  } else {
    r.virial = std::numeric_limits<double>::quiet_NaN();
    r.virial_rhs = std::numeric_limits<double>::quiet_NaN();
  }
  r.morawetz_I = morawetz_I(field, disc, rho);
  r.morawetz_dI_bound = morawetz_dI_bound(field, disc);
  r.tail_mass_fraction = tail_mass_fraction(field, disc);
  r.boundary_mass_fraction = boundary_mass_fraction(field, disc);
  return r;
}

}  // namespace ounls
