#include "ounls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace ounls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Check make_check(std::string name, bool pass, double value, double limit, std::string detail = {}) {
  return Check{std::move(name), pass, value, limit, std::move(detail)};
}

double relative_drift(double value, double reference) {
  const double diff = std::abs(value - reference);
  return reference != 0.0 ? diff / std::abs(reference) : diff;
}

DiscretizationSpec refined(DiscretizationSpec grid, int factor) {
  grid.n_x *= factor;
  return grid;
}

StepControl control_for(const ScenarioConfig& cfg, double dt) {
  StepControl c;
  c.dt = dt;
  c.adaptive = cfg.adaptive;
  return c;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void check_admissible(int d, StrichartzPair pair) {
  const double lhs = 2.0 / pair.q + d / pair.r;
  const bool ok = pair.q >= 2.0 && pair.r >= 2.0 && std::abs(lhs - 0.5 * d) < 1e-12 &&
                  !(pair.q == 2.0 && std::isinf(pair.r) && d == 2);
  if (!ok) {
    std::ostringstream os;
    os << "inadmissible Strichartz pair (q, r) = (" << pair.q << ", " << pair.r << ") for d = " << d
       << ": need 2/q + d/r = d/2 with q, r >= 2 and (q, r, d) != (2, inf, 2); got 2/q + d/r = "
       << lhs;
    throw ConfigError(os.str());
  }
}

void ScenarioConfig::validate() const {
  model.validate();
  require(grid.n_x >= 4 && (grid.n_x & (grid.n_x - 1)) == 0,
          "n_x must be a power of two of at least 4, got " + std::to_string(grid.n_x));
  require(grid.n_alpha >= 2, "n_alpha must be at least 2");
  require(grid.div_nodes >= 3, "div_nodes must be at least 3");
  require(std::isfinite(grid.div_half_width) && grid.div_half_width > 0.0,
          "div_half_width must be positive");
  require(std::isfinite(grid.box_half_length) && grid.box_half_length >= 0.0,
          "box_half_length must be positive (0 selects the default)");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be positive");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  require(samples >= 1, "samples must be at least 1");
  require(ensemble >= 1, "ensemble must be at least 1");
  require(fine_factor >= 1 && (fine_factor & (fine_factor - 1)) == 0,
          "fine_factor must be a power of two");
  require(samples_per_unit >= 1, "samples_per_unit must be at least 1");
  require(threads >= 1, "threads must be at least 1");
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(!ladder.empty() && std::is_sorted(ladder.begin(), ladder.end()) && ladder.front() > 0.0,
          "ladder must be sorted positive times");
  for (double a : radii) require(a > 0.0, "radii must be positive");
  if (scenario == "strichartz") {
    require(!pairs.empty(), "strichartz needs at least one (q, r) pair");
    for (const auto& p : pairs) check_admissible(model.d, p);
  }
}

bool ScenarioReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; }) &&
         std::all_of(ensembles.begin(), ensembles.end(),
                     [](const EnsembleReport& e) { return e.pass; });
}

RatioStats summarize(std::span<const double> values) {
  RatioStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  s.max = v.back();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  s.median = quantile(0.5);
  s.q90 = quantile(0.9);
  return s;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// simulate / conservation

ScenarioReport run_simulate(const ScenarioConfig& cfg) {
  cfg.validate();
  const Discretization disc(cfg.model, cfg.grid);
  const Stepper stepper(disc, control_for(cfg, cfg.dt));
  IntegrateOptions opts;
  opts.rho = cfg.rho;
  auto result = integrate(make_initial(disc, cfg.initial), stepper, cfg.horizon,
                          uniform_schedule(cfg.horizon, cfg.samples), opts);
  ScenarioReport rep;
  rep.scenario = "simulate";
  rep.records = std::move(result.records);
  const auto& st = result.final_state;
  std::string detail = "steps=" + std::to_string(st.step_count);
  if (st.blowup_flag) {
    detail += "; blow-up flagged at t=" + fmt(*st.blowup_time_estimate) + " (" +
              st.blowup_reason + ")";
  }
  rep.checks.push_back(make_check("integration", true, st.field.time, cfg.horizon, detail));
  return rep;
}

ScenarioReport run_conservation(const ScenarioConfig& cfg) {
  cfg.validate();
  require(cfg.model.sign == Sign::Defocusing, "conservation runs need a defocusing model");
  const Discretization disc(cfg.model, cfg.grid);
  const Field u0 = make_initial(disc, cfg.initial);
  const auto schedule = uniform_schedule(cfg.horizon, cfg.samples);
  const double m0 = mass(u0, disc);
  const double e0 = energy(u0, disc);

  struct Drift {
    double mass = 0.0, energy = 0.0, energy_time = 0.0;
    std::vector<DiagnosticsRecord> records;
  };
  auto run = [&](double dt, bool full) {
    IntegrateOptions opts;
    opts.rho = cfg.rho;
    opts.full_diagnostics = full;
    const Stepper stepper(disc, control_for(cfg, dt));
    auto res = integrate(u0, stepper, cfg.horizon, schedule, opts);
    if (res.final_state.blowup_flag) {
      throw NumericError("conservation run flagged blow-up: " + res.final_state.blowup_reason);
    }
    Drift d;
    for (const auto& r : res.records) {
      d.mass = std::max(d.mass, relative_drift(r.mass, m0));
      const double de = relative_drift(r.energy, e0);
      if (de > d.energy) {
        d.energy = de;
        d.energy_time = r.time;
      }
    }
    d.records = std::move(res.records);
    return d;
  };
  Drift coarse = run(cfg.dt, true);
  const Drift fine = run(0.5 * cfg.dt, false);

  ScenarioReport rep;
  rep.scenario = "conservation";
  const auto& tol = cfg.tol;
  rep.checks.push_back(make_check("mass_drift", coarse.mass < tol.mass_drift || coarse.mass == 0.0,
                                  coarse.mass, tol.mass_drift));
  rep.checks.push_back(make_check("energy_drift",
                                  coarse.energy < tol.energy_drift || coarse.energy == 0.0,
                                  coarse.energy, tol.energy_drift,
                                  "worst at t=" + fmt(coarse.energy_time)));
  if (fine.energy > 0.0) {
    const double ratio = coarse.energy / fine.energy;
    rep.checks.push_back(make_check(
        "energy_drift_ratio", ratio >= tol.energy_ratio_low && ratio <= tol.energy_ratio_high, ratio,
        tol.energy_ratio_high,
        "dt/2 drift " + fmt(fine.energy) + ", band [" + fmt(tol.energy_ratio_low) + ", " +
            fmt(tol.energy_ratio_high) + "]"));
  } else {
    rep.checks.push_back(make_check("energy_drift_ratio", coarse.energy == 0.0, 0.0,
                                    tol.energy_ratio_high, "no drift at dt/2"));
  }
  rep.records = std::move(coarse.records);
  return rep;
}

// ---------------------------------------------------------------------------
// identity

double ou_eigen_error(const HermiteBasis& basis, int modes) {
  const int n_alpha = basis.size();
  double worst = 0.0;
  std::vector<cplx> column(n_alpha);
  for (int n = 0; n < std::min(modes, n_alpha); ++n) {
    for (int k = 0; k < n_alpha; ++k) column[k] = basis.table()(k, n);
    const auto out = apply_ou_modal(column, basis);
    for (int k = 0; k < n_alpha; ++k) {
      const double scale = std::sqrt(basis.weights()[k]);
      worst = std::max(worst, scale * std::abs(out[k] + static_cast<double>(n) * column[k]));
    }
  }
  return worst;
}

double fitted_order(std::span<const double> spacings, std::span<const double> residuals) {
  const std::size_t n = spacings.size();
  if (n < 2 || residuals.size() != n) {
    throw std::invalid_argument("fitted_order: need at least two matching points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(spacings[i]);
    const double y = std::log(residuals[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

ScenarioReport run_identity(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioReport rep;
  rep.scenario = "identity";
  const auto basis = HermiteBasis::build(cfg.grid.n_alpha);
  const int modes = std::min(cfg.tol.eigen_modes, basis.size());
  const double eig = ou_eigen_error(basis, modes);
  rep.checks.push_back(make_check("ou_eigenvalues", eig < cfg.tol.eigen_error, eig, cfg.tol.eigen_error,
                                  "modes n < " + std::to_string(modes)));

  const std::vector<std::pair<std::string, std::function<double(double)>>> profiles = {
      {"cos", [](double a) { return std::cos(a); }},
      {"cubic", [](double a) { return a * a * a - a; }},
      {"gaussian", [](double a) { return std::exp(-a * a / 8.0); }},
  };
  rep.table.columns = {"profile", "nodes", "spacing", "residual"};
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    std::vector<double> h, res;
    for (int level = 0; level < 3; ++level) {
      const int nodes = (cfg.grid.div_nodes - 1) * (1 << level) + 1;
      const DivAlphaOperator op(nodes, cfg.grid.div_half_width, false);
      h.push_back(op.spacing());
      res.push_back(verify_div_identity(profiles[p].second, basis, op));
      rep.table.rows.push_back({static_cast<double>(p), static_cast<double>(nodes), h.back(), res.back()});
    }
    const double order = fitted_order(h, res);
    rep.checks.push_back(make_check("div_identity_order_" + profiles[p].first,
                                    order >= cfg.tol.identity_order, order, cfg.tol.identity_order,
                                    "finest residual " + fmt(res.back())));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strichartz

std::vector<double> strichartz_ratios(const Discretization& disc, const Field& f,
                                      std::span<const StrichartzPair> pairs,
                                      StrichartzVariant variant, double horizon,
                                      int samples_per_unit) {
  disc.check_shape(f);
  if (variant == StrichartzVariant::H1Alpha && disc.is_div()) {
    throw std::invalid_argument("strichartz_ratios: the H1_alpha variant is NonDiv only");
  }
  if (!(horizon > 0.0) || samples_per_unit < 1) {
    throw std::invalid_argument("strichartz_ratios: bad time window");
  }
  const auto& grid = disc.grid();
  for (const auto& p : pairs) check_admissible(grid.dim(), p);

  const auto na = static_cast<Eigen::Index>(f.n_alpha);
  const auto nx = static_cast<Eigen::Index>(f.n_x);
  Field hat = f;
  disc.xfft().forward(hat.data);
  Eigen::Map<const Eigen::MatrixXcd> h(hat.data.data(), na, nx);

  // Modal coefficients c(m, k), their eigenvalues and native α weights.
  Eigen::MatrixXcd c;
  std::vector<double> lambda(na), weight(na);
  if (disc.is_div()) {
    c = disc.div().eigenvectors().transpose().cast<cplx>() * h;
    for (Eigen::Index m = 0; m < na; ++m) {
      lambda[m] = disc.div().eigenvalues()(m);
      weight[m] = disc.div().spacing();
    }
  } else {
    c = disc.hermite().forward().cast<cplx>() * h;
    for (Eigen::Index m = 0; m < na; ++m) {
      lambda[m] = disc.hermite().eigenvalues()[m];
      weight[m] = variant == StrichartzVariant::H1Alpha ? 1.0 + static_cast<double>(m) : 1.0;
    }
  }
  if (variant == StrichartzVariant::Derivative) {
    for (Eigen::Index k = 0; k < nx; ++k) c.col(k) *= std::sqrt(grid.wavenumber_squared(k));
  }

  const double cell = grid.cell_volume();
  double denom = 0.0;
  std::vector<double> row_energy(na, 0.0);
  for (Eigen::Index m = 0; m < na; ++m) {
    row_energy[m] = c.row(m).squaredNorm();
    denom += weight[m] * row_energy[m];
  }
  if (!(denom > 0.0)) throw std::invalid_argument("strichartz_ratios: zero data");
  denom = std::sqrt(denom * cell);

  std::vector<Eigen::Index> kept;
  for (Eigen::Index m = 0; m < na; ++m) {
    if (weight[m] * row_energy[m] > 1e-24 * denom * denom / cell) kept.push_back(m);
  }
  const auto K = kept.size();
  const XTransform xt(grid, K);
  std::vector<cplx> buf(static_cast<std::size_t>(nx) * K);
  std::vector<double> dens(nx);

  const auto intervals = static_cast<int>(std::ceil(horizon * samples_per_unit - 1e-9));
  const double dts = horizon / intervals;
  std::vector<double> acc(pairs.size(), 0.0);
  std::vector<cplx> mode_phase(K);
  for (int s = 0; s <= intervals; ++s) {
    const double t = s * dts;
    for (std::size_t j = 0; j < K; ++j) mode_phase[j] = std::polar(1.0, t * lambda[kept[j]]);
    for (Eigen::Index k = 0; k < nx; ++k) {
      const cplx xp = std::polar(1.0, -t * grid.wavenumber_squared(k));
      for (std::size_t j = 0; j < K; ++j) buf[k * K + j] = c(kept[j], k) * (xp * mode_phase[j]);
    }
    xt.inverse(buf);
    for (Eigen::Index x = 0; x < nx; ++x) {
      double sum = 0.0;
      for (std::size_t j = 0; j < K; ++j) sum += weight[kept[j]] * std::norm(buf[x * K + j]);
      dens[x] = sum;
    }
    const double tw = (s == 0 || s == intervals) ? 0.5 * dts : dts;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double r = pairs[p].r;
      double nr;
      if (std::isinf(r)) {
        nr = std::sqrt(*std::max_element(dens.begin(), dens.end()));
      } else {
        double sum = 0.0;
        for (double v : dens) sum += std::pow(v, 0.5 * r);
        nr = std::pow(sum * cell, 1.0 / r);
      }
      if (std::isinf(pairs[p].q)) {
        acc[p] = std::max(acc[p], nr);
      } else {
        acc[p] += tw * std::pow(nr, pairs[p].q);
      }
    }
  }
  std::vector<double> out(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const double tq = std::isinf(pairs[p].q) ? acc[p] : std::pow(acc[p], 1.0 / pairs[p].q);
    out[p] = tq / denom;
  }
  return out;
}

namespace {

std::string variant_name(StrichartzVariant v) {
  switch (v) {
    case StrichartzVariant::L2: return "k0";
    case StrichartzVariant::Derivative: return "k1";
    case StrichartzVariant::H1Alpha: return "h1alpha";
  }
  return "?";
}

EnsembleReport compare(std::string label, std::span<const double> coarse,
                       std::span<const double> fine, double ceiling) {
  EnsembleReport e;
  e.label = std::move(label);
  e.coarse = summarize(coarse);
  e.fine = summarize(fine);
  e.ceiling = ceiling;
  const bool finite = std::isfinite(e.coarse.max) && std::isfinite(e.fine.max) && e.coarse.max > 0.0;
  e.relative_change = finite ? std::abs(e.fine.max - e.coarse.max) / e.coarse.max : kInf;
  e.pass = finite && e.relative_change <= ceiling;
  return e;
}

}  // namespace

ScenarioReport run_strichartz_ensemble(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.scenario = "strichartz";
  c.validate();
  std::vector<StrichartzVariant> variants = {StrichartzVariant::L2, StrichartzVariant::Derivative};
  if (c.model.model == Model::NonDiv) variants.push_back(StrichartzVariant::H1Alpha);

  const std::size_t members = static_cast<std::size_t>(c.ensemble);
  const std::size_t nv = variants.size(), np = c.pairs.size();
  // ratios[level][member][variant * np + pair]
  std::vector<std::vector<std::vector<double>>> ratios(2);
  const int levels[2] = {1, c.fine_factor};
  for (int level = 0; level < 2; ++level) {
    const Discretization disc(c.model, refined(c.grid, levels[level]));
    auto& out = ratios[level];
    out.assign(members, std::vector<double>(nv * np));
    parallel_for(members, c.threads, [&](std::size_t i) {
      const Field f = make_initial(disc, RandomRecipe{member_seed(c.seed, i), c.band, 1.0});
      for (std::size_t v = 0; v < nv; ++v) {
        const auto r = strichartz_ratios(disc, f, c.pairs, variants[v], c.horizon, c.samples_per_unit);
        std::copy(r.begin(), r.end(), out[i].begin() + static_cast<std::ptrdiff_t>(v * np));
      }
    });
  }

  ScenarioReport rep;
  rep.scenario = "strichartz";
  rep.table.columns = {"member", "n_x", "variant", "q", "r", "ratio"};
  for (int level = 0; level < 2; ++level) {
    for (std::size_t i = 0; i < members; ++i) {
      for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t p = 0; p < np; ++p) {
          rep.table.rows.push_back({static_cast<double>(i),
                                    static_cast<double>(c.grid.n_x * levels[level]),
                                    static_cast<double>(v), c.pairs[p].q, c.pairs[p].r,
                                    ratios[level][i][v * np + p]});
        }
      }
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t p = 0; p < np; ++p) {
      std::vector<double> coarse(members), fine(members);
      for (std::size_t i = 0; i < members; ++i) {
        coarse[i] = ratios[0][i][v * np + p];
        fine[i] = ratios[1][i][v * np + p];
      }
      std::ostringstream label;
      label << to_string(c.model.model) << " " << variant_name(variants[v]) << " (q,r)=("
            << c.pairs[p].q << "," << c.pairs[p].r << ")";
      rep.ensembles.push_back(compare(label.str(), coarse, fine, c.tol.ensemble_stability));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// weighted embeddings

double sobolev_ratio(std::span<const cplx> coeffs, const HermiteBasis& basis) {
  const int n = basis.size();
  if (static_cast<int>(coeffs.size()) > n) {
    throw std::invalid_argument("sobolev_ratio: more coefficients than basis modes");
  }
  double norm2 = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) norm2 += (1.0 + m) * std::norm(coeffs[m]);
  if (!(norm2 > 0.0)) throw std::invalid_argument("sobolev_ratio: zero profile");
  double sup = 0.0;
  for (int k = 0; k < n; ++k) {
    cplx u{};
    for (std::size_t m = 0; m < coeffs.size(); ++m) u += coeffs[m] * basis.table()(k, m);
    const double a = basis.nodes()[k];
    sup = std::max(sup, std::abs(u) * std::exp(-0.5 * a * a));
  }
  return sup / std::sqrt(norm2);
}

double nonlinear_ratio(std::span<const cplx> coeffs, const HermiteBasis& basis, int p) {
  const int n = basis.size();
  if (static_cast<int>(coeffs.size()) > n) {
    throw std::invalid_argument("nonlinear_ratio: more coefficients than basis modes");
  }
  double norm2 = 0.0;
  for (std::size_t m = 0; m < coeffs.size(); ++m) norm2 += (1.0 + m) * std::norm(coeffs[m]);
  if (!(norm2 > 0.0)) throw std::invalid_argument("nonlinear_ratio: zero profile");
  Eigen::VectorXcd v(n);
  for (int k = 0; k < n; ++k) {
    cplx u{};
    for (std::size_t m = 0; m < coeffs.size(); ++m) u += coeffs[m] * basis.table()(k, m);
    const double a = basis.nodes()[k];
    v(k) = std::exp(-0.5 * p * a * a) * std::pow(std::abs(u), p) * u;
  }
  const Eigen::VectorXcd d = basis.forward().cast<cplx>() * v;
  double lhs2 = 0.0;
  for (int m = 0; m < n; ++m) lhs2 += (1.0 + m) * std::norm(d(m));
  return std::sqrt(lhs2) / std::pow(norm2, 0.5 * (p + 1));
}

double counterexample_ratio(double radius, int p, bool weighted) {
  constexpr int kPoints = 20001;
  const double h = 2.0 * radius / (kPoints - 1);
  // u = e^{α²/8}, v = g u^{p+1} = e^{cα²}.
  const double c = (p + 1) / 8.0 - (weighted ? 0.5 * p : 0.0);
  double nu = 0.0, nv = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double a = -radius + i * h;
    const double w = ((i == 0 || i == kPoints - 1) ? 0.5 : 1.0) * h * std::exp(-0.5 * a * a);
    const double u = std::exp(a * a / 8.0);
    const double du = 0.25 * a * u;
    const double v = std::exp(c * a * a);
    const double dv = 2.0 * c * a * v;
    nu += w * (u * u + du * du);
    nv += w * (v * v + dv * dv);
  }
  return std::sqrt(nv) / std::pow(nu, 0.5 * (p + 1));
}

ScenarioReport run_embedding_ensembles(const ScenarioConfig& cfg) {
  cfg.validate();
  const int p = cfg.model.p;
  const std::size_t members = static_cast<std::size_t>(cfg.ensemble);
  const int a_modes = cfg.band + 1;
  require(a_modes <= cfg.grid.n_alpha, "band must be below n_alpha");

  std::vector<std::vector<cplx>> profiles(members);
  for (std::size_t i = 0; i < members; ++i) {
    std::mt19937_64 rng(member_seed(cfg.seed, i));
    std::normal_distribution<double> normal;
    profiles[i].resize(a_modes);
    for (auto& v : profiles[i]) {
      const double re = normal(rng);
      const double im = normal(rng);
      v = cplx(re, im);
    }
  }

  ScenarioReport rep;
  rep.scenario = "embeddings";
  rep.table.columns = {"member", "n_alpha", "sobolev_ratio", "nonlinear_ratio"};
  std::vector<double> sob[2], non[2];
  for (int level = 0; level < 2; ++level) {
    const int n_alpha = cfg.grid.n_alpha * (level == 0 ? 1 : cfg.fine_factor);
    const auto basis = HermiteBasis::build(n_alpha);
    sob[level].resize(members);
    non[level].resize(members);
    parallel_for(members, cfg.threads, [&](std::size_t i) {
      sob[level][i] = sobolev_ratio(profiles[i], basis);
      non[level][i] = nonlinear_ratio(profiles[i], basis, p);
    });
    for (std::size_t i = 0; i < members; ++i) {
      rep.table.rows.push_back({static_cast<double>(i), static_cast<double>(n_alpha),
                                sob[level][i], non[level][i]});
    }
  }
  rep.ensembles.push_back(compare("weighted sobolev", sob[0], sob[1], cfg.tol.ensemble_stability));
  rep.ensembles.push_back(compare("nonlinear estimate p=" + std::to_string(p), non[0], non[1],
                                  cfg.tol.ensemble_stability));

  // Counterexample profile: the unweighted ratio must grow with the radius.
  std::vector<double> unweighted, weighted;
  for (double a : cfg.radii) {
    unweighted.push_back(counterexample_ratio(a, 2, false));
    weighted.push_back(counterexample_ratio(a, 2, true));
  }
  bool growing = unweighted.size() >= 2;
  std::ostringstream detail;
  for (std::size_t i = 0; i < unweighted.size(); ++i) {
    if (i > 0 && !(unweighted[i] > unweighted[i - 1])) growing = false;
    detail << (i ? ", " : "") << "A=" << cfg.radii[i] << ": " << fmt(unweighted[i])
           << " (weighted " << fmt(weighted[i]) << ")";
  }
  rep.checks.push_back(make_check("counterexample_growth", growing, unweighted.back(),
                                  unweighted.front(), detail.str()));
  return rep;
}

// ---------------------------------------------------------------------------
// scattering

ScenarioReport run_scattering(const ScenarioConfig& cfg) {
  cfg.validate();
  require(cfg.model.model == Model::NonDiv, "scattering runs need the NonDiv model");
  const Discretization disc(cfg.model, cfg.grid);
  Field u0 = make_initial(disc, cfg.initial);
  scale_to_norm(u0, disc, cfg.delta);

  const double horizon = cfg.ladder.back();
  std::vector<Field> pullbacks;
  IntegrateOptions opts;
  opts.full_diagnostics = false;
  opts.on_sample = [&](const Field& u) {
    const LinearPropagator back(disc, -u.time);
    pullbacks.push_back(back(u));
  };
  const Stepper stepper(disc, control_for(cfg, cfg.dt));
  auto res = integrate(u0, stepper, horizon, cfg.ladder, opts);

  ScenarioReport rep;
  rep.scenario = "scattering";
  rep.records = std::move(res.records);
  if (res.final_state.blowup_flag) {
    rep.checks.push_back(make_check("global_run", false, res.final_state.field.time, horizon,
                                    res.final_state.blowup_reason));
    return rep;
  }
  rep.table.columns = {"time", "cauchy_difference", "pullback_norm"};
  std::vector<double> diffs;
  for (std::size_t j = 0; j + 1 < pullbacks.size(); ++j) {
    Field d = pullbacks[j + 1];
    for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= pullbacks[j].data[i];
    diffs.push_back(l2x_h1alpha_norm(d, disc));
    rep.table.rows.push_back({cfg.ladder[j + 1], diffs.back(), l2x_h1alpha_norm(pullbacks[j + 1], disc)});
  }
  bool decreasing = true;
  std::ostringstream detail;
  for (std::size_t j = 0; j < diffs.size(); ++j) {
    if (j > 0 && !(diffs[j] < diffs[j - 1] || diffs[j - 1] == 0.0)) decreasing = false;
    detail << (j ? ", " : "") << fmt(diffs[j]);
  }
  rep.checks.push_back(make_check("cauchy_decreasing", decreasing && !diffs.empty(),
                                  diffs.empty() ? 0.0 : diffs.back(),
                                  diffs.empty() ? 0.0 : diffs.front(), detail.str()));
  if (!diffs.empty()) {
    const double ratio = diffs.front() > 0.0 ? diffs.back() / diffs.front() : 0.0;
    rep.checks.push_back(make_check("cauchy_final_fraction", ratio < cfg.tol.scattering_factor,
                                    ratio, cfg.tol.scattering_factor,
                                    !decreasing ? "no numerical scattering at this scale"
                                    : ratio >= cfg.tol.scattering_factor
                                        ? "differences decrease but too slowly over this ladder"
                                        : ""));
  }
  if (!pullbacks.empty()) rep.field = std::move(pullbacks.back());
  return rep;
}

// ---------------------------------------------------------------------------
// blow-up

QuadraticFit fit_quadratic(std::span<const double> t, std::span<const double> v) {
  const auto n = static_cast<Eigen::Index>(t.size());
  if (n < 4 || v.size() != t.size()) {
    throw std::invalid_argument("fit_quadratic: need at least four matching samples");
  }
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = t[i] * t[i];
    x(i, 1) = t[i];
    x(i, 2) = 1.0;
    y(i) = v[i];
  }
  const Eigen::Matrix3d xtx = x.transpose() * x;
  const Eigen::Vector3d beta = xtx.ldlt().solve(x.transpose() * y);
  const double rss = (y - x * beta).squaredNorm();
  const Eigen::Matrix3d cov = xtx.inverse() * (rss / static_cast<double>(n - 3));
  return {beta(0), beta(1), beta(2), std::sqrt(std::max(cov(0, 0), 0.0))};
}

std::optional<double> QuadraticFit::root() const {
  if (!(a < -3.0 * sigma_a)) return std::nullopt;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double r1 = (-b + std::sqrt(disc)) / (2.0 * a);
  const double r2 = (-b - std::sqrt(disc)) / (2.0 * a);
  const double r = std::max(r1, r2);
  if (!(r > 0.0)) return std::nullopt;
  return r;
}

ScenarioReport run_blowup(const ScenarioConfig& cfg) {
  cfg.validate();
  require(cfg.model.model == Model::Div, "blow-up runs need the Div model");
  require(cfg.model.sign == Sign::Focusing, "blow-up runs need the focusing sign");
  require(cfg.model.d * cfg.model.p >= 4, "blow-up runs need p >= 4/d");
  const Discretization disc(cfg.model, cfg.grid);
  Field u0 = make_initial(disc, cfg.initial);
  int doublings = 0;
  double e0 = energy(u0, disc);
  while (!(e0 < 0.0)) {
    if (doublings == 40) {
      throw NumericError("could not reach negative energy within 40 amplitude doublings (E=" +
                         fmt(e0) + ")");
    }
    for (auto& v : u0.data) v *= 2.0;
    ++doublings;
    e0 = energy(u0, disc);
  }

  const auto schedule = uniform_schedule(cfg.horizon, cfg.samples);
  const double delta = cfg.horizon / cfg.samples;
  IntegrateOptions opts;
  opts.full_diagnostics = false;
  const Stepper stepper(disc, control_for(cfg, cfg.dt));
  const auto res = integrate(u0, stepper, cfg.horizon, schedule, opts);
  const auto& recs = res.records;

  ScenarioReport rep;
  rep.scenario = "blowup";
  rep.records = recs;
  rep.table.columns = {"time", "virial", "virial_second_difference", "virial_rhs", "h1_native"};
  const double bound = 16.0 * e0;
  const double slack = cfg.tol.concavity * std::abs(bound);
  double worst = -kInf;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    double d2 = std::numeric_limits<double>::quiet_NaN();
    if (i > 0 && i + 1 < recs.size()) {
      d2 = (recs[i + 1].virial - 2.0 * recs[i].virial + recs[i - 1].virial) / (delta * delta);
      worst = std::max(worst, d2);
    }
    rep.table.rows.push_back({recs[i].time, recs[i].virial, d2, recs[i].virial_rhs, recs[i].h1_native});
  }
  rep.checks.push_back(make_check("virial_concavity", recs.size() >= 3 && worst <= bound + slack,
                                  worst, bound + slack,
                                  "E0=" + fmt(e0) + " after " + std::to_string(doublings) +
                                      " doublings; " + std::to_string(recs.size()) + " samples"));

  std::optional<double> root;
  std::string fit_detail = "too few samples";
  if (recs.size() >= 4) {
    std::vector<double> t, v;
    for (const auto& r : recs) {
      t.push_back(r.time);
      v.push_back(r.virial);
    }
    const auto fit = fit_quadratic(t, v);
    root = fit.root();
    fit_detail = "fit a=" + fmt(fit.a) + " +- " + fmt(fit.sigma_a);
  }
  const auto& st = res.final_state;
  const bool flagged = st.blowup_flag && st.blowup_time_estimate.has_value();
  const double flag_time = flagged ? *st.blowup_time_estimate : kInf;
  const double limit = root ? cfg.tol.blowup_factor * *root : kInf;
  std::string detail = fit_detail;
  if (root) detail += ", root " + fmt(*root);
  detail += flagged ? "; flagged (" + st.blowup_reason + ")" : "; no flag before horizon";
  rep.checks.push_back(make_check("blowup_time", flagged && root && flag_time <= limit, flag_time,
                                  limit, detail));

  // Defocusing control over twice the predicted lifetime.
  ScenarioConfig control = cfg;
  control.model.sign = Sign::Defocusing;
  const double control_horizon = 2.0 * (root ? *root : cfg.horizon);
  const Discretization cdisc(control.model, control.grid);
  const Stepper cstep(cdisc, control_for(control, control.dt));
  IntegrateOptions copts;
  copts.full_diagnostics = false;
  const auto cres = integrate(u0, cstep, control_horizon, {0.0, control_horizon}, copts);
  rep.checks.push_back(make_check("defocusing_control", !cres.final_state.blowup_flag,
                                  cres.final_state.field.time, control_horizon,
                                  cres.final_state.blowup_flag ? cres.final_state.blowup_reason
                                                               : "no flag"));
  return rep;
}

// ---------------------------------------------------------------------------
// Morawetz

ScenarioReport run_morawetz(const ScenarioConfig& cfg) {
  cfg.validate();
  require(cfg.model.sign == Sign::Defocusing, "Morawetz runs need a defocusing model");
  const double delta = cfg.horizon / cfg.samples;
  ScenarioReport rep;
  rep.scenario = "morawetz";
  rep.table.columns = {"n_x", "time", "morawetz_abs", "morawetz_bracket", "dI_bound"};
  std::vector<double> ratio[2][2];  // [level][rho]
  for (int level = 0; level < 2; ++level) {
    const int factor = level == 0 ? 1 : cfg.fine_factor;
    const Discretization disc(cfg.model, refined(cfg.grid, factor));
    std::vector<double> ia, ib, bound, times;
    IntegrateOptions opts;
    opts.full_diagnostics = false;
    opts.on_sample = [&](const Field& u) {
      times.push_back(u.time);
      ia.push_back(morawetz_I(u, disc, Rho::Abs));
      ib.push_back(morawetz_I(u, disc, Rho::Bracket));
      bound.push_back(morawetz_dI_bound(u, disc));
    };
    const Stepper stepper(disc, control_for(cfg, cfg.dt));
    auto res = integrate(make_initial(disc, cfg.initial), stepper, cfg.horizon,
                         uniform_schedule(cfg.horizon, cfg.samples), opts);
    if (res.final_state.blowup_flag) {
      throw NumericError("Morawetz run flagged blow-up: " + res.final_state.blowup_reason);
    }
    if (level == 0) rep.records = std::move(res.records);
    for (std::size_t i = 0; i < times.size(); ++i) {
      rep.table.rows.push_back({static_cast<double>(cfg.grid.n_x * factor), times[i], ia[i], ib[i], bound[i]});
      if (i == 0 || i + 1 == times.size()) continue;
      ratio[level][0].push_back(std::abs(ia[i + 1] - ia[i - 1]) / (2.0 * delta) / bound[i]);
      ratio[level][1].push_back(std::abs(ib[i + 1] - ib[i - 1]) / (2.0 * delta) / bound[i]);
    }
  }
  const char* names[2] = {"abs", "bracket"};
  for (int r = 0; r < 2; ++r) {
    rep.ensembles.push_back(compare(to_string(cfg.model.model) + " morawetz rho=" + names[r],
                                    ratio[0][r], ratio[1][r], cfg.tol.morawetz_stability));
  }
  return rep;
}

// ---------------------------------------------------------------------------

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  const auto& s = cfg.scenario;
  if (s == "simulate") return run_simulate(cfg);
  if (s == "conservation") return run_conservation(cfg);
  if (s == "identity") return run_identity(cfg);
  if (s == "strichartz") return run_strichartz_ensemble(cfg);
  if (s == "embeddings") return run_embedding_ensembles(cfg);
  if (s == "scattering") return run_scattering(cfg);
  if (s == "blowup") return run_blowup(cfg);
  if (s == "morawetz") return run_morawetz(cfg);
  throw ConfigError("unknown scenario '" + s + "'");
}

std::vector<ScenarioConfig> acceptance_configs() {
  std::vector<ScenarioConfig> out;
  auto base = [](std::string scenario, Model model, int p) {
    ScenarioConfig c;
    c.scenario = std::move(scenario);
    c.model.model = model;
    c.model.p = p;
    c.grid.div_nodes = 193;
    c.grid.div_half_width = 9.0;
    return c;
  };

  ScenarioConfig id = base("identity", Model::NonDiv, 4);
  id.grid.div_nodes = 257;
  id.grid.div_half_width = 12.0;
  out.push_back(id);

  for (auto [model, p] : {std::pair{Model::NonDiv, 4}, std::pair{Model::Div, 2}}) {
    ScenarioConfig c = base("conservation", model, p);
    c.grid.n_x = 512;
    c.horizon = 1.0;
    c.dt = 1e-3;
    out.push_back(c);
  }

  for (Model model : {Model::NonDiv, Model::Div}) {
    ScenarioConfig c = base("strichartz", model, 4);
    c.grid.n_x = 256;
    c.grid.div_nodes = 97;
    c.grid.div_half_width = 8.0;
    c.horizon = 4.0;
    c.ensemble = 64;
    c.band = 4;
    out.push_back(c);
  }

  ScenarioConfig emb = base("embeddings", Model::NonDiv, 4);
  emb.grid.n_alpha = 64;
  emb.ensemble = 256;
  emb.band = 8;
  out.push_back(emb);

  ScenarioConfig sc = base("scattering", Model::NonDiv, 4);
  sc.grid.n_x = 1024;
  sc.grid.box_half_length = 64.0 * kPi;
  sc.grid.n_alpha = 64;
  sc.dt = 5e-3;
  sc.delta = 0.05;
  out.push_back(sc);

  ScenarioConfig bu = base("blowup", Model::Div, 4);
  bu.model.sign = Sign::Focusing;
  bu.grid.n_x = 512;
  bu.grid.box_half_length = 8.0;
  bu.dt = 2e-4;
  bu.horizon = 1.0;
  bu.samples = 100;
  out.push_back(bu);

  for (Model model : {Model::NonDiv, Model::Div}) {
    ScenarioConfig c = base("morawetz", model, 4);
    c.grid.n_x = 256;
    c.horizon = 2.0;
    c.samples = 40;
    c.initial = GaussianRecipe{1.0, 1.0, 1.0, 1.0};
    out.push_back(c);
  }
  return out;
}

}  // namespace ounls
