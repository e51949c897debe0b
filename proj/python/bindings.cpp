#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ounls/config.hpp"
#include "ounls/io.hpp"

namespace py = pybind11;
using namespace ounls;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

// Fields cross the boundary as arrays shaped (n_x, [n_x,] n_alpha).
CArray to_array(const Field& f, const Discretization& disc) {
  std::vector<py::ssize_t> shape(disc.grid().dim(), disc.grid().points_per_axis());
  shape.push_back(static_cast<py::ssize_t>(disc.alpha_size()));
  CArray out(shape);
  std::copy(f.data.begin(), f.data.end(), out.mutable_data());
  return out;
}

Field to_field(const CArray& a, const Discretization& disc, double time = 0.0) {
  if (static_cast<std::size_t>(a.size()) != disc.x_size() * disc.alpha_size()) {
    throw std::invalid_argument("array size does not match the discretization");
  }
  Field f = disc.make_field();
  std::copy(a.data(), a.data() + a.size(), f.data.begin());
  f.time = time;
  return f;
}

py::dict record_dict(const DiagnosticsRecord& r) {
  py::dict d;
  d["time"] = r.time;
  d["mass"] = r.mass;
  d["energy"] = r.energy;
  d["h1_native"] = r.h1_native;
  d["virial"] = r.virial;
  d["virial_rhs"] = r.virial_rhs;
  d["morawetz_I"] = r.morawetz_I;
  d["morawetz_dI_bound"] = r.morawetz_dI_bound;
  d["tail_mass_fraction"] = r.tail_mass_fraction;
  d["boundary_mass_fraction"] = r.boundary_mass_fraction;
  return d;
}

py::dict stats_dict(const RatioStats& s) {
  py::dict d;
  d["count"] = s.count;
  d["max"] = s.max;
  d["mean"] = s.mean;
  d["median"] = s.median;
  d["q90"] = s.q90;
  return d;
}

py::dict report_dict(const ScenarioReport& rep) {
  py::dict d;
  d["scenario"] = rep.scenario;
  d["pass"] = rep.pass();
  py::list checks;
  for (const auto& c : rep.checks) {
    py::dict x;
    x["name"] = c.name;
    x["pass"] = c.pass;
    x["value"] = c.value;
    x["limit"] = c.limit;
    x["detail"] = c.detail;
    checks.append(x);
  }
  d["checks"] = checks;
  py::list ens;
  for (const auto& e : rep.ensembles) {
    py::dict x;
    x["label"] = e.label;
    x["pass"] = e.pass;
    x["coarse"] = stats_dict(e.coarse);
    x["fine"] = stats_dict(e.fine);
    x["relative_change"] = e.relative_change;
    x["ceiling"] = e.ceiling;
    ens.append(x);
  }
  d["ensembles"] = ens;
  py::list recs;
  for (const auto& r : rep.records) recs.append(record_dict(r));
  d["records"] = recs;
  d["columns"] = rep.table.columns;
  d["rows"] = rep.table.rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ounls, m) {
  m.doc() = "Pseudospectral OU-NLS simulator core";
  m.attr("__version__") = kToolVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<Model>(m, "Model").value("Div", Model::Div).value("NonDiv", Model::NonDiv);
  py::enum_<Sign>(m, "Sign").value("Defocusing", Sign::Defocusing).value("Focusing", Sign::Focusing);
  py::enum_<Dealias>(m, "Dealias").value("TwoThirds", Dealias::TwoThirds).value("None_", Dealias::None);
  py::enum_<Rho>(m, "Rho").value("Abs", Rho::Abs).value("Bracket", Rho::Bracket);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init([](Model model, int d, int p, Sign sign, double scale) {
             ModelSpec s{model, d, p, sign, scale};
             s.validate();
             return s;
           }),
           py::arg("model") = Model::NonDiv, py::arg("d") = 1, py::arg("p") = 4,
           py::arg("sign") = Sign::Defocusing, py::arg("nonlinear_scale") = 1.0)
      .def_readwrite("model", &ModelSpec::model)
      .def_readwrite("d", &ModelSpec::d)
      .def_readwrite("p", &ModelSpec::p)
      .def_readwrite("sign", &ModelSpec::sign)
      .def_readwrite("nonlinear_scale", &ModelSpec::nonlinear_scale);

  py::class_<DiscretizationSpec>(m, "DiscretizationSpec")
      .def(py::init([](int n_x, double L, int n_alpha, int div_nodes, double div_half_width,
                       Dealias dealias) {
             return DiscretizationSpec{n_x, L, n_alpha, div_nodes, div_half_width, dealias};
           }),
           py::arg("n_x") = 256, py::arg("box_half_length") = 0.0, py::arg("n_alpha") = 64,
           py::arg("div_nodes") = 513, py::arg("div_half_width") = 12.0,
           py::arg("dealias") = Dealias::TwoThirds)
      .def_readwrite("n_x", &DiscretizationSpec::n_x)
      .def_readwrite("box_half_length", &DiscretizationSpec::box_half_length)
      .def_readwrite("n_alpha", &DiscretizationSpec::n_alpha)
      .def_readwrite("div_nodes", &DiscretizationSpec::div_nodes)
      .def_readwrite("div_half_width", &DiscretizationSpec::div_half_width)
      .def_readwrite("dealias", &DiscretizationSpec::dealias);

  py::class_<HermiteBasis>(m, "HermiteBasis")
      .def_static("build", &HermiteBasis::build, py::arg("n_alpha"))
      .def("size", &HermiteBasis::size)
      .def_property_readonly("nodes", [](const HermiteBasis& b) {
        return std::vector<double>(b.nodes().begin(), b.nodes().end());
      })
      .def_property_readonly("weights", [](const HermiteBasis& b) {
        return std::vector<double>(b.weights().begin(), b.weights().end());
      })
      .def_property_readonly("table", &HermiteBasis::table);

  py::class_<Discretization, std::shared_ptr<Discretization>>(m, "Discretization")
      .def(py::init<const ModelSpec&, const DiscretizationSpec&>(), py::arg("model"),
           py::arg("grid") = DiscretizationSpec{})
      .def_property_readonly("shape", [](const Discretization& d) {
        std::vector<std::size_t> s(d.grid().dim(), d.grid().points_per_axis());
        s.push_back(d.alpha_size());
        return s;
      })
      .def_property_readonly("x", [](const Discretization& d) {
        std::vector<double> x(d.grid().points_per_axis());
        for (int i = 0; i < d.grid().points_per_axis(); ++i) x[i] = d.grid().coordinate(i);
        return x;
      })
      .def_property_readonly("alpha", [](const Discretization& d) {
        return std::vector<double>(d.alpha_nodes().begin(), d.alpha_nodes().end());
      })
      .def("gaussian",
           [](const Discretization& d, double amplitude, double x_width, double alpha_width,
              double wavenumber) {
             return to_array(make_initial(d, GaussianRecipe{amplitude, x_width, alpha_width, wavenumber}), d);
           },
           py::arg("amplitude") = 1.0, py::arg("x_width") = 1.0, py::arg("alpha_width") = 1.0,
           py::arg("wavenumber") = 0.0)
      .def("random",
           [](const Discretization& d, std::uint64_t seed, int band, double amplitude) {
             return to_array(make_initial(d, RandomRecipe{seed, band, amplitude}), d);
           },
           py::arg("seed") = 1, py::arg("band") = 4, py::arg("amplitude") = 1.0)
      .def("mass", [](const Discretization& d, const CArray& u) { return mass(to_field(u, d), d); })
      .def("energy", [](const Discretization& d, const CArray& u) { return energy(to_field(u, d), d); })
      .def("h1_native", [](const Discretization& d, const CArray& u) { return h1_native(to_field(u, d), d); })
      .def("virial", [](const Discretization& d, const CArray& u) { return virial(to_field(u, d), d); })
      .def("virial_rhs", [](const Discretization& d, const CArray& u) { return virial_rhs(to_field(u, d), d); })
      .def("morawetz_I",
           [](const Discretization& d, const CArray& u, Rho rho) { return morawetz_I(to_field(u, d), d, rho); },
           py::arg("u"), py::arg("rho") = Rho::Bracket)
      .def("diagnose",
           [](const Discretization& d, const CArray& u, Rho rho) { return record_dict(diagnose(to_field(u, d), d, rho)); },
           py::arg("u"), py::arg("rho") = Rho::Bracket)
      .def("linear_flow",
           [](const Discretization& d, const CArray& u, double t) {
             Field f = to_field(u, d);
             LinearPropagator(d, t).apply(f);
             return to_array(f, d);
           },
           py::arg("u"), py::arg("t"))
      .def("integrate",
           [](const Discretization& d, const CArray& u, double horizon, int samples, double dt,
              bool adaptive) {
             StepControl c;
             c.dt = dt;
             c.adaptive = adaptive;
             const Stepper stepper(d, c);
             IntegrationResult res;
             {
               const Field f = to_field(u, d);
               py::gil_scoped_release release;
               res = integrate(f, stepper, horizon, uniform_schedule(horizon, samples));
             }
             py::list recs;
             for (const auto& r : res.records) recs.append(record_dict(r));
             py::dict out;
             out["records"] = recs;
             out["field"] = to_array(res.final_state.field, d);
             out["time"] = res.final_state.field.time;
             out["steps"] = res.final_state.step_count;
             out["blowup"] = res.final_state.blowup_flag;
             out["blowup_time"] = res.final_state.blowup_time_estimate;
             out["blowup_reason"] = res.final_state.blowup_reason;
             return out;
           },
           py::arg("u"), py::arg("horizon"), py::arg("samples") = 10, py::arg("dt") = 1e-3,
           py::arg("adaptive") = false)
      .def("strichartz_ratios",
           [](const Discretization& d, const CArray& u, std::vector<std::pair<double, double>> pairs,
              const std::string& variant, double horizon, int samples_per_unit) {
             std::vector<StrichartzPair> ps;
             for (auto [q, r] : pairs) ps.push_back({q, r});
             StrichartzVariant v = StrichartzVariant::L2;
             if (variant == "k1") v = StrichartzVariant::Derivative;
             else if (variant == "h1alpha") v = StrichartzVariant::H1Alpha;
             else if (variant != "k0") throw std::invalid_argument("variant must be k0, k1 or h1alpha");
             return strichartz_ratios(d, to_field(u, d), ps, v, horizon, samples_per_unit);
           },
           py::arg("u"), py::arg("pairs"), py::arg("variant") = "k0", py::arg("horizon") = 4.0,
           py::arg("samples_per_unit") = 64);

  m.def("check_admissible",
        [](int d, double q, double r) { check_admissible(d, {q, r}); },
        py::arg("d"), py::arg("q"), py::arg("r"));
  m.def("sobolev_ratio",
        [](const std::vector<cplx>& c, const HermiteBasis& b) { return sobolev_ratio(c, b); },
        py::arg("coeffs"), py::arg("basis"));
  m.def("nonlinear_ratio",
        [](const std::vector<cplx>& c, const HermiteBasis& b, int p) { return nonlinear_ratio(c, b, p); },
        py::arg("coeffs"), py::arg("basis"), py::arg("p"));
  m.def("counterexample_ratio", &counterexample_ratio, py::arg("radius"), py::arg("p"),
        py::arg("weighted"));
  m.def("ou_eigen_error", &ou_eigen_error, py::arg("basis"), py::arg("modes"));

  m.def("config_keys", &config_keys);
  m.def("resolved_config",
        [](const std::string& text, const std::vector<std::string>& overrides) {
          return config_to_json(parse_config(text, overrides)).dump();
        },
        py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{},
        "Parse config text and return the resolved configuration as JSON text.");
  m.def("run_scenario",
        [](const std::string& text, const std::vector<std::string>& overrides) {
          const auto cfg = parse_config(text, overrides);
          ScenarioReport rep;
          {
            py::gil_scoped_release release;
            rep = run_scenario(cfg);
          }
          return report_dict(rep);
        },
        py::arg("text") = "", py::arg("overrides") = std::vector<std::string>{});
  m.def("acceptance_scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : acceptance_configs()) out.emplace_back(c.scenario, to_string(c.model.model));
    return out;
  });
  m.def("git_blob_hash", [](const py::bytes& b) { return git_blob_hash(std::string(b)); });
  m.def("format_double", &format_double);
}
