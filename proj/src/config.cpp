#include "ounls/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace ounls {

namespace {

struct InitialSettings {
  std::string kind = "gaussian";
  GaussianRecipe gaussian;
  RandomRecipe random;
  bool seed_set = false;
  std::vector<std::string> random_keys_used;
  std::vector<std::string> gaussian_keys_used;
};

struct Draft {
  ScenarioConfig cfg;
  InitialSettings initial;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what, const std::string& v) {
  throw ConfigError(key + ": expected " + what + ", got '" + v + "'");
}

double to_double(const std::string& key, const std::string& raw) {
  std::string v = lower(trim(raw));
  if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double factor = 1.0;
  if (v.size() >= 2 && v.compare(v.size() - 2, 2, "pi") == 0) {
    factor = kPi;
    v.resize(v.size() - 2);
    v = trim(v);
    if (!v.empty() && v.back() == '*') v = trim(v.substr(0, v.size() - 1));
    if (v.empty()) return kPi;
  }
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
    bad_value(key, "a number", raw);
  }
  return x * factor;
}

long long to_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) bad_value(key, "an integer", raw);
  return x;
}

int to_int32(const std::string& key, const std::string& raw) {
  const long long x = to_int(key, raw);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    bad_value(key, "an integer in range", raw);
  }
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  errno = 0;
  char* end = nullptr;
  if (!v.empty() && v[0] == '-') bad_value(key, "a nonnegative integer", raw);
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    bad_value(key, "a nonnegative integer", raw);
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  bad_value(key, "a boolean", raw);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : split(raw, ',')) out.push_back(to_double(key, item));
  if (out.empty()) bad_value(key, "a comma-separated list of numbers", raw);
  return out;
}

using Setter = std::function<void(Draft&, const std::string& key, const std::string& value)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"model.model",
       [](Draft& d, const std::string& k, const std::string& v) {
         const auto s = lower(trim(v));
         if (s == "div") d.cfg.model.model = Model::Div;
         else if (s == "nondiv" || s == "non-div") d.cfg.model.model = Model::NonDiv;
         else bad_value(k, "'div' or 'nondiv'", v);
       }},
      {"model.d", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.model.d = to_int32(k, v); }},
      {"model.p",
       [](Draft& d, const std::string&, const std::string& v) {
         const std::string t = trim(v);
         char* end = nullptr;
         const long long x = std::strtoll(t.c_str(), &end, 10);
         if (t.empty() || end != t.c_str() + t.size()) {
           throw ConfigError("p must be a positive even integer, got " + t);
         }
         d.cfg.model.p = static_cast<int>(x);
       }},
      {"model.sign",
       [](Draft& d, const std::string& k, const std::string& v) {
         const auto s = lower(trim(v));
         if (s == "defocusing" || s == "+1" || s == "1") d.cfg.model.sign = Sign::Defocusing;
         else if (s == "focusing" || s == "-1") d.cfg.model.sign = Sign::Focusing;
         else bad_value(k, "'defocusing' or 'focusing'", v);
       }},
      {"model.nonlinear_scale",
       [](Draft& d, const std::string& k, const std::string& v) { d.cfg.model.nonlinear_scale = to_double(k, v); }},

      {"grid.n_x", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.grid.n_x = to_int32(k, v); }},
      {"grid.box_half_length",
       [](Draft& d, const std::string& k, const std::string& v) { d.cfg.grid.box_half_length = to_double(k, v); }},
      {"grid.n_alpha", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.grid.n_alpha = to_int32(k, v); }},
      {"grid.div_nodes", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.grid.div_nodes = to_int32(k, v); }},
      {"grid.div_half_width",
       [](Draft& d, const std::string& k, const std::string& v) { d.cfg.grid.div_half_width = to_double(k, v); }},
      {"grid.dealias",
       [](Draft& d, const std::string& k, const std::string& v) {
         const auto s = lower(trim(v));
         if (s == "two_thirds" || s == "2/3") d.cfg.grid.dealias = Dealias::TwoThirds;
         else if (s == "none") d.cfg.grid.dealias = Dealias::None;
         else bad_value(k, "'two_thirds' or 'none'", v);
       }},

      {"initial.kind",
       [](Draft& d, const std::string& k, const std::string& v) {
         const auto s = lower(trim(v));
         if (s != "gaussian" && s != "random") bad_value(k, "'gaussian' or 'random'", v);
         d.initial.kind = s;
       }},
      {"initial.amplitude",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.gaussian.amplitude = d.initial.random.amplitude = to_double(k, v);
       }},
      {"initial.x_width",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.gaussian.x_width = to_double(k, v);
         d.initial.gaussian_keys_used.push_back(k);
       }},
      {"initial.alpha_width",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.gaussian.alpha_width = to_double(k, v);
         d.initial.gaussian_keys_used.push_back(k);
       }},
      {"initial.wavenumber",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.gaussian.wavenumber = to_double(k, v);
         d.initial.gaussian_keys_used.push_back(k);
       }},
      {"initial.seed",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.random.seed = to_u64(k, v);
         d.initial.seed_set = true;
         d.initial.random_keys_used.push_back(k);
       }},
      {"initial.band",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.initial.random.band = to_int32(k, v);
         d.initial.random_keys_used.push_back(k);
       }},

      {"run.scenario", [](Draft& d, const std::string&, const std::string& v) { d.cfg.scenario = lower(trim(v)); }},
      {"run.horizon", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.horizon = to_double(k, v); }},
      {"run.dt", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.dt = to_double(k, v); }},
      {"run.adaptive", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.adaptive = to_bool(k, v); }},
      {"run.samples", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.samples = to_int32(k, v); }},
      {"run.rho",
       [](Draft& d, const std::string& k, const std::string& v) {
         const auto s = lower(trim(v));
         if (s == "abs") d.cfg.rho = Rho::Abs;
         else if (s == "bracket") d.cfg.rho = Rho::Bracket;
         else bad_value(k, "'abs' or 'bracket'", v);
       }},
      {"run.ensemble", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.ensemble = to_int32(k, v); }},
      {"run.seed", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.seed = to_u64(k, v); }},
      {"run.band", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.band = to_int32(k, v); }},
      {"run.fine_factor", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.fine_factor = to_int32(k, v); }},
      {"run.pairs",
       [](Draft& d, const std::string& k, const std::string& v) {
         d.cfg.pairs.clear();
         for (const auto& item : split(v, ',')) {
           const auto qr = split(item, ':');
           if (qr.size() != 2) bad_value(k, "pairs written q:r separated by commas", v);
           d.cfg.pairs.push_back({to_double(k, qr[0]), to_double(k, qr[1])});
         }
         if (d.cfg.pairs.empty()) bad_value(k, "at least one q:r pair", v);
       }},
      {"run.samples_per_unit",
       [](Draft& d, const std::string& k, const std::string& v) { d.cfg.samples_per_unit = to_int32(k, v); }},
      {"run.radii", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.radii = to_list(k, v); }},
      {"run.delta", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.delta = to_double(k, v); }},
      {"run.ladder", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.ladder = to_list(k, v); }},
      {"run.threads", [](Draft& d, const std::string& k, const std::string& v) { d.cfg.threads = to_int32(k, v); }},
      {"run.output", [](Draft& d, const std::string&, const std::string& v) { d.cfg.output = trim(v); }},
  };
  return table;
}

const Setter* find_setter(const std::string& key) {
  for (const auto& [name, fn] : setters()) {
    if (name == key) return &fn;
  }
  return nullptr;
}

std::string resolve_override_key(const std::string& key) {
  if (key.find('.') != std::string::npos) return key;
  std::string found;
  for (const auto& [name, fn] : setters()) {
    if (name.substr(name.find('.') + 1) == key) {
      if (!found.empty()) {
        throw ConfigError("ambiguous key '" + key + "' (matches " + found + " and " + name +
                          "); use section.key");
      }
      found = name;
    }
  }
  if (found.empty()) throw ConfigError("unknown key '" + key + "'");
  return found;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : setters()) out.push_back(name);
  return out;
}

ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string section;
  std::istringstream is{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    // '#' or ';' after whitespace starts a trailing comment.
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && std::isspace(static_cast<unsigned char>(line[i - 1]))) {
        line.erase(i);
        break;
      }
    }
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = lower(trim(t.substr(1, t.size() - 2)));
      if (section != "model" && section != "grid" && section != "initial" && section != "run") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = lower(trim(t.substr(0, eq)));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' outside a section");
    }
    entries.emplace_back(section + "." + key, value);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not key=value");
    entries.emplace_back(resolve_override_key(lower(trim(o.substr(0, eq)))), trim(o.substr(eq + 1)));
  }

  Draft draft;
  for (const auto& [key, value] : entries) {
    const Setter* fn = find_setter(key);
    if (!fn) throw ConfigError("unknown key '" + key + "'");
    (*fn)(draft, key, value);
  }

  auto& init = draft.initial;
  if (init.kind == "gaussian") {
    if (!init.random_keys_used.empty()) {
      throw ConfigError(init.random_keys_used.front() + " only applies to initial.kind = random");
    }
    draft.cfg.initial = init.gaussian;
  } else {
    if (!init.gaussian_keys_used.empty()) {
      throw ConfigError(init.gaussian_keys_used.front() + " only applies to initial.kind = gaussian");
    }
    if (!init.seed_set) init.random.seed = draft.cfg.seed;
    draft.cfg.initial = init.random;
  }
  draft.cfg.grid.box_half_length = draft.cfg.grid.resolved_half_length(draft.cfg.model.d);
  draft.cfg.validate();
  return draft.cfg;
}

ScenarioConfig parse_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

nlohmann::ordered_json config_to_json(const ScenarioConfig& cfg) {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  ordered_json j;
  j["scenario"] = cfg.scenario;
  j["model"] = {{"model", to_string(cfg.model.model)},
                {"d", cfg.model.d},
                {"p", cfg.model.p},
                {"sign", to_string(cfg.model.sign)},
                {"nonlinear_scale", cfg.model.nonlinear_scale}};
  j["grid"] = {{"n_x", cfg.grid.n_x},
               {"box_half_length", cfg.grid.resolved_half_length(cfg.model.d)},
               {"n_alpha", cfg.grid.n_alpha},
               {"div_nodes", cfg.grid.div_nodes},
               {"div_half_width", cfg.grid.div_half_width},
               {"dealias", cfg.grid.dealias == Dealias::TwoThirds ? "two_thirds" : "none"}};
  if (const auto* g = std::get_if<GaussianRecipe>(&cfg.initial)) {
    j["initial"] = {{"kind", "gaussian"},
                    {"amplitude", g->amplitude},
                    {"x_width", g->x_width},
                    {"alpha_width", g->alpha_width},
                    {"wavenumber", g->wavenumber}};
  } else {
    const auto& r = std::get<RandomRecipe>(cfg.initial);
    j["initial"] = {{"kind", "random"}, {"amplitude", r.amplitude}, {"seed", r.seed}, {"band", r.band}};
  }
  ordered_json pairs = ordered_json::array();
  for (const auto& p : cfg.pairs) pairs.push_back({num(p.q), num(p.r)});
  j["run"] = {{"horizon", cfg.horizon},
              {"dt", cfg.dt},
              {"adaptive", cfg.adaptive},
              {"samples", cfg.samples},
              {"rho", cfg.rho == Rho::Abs ? "abs" : "bracket"},
              {"ensemble", cfg.ensemble},
              {"seed", cfg.seed},
              {"band", cfg.band},
              {"fine_factor", cfg.fine_factor},
              {"pairs", pairs},
              {"samples_per_unit", cfg.samples_per_unit},
              {"radii", cfg.radii},
              {"delta", cfg.delta},
              {"ladder", cfg.ladder},
              {"threads", cfg.threads},
              {"output", cfg.output}};
  return j;
}

}  // namespace ounls
