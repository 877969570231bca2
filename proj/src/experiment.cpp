#include "ergo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "ergo/smalldiv.hpp"

namespace ergo::cli {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("invalid " + what + ": '" + text + "'");
  }
}

long to_long(const std::string& text, const std::string& what) {
  const double v = to_double(text, what);
  if (v != std::floor(v) || std::abs(v) > 1e15) throw ParameterError(what + " must be an integer: '" + text + "'");
  return static_cast<long>(v);
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Decimal, p/q, exp(x), or a named constant.
Real parse_number(const std::string& raw, Bits bits) {
  const std::string text = trim(raw);
  if (text.empty()) throw ParameterError("empty number");
  PrecisionScope scope(bits);
  if (text == "pi") return pi(bits);
  if (text == "2pi") return two_pi(bits);
  if (text == "e") return exp(Real(1));
  if (text == "golden" || text == "golden_phi" || text == "sqrt2" || text == "inv_pi" || text == "3/(2pi)")
    return parse_rotation(text, bits);
  if (text.size() > 5 && text.rfind("exp(", 0) == 0 && text.back() == ')')
    return exp(parse_number(text.substr(4, text.size() - 5), bits));
  if (text.front() == '-' && text.size() > 1 && !std::isdigit(static_cast<unsigned char>(text[1])) &&
      text[1] != '.')
    return -parse_number(text.substr(1), bits);
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    Real den = parse_number(text.substr(slash + 1), bits);
    if (den.is_zero()) throw ParameterError("zero denominator in '" + text + "'");
    return parse_number(text.substr(0, slash), bits) / den;
  }
  return Real::from_string(text, bits);
}

std::vector<Real> parse_numbers(const std::string& text, Bits bits) {
  std::vector<Real> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number(part, bits));
  return out;
}

struct KeyInfo {
  const char* key;
  const char* help;
};

const std::vector<KeyInfo>& key_table() {
  static const std::vector<KeyInfo> table = {
      {"weight", "exp_pq:p,q | exp_width:gamma | laskar_sin2 | poly_x1mx | uniform"},
      {"schedule", "squares:a..b[:s] | geom:a..b:r | list:x,y,..."},
      {"precision_bits", "working mantissa bits (oracle = 2x)"},
      {"output", "output prefix; writes <prefix>.csv and <prefix>.json"},
      {"fit_exponent", "exponent a of the fit abscissa N^a"},
      {"fit_log_power", "power c in N^a / (ln N)^c"},
      {"fit_model", "auto | power | log"},
      {"lambda", "decay rate per step"},
      {"rho", "rotation per step (radians; unit torus for quasi-periodic, comma list for d > 1)"},
      {"theta", "initial phase (comma list for quasi-periodic d > 1)"},
      {"observable", "trig | poisson | gaussian | poly | kappa"},
      {"trig_c0", "constant term of the trig polynomial"},
      {"trig_a", "cosine coefficients a_1..a_l"},
      {"trig_b", "sine coefficients b_1..b_l"},
      {"poisson_q", "Poisson kernel parameter in (0,1)"},
      {"gaussian_ktail", "Gaussian-Fourier truncation (0 = automatic)"},
      {"poly", "polynomial coefficients Q_0..Q_nu"},
      {"kappa_m", "kappa bound M"},
      {"kappa_tau", "kappa order tau"},
      {"kappa_rule", "power | signed_power | oscillating"},
      {"matrix", "linear map rows separated by ';', entries by ','"},
      {"x0", "initial state, comma separated"},
      {"eigen_reading", "decay_rate | modulus"},
      {"map", "quadratic:a,b  (x -> a x + b x^2)"},
      {"bound", "bounding box for map orbits (max-norm)"},
      {"variant", "trig_poly | diophantine | almost_all | dwryzs"},
      {"zeta", "log power for the almost-every-rotation variant"},
      {"v", "Fourier decay exponent for the dwryzs variant"},
      {"quad_panels", "initial quadrature panels"},
      {"quad_nodes", "Gauss nodes per panel"},
      {"quad_tol", "quadrature relative tolerance"},
      {"quad_doublings", "maximum panel doublings"},
      {"grid", "probe grid points"},
      {"weights", "probe weights separated by ';'"},
      {"which", "l1_decay | derivative_growth | phi_psi | all"},
      {"lambdas", "lambda values for l1_decay"},
      {"m_max", "largest derivative order for derivative_growth"},
      {"pq", "p = q values for derivative_growth"},
      {"slack", "allowed excess over 1 + 1/min(p,q)"},
      {"tolerance", "relative slope tolerance for l1_decay"},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : key_table()) k.emplace_back(e.key);
    return k;
  }();
  return keys;
}

std::string key_help(const std::string& key) {
  for (const auto& e : key_table())
    if (key == e.key) return e.help;
  return {};
}

ExperimentKind parse_kind(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  static const std::map<std::string, ExperimentKind> kinds = {
      {"decaying_wave", ExperimentKind::decaying_wave}, {"superposition", ExperimentKind::superposition},
      {"composed", ExperimentKind::composed},           {"continuous", ExperimentKind::continuous},
      {"linear_orbit", ExperimentKind::linear_orbit},   {"map_orbit", ExperimentKind::map_orbit},
      {"quasi_periodic", ExperimentKind::quasi_periodic}, {"weights_probe", ExperimentKind::weights_probe},
      {"probe_weights", ExperimentKind::weights_probe}, {"lemma_check", ExperimentKind::lemma_check},
  };
  auto it = kinds.find(n);
  if (it == kinds.end()) throw ParameterError("unknown experiment '" + std::string(name) + "'");
  return it->second;
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::decaying_wave: return "decaying_wave";
    case ExperimentKind::superposition: return "superposition";
    case ExperimentKind::composed: return "composed";
    case ExperimentKind::continuous: return "continuous";
    case ExperimentKind::linear_orbit: return "linear_orbit";
    case ExperimentKind::map_orbit: return "map_orbit";
    case ExperimentKind::quasi_periodic: return "quasi_periodic";
    case ExperimentKind::weights_probe: return "weights_probe";
    case ExperimentKind::lemma_check: return "lemma_check";
  }
  return "unknown";
}

void Settings::merge(const Settings& over) {
  for (const auto& [k, v] : over.values) values[k] = v;
  if (!over.components.empty()) components = over.components;
}

Settings parse_config_text(std::string_view text, const std::string& origin) {
  Settings s;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.rfind("component.", 0) == 0) {
      const long k = to_long(key.substr(10), origin + ":" + std::to_string(line_no) + " component index");
      s.components[static_cast<int>(k)] = value;
      continue;
    }
    if (key == "experiment") {
      parse_kind(value);
      s.values[key] = value;
      continue;
    }
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParameterError(origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    s.values[key] = value;
  }
  return s;
}

Settings load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::vector<double> parse_schedule(std::string_view text_view) {
  const std::string text = trim(text_view);
  std::vector<double> out;
  auto range = [&](const std::string& body, double& a, double& b) {
    const auto dots = body.find("..");
    if (dots == std::string::npos) throw ParameterError("schedule range needs a..b: '" + text + "'");
    a = to_double(trim(body.substr(0, dots)), "schedule start");
    b = to_double(trim(body.substr(dots + 2)), "schedule end");
    if (!(a > 0) || !(b >= a)) throw ParameterError("schedule range must satisfy 0 < a <= b");
  };
  if (text.rfind("squares:", 0) == 0) {
    std::string body = text.substr(8);
    long step = 5;
    if (const auto colon = body.rfind(':'); colon != std::string::npos) {
      step = to_long(trim(body.substr(colon + 1)), "squares step");
      if (step < 1) throw ParameterError("squares step must be positive");
      body = body.substr(0, colon);
    }
    double a, b;
    range(body, a, b);
    long k = static_cast<long>(std::ceil(std::sqrt(a)));
    if (static_cast<double>(k - 1) * (k - 1) >= a) --k;
    for (; static_cast<double>(k) * k <= b; k += step) out.push_back(static_cast<double>(k) * k);
  } else if (text.rfind("geom:", 0) == 0) {
    const std::string body = text.substr(5);
    const auto colon = body.rfind(':');
    if (colon == std::string::npos) throw ParameterError("geom schedule needs geom:a..b:r");
    double a, b;
    range(body.substr(0, colon), a, b);
    const double r = to_double(trim(body.substr(colon + 1)), "geometric ratio");
    if (!(r > 1)) throw ParameterError("geometric ratio must exceed 1");
    for (double x = a; x <= b * (1 + 1e-12); x *= r) {
      const double v = std::round(x);
      if (out.empty() || v > out.back()) out.push_back(v);
    }
  } else {
    std::string body = text.rfind("list:", 0) == 0 ? text.substr(5) : text;
    if (!trim(body).empty())
      for (const auto& part : split(body, ',')) out.push_back(to_double(part, "schedule entry"));
  }
  if (out.empty()) throw ParameterError("schedule is empty");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] > out[i - 1])) throw ParameterError("schedule must be strictly increasing");
  return out;
}

std::string ExperimentConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = settings.values.find(key);
  return it == settings.values.end() ? fallback : it->second;
}

namespace {

std::string default_schedule(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::continuous: return "list:16,25,36,49";
    case ExperimentKind::quasi_periodic: return "list:100,200,400,700,1000,1500,2000,3000,4000";
    case ExperimentKind::weights_probe:
    case ExperimentKind::lemma_check: return "geom:64..4096:2";
    default: return "squares:100..1600";
  }
}

}  // namespace

ExperimentConfig resolve_config(ExperimentKind kind, const Settings& file, const Settings& flags,
                                const char* env_precision) {
  ExperimentConfig c;
  c.kind = kind;
  Settings merged;
  if (env_precision && *env_precision) merged.values["precision_bits"] = env_precision;
  merged.merge(file);
  merged.merge(flags);
  if (auto it = merged.values.find("experiment"); it != merged.values.end() && parse_kind(it->second) != kind)
    throw ParameterError("config file is for experiment '" + it->second + "', not '" + kind_name(kind) + "'");
  c.settings = merged;

  const long bits = to_long(c.get("precision_bits", "256"), "precision_bits");
  c.precision = Precision::with_bits(bits);
  c.precision.validate();
  c.weight = WeightSpec::parse(c.get("weight", "exp_pq:1,1"));
  c.schedule = parse_schedule(c.get("schedule", default_schedule(kind)));
  c.output = c.get("output", "ergoaccel_" + kind_name(kind));
  if (c.output.empty()) throw ParameterError("output prefix is empty");
  if (auto v = c.get("fit_exponent"); !v.empty()) {
    c.fit_exponent = to_double(v, "fit_exponent");
    if (!(*c.fit_exponent > 0 && *c.fit_exponent <= 1)) throw ParameterError("fit_exponent must lie in (0,1]");
  }
  c.fit_log_power = to_double(c.get("fit_log_power", "0"), "fit_log_power");
  c.fit_model = c.get("fit_model", "auto");
  if (c.fit_model != "auto" && c.fit_model != "power" && c.fit_model != "log")
    throw ParameterError("fit_model must be auto, power or log");
  c.quadrature.initial_panels = static_cast<int>(to_long(c.get("quad_panels", "16"), "quad_panels"));
  c.quadrature.nodes_per_panel = static_cast<int>(to_long(c.get("quad_nodes", "24"), "quad_nodes"));
  c.quadrature.relative_tolerance = to_double(c.get("quad_tol", "1e-30"), "quad_tol");
  c.quadrature.max_doublings = static_cast<int>(to_long(c.get("quad_doublings", "10"), "quad_doublings"));
  c.quadrature.validate(c.precision);
  return c;
}

int output_digits(Bits bits) { return static_cast<int>(std::floor(static_cast<double>(bits) * 0.3)); }

namespace {

bool has_rate_theory(const WeightSpec& w) {
  return (w.kind == KernelKind::exp_pq && w.p >= 1 && w.q >= 1) || w.kind == KernelKind::exp_width;
}

// sqrt(2 gamma l) + e^{-1} sqrt(l^2 + dist^2); gamma = 1 except for the width kernel.
Real weighted_rate(const WeightSpec& w, const Real& lambda, const Real& rho, bool continuous, const Precision& p) {
  if (continuous) {
    Real base = xi_con(lambda, rho, p);
    if (w.kind != KernelKind::exp_width) return base;
    PrecisionScope scope(p.mantissa_bits);
    return base - sqrt(2 * lambda) + sqrt(2 * Real(w.gamma) * lambda);
  }
  if (w.kind == KernelKind::exp_width) return xi_width(lambda, rho, Real(w.gamma), p);
  return xi(lambda, rho, p);
}

ObservableSpec build_observable(const ExperimentConfig& c, const std::string& fallback) {
  const Bits bits = c.precision.mantissa_bits;
  const std::string kind = c.get("observable", fallback);
  if (kind == "trig") {
    std::vector<Real> a = parse_numbers(c.get("trig_a", "1"), bits);
    std::vector<Real> b = c.get("trig_b").empty() ? std::vector<Real>{} : parse_numbers(c.get("trig_b"), bits);
    return ObservableSpec::trig(parse_number(c.get("trig_c0", "0"), bits), a, b);
  }
  if (kind == "poisson") return ObservableSpec::poisson(parse_number(c.get("poisson_q", "0.5"), bits));
  if (kind == "gaussian")
    return ObservableSpec::gaussian(static_cast<int>(to_long(c.get("gaussian_ktail", "0"), "gaussian_ktail")));
  if (kind == "poly") return ObservableSpec::polynomial(parse_numbers(c.get("poly", "0,0,1"), bits));
  if (kind == "kappa") {
    const std::string rule = c.get("kappa_rule", "power");
    KappaRule r;
    if (rule == "power")
      r = KappaRule::power;
    else if (rule == "signed_power")
      r = KappaRule::signed_power;
    else if (rule == "oscillating")
      r = KappaRule::oscillating;
    else
      throw ParameterError("unknown kappa_rule '" + rule + "'");
    return ObservableSpec::kappa(parse_number(c.get("kappa_m", "1"), bits),
                                 static_cast<int>(to_long(c.get("kappa_tau", "1"), "kappa_tau")), r);
  }
  throw ParameterError("unknown observable '" + kind + "'");
}

DecayingWaveSpec build_wave(const ExperimentConfig& c) {
  const Bits bits = c.precision.mantissa_bits;
  DecayingWaveSpec w{parse_number(c.get("lambda", "2"), bits), parse_number(c.get("rho", "3"), bits),
                     parse_number(c.get("theta", "1"), bits)};
  w.validate();
  return w;
}

LinearSystemSpec build_linear(const ExperimentConfig& c) {
  const Bits bits = c.precision.mantissa_bits;
  LinearSystemSpec s;
  const auto rows = split(c.get("matrix", "exp(-2)"), ';');
  s.d = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    auto entries = parse_numbers(row, bits);
    if (entries.size() != rows.size()) throw ParameterError("matrix must be square");
    for (auto& e : entries) s.A.push_back(e);
  }
  if (c.get("x0").empty())
    s.x0.assign(static_cast<std::size_t>(s.d), Real(1).rounded(bits));
  else
    s.x0 = parse_numbers(c.get("x0"), bits);
  s.validate();
  return s;
}

void check_extents(const std::vector<double>& schedule, bool integer) {
  for (double v : schedule) {
    if (!(v > 0)) throw ParameterError("schedule entries must be positive");
    if (integer && (v < 2 || v != std::floor(v))) throw ParameterError("schedule entries must be integers >= 2");
  }
}

}  // namespace

PreparedSeries prepare_series(const ExperimentConfig& c) {
  const Precision& P = c.precision;
  const Bits bits = P.mantissa_bits;
  PrecisionScope scope(bits);
  PreparedSeries out;
  const bool rated = has_rate_theory(c.weight);
  out.theory.exponent_a = 0.5;

  switch (c.kind) {
    case ExperimentKind::decaying_wave: {
      DecayingWaveSpec w = build_wave(c);
      out.problem = wave_problem(c.weight, w);
      out.params = {{"lambda", c.get("lambda", "2")}, {"rho", c.get("rho", "3")}, {"theta", c.get("theta", "1")}};
      if (rated) {
        out.theory.xi = weighted_rate(c.weight, w.lambda, w.rho, false, P);
        out.theory.provenance = "weighted decaying wave: exp(-xi sqrt N)";
      } else if (c.weight.kind == KernelKind::uniform) {
        out.polynomial_coefficient = dw_leading_coefficient(w, P);
        out.theory.provenance = "unweighted decaying wave: c/N";
      }
      break;
    }
    case ExperimentKind::superposition: {
      if (c.settings.components.empty()) throw ParameterError("superposition needs component.k = c,lambda,rho lines");
      SuperpositionSpec s;
      s.theta = parse_number(c.get("theta", "1"), bits);
      for (const auto& [k, text] : c.settings.components) {
        auto v = parse_numbers(text, bits);
        if (v.size() != 3) throw ParameterError("component." + std::to_string(k) + " needs c,lambda,rho");
        s.components.push_back({v[0], v[1], v[2]});
        out.params["component." + std::to_string(k)] = text;
      }
      s.validate();
      out.params["theta"] = c.get("theta", "1");
      out.problem = superposition_problem(c.weight, s);
      if (rated) {
        std::optional<Real> best;
        for (const auto& comp : s.components) {
          if (comp.c.is_zero()) continue;
          Real v = weighted_rate(c.weight, comp.lambda, comp.rho, false, P);
          if (!best || v < *best) best = v;
        }
        out.theory.xi = best;
        out.theory.provenance = "superposed waves: slowest component";
      }
      break;
    }
    case ExperimentKind::composed: {
      DecayingWaveSpec w = build_wave(c);
      ObservableSpec obs = build_observable(c, "poly");
      out.problem = composed_problem(c.weight, w, obs);
      out.params = {{"lambda", c.get("lambda", "2")}, {"rho", c.get("rho", "3")},
                    {"theta", c.get("theta", "1")},   {"observable", obs.describe()}};
      if (c.weight.kind == KernelKind::exp_pq && rated) {
        switch (obs.kind) {
          case ObservableKind::trig_poly:
            if (obs.c0.is_zero()) {
              out.theory.xi = xi_trig(w.lambda, w.rho, obs.order(), P);
              out.theory.provenance = "trigonometric polynomial without constant term";
            } else {
              out.theory.xi = xi(w.lambda, Real(0), P);
              out.theory.provenance = "observable with absolutely summable Fourier series";
            }
            break;
          case ObservableKind::poisson_kernel:
          case ObservableKind::gaussian_fourier:
            out.theory.xi = xi(w.lambda, Real(0), P);
            out.theory.provenance = "observable with absolutely summable Fourier series";
            break;
          case ObservableKind::poly_compose:
            out.theory.xi = xi_poly(w.lambda, w.rho, obs.poly, P);
            out.theory.provenance = "polynomial of the wave";
            break;
          case ObservableKind::kappa_compose:
            out.theory.xi = xi_kappa(w.lambda, obs.tau, P);
            out.theory.provenance = "observable flat to order 2 tau at 0";
            break;
        }
      }
      break;
    }
    case ExperimentKind::continuous: {
      DecayingWaveSpec w = build_wave(c);
      out.problem = continuous_problem(c.weight, w, c.quadrature);
      out.params = {{"lambda", c.get("lambda", "2")}, {"rho", c.get("rho", "3")}, {"theta", c.get("theta", "1")}};
      if (rated) {
        out.theory.xi = weighted_rate(c.weight, w.lambda, w.rho, true, P);
        out.theory.provenance = "continuous weighted decaying wave: exp(-xi_con sqrt T)";
      } else if (c.weight.kind == KernelKind::uniform) {
        out.polynomial_coefficient = continuous_leading_coefficient(w, P);
        out.theory.provenance = "unweighted continuous wave: c/T";
      }
      break;
    }
    case ExperimentKind::linear_orbit: {
      LinearSystemSpec s = build_linear(c);
      out.problem = linear_orbit_problem(c.weight, s);
      out.params = {{"matrix", c.get("matrix", "exp(-2)")}, {"x0", c.get("x0", "1")}};
      const std::string reading = c.get("eigen_reading", "decay_rate");
      if (reading != "decay_rate" && reading != "modulus")
        throw ParameterError("eigen_reading must be decay_rate or modulus");
      out.params["eigen_reading"] = reading;
      if (rated) {
        out.theory.xi = xi_linear_system(
            s, reading == "modulus" ? EigenReading::modulus : EigenReading::decay_rate, P);
        out.theory.provenance = "linear contraction: slowest eigenvalue";
      }
      break;
    }
    case ExperimentKind::map_orbit: {
      const std::string map = c.get("map", "quadratic:0.5,0.1");
      if (map.rfind("quadratic:", 0) != 0) throw ParameterError("map must be quadratic:a,b");
      auto ab = parse_numbers(map.substr(10), bits);
      if (ab.size() != 2) throw ParameterError("quadratic map needs a,b");
      if (!(abs(ab[0]) < Real(1)) || ab[0].is_zero()) throw ParameterError("quadratic map needs 0 < |a| < 1");
      State x0 = parse_numbers(c.get("x0", "0.3"), bits);
      Real bound = parse_number(c.get("bound", "10"), bits);
      Real a = ab[0], b = ab[1];
      out.problem = map_orbit_problem(
          c.weight, "map_orbit:" + map, [a, b](const Precision& p) { return quadratic_step(a, b, p); }, x0, bound);
      out.params = {{"map", map}, {"x0", c.get("x0", "0.3")}, {"bound", c.get("bound", "10")}};
      if (rated) {
        out.theory.xi = xi(-log(abs(a)), Real(0), P);
        out.theory.provenance = "nonlinear contraction: linear part at the fixed point";
      }
      break;
    }
    case ExperimentKind::quasi_periodic: {
      TorusRotationSpec r;
      r.rho = parse_numbers(c.get("rho", "golden"), bits);
      r.d = static_cast<int>(r.rho.size());
      r.theta0 = parse_numbers(c.get("theta", "0"), bits);
      if (r.theta0.size() == 1 && r.d > 1) r.theta0.assign(static_cast<std::size_t>(r.d), r.theta0[0]);
      r.validate();
      ObservableSpec obs = build_observable(c, "trig");
      out.problem = quasi_periodic_problem(c.weight, r, obs);
      const std::string variant =
          c.get("variant", obs.kind == ObservableKind::trig_poly ? "trig_poly" : "diophantine");
      out.params = {{"rho", c.get("rho", "golden")},
                    {"theta", c.get("theta", "0")},
                    {"observable", obs.describe()},
                    {"variant", variant}};
      if (variant == "trig_poly") {
        out.theory = dwjq_exponent(r.d, DwjqVariant::trig_poly);
      } else if (variant == "diophantine") {
        out.theory = dwjq_exponent(r.d, DwjqVariant::diophantine);
      } else if (variant == "almost_all") {
        out.theory = dwjq_exponent(r.d, DwjqVariant::almost_all, to_double(c.get("zeta", "1.5"), "zeta"));
        out.params["zeta"] = c.get("zeta", "1.5");
      } else if (variant == "dwryzs") {
        if (c.weight.kind != KernelKind::exp_pq) throw ParameterError("dwryzs variant needs an exp_pq weight");
        const double v = to_double(c.get("v", "2"), "v");
        out.theory.exponent_a = dwryzs_exponent(c.weight.p, c.weight.q, v, r.d);
        out.theory.provenance = "quasi-periodic, Fourier decay exp(-|k|^v)";
        out.params["v"] = c.get("v", "2");
      } else {
        throw ParameterError("unknown variant '" + variant + "'");
      }
      break;
    }
    default:
      throw ParameterError("experiment '" + kind_name(c.kind) + "' does not produce an error series");
  }

  check_extents(c.schedule, out.problem.integer_extent);
  out.fit_model = c.fit_model;
  if (out.fit_model == "auto") out.fit_model = c.weight.is_exponential() ? "power" : "log";
  out.fit_exponent = c.fit_exponent.value_or(out.theory.exponent_a);
  out.fit_log_power = c.fit_log_power != 0 ? c.fit_log_power : out.theory.log_correction;
  return out;
}

std::string series_csv(const ErrorSeries& series, const PreparedSeries& prepared, const Precision& precision) {
  const Bits bits = precision.mantissa_bits;
  PrecisionScope scope(bits);
  const int digits = output_digits(bits);
  std::ostringstream os;
  os << csv_header << '\n';
  for (const auto& e : series.entries) {
    const Real N = Real(e.extent);
    std::string bound;
    if (prepared.fit_model == "power" && prepared.theory.xi) {
      Real x = pow(N, Real(prepared.fit_exponent));
      if (prepared.fit_log_power != 0) x /= pow(log(N), Real(prepared.fit_log_power));
      bound = exp(-*prepared.theory.xi * x).to_string(digits);
    } else if (prepared.polynomial_coefficient) {
      bound = (abs(*prepared.polynomial_coefficient) / N).to_string(digits);
    }
    const std::string log10_err = e.error.is_zero() ? "-inf" : fmt_double(log10(e.error).to_double());
    os << (prepared.problem.integer_extent ? std::to_string(static_cast<long>(e.extent)) : fmt_double(e.extent))
       << ',' << fmt_double(std::sqrt(e.extent)) << ',' << e.value.to_string(digits) << ','
       << e.error.to_string(digits) << ',' << bound << ',' << log10_err << ','
       << (e.at_precision_floor ? "true" : "false") << '\n';
  }
  return os.str();
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

json fit_json(const RateFit& f) {
  return {{"slope", f.slope},         {"intercept", f.intercept},   {"r2", f.r2},
          {"exponent_a", f.exponent_a}, {"points_used", f.points_used}, {"model", f.model},
          {"log_power", f.log_power}};
}

json xi_json(const std::optional<Real>& xi) { return xi ? json(xi->to_double()) : json(nullptr); }

RunOutcome run_series(const ExperimentConfig& c) {
  RunOutcome outcome;
  PreparedSeries prepared = prepare_series(c);  // ParameterError propagates: exit 2
  json errors = json::array();
  ErrorSeries series;
  try {
    series = error_series(prepared.problem, c.schedule, c.precision);
  } catch (const SeriesError& e) {
    series = e.partial();
    errors.push_back(e.what());
    outcome.exit_code = 3;
  }
  json fit = nullptr;
  json deviation = nullptr;
  if (!series.entries.empty()) {
    try {
      RateFit f = prepared.fit_model == "log" ? fit_power_law(series)
                                              : fit_rate(series, prepared.fit_exponent, prepared.fit_log_power);
      fit = fit_json(f);
      if (f.model == "power" && prepared.theory.xi) {
        const double xi_v = prepared.theory.xi->to_double();
        deviation = (f.slope - xi_v) / xi_v;
      }
    } catch (const Error& e) {
      errors.push_back(std::string("fit skipped: ") + e.what());
    }
  }
  json params = json::object();
  for (const auto& [k, v] : prepared.params) params[k] = v;
  json summary = {
      {"experiment", kind_name(c.kind)},
      {"weight", c.weight.describe()},
      {"params", params},
      {"precision_bits", c.precision.mantissa_bits},
      {"fit", fit},
      {"theory",
       {{"xi", xi_json(prepared.theory.xi)},
        {"exponent_a", prepared.theory.exponent_a},
        {"log_correction", prepared.theory.log_correction},
        {"provenance", prepared.theory.provenance},
        {"coefficient", prepared.polynomial_coefficient ? json(prepared.polynomial_coefficient->to_double())
                                                        : json(nullptr)}}},
      {"deviation_ratio", deviation},
      {"errors", errors},
  };
  outcome.summary = summary.dump(2);
  outcome.files = {c.output + ".csv", c.output + ".json"};
  write_file(c.output + ".csv", series_csv(series, prepared, c.precision));
  return outcome;
}

RunOutcome run_probe(const ExperimentConfig& c) {
  const Precision& P = c.precision;
  const Bits bits = P.mantissa_bits;
  PrecisionScope scope(bits);
  const int digits = output_digits(bits);
  std::vector<WeightSpec> specs;
  std::vector<std::string> names;
  for (const auto& w : split(c.get("weights", "exp_pq:1,1;exp_pq:2,2;exp_width:4;laskar_sin2;poly_x1mx;uniform"), ';')) {
    specs.push_back(WeightSpec::parse(w));
    names.push_back(specs.back().describe());
  }
  const long grid = to_long(c.get("grid", "101"), "grid");
  if (grid < 2) throw ParameterError("grid needs at least 2 points");
  check_extents(c.schedule, true);

  std::ostringstream kernel_csv, ratio_csv;
  kernel_csv << "x";
  ratio_csv << "N";
  for (const auto& n : names) {
    kernel_csv << ',' << n;
    ratio_csv << ',' << n;
  }
  kernel_csv << '\n';
  ratio_csv << '\n';
  for (long i = 0; i < grid; ++i) {
    const Real x = Real::from_ratio(i, grid - 1, bits);
    kernel_csv << x.to_string(digits);
    for (const auto& s : specs) kernel_csv << ',' << eval_kernel(s, x, P).to_string(digits);
    kernel_csv << '\n';
  }
  json errors = json::array();
  RunOutcome outcome;
  json normalizers = json::object();
  try {
    for (double N : c.schedule) {
      ratio_csv << static_cast<long>(N);
      for (const auto& s : specs) {
        const Real a = weight_sum(s, static_cast<long>(N), P);
        ratio_csv << ',' << (a / Real(N)).to_string(digits);
      }
      ratio_csv << '\n';
    }
    for (std::size_t i = 0; i < specs.size(); ++i) normalizers[names[i]] = normalizer(specs[i], P).to_string(digits);
  } catch (const NumericalError& e) {
    errors.push_back(e.what());
    outcome.exit_code = 3;
  }
  json summary = {{"experiment", "weights_probe"},
                  {"weights", names},
                  {"grid", grid},
                  {"precision_bits", bits},
                  {"normalizers", normalizers},
                  {"errors", errors}};
  outcome.summary = summary.dump(2);
  write_file(c.output + ".csv", kernel_csv.str());
  write_file(c.output + "_ratios.csv", ratio_csv.str());
  outcome.files = {c.output + ".csv", c.output + "_ratios.csv", c.output + ".json"};
  return outcome;
}

json check_entry(const std::string& name, double measured, double threshold, bool pass, json extra = json::object()) {
  json j = {{"name", name}, {"measured", measured}, {"threshold", threshold}, {"pass", pass}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j;
}

RunOutcome run_lemma(const ExperimentConfig& c) {
  const Precision& P = c.precision;
  const Bits bits = P.mantissa_bits;
  PrecisionScope scope(bits);
  const std::string which = c.get("which", "all");
  if (which != "all" && which != "l1_decay" && which != "derivative_growth" && which != "phi_psi")
    throw ParameterError("which must be l1_decay, derivative_growth, phi_psi or all");
  const std::vector<Real> lambdas = parse_numbers(c.get("lambdas", "1,2,4"), bits);
  const double tolerance = to_double(c.get("tolerance", "0.15"), "tolerance");
  const long m_max = to_long(c.get("m_max", "6"), "m_max");
  if (m_max < 2 || m_max > 12) throw ParameterError("m_max must lie in [2,12]");
  std::vector<double> pq;
  for (const auto& s : split(c.get("pq", "1,2"), ',')) pq.push_back(to_double(s, "pq"));
  const double slack = to_double(c.get("slack", "0.5"), "slack");
  check_extents(c.schedule, true);

  json checks = json::array();
  json errors = json::array();
  RunOutcome outcome;
  try {
    if (which == "all" || which == "l1_decay") {
      for (const Real& lambda : lambdas) {
        std::vector<double> x, y;
        for (double N : c.schedule) {
          Real norm = l1_decay_norm(c.weight, 0, lambda, static_cast<long>(N), c.quadrature, P);
          x.push_back(std::sqrt(N));
          y.push_back(log(norm).to_double());
        }
        RateFit f = least_squares(x, y);
        const double target = -std::sqrt(2 * lambda.to_double());
        const bool pass = std::abs(f.slope - target) <= tolerance * std::abs(target);
        checks.push_back(check_entry("l1_decay lambda=" + fmt_double(lambda.to_double()), f.slope, target, pass,
                                     {{"relative_deviation", (f.slope - target) / std::abs(target)},
                                      {"tolerance", tolerance},
                                      {"r2", f.r2},
                                      {"bound_direction_ok", f.slope <= target}}));
      }
    }
    if (which == "all" || which == "derivative_growth") {
      for (double p : pq) {
        const WeightSpec spec = WeightSpec::exp_pq(p, p);
        const auto norms = derivative_norm_growth(spec, static_cast<int>(m_max), P);
        const double limit = 1 + 1 / p + slack;
        double worst = -INFINITY;
        json ratios = json::array();
        for (long m = 2; m <= m_max; ++m) {
          const double r = log(norms[m - 1]).to_double() / (m * std::log(static_cast<double>(m)));
          ratios.push_back(r);
          worst = std::max(worst, r);
        }
        checks.push_back(check_entry("derivative_growth p=q=" + fmt_double(p), worst, limit, worst <= limit,
                                     {{"ratios_m2_up", ratios}, {"norm_m1", norms[0].to_double()}}));
      }
    }
    if (which == "all" || which == "phi_psi") {
      const Real tol = c.quadrature.relative_tolerance;
      const Real A = 2;
      std::vector<Real> phis;
      for (double B : {0.0, 0.1, 1.0, 10.0}) phis.push_back(cauchy_schlomilch_phi(A, Real(B), P, c.quadrature));
      Real spread = 0;
      for (const Real& v : phis) spread = max(spread, abs(v - phis[0]));
      const Real closed = sqrt(pi(bits)) / (2 * A);
      checks.push_back(check_entry("phi independence of B (A=2)", spread.to_double(), (2 * tol).to_double(),
                                   spread < 2 * tol, {{"closed_form", closed.to_string(30)}}));
      Real worst = 0;
      for (double sigma : {0.25, 0.5, 1.0})
        for (double eta : {1.0, 10.0, 100.0}) {
          PsiValues v = psi_identity(Real(sigma), Real(eta), P, c.quadrature);
          worst = max(worst, abs(v.quadrature - v.closed_form) / v.closed_form);
        }
      checks.push_back(check_entry("psi quadrature vs closed form", worst.to_double(), tol.to_double(), worst <= tol));
    }
  } catch (const NumericalError& e) {
    errors.push_back(e.what());
    outcome.exit_code = 3;
  }
  bool all_pass = errors.empty();
  for (const auto& ch : checks) all_pass = all_pass && ch["pass"].get<bool>();
  json summary = {{"experiment", "lemma_check"}, {"weight", c.weight.describe()}, {"which", which},
                  {"precision_bits", bits},       {"checks", checks},             {"pass", all_pass},
                  {"errors", errors}};
  outcome.summary = summary.dump(2);
  outcome.files = {c.output + ".json"};
  return outcome;
}

}  // namespace

RunOutcome run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    switch (config.kind) {
      case ExperimentKind::weights_probe: outcome = run_probe(config); break;
      case ExperimentKind::lemma_check: outcome = run_lemma(config); break;
      default: outcome = run_series(config); break;
    }
  } catch (const ParameterError& e) {
    return {2, {}, {}, e.what()};
  } catch (const DomainError& e) {
    return {2, {}, {}, e.what()};
  } catch (const std::exception& e) {
    return {3, {}, {}, e.what()};
  }
  // Wall time and date live in one key so reruns differ only there.
  json summary = json::parse(outcome.summary);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary["timestamp"] = {{"utc", utc_now()}, {"wall_seconds", wall}};
  outcome.summary = summary.dump(2);
  try {
    write_file(config.output + ".json", outcome.summary + "\n");
  } catch (const std::exception& e) {
    return {3, outcome.files, outcome.summary, e.what()};
  }
  return outcome;
}

}  // namespace ergo::cli
