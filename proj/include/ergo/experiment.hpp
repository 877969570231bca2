#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergo/averaging.hpp"
#include "ergo/rates.hpp"
#include "ergo/real.hpp"

namespace ergo::cli {

enum class ExperimentKind {
  decaying_wave,
  superposition,
  composed,
  continuous,
  linear_orbit,
  map_orbit,
  quasi_periodic,
  weights_probe,
  lemma_check
};

ExperimentKind parse_kind(std::string_view name);  // accepts '-' or '_'
std::string kind_name(ExperimentKind kind);

// Recognised setting keys, shared by flags (with '-') and config files.
const std::vector<std::string>& known_keys();
std::string key_help(const std::string& key);

// Raw key/value settings before validation.
struct Settings {
  std::map<std::string, std::string> values;
  std::map<int, std::string> components;  // component.k = c,lambda,rho

  // Entries of `over` replace ours.
  void merge(const Settings& over);
};

// Reads `key = value` lines; '#' starts a comment.
Settings parse_config_text(std::string_view text, const std::string& origin = "config");
Settings load_config_file(const std::string& path);

// squares:a..b[:s] (k^2 for k = ceil(sqrt a), +s, ..., default s = 5),
// geom:a..b:r, list:x,y,z (or a bare comma list).
std::vector<double> parse_schedule(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::decaying_wave;
  Settings settings;
  WeightSpec weight;
  Precision precision;
  std::vector<double> schedule;
  std::string output = "ergoaccel";  // files are <output>.csv and <output>.json
  std::optional<double> fit_exponent;
  double fit_log_power = 0;
  std::string fit_model = "auto";
  QuadratureConfig quadrature;

  std::string get(const std::string& key, const std::string& fallback = "") const;
};

// Defaults < ERGOACCEL_PRECISION_BITS < config file < flags. Throws
// ParameterError on anything invalid.
ExperimentConfig resolve_config(ExperimentKind kind, const Settings& file, const Settings& flags,
                                const char* env_precision);

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;
  std::string summary;  // JSON text
  std::string message;
};

// Exit codes: 0 success, 2 invalid configuration (nothing written),
// 3 numerical failure (partial results written, errors listed).
RunOutcome run(const ExperimentConfig& config);

// Everything up to, but excluding, evaluation: the problem, the predicted
// rate and the fit exponent. Exposed for tests.
struct PreparedSeries {
  Problem problem;
  RatePrediction theory;
  std::string fit_model;  // "power" or "log"
  double fit_exponent = 0.5;
  double fit_log_power = 0;
  // Coefficient c of the c/N law for uniform weights, when known.
  std::optional<Real> polynomial_coefficient;
  std::map<std::string, std::string> params;
};

PreparedSeries prepare_series(const ExperimentConfig& config);

inline constexpr const char* csv_header =
    "N,sqrtN,value,abs_error,theoretical_bound,log10_abs_error,at_precision_floor";

// Significant digits written for a working precision of `bits`.
int output_digits(Bits bits);

std::string series_csv(const ErrorSeries& series, const PreparedSeries& prepared, const Precision& precision);

}  // namespace ergo::cli
