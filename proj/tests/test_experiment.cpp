#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ergo/experiment.hpp"
#include "helpers.hpp"

using namespace ergo;
using namespace ergo::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  for (std::string l; std::getline(s, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string f; std::getline(s, f, ',');) out.push_back(f);
  return out;
}

ExperimentConfig config(ExperimentKind kind, std::map<std::string, std::string> flags, const fs::path& out) {
  Settings f;
  f.values = std::move(flags);
  f.values["output"] = out.string();
  return resolve_config(kind, {}, f, nullptr);
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("schedules") {
    const auto sq = parse_schedule("squares:100..1600");
    CHECK(sq == std::vector<double>{100, 225, 400, 625, 900, 1225, 1600});
    CHECK(parse_schedule("squares:100..400:1").size() == 11);
    CHECK(parse_schedule("geom:64..4096:2") == std::vector<double>{64, 128, 256, 512, 1024, 2048, 4096});
    CHECK(parse_schedule("list:16,25,36") == std::vector<double>{16, 25, 36});
    CHECK(parse_schedule("10, 20") == std::vector<double>{10, 20});
    CHECK_THROWS_AS(parse_schedule(""), ParameterError);
    CHECK_THROWS_AS(parse_schedule("list:"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("list:5,5"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("geom:1..10:1"), ParameterError);
    CHECK_THROWS_AS(parse_schedule("squares:100"), ParameterError);
  }

  TEST_CASE("config text") {
    const Settings s = parse_config_text(
        "# flagship\nexperiment = superposition\nlambda = 2\ncomponent.1 = 1,2,3\ncomponent.2 = 0.5, 1, 1  # slow\n"
        "fit-model = power\n");
    CHECK(s.values.at("lambda") == "2");
    CHECK(s.values.at("fit_model") == "power");
    CHECK(s.components.at(2) == "0.5, 1, 1");
    CHECK_THROWS_AS(parse_config_text("nonsense = 1"), ParameterError);
    CHECK_THROWS_AS(parse_config_text("lambda 2"), ParameterError);
    CHECK_THROWS_AS(parse_config_text("experiment = teleport"), ParameterError);
  }

  TEST_CASE("precedence: defaults < env < file < flags") {
    Settings file, flags;
    CHECK(resolve_config(ExperimentKind::decaying_wave, file, flags, nullptr).precision.mantissa_bits == 256);
    CHECK(resolve_config(ExperimentKind::decaying_wave, file, flags, "320").precision.mantissa_bits == 320);
    file.values["precision_bits"] = "384";
    CHECK(resolve_config(ExperimentKind::decaying_wave, file, flags, "320").precision.mantissa_bits == 384);
    flags.values["precision_bits"] = "448";
    const auto c = resolve_config(ExperimentKind::decaying_wave, file, flags, "320");
    CHECK(c.precision.mantissa_bits == 448);
    CHECK(c.precision.oracle_bits == 896);
    flags.values["precision_bits"] = "32";
    CHECK_THROWS_AS(resolve_config(ExperimentKind::decaying_wave, file, flags, nullptr), ParameterError);
    Settings wrong;
    wrong.values["experiment"] = "composed";
    CHECK_THROWS_AS(resolve_config(ExperimentKind::decaying_wave, wrong, {}, nullptr), ParameterError);
  }

  TEST_CASE("flagship run writes the documented schemas") {
    const fs::path dir = scratch("flagship");
    const auto c = config(ExperimentKind::decaying_wave,
                          {{"lambda", "2"}, {"rho", "3"}, {"theta", "1"}, {"schedule", "squares:100..1600"}},
                          dir / "dw");
    const RunOutcome r = run(c);
    REQUIRE(r.exit_code == 0);
    const auto rows = lines(slurp(dir / "dw.csv"));
    REQUIRE(rows.size() == 8);
    CHECK(rows[0] == "N,sqrtN,value,abs_error,theoretical_bound,log10_abs_error,at_precision_floor");
    const auto first = fields(rows[1]);
    REQUIRE(first.size() == 7);
    CHECK(first[0] == "100");
    CHECK(first[1] == "10");
    CHECK(first[2].substr(0, 12) == "2.0359313524");
    CHECK(first[2].find('e') == 76 + 1);  // 76 significant digits at 256 bits
    CHECK(testing::rel_close(std::stod(first[4]), 3.58e-15, 0.002));
    CHECK(first[6] == "false");

    const auto j = nlohmann::json::parse(slurp(dir / "dw.json"));
    for (const char* key : {"experiment", "weight", "params", "precision_bits", "fit", "theory", "deviation_ratio",
                            "timestamp", "errors"})
      CHECK(j.contains(key));
    for (const char* key : {"slope", "intercept", "r2", "exponent_a", "points_used"}) CHECK(j["fit"].contains(key));
    for (const char* key : {"xi", "exponent_a", "provenance"}) CHECK(j["theory"].contains(key));
    CHECK(j["experiment"] == "decaying_wave");
    CHECK(j["weight"] == "exp_pq:1,1");
    CHECK(j["precision_bits"] == 256);
    CHECK(j["fit"]["points_used"] == 7);
    CHECK(std::abs(j["fit"]["slope"].get<double>() - 3.3264) < 0.33);
    CHECK(j["theory"]["xi"].get<double>() == doctest::Approx(2 + std::sqrt(13.0) / std::exp(1.0)));
    CHECK(j["errors"].empty());
  }

  TEST_CASE("reruns are byte-identical apart from the timestamp") {
    const fs::path dir = scratch("idempotent");
    const auto c = config(ExperimentKind::decaying_wave, {{"schedule", "list:100,200,300"}}, dir / "a");
    REQUIRE(run(c).exit_code == 0);
    const std::string csv1 = slurp(dir / "a.csv");
    auto j1 = nlohmann::json::parse(slurp(dir / "a.json"));
    REQUIRE(run(c).exit_code == 0);
    CHECK(slurp(dir / "a.csv") == csv1);
    auto j2 = nlohmann::json::parse(slurp(dir / "a.json"));
    j1.erase("timestamp");
    j2.erase("timestamp");
    CHECK(j1.dump() == j2.dump());
  }

  TEST_CASE("uniform weight is fitted against ln N") {
    const fs::path dir = scratch("uniform");
    const auto c = config(ExperimentKind::decaying_wave, {{"weight", "uniform"}}, dir / "u");
    REQUIRE(run(c).exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "u.json"));
    CHECK(j["fit"]["model"] == "log");
    CHECK(j["fit"]["slope"].get<double>() == doctest::Approx(-1).epsilon(0.01));
    CHECK(j["theory"]["xi"].is_null());
    const auto row = fields(lines(slurp(dir / "u.csv"))[1]);
    CHECK_FALSE(row[4].empty());
  }

  TEST_CASE("invalid configuration exits 2 without writing") {
    const fs::path dir = scratch("invalid");
    Settings flags;
    flags.values["output"] = (dir / "x").string();
    flags.values["observable"] = "teapot";
    const auto c = resolve_config(ExperimentKind::composed, {}, flags, nullptr);
    const RunOutcome r = run(c);
    CHECK(r.exit_code == 2);
    CHECK_FALSE(r.message.empty());
    CHECK(fs::is_empty(dir));

    flags.values["observable"] = "poly";
    flags.values["poly"] = "1";
    CHECK(run(resolve_config(ExperimentKind::composed, {}, flags, nullptr)).exit_code == 2);
    CHECK(run(resolve_config(ExperimentKind::superposition, {}, Settings{{{"output", (dir / "y").string()}}, {}},
                             nullptr))
              .exit_code == 2);
    CHECK(fs::is_empty(dir));
  }

  TEST_CASE("numerical failure exits 3 with partial results") {
    const fs::path dir = scratch("numerical");
    const auto c = config(ExperimentKind::continuous,
                          {{"schedule", "list:1,2000"}, {"quad_doublings", "2"}},
                          dir / "c");
    const RunOutcome r = run(c);
    CHECK(r.exit_code == 3);
    const auto j = nlohmann::json::parse(slurp(dir / "c.json"));
    CHECK_FALSE(j["errors"].empty());
    CHECK(lines(slurp(dir / "c.csv")).size() == 2);
  }

  TEST_CASE("composed and orbit experiments report their predictors") {
    const fs::path dir = scratch("theory");
    PrecisionScope s(256);
    auto prepared = [&](ExperimentKind k, std::map<std::string, std::string> f) {
      return prepare_series(config(k, std::move(f), dir / "p"));
    };
    const Precision p;
    CHECK(*prepared(ExperimentKind::composed, {{"observable", "poly"}, {"poly", "0,0,1"}}).theory.xi ==
          xi(Real(4), Real(0), p));
    CHECK(*prepared(ExperimentKind::composed, {{"observable", "trig"}, {"trig_a", "1,1,1"}}).theory.xi ==
          xi_trig(Real(2), Real(3), 3, p));
    CHECK(*prepared(ExperimentKind::composed, {{"observable", "trig"}, {"trig_c0", "1"}}).theory.xi ==
          xi(Real(2), Real(0), p));
    CHECK(*prepared(ExperimentKind::composed, {{"observable", "kappa"}, {"kappa_tau", "2"}}).theory.xi ==
          xi_kappa(Real(2), 2, p));
    CHECK(prepared(ExperimentKind::continuous, {{"rho", "7"}}).theory.xi > xi(Real(2), Real(7), p));
    const auto q = prepared(ExperimentKind::quasi_periodic, {{"observable", "poisson"}, {"variant", "diophantine"}});
    CHECK_FALSE(q.theory.xi.has_value());
    CHECK(q.fit_exponent == doctest::Approx(1.0 / 3));
    CHECK(prepared(ExperimentKind::decaying_wave, {{"weight", "laskar_sin2"}}).fit_model == "log");
    CHECK(prepared(ExperimentKind::decaying_wave, {{"fit_exponent", "0.4"}}).fit_exponent == 0.4);
  }

  TEST_CASE("weights probe") {
    const fs::path dir = scratch("probe");
    const auto c = config(ExperimentKind::weights_probe,
                          {{"weights", "exp_pq:1,1;uniform;exp_width:4"}, {"grid", "101"}}, dir / "w");
    REQUIRE(run(c).exit_code == 0);
    const auto rows = lines(slurp(dir / "w.csv"));
    REQUIRE(rows.size() == 102);
    CHECK(rows[0] == "x,exp_pq:1,1,uniform,exp_width:4");
    // The header names contain commas, so columns are read from the right.
    auto col = [&](int row, int from_right) {
      const auto f = fields(rows[static_cast<std::size_t>(row)]);
      return f[f.size() - 1 - static_cast<std::size_t>(from_right)];
    };
    PrecisionScope s(256);
    for (int i = 1; i <= 101; ++i) {
      const Real left = Real::from_string(col(i, 2), 256), right = Real::from_string(col(102 - i, 2), 256);
      CHECK((left == right || testing::rel_close(left, right, 1e-70)));
    }
    for (int i = 2; i <= 100; ++i) CHECK(Real::from_string(col(i, 1), 256) == Real(1));
    const Real ratio = Real::from_string(col(51, 0), 256) / Real::from_string(col(51, 2), 256);
    CHECK(testing::rel_close(ratio, exp(Real(-12)), 1e-60));
    CHECK(fs::exists(dir / "w_ratios.csv"));
    CHECK(fs::exists(dir / "w.json"));
  }

  TEST_CASE("lemma check report") {
    const fs::path dir = scratch("lemma");
    const auto c = config(ExperimentKind::lemma_check, {{"which", "phi_psi"}}, dir / "l");
    REQUIRE(run(c).exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "l.json"));
    REQUIRE(j["checks"].size() == 2);
    for (const auto& ch : j["checks"]) {
      CHECK(ch["pass"] == true);
      CHECK(ch.contains("measured"));
      CHECK(ch.contains("threshold"));
    }
    CHECK(run(config(ExperimentKind::lemma_check, {{"which", "everything"}}, dir / "m")).exit_code == 2);
  }

  TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("process");
    const std::string exe = ERGOACCEL_CLI;
    const std::string out = (dir / "run").string();
    CHECK(shell(exe + " decaying-wave --schedule squares:100..400 --quiet --output " + out) == 0);
    CHECK(fs::exists(out + ".csv"));
    CHECK(fs::exists(out + ".json"));

    const std::string bad = (dir / "bad").string();
    CHECK(shell(exe + " decaying-wave --schedule list: --quiet --output " + bad + " 2>/dev/null") == 2);
    CHECK(shell(exe + " decaying-wave --lambda -1 --quiet --output " + bad + " 2>/dev/null") == 2);
    CHECK(shell(exe + " decaying-wave --no-such-flag 2>/dev/null >/dev/null") == 2);
    CHECK(shell(exe + " 2>/dev/null >/dev/null") == 2);
    CHECK_FALSE(fs::exists(bad + ".csv"));
    CHECK_FALSE(fs::exists(bad + ".json"));

    const fs::path cfg = dir / "empty.cfg";
    std::ofstream(cfg) << "schedule = list:\n";
    CHECK(shell(exe + " decaying-wave --config " + cfg.string() + " --quiet --output " + bad + " 2>/dev/null") == 2);
    CHECK_FALSE(fs::exists(bad + ".csv"));

    const fs::path sup = dir / "sup.cfg";
    std::ofstream(sup) << "experiment = superposition\ncomponent.1 = 1,2,3\ncomponent.2 = 0.5,1,1\nschedule = list:100,200,300\n";
    CHECK(shell(exe + " superposition --config " + sup.string() + " --quiet --output " + out + "_sup") == 0);
  }
}
