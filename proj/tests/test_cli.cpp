#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "pamlab/cli.hpp"

using namespace pamlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("pamlab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the CLI binary; returns its exit status, with stderr in `err`.
int cli(const std::string& args, std::string* err = nullptr) {
  const fs::path e = fs::temp_directory_path() / "pamlab_test_stderr.txt";
  const std::string cmd = std::string(PAMLAB_CLI_PATH) + " " + args + " > /dev/null 2> " + e.string();
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(e);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesDocumentAndOverrides) {
  ExperimentConfig c;
  parse_config_text(c,
                    "# comment\n"
                    "subcommand = clt\n"
                    "seed = 42   # trailing\n"
                    "replicas = 300\n"
                    "N_list = 10, 20\n"
                    "t_list = 0.5\n"
                    "grid.dt = 2e-3\n"
                    "seed = 43\n");
  EXPECT_EQ(c.subcommand, Subcommand::clt);
  EXPECT_EQ(*c.seed, 43u);
  EXPECT_EQ(c.N_list, (std::vector<double>{10.0, 20.0}));
  EXPECT_EQ(c.grid.dt, 2e-3);
  EXPECT_NO_THROW(validate(c));
  const SolverConfig s = c.effective_solver();
  EXPECT_DOUBLE_EQ(s.truncation_margin, 6.0 * std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(s.grid.x_max, 20.0 + s.truncation_margin);
  EXPECT_EQ(s.grid.t_max, 0.5);
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    ExperimentConfig c;
    try {
      parse_config_text(c, text);
      validate(c);
    } catch (const ConfigError& e) {
      return e.field_path;
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of("subcommand = clt\nseed = 1\nreplicas = 200\nt_list = 0.5\n"), "N_list");
  EXPECT_EQ(field_of("subcommand = clt\nreplicas = 200\nN_list = 10\nt_list = 0.5\n"), "seed");
  EXPECT_EQ(field_of("subcommand = clt\nseed = 1\nreplicas = 20\nN_list = 10\nt_list = 0.5\n"), "replicas");
  EXPECT_EQ(field_of("grid.dtt = 1\n"), "grid.dtt");
  EXPECT_EQ(field_of("seed = -1\n"), "seed");
  EXPECT_EQ(field_of("t_list = 0.5, x\n"), "t_list");
  EXPECT_EQ(field_of("just text\n"), "line 1");
  EXPECT_EQ(field_of("subcommand = oracle\nN_list = 2\nt_list = 0.5\n"), "N_list");
  EXPECT_EQ(field_of("subcommand = local\nseed = 1\nreplicas = 20\nN_list = 10\nt_list = 0.5\n"), "t_list");
  EXPECT_EQ(field_of("subcommand = fdd\nseed = 1\nreplicas = 20\nN_list = 10, 20\nt_list = 0.5\n"), "N_list");
  EXPECT_EQ(field_of("subcommand = simulate\nseed = 1\nreplicas = 4\nN_list = 10.005\nt_list = 0.5\n"), "N_list");
  EXPECT_EQ(field_of("subcommand = simulate\nseed = 1\nreplicas = 4\nN_list = 10\nt_list = 0.5\ngrid.x_max = 5\n"), "grid");
  EXPECT_EQ(field_of("subcommand = fdd\nseed = 1\nreplicas = 20\nN_list = 10\nt_list = 0.5\nroute = projected\n"),
            "route");
  EXPECT_EQ(field_of("quad.rel_tol = 0\n"), "quad.rel_tol");
}

TEST(Config, FormatsSeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, ManifestEchoesDefaults) {
  ExperimentConfig c;
  parse_config_text(c, "subcommand = oracle\nN_list = 10\nt_list = 1\n");
  const auto j = config_json(c);
  EXPECT_EQ(j["subcommand"], "oracle");
  EXPECT_EQ(j["grid"]["dt"], 1e-3);
  EXPECT_EQ(j["solver"]["time_grid"], "graded");
  EXPECT_EQ(j["quad"]["endpoint_substitution"], "none");
  EXPECT_TRUE(j["seed"].is_null());
}

TEST(Run, OracleWritesCsv) {
  const fs::path d = scratch("oracle");
  ExperimentConfig c;
  parse_config_text(c, "subcommand = oracle\nN_list = 100\nt_list = 0.5\n");
  c.output_dir = d.string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), 0);
  const std::string csv = slurp(d / "oracle.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "N,t,theta,second_moment_u0,var_avg_pam,var_avg_proxy,oracle_var_ratio,oracle_var_ratio_proxy,G_x1");
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["exit_status"], 0);
  EXPECT_TRUE(m.contains("wall_time_seconds"));
}

TEST(Cli, VerifyExitsZeroWithPassingManifest) {
  const fs::path d = scratch("verify");
  EXPECT_EQ(cli("verify -o " + d.string()), 0);
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m["pass"], true);
  EXPECT_EQ(m["subcommand"], "verify");
}

TEST(Cli, MissingNListExitsTwo) {
  const fs::path d = scratch("clt_missing");
  std::string err;
  EXPECT_EQ(cli("clt -s seed=1 -s replicas=200 -s t_list=0.5 -o " + d.string(), &err), 2);
  EXPECT_NE(err.find("N_list"), std::string::npos) << err;
}

TEST(Cli, UnknownKeyAndBadFileExitTwo) {
  std::string err;
  EXPECT_EQ(cli("oracle -s N_lst=10", &err), 2);
  EXPECT_NE(err.find("N_lst"), std::string::npos);
  EXPECT_EQ(cli("oracle --config /nonexistent/file.cfg", &err), 2);
  EXPECT_EQ(cli("frobnicate", &err), 2);
}

TEST(Cli, SimulateIsByteIdentical) {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const fs::path cfg = a / "sim.cfg";
  std::ofstream(cfg) << "seed = 42\nreplicas = 20\nN_list = 4, 8\nt_list = 0.1, 0.2\n"
                        "grid.dt = 4e-3\ngrid.dx = 4e-2\n";
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " -o " + a.string()), 0);
  ASSERT_EQ(cli("simulate --config " + cfg.string() + " -s workers=2 -o " + b.string()), 0);
  for (const char* f : {"simulate_N4.csv", "simulate_N8.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_EQ(x, slurp(b / f)) << f;
    EXPECT_EQ(x.substr(0, x.find('\n')), "replica,t,S");
    EXPECT_EQ(std::count(x.begin(), x.end(), '\n'), 1 + 20 * 2);
  }
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["seed"], 42);
  EXPECT_EQ(m["config"]["replicas"], 20);
}
