#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <infodense_cli/commands.hpp>
#include <infodense_cli/config.hpp>

#include "support.hpp"

using namespace infodense;
using namespace infodense::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("infodense_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

int run_tool(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + INFODENSE_TOOL + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Synthetic 12-sensor field written as wide CSV; returns its path.
fs::path synth_input(const fs::path& dir, const std::string& samples = "2000") {
  cmd_synth(load_config("", {{"output_dir", dir.string()}, {"samples", samples}, {"hub_angle_deg", "15"}, {"seed", "1"},
                             {"frame_len", "50"}}));
  return dir / "synth.csv";
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t m = i; m <= j; ++m) r[idx[m]] = (static_cast<double>(i + j)) / 2.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(Config, DefaultsOverridesAndUnknownKeys) {
  const auto c = load_config("", {{"k", "3"}, {"k_sweep", "1,3,5"}, {"method", "mi"}, {"learning_rate", "0.01"}});
  EXPECT_EQ(c.k, 3u);
  EXPECT_EQ(c.k_sweep, (std::vector<std::size_t>{1, 3, 5}));
  EXPECT_EQ(c.method, SelectionMethod::mutual_info);
  EXPECT_EQ(c.train.learning_rate, 0.01);
  EXPECT_EQ(c.frames.frame_len, 96);
  try {
    load_config("", {{"no_such_key", "1"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  try {
    load_config("", {{"k", "three"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
}

TEST(Config, FileThenFlagsAndHash) {
  const fs::path dir = scratch("config");
  {
    std::ofstream f(dir / "run.json");
    f << R"({"k": 2, "bins": 16, "output_dir": "somewhere"})";
  }
  const auto a = load_config((dir / "run.json").string(), {});
  EXPECT_EQ(a.k, 2u);
  EXPECT_EQ(a.bins, 16);
  const auto b = load_config((dir / "run.json").string(), {{"k", "4"}});
  EXPECT_EQ(b.k, 4u);
  EXPECT_NE(a.hash, b.hash);
  EXPECT_EQ(a.hash, load_config((dir / "run.json").string(), {}).hash);
  // The output location does not change what is computed.
  EXPECT_EQ(a.hash, load_config((dir / "run.json").string(), {{"output_dir", "elsewhere"}}).hash);
  EXPECT_EQ(a.hash.size(), 16u);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"frame_length": 10})";
  }
  EXPECT_THROW(load_config((dir / "bad.json").string(), {}), Error);
}

TEST(Config, EnvironmentOverridesOutputDir) {
  ::setenv(kOutputDirEnv, "/tmp/from_env", 1);
  EXPECT_EQ(load_config("", {}).output_dir, "/tmp/from_env");
  EXPECT_EQ(load_config("", {{"output_dir", "/tmp/from_flag"}}).output_dir, "/tmp/from_flag");
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(load_config("", {}).output_dir, "out");
}

TEST(Commands, IngestLongCsvAndMissingSensor) {
  const fs::path dir = scratch("ingest");
  {
    std::ofstream f(dir / "in.csv");
    f << "timestamp,sensor_id,modality,value\n";
    for (int t = 0; t < 6; ++t) {
      f << "2024-01-01T0" << t << ":00:00Z,a,traffic," << t * 2 << "\n";
      f << "2024-01-01T0" << t << ":00:00Z,b,traffic," << (t % 3) << "\n";
    }
    f << "2024-01-01T07:00:00Z,b,traffic,oops\n";
  }
  const auto c = load_config("", {{"input", (dir / "in.csv").string()}, {"output_dir", (dir / "out").string()}});
  cmd_ingest(c);
  EXPECT_EQ(lines_of(dir / "out" / "matrix.csv").size(), 7u);
  const std::string log = slurp(dir / "out" / "ingest_log.json");
  EXPECT_NE(log.find("\"rows_rejected\": 1"), std::string::npos) << log;
  EXPECT_NE(log.find(c.hash), std::string::npos);
  const std::string first = slurp(dir / "out" / "normalized.csv");
  cmd_ingest(c);
  EXPECT_EQ(slurp(dir / "out" / "normalized.csv"), first);

  const auto missing = load_config("", {{"input", (dir / "in.csv").string()}, {"sensors", "a,zz"},
                                        {"output_dir", (dir / "out2").string()}});
  try {
    cmd_ingest(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_sensor);
    EXPECT_EQ(exit_code(e.kind()), 3);
  }
}

TEST(Commands, IdfieldInverseStructure) {
  const fs::path dir = scratch("idfield");
  const fs::path input = synth_input(dir);
  const auto c = load_config("", {{"input", input.string()}, {"input_format", "wide"}, {"frame_len", "50"},
                                  {"output_dir", (dir / "field").string()}});
  cmd_idfield(c);
  const auto angles = angle_field_from_json(slurp(dir / "field" / "angle_field.json"));
  const auto mi = mi_field_from_json(slurp(dir / "field" / "mi_field.json"));
  ASSERT_EQ(angles.sensor_ids, mi.sensor_ids);
  std::vector<double> a, g;
  for (Eigen::Index i = 0; i < angles.omega.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < angles.omega.cols(); ++j) {
      a.push_back(angles.omega(i, j));
      g.push_back(mi.gamma(i, j));
    }
  }
  EXPECT_LT(spearman(a, g), 0.0);
  EXPECT_EQ(lines_of(dir / "field" / "angle_field.csv").front(), "sensor_a,sensor_b,omega_deg,tau");
}

TEST(Commands, IdfieldDuplicatedSensors) {
  const fs::path dir = scratch("dup");
  {
    std::ofstream f(dir / "wide.csv");
    f << "timestamp,a,b\n";
    for (int t = 0; t < 40; ++t) {
      const double v = std::sin(t * 0.7) + 0.1 * (t % 3);
      f << format_timestamp(testing_support::at(15 * t)) << ',' << v << ',' << v << '\n';
    }
  }
  cmd_idfield(load_config("", {{"input", (dir / "wide.csv").string()}, {"input_format", "wide"}, {"frame_len", "8"},
                               {"output_dir", (dir / "f").string()}}));
  const auto angles = angle_field_from_json(slurp(dir / "f" / "angle_field.json"));
  const auto mi = mi_field_from_json(slurp(dir / "f" / "mi_field.json"));
  EXPECT_NEAR(angles.omega(0, 1), 0.0, 1e-6);
  EXPECT_NEAR(mi.gamma(0, 1), mi.gamma(0, 0), 1e-12);
}

TEST(Commands, PipelineShapeAndDeterminism) {
  const fs::path dir = scratch("pipeline");
  const fs::path input = synth_input(dir);
  std::map<std::string, std::string> flags{{"input", input.string()}, {"input_format", "wide"}, {"frame_len", "50"},
                                           {"k", "3"}, {"max_epochs", "2"}, {"seed", "1"}};
  flags["output_dir"] = (dir / "run1").string();
  cmd_pipeline(load_config("", flags));
  flags["output_dir"] = (dir / "run2").string();
  cmd_pipeline(load_config("", flags));
  const auto rows = lines_of(dir / "run1" / "eval_k3.csv");
  ASSERT_EQ(rows.size(), 11u);  // header, 9 virtual sensors, average
  EXPECT_EQ(rows.back().rfind("Average Performance", 0), 0u);
  for (const auto& entry : fs::directory_iterator(dir / "run1")) {
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "run2" / entry.path().filename())) << entry.path().filename();
  }
  EXPECT_NE(slurp(dir / "run1" / "pipeline_manifest.json").find("config_hash"), std::string::npos);
}

TEST(Commands, SelectTrainEvaluateChain) {
  const fs::path dir = scratch("chain");
  const fs::path input = synth_input(dir);
  const auto c = load_config("", {{"input", input.string()}, {"input_format", "wide"}, {"frame_len", "50"}, {"k", "3"},
                                  {"max_epochs", "2"}, {"output_dir", (dir / "o").string()}});
  cmd_select(c);
  const auto sel = selection_from_json(slurp(dir / "o" / "selection.json"));
  EXPECT_EQ(sel.selected.size(), 3u);
  const auto t = load_config("", {{"input", input.string()}, {"input_format", "wide"}, {"frame_len", "50"}, {"k", "3"},
                                  {"max_epochs", "2"}, {"selection", (dir / "o" / "selection.json").string()},
                                  {"output_dir", (dir / "o").string()}});
  cmd_train(t);
  cmd_evaluate(t);
  EXPECT_EQ(lines_of(dir / "o" / "eval.csv").size(), 11u);
  EXPECT_EQ(checkpoint_from_json(slurp(dir / "o" / "checkpoint.json")).input_ids, sel.selected);
}

TEST(Commands, CrossModalInference) {
  const fs::path dir = scratch("cmi");
  cmd_synth(load_config("", {{"synth_kind", "cross_modal"}, {"samples", "3000"}, {"frame_len", "50"}, {"seed", "1"},
                             {"output_dir", dir.string()}}));
  const auto c = load_config("", {{"input", (dir / "synth.csv").string()}, {"input_format", "wide"},
                                  {"modalities_from", (dir / "ground_truth.json").string()}, {"frame_len", "50"},
                                  {"include_self", "true"}, {"max_epochs", "5"}, {"output_dir", (dir / "o").string()}});
  cmd_cmi(c);
  const auto table = nlohmann::json::parse(slurp(dir / "o" / "cmi_report.json"));
  std::map<std::string, double> tau, mi, err;
  for (const auto& r : table["table"]) {
    tau[r["modality_b"]] = r["similarity"];
    mi[r["modality_b"]] = r["mutual_information_nats"];
  }
  for (const auto& r : table["evaluation"]) err[r["modality"]] = r["mean_nmae"];
  const std::string source = table["source"];
  EXPECT_NEAR(tau.at(source), 1.0, 1e-9);
  for (const std::string m : {"linear", "quadratic"}) {
    EXPECT_LT(err.at(m), 0.11) << m;
    EXPECT_GT(tau.at(m), tau.at("random"));
    EXPECT_GT(mi.at(m), mi.at("random"));
  }
  auto bad = c;
  bad.source_modality = "nope";
  EXPECT_THROW(cmd_cmi(bad), Error);
}

TEST(Tool, ExitCodes) {
  const fs::path dir = scratch("tool");
  const fs::path input = synth_input(dir, "1000");
  const std::string base = "--input " + input.string() + " --input-format wide --frame-len 50 --output-dir " +
                           (dir / "o").string();
  EXPECT_EQ(run_tool("select " + base + " --k 3"), 0);
  EXPECT_EQ(run_tool("select " + base + " --k 13"), 2);
  EXPECT_EQ(run_tool("select " + base + " --no-such-flag 1"), 2);
  EXPECT_EQ(run_tool("select --input /nonexistent.csv --output-dir " + (dir / "o").string()), 3);
  EXPECT_EQ(run_tool("select " + base + " --method bogus"), 2);
  {
    std::ofstream f(dir / "flat.csv");
    f << "timestamp,a,b\n";
    for (int t = 0; t < 200; ++t) f << format_timestamp(testing_support::at(15 * t)) << ",1," << t % 7 << '\n';
  }
  EXPECT_EQ(run_tool("idfield --input " + (dir / "flat.csv").string() + " --input-format wide --frame-len 10 --output-dir " +
                     (dir / "o").string()),
            3);
  const fs::path env_dir = dir / "env_out";
  EXPECT_EQ(run_tool("select --input " + input.string() + " --input-format wide --frame-len 50 --k 3",
                     std::string("INFODENSE_OUTPUT_DIR=") + env_dir.string()),
            0);
  EXPECT_TRUE(fs::exists(env_dir / "selection.json"));
}

TEST(Tool, ExitCodeMapping) {
  EXPECT_EQ(exit_code(ErrorKind::config), 2);
  EXPECT_EQ(exit_code(ErrorKind::contract), 2);
  EXPECT_EQ(exit_code(ErrorKind::schema), 3);
  EXPECT_EQ(exit_code(ErrorKind::missing_sensor), 3);
  EXPECT_EQ(exit_code(ErrorKind::degenerate), 3);
  EXPECT_EQ(exit_code(ErrorKind::numeric), 4);
}
