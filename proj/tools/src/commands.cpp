#include "infodense_cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace infodense::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

/// Collects artifacts of one command and writes its manifest last.
class Output {
 public:
  Output(const RunConfig& config, std::string command) : config_(config), command_(std::move(command)) {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + config.output_dir + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = fs::path(config_.output_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
    artifacts_[name] = fnv1a_hex(content);
  }

  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    std::ostringstream text;
    writer(text);
    write(name, text.str());
  }

  JsonMeta meta() const { return {{"config_hash", config_.hash}}; }

  void finish() {
    json manifest;
    manifest["command"] = command_;
    manifest["config_hash"] = config_.hash;
    json settings = config_.effective;
    settings.erase("output_dir");
    manifest["config"] = std::move(settings);
    manifest["artifacts"] = artifacts_;
    write(command_ + "_manifest.json", manifest.dump(2) + "\n");
  }

 private:
  const RunConfig& config_;
  std::string command_;
  std::map<std::string, std::string> artifacts_;
};

/// Runs `body`, prefixing any library error with the stage name.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("[") + name + "] " + e.what());
  }
}

std::int64_t infer_interval(std::span<const RawRecord> records) {
  std::vector<Timestamp> stamps;
  stamps.reserve(records.size());
  for (const auto& r : records) stamps.push_back(r.timestamp);
  std::sort(stamps.begin(), stamps.end());
  stamps.erase(std::unique(stamps.begin(), stamps.end()), stamps.end());
  if (stamps.size() < 2) fail(ErrorKind::insufficient_data, "need at least two distinct timestamps to infer the interval");
  std::int64_t best = 0;
  for (std::size_t i = 1; i < stamps.size(); ++i) {
    const auto gap = (stamps[i] - stamps[i - 1]).count();
    if (best == 0 || gap < best) best = gap;
  }
  return best;
}

LoadResult load_records(const RunConfig& config) {
  if (config.input.empty()) fail(ErrorKind::config, "no input file configured (set 'input')");
  std::ifstream in(config.input, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open input '" + config.input + "'");
  LoadResult loaded = config.input_format == "long" ? load_long_csv(in, config.schema)
                                                    : load_wide_csv(in, config.modality, config.schema.strict);
  if (config.input_format == "long" && !config.modality.empty()) {
    std::erase_if(loaded.records, [&](const RawRecord& r) { return r.modality != config.modality; });
  }
  return loaded;
}

TimeSeriesMatrix align_records(const RunConfig& config, std::span<const RawRecord> records) {
  const std::int64_t interval = config.interval_seconds > 0 ? config.interval_seconds : infer_interval(records);
  return align(records, std::chrono::seconds(interval), config.missing_policy, config.sensors);
}

std::vector<std::string> complement(const std::vector<std::string>& all, const std::vector<std::string>& chosen) {
  std::vector<std::string> rest;
  for (const auto& id : all) {
    if (std::find(chosen.begin(), chosen.end(), id) == chosen.end()) rest.push_back(id);
  }
  return rest;
}

void check_k(std::size_t k, Eigen::Index sensors) {
  if (static_cast<Eigen::Index>(k) >= sensors) {
    fail(ErrorKind::config, "k = " + std::to_string(k) + " leaves no virtual sensor among " + std::to_string(sensors) +
                                " sensors");
  }
}

VirtualSensorFit fit_imvs(const TimeSeriesMatrix& fit_part, const std::vector<std::string>& physical,
                          const RunConfig& config) {
  const auto virtual_ids = complement(fit_part.sensor_ids(), physical);
  if (virtual_ids.empty()) fail(ErrorKind::config, "the selection leaves no virtual sensor");
  const Eigen::MatrixXd x = fit_part.select_columns(physical).values();
  const Eigen::MatrixXd y = fit_part.select_columns(virtual_ids).values();
  return fit_virtual_sensors(build_imvs_model(x.cols(), y.cols(), config.seed), x, y, physical, virtual_ids,
                             config.train);
}

EvalReport evaluate_model(const VirtualSensorModel& model, const TimeSeriesMatrix& holdout, const RunConfig& config) {
  const Eigen::MatrixXd x = holdout.select_columns(model.input_ids).values();
  const Eigen::MatrixXd y = holdout.select_columns(model.output_ids).values();
  return evaluate(y, predict_virtual(model, x), model.output_ids, config.denominator);
}

std::map<std::string, std::vector<std::string>> modality_groups(const RunConfig& config,
                                                                std::span<const RawRecord> records,
                                                                std::string& source) {
  std::map<std::string, std::vector<std::string>> groups = config.modalities;
  if (groups.empty() && !config.modalities_from.empty()) {
    json j;
    try {
      j = json::parse(read_file(config.modalities_from));
      groups = j.at("modalities").get<std::map<std::string, std::vector<std::string>>>();
      if (source.empty() && j.contains("source")) source = j.at("source").get<std::string>();
    } catch (const json::exception& e) {
      fail(ErrorKind::schema, "'" + config.modalities_from + "' has no usable modalities object: " + e.what());
    }
  }
  if (groups.empty()) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
      if (!r.modality.empty()) seen.emplace(r.modality, r.sensor_id);
    }
    for (const auto& [modality, id] : seen) groups[modality].push_back(id);
  }
  return groups;
}

}  // namespace

TimeSeriesMatrix load_matrix(const RunConfig& config, LoadResult* log) {
  LoadResult loaded = load_records(config);
  TimeSeriesMatrix matrix = align_records(config, loaded.records);
  if (log != nullptr) *log = std::move(loaded);
  return matrix;
}

RowSplit split_rows(Eigen::Index total, double holdout_fraction) {
  const auto fit = static_cast<Eigen::Index>(std::floor(static_cast<double>(total) * (1.0 - holdout_fraction) + 1e-9));
  if (fit < 2 || total - fit < 1) {
    fail(ErrorKind::insufficient_data, std::to_string(total) + " aligned rows are too few to hold out a test tail");
  }
  return {fit, total - fit};
}

SelectionResult run_selection(const TimeSeriesMatrix& fit_part, const RunConfig& config, std::size_t k) {
  switch (config.method) {
    case SelectionMethod::eigen_angle:
      return rank_by_angle(eigen_phase_field(fit_part, config.frames), k);
    case SelectionMethod::mutual_info:
      return rank_by_mi(mi_field(fit_part, config.bins, config.strategy), k);
    case SelectionMethod::random:
      return baseline_random(fit_part.sensor_ids(), k, config.seed);
    case SelectionMethod::variance:
      return baseline_variance(fit_part, k);
    case SelectionMethod::correlation:
      return baseline_correlation(fit_part, k);
  }
  fail(ErrorKind::config, "unknown selection method");
}

void cmd_ingest(const RunConfig& config) {
  LoadResult log;
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config, &log); });
  const TimeSeriesMatrix normalized = stage("normalize", [&] { return normalize(matrix); });
  Output out(config, "ingest");
  out.write_with("matrix.csv", [&](std::ostream& s) { write_wide_csv(s, matrix); });
  out.write_with("normalized.csv", [&](std::ostream& s) { write_wide_csv(s, normalized); });
  json j;
  j["config_hash"] = config.hash;
  j["rows_read"] = log.rows_read;
  j["rows_rejected"] = log.rejected;
  j["records"] = log.records.size();
  j["aligned_rows"] = matrix.rows();
  j["sensors"] = matrix.sensor_ids();
  j["first_timestamp"] = format_timestamp(matrix.timestamps().front());
  j["last_timestamp"] = format_timestamp(matrix.timestamps().back());
  out.write("ingest_log.json", j.dump(2) + "\n");
  out.finish();
}

void cmd_idfield(const RunConfig& config) {
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config); });
  Output out(config, "idfield");
  if (config.measure != "mi") {
    const AngleField field = stage("eigenphase", [&] { return eigen_phase_field(matrix, config.frames); });
    out.write("angle_field.json", to_json(field, out.meta()));
    out.write_with("angle_field.csv", [&](std::ostream& s) { write_csv(s, field); });
  }
  if (config.measure != "angle") {
    const MiField field = stage("mutualinfo", [&] { return mi_field(matrix, config.bins, config.strategy); });
    out.write("mi_field.json", to_json(field, out.meta()));
    out.write_with("mi_field.csv", [&](std::ostream& s) { write_csv(s, field); });
  }
  out.finish();
}

void cmd_select(const RunConfig& config) {
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config); });
  const RowSplit split = stage("split", [&] { return split_rows(matrix.rows(), config.holdout_fraction); });
  if (static_cast<Eigen::Index>(config.k) > matrix.cols()) {
    fail(ErrorKind::config, "k = " + std::to_string(config.k) + " exceeds the " + std::to_string(matrix.cols()) +
                                " available sensors");
  }
  const SelectionResult selection =
      stage("select", [&] { return run_selection(matrix.slice_rows(0, split.fit_rows), config, config.k); });
  Output out(config, "select");
  out.write("selection.json", to_json(selection, out.meta()));
  out.finish();
}

void cmd_train(const RunConfig& config) {
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config); });
  const RowSplit split = stage("split", [&] { return split_rows(matrix.rows(), config.holdout_fraction); });
  const TimeSeriesMatrix fit_part = matrix.slice_rows(0, split.fit_rows);
  const SelectionResult selection = stage("select", [&] {
    if (!config.selection_path.empty()) return selection_from_json(read_file(config.selection_path));
    check_k(config.k, matrix.cols());
    return run_selection(fit_part, config, config.k);
  });
  const VirtualSensorFit fit = stage("train", [&] { return fit_imvs(fit_part, selection.selected, config); });
  Output out(config, "train");
  out.write("selection.json", to_json(selection, out.meta()));
  out.write("checkpoint.json", checkpoint_to_json(fit.model, {config.seed, config.train}, out.meta()));
  out.write_with("train_report.csv", [&](std::ostream& s) { write_csv(s, fit.report); });
  out.finish();
}

void cmd_evaluate(const RunConfig& config) {
  const std::string path =
      config.checkpoint_path.empty() ? (fs::path(config.output_dir) / "checkpoint.json").string() : config.checkpoint_path;
  const VirtualSensorModel model = stage("load checkpoint", [&] { return checkpoint_from_json(read_file(path)); });
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config); });
  const RowSplit split = stage("split", [&] { return split_rows(matrix.rows(), config.holdout_fraction); });
  const EvalReport report = stage("evaluate", [&] {
    return evaluate_model(model, matrix.slice_rows(split.fit_rows, matrix.rows()), config);
  });
  Output out(config, "evaluate");
  out.write_with("eval.csv", [&](std::ostream& s) { write_csv(s, report, model.input_ids); });
  out.write("eval.json", to_json(report, out.meta()));
  out.finish();
}

void cmd_pipeline(const RunConfig& config) {
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config); });
  const RowSplit split = stage("split", [&] { return split_rows(matrix.rows(), config.holdout_fraction); });
  const TimeSeriesMatrix fit_part = matrix.slice_rows(0, split.fit_rows);
  const TimeSeriesMatrix holdout = matrix.slice_rows(split.fit_rows, matrix.rows());
  const std::vector<std::size_t> ks = config.k_sweep.empty() ? std::vector<std::size_t>{config.k} : config.k_sweep;
  for (std::size_t k : ks) check_k(k, matrix.cols());

  Output out(config, "pipeline");
  json runs = json::array();
  std::map<std::string, double> errors;
  std::ostringstream sweep;
  sweep << "k,mean_mae,mean_nmae,mean_r2\n";
  for (std::size_t k : ks) {
    const std::string tag = "_k" + std::to_string(k);
    const SelectionResult selection = stage("select", [&] { return run_selection(fit_part, config, k); });
    const VirtualSensorFit fit = stage("train", [&] { return fit_imvs(fit_part, selection.selected, config); });
    const EvalReport report = stage("evaluate", [&] { return evaluate_model(fit.model, holdout, config); });

    out.write("selection" + tag + ".json", to_json(selection, out.meta()));
    out.write_with("train" + tag + ".csv", [&](std::ostream& s) { write_csv(s, fit.report); });
    out.write_with("eval" + tag + ".csv", [&](std::ostream& s) { write_csv(s, report, selection.selected); });
    out.write("eval" + tag + ".json", to_json(report, out.meta()));
    sweep << k << ',' << fmt(report.mean_mae) << ',' << fmt(report.mean_nmae) << ','
          << (report.mean_r2 ? fmt(*report.mean_r2) : "-") << '\n';

    errors["k=" + std::to_string(k)] = report.mean_nmae;
    json run;
    run["k"] = k;
    run["selected"] = selection.selected;
    run["mean_mae"] = report.mean_mae;
    run["mean_nmae"] = report.mean_nmae;
    run["best_epoch"] = fit.report.best_epoch;
    run["stopping_epoch"] = fit.report.stopping_epoch;
    runs.push_back(std::move(run));
  }
  out.write("sweep.csv", sweep.str());

  json summary;
  summary["config_hash"] = config.hash;
  summary["method"] = std::string(to_string(config.method));
  summary["fit_rows"] = split.fit_rows;
  summary["holdout_rows"] = split.holdout_rows;
  summary["runs"] = std::move(runs);
  if (errors.size() >= 2) {
    const SufficiencyReport verdict = sufficiency_check(errors, config.epsilon);
    summary["sufficiency"] = {{"epsilon", config.epsilon},
                              {"sufficient", verdict.sufficient},
                              {"max_divergence", verdict.max_divergence},
                              {"pair", {verdict.config_a, verdict.config_b}}};
  }
  out.write("pipeline_report.json", summary.dump(2) + "\n");
  out.finish();
}

void cmd_cmi(const RunConfig& config) {
  LoadResult log;
  const TimeSeriesMatrix matrix = stage("ingest", [&] { return load_matrix(config, &log); });
  std::string source = config.source_modality;
  const auto groups = stage("modalities", [&] { return modality_groups(config, log.records, source); });
  if (source.empty()) fail(ErrorKind::config, "no source modality configured (set 'source_modality')");
  if (!groups.contains(source)) fail(ErrorKind::config, "source modality '" + source + "' is not among the modalities");
  std::vector<std::string> targets = config.target_modalities;
  if (targets.empty()) {
    for (const auto& [name, ids] : groups) {
      if (name != source) targets.push_back(name);
    }
  }
  if (targets.empty()) fail(ErrorKind::config, "cross-modality inference needs at least one target modality");
  for (const auto& t : targets) {
    if (!groups.contains(t)) fail(ErrorKind::config, "target modality '" + t + "' is not among the modalities");
    if (t == source) fail(ErrorKind::config, "target modality '" + t + "' is also the source");
  }

  const RowSplit split = stage("split", [&] { return split_rows(matrix.rows(), config.holdout_fraction); });
  const TimeSeriesMatrix fit_part = matrix.slice_rows(0, split.fit_rows);
  const TimeSeriesMatrix holdout = matrix.slice_rows(split.fit_rows, matrix.rows());
  auto block = [&](const TimeSeriesMatrix& part, const std::string& name) {
    return ModalityBlock{name, part.select_columns(groups.at(name)).values()};
  };

  const ModalityIdOptions options{config.frames, config.bins, config.strategy, config.mi_mode};
  std::vector<ModalityIdReport> table;
  stage("modality id", [&] {
    const ModalityBlock source_block = block(fit_part, source);
    if (config.include_self) table.push_back(modality_id(source_block, source_block, options));
    for (const auto& t : targets) table.push_back(modality_id(source_block, block(fit_part, t), options));
  });

  Output out(config, "cmi");
  out.write_with("cmi_table.csv", [&](std::ostream& s) { write_csv(s, table); });

  std::ostringstream bars;
  bars << "modality,sensor_id,mae,nmae,r2\n";
  json evals = json::array();
  const auto& source_ids = groups.at(source);
  for (const auto& t : targets) {
    const auto& target_ids = groups.at(t);
    Eigen::MatrixXd estimate(holdout.rows(), static_cast<Eigen::Index>(target_ids.size()));
    for (std::size_t c = 0; c < target_ids.size(); ++c) {
      const std::vector<std::string> one{target_ids[c]};
      const VirtualSensorFit fit = stage("train", [&] {
        return fit_virtual_sensors(build_cmi_model(static_cast<Eigen::Index>(source_ids.size()), config.seed),
                                   fit_part.select_columns(source_ids).values(), fit_part.select_columns(one).values(),
                                   source_ids, one, config.train);
      });
      estimate.col(static_cast<Eigen::Index>(c)) =
          predict_virtual(fit.model, holdout.select_columns(source_ids).values()).col(0);
    }
    const EvalReport report = stage("evaluate", [&] {
      return evaluate(holdout.select_columns(target_ids).values(), estimate, target_ids, config.denominator);
    });
    for (const auto& row : report.rows) {
      bars << t << ',' << row.sensor_id << ',' << fmt(row.mae) << ',' << fmt(row.nmae) << ','
           << (row.r2 ? fmt(*row.r2) : "-") << '\n';
    }
    evals.push_back({{"modality", t}, {"mean_mae", report.mean_mae}, {"mean_nmae", report.mean_nmae}});
  }
  out.write("cmi_eval.csv", bars.str());

  json summary;
  summary["config_hash"] = config.hash;
  summary["source"] = source;
  json rows = json::array();
  for (const auto& r : table) {
    rows.push_back({{"modality_a", r.modality_a},
                    {"modality_b", r.modality_b},
                    {"mutual_information_nats", r.gamma_nats},
                    {"phase_deg", r.omega_deg},
                    {"similarity", r.tau}});
  }
  summary["table"] = std::move(rows);
  summary["evaluation"] = std::move(evals);
  out.write("cmi_report.json", summary.dump(2) + "\n");
  out.finish();
}

void cmd_synth(const RunConfig& config) {
  Output out(config, "synth");
  if (config.synth_kind == "clusters") {
    const SynthField field = stage("synth", [&] { return generate(config.synth); });
    out.write_with("synth.csv", [&](std::ostream& s) { write_wide_csv(s, field.matrix); });
    out.write("ground_truth.json", to_json(field.truth, out.meta()));
  } else {
    const CrossModalField field = stage("synth", [&] { return generate_cross_modal(config.cross); });
    out.write_with("synth.csv", [&](std::ostream& s) { write_wide_csv(s, field.matrix); });
    json truth;
    truth["config_hash"] = config.hash;
    truth["source"] = field.source;
    truth["modalities"] = field.modalities;
    out.write("ground_truth.json", truth.dump(2) + "\n");
  }
  out.finish();
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::contract:
      return 2;
    case ErrorKind::numeric:
      return 4;
    default:
      return 3;
  }
}

}  // namespace infodense::cli
