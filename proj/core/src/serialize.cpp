#include "infodense/serialize.hpp"

#include <ostream>

#include <json.hpp>

#include "csv.hpp"
#include "infodense/errors.hpp"

namespace infodense {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows, std::size_t n) {
  if (!rows.is_array() || rows.size() != n) fail(ErrorKind::schema, "matrix must have one row per sensor");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n) fail(ErrorKind::schema, "matrix row has the wrong length");
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  return m;
}

json vector_json(const Eigen::RowVectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::RowVectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::RowVectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void add_meta(json& j, const JsonMeta& meta) {
  for (const auto& [key, value] : meta) j[key] = value;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("unexpected JSON layout: ") + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string to_json(const AngleField& field, const JsonMeta& meta) {
  json j;
  j["sensor_ids"] = field.sensor_ids;
  j["measure"] = "eigen_phase_deg";
  j["matrix"] = matrix_rows(field.omega);
  add_meta(j, meta);
  return dump(j);
}

std::string to_json(const MiField& field, const JsonMeta& meta) {
  json j;
  j["sensor_ids"] = field.sensor_ids;
  j["measure"] = "mutual_information_nats";
  j["bins"] = field.bins;
  j["strategy"] = std::string(to_string(field.strategy));
  j["matrix"] = matrix_rows(field.gamma);
  add_meta(j, meta);
  return dump(j);
}

std::string to_json(const SelectionResult& selection, const JsonMeta& meta) {
  json j;
  j["method"] = std::string(to_string(selection.method));
  j["ranked_ids"] = selection.ranked_ids;
  j["scores"] = selection.scores;
  j["k"] = selection.k;
  j["selected"] = selection.selected;
  add_meta(j, meta);
  return dump(j);
}

std::string to_json(const EvalReport& report, const JsonMeta& meta) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["sensor_id"] = row.sensor_id;
    r["mae"] = row.mae;
    r["nmae"] = row.nmae;
    r["r2"] = row.r2 ? json(*row.r2) : json(nullptr);
    r["denominator"] = row.denominator;
    rows.push_back(std::move(r));
  }
  json j;
  j["rows"] = std::move(rows);
  j["average"] = {{"mae", report.mean_mae},
                  {"nmae", report.mean_nmae},
                  {"r2", report.mean_r2 ? json(*report.mean_r2) : json(nullptr)}};
  j["denominator_policy"] = report.policy == NmaeDenominator::global_range ? "global_range" : "per_sensor_range";
  j["denominator"] = report.denominator ? json(*report.denominator) : json(nullptr);
  add_meta(j, meta);
  return dump(j);
}

std::string to_json(const GroundTruth& truth, const JsonMeta& meta) {
  json clusters = json::object();
  for (std::size_t i = 0; i < truth.sensor_ids.size(); ++i) clusters[truth.sensor_ids[i]] = truth.cluster[i];
  json noise = json::object();
  for (std::size_t i = 0; i < truth.sensor_ids.size(); ++i) noise[truth.sensor_ids[i]] = truth.noise_sigma[i];
  json position = json::object();
  for (std::size_t i = 0; i < truth.position.size(); ++i) position[truth.sensor_ids[i]] = truth.position[i];
  json j;
  j["cluster_of"] = std::move(clusters);
  j["noise_sigma"] = std::move(noise);
  j["position_in_cluster"] = std::move(position);
  j["n_clusters"] = truth.latents.cols();
  add_meta(j, meta);
  return dump(j);
}

AngleField angle_field_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded([&] {
    if (j.at("measure") != "eigen_phase_deg") fail(ErrorKind::schema, "not an eigen-phase field");
    AngleField field;
    field.sensor_ids = j.at("sensor_ids").get<std::vector<std::string>>();
    field.omega = matrix_from_rows(j.at("matrix"), field.sensor_ids.size());
    return field;
  });
}

MiField mi_field_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded([&] {
    if (j.at("measure") != "mutual_information_nats") fail(ErrorKind::schema, "not a mutual-information field");
    MiField field;
    field.sensor_ids = j.at("sensor_ids").get<std::vector<std::string>>();
    field.gamma = matrix_from_rows(j.at("matrix"), field.sensor_ids.size());
    field.bins = j.at("bins").get<int>();
    const auto strategy = parse_bin_strategy(j.at("strategy").get<std::string>());
    if (!strategy) fail(ErrorKind::schema, "unknown bin strategy");
    field.strategy = *strategy;
    return field;
  });
}

SelectionResult selection_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded([&] {
    SelectionResult s;
    const auto method = parse_selection_method(j.at("method").get<std::string>());
    if (!method) fail(ErrorKind::schema, "unknown selection method");
    s.method = *method;
    s.ranked_ids = j.at("ranked_ids").get<std::vector<std::string>>();
    s.scores = j.at("scores").get<std::vector<double>>();
    s.k = j.at("k").get<std::size_t>();
    s.selected = j.at("selected").get<std::vector<std::string>>();
    if (s.scores.size() != s.ranked_ids.size() || s.k != s.selected.size() || s.k > s.ranked_ids.size() ||
        !std::equal(s.selected.begin(), s.selected.end(), s.ranked_ids.begin())) {
      fail(ErrorKind::schema, "inconsistent selection result");
    }
    return s;
  });
}

void write_csv(std::ostream& out, const AngleField& field) {
  out << "sensor_a,sensor_b,omega_deg,tau\n";
  const auto n = field.sensor_ids.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double w = field.omega(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      out << field.sensor_ids[a] << ',' << field.sensor_ids[b] << ',' << detail::format_double(w) << ','
          << detail::format_double(similarity_score(w)) << '\n';
    }
  }
}

void write_csv(std::ostream& out, const MiField& field) {
  out << "sensor_a,sensor_b,gamma_nats\n";
  const auto n = field.sensor_ids.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      out << field.sensor_ids[a] << ',' << field.sensor_ids[b] << ','
          << detail::format_double(field.gamma(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))) << '\n';
    }
  }
}

void write_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> physical_ids) {
  out << "virtual_sensor_id,physical_sensor_id,mae,r2,nmae\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    out << row.sensor_id << ',' << (i < physical_ids.size() ? physical_ids[i] : "-") << ','
        << detail::format_double(row.mae) << ',' << (row.r2 ? detail::format_double(*row.r2) : "-") << ','
        << detail::format_double(row.nmae) << '\n';
  }
  out << "Average Performance,-," << detail::format_double(report.mean_mae) << ','
      << (report.mean_r2 ? detail::format_double(*report.mean_r2) : "-") << ','
      << detail::format_double(report.mean_nmae) << '\n';
}

void write_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,train_mse,val_mse\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << detail::format_double(e.train_mse) << ',' << detail::format_double(e.val_mse) << '\n';
  }
}

void write_csv(std::ostream& out, std::span<const ModalityIdReport> rows) {
  out << "modality_a,modality_b,mutual_information_nats,phase_deg,similarity\n";
  for (const auto& r : rows) {
    out << r.modality_a << ',' << r.modality_b << ',' << detail::format_double(r.gamma_nats) << ','
        << detail::format_double(r.omega_deg) << ',' << detail::format_double(r.tau) << '\n';
  }
}

std::string checkpoint_to_json(const VirtualSensorModel& model, const CheckpointInfo& info, const JsonMeta& meta) {
  const MlpModel& net = model.network;
  json layers = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = net.weights(l);
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    }
    const auto b = net.bias(l);
    layers.push_back({{"weights", std::move(row_major)}, {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  json j;
  j["format"] = "infodense.checkpoint";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = net.layer_sizes();
  j["hidden_activation"] = "relu";
  j["output_activation"] = "identity";
  j["layers"] = std::move(layers);
  j["input_ids"] = model.input_ids;
  j["output_ids"] = model.output_ids;
  j["input_norm"] = {{"mean", vector_json(model.input_norm.mean)}, {"scale", vector_json(model.input_norm.scale)}};
  j["output_norm"] = {{"mean", vector_json(model.output_norm.mean)}, {"scale", vector_json(model.output_norm.scale)}};
  j["seed"] = info.seed;
  j["config"] = {{"learning_rate", info.config.learning_rate},
                 {"batch_size", info.config.batch_size},
                 {"train_fraction", info.config.train_fraction},
                 {"patience", info.config.patience},
                 {"max_epochs", info.config.max_epochs},
                 {"loss_reduction", info.config.reduction == LossReduction::sum ? "sum" : "mean"}};
  add_meta(j, meta);
  return dump(j);
}

VirtualSensorModel checkpoint_from_json(std::string_view text) {
  const json j = parse(text);
  return guarded([&] {
    if (j.at("format") != "infodense.checkpoint") fail(ErrorKind::schema, "not a model checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) fail(ErrorKind::schema, "unsupported checkpoint version");
    MlpModel net(j.at("layer_sizes").get<std::vector<Eigen::Index>>());
    const json& layers = j.at("layers");
    if (layers.size() != net.layer_count()) fail(ErrorKind::schema, "checkpoint layer count mismatch");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      const auto row_major = layers[l].at("weights").get<std::vector<double>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      auto w = net.weights(l);
      auto b = net.bias(l);
      if (static_cast<Eigen::Index>(row_major.size()) != w.size() || static_cast<Eigen::Index>(bias.size()) != b.size()) {
        fail(ErrorKind::schema, "checkpoint layer " + std::to_string(l) + " has the wrong shape");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = row_major[static_cast<std::size_t>(r * w.cols() + c)];
      }
      for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = bias[static_cast<std::size_t>(r)];
    }
    VirtualSensorModel model{std::move(net),
                             j.at("input_ids").get<std::vector<std::string>>(),
                             j.at("output_ids").get<std::vector<std::string>>(),
                             {vector_from_json(j.at("input_norm").at("mean")), vector_from_json(j.at("input_norm").at("scale"))},
                             {vector_from_json(j.at("output_norm").at("mean")),
                              vector_from_json(j.at("output_norm").at("scale"))}};
    if (static_cast<Eigen::Index>(model.input_ids.size()) != model.network.input_size() ||
        static_cast<Eigen::Index>(model.output_ids.size()) != model.network.output_size() ||
        model.input_norm.mean.size() != model.network.input_size() ||
        model.input_norm.scale.size() != model.network.input_size() ||
        model.output_norm.mean.size() != model.network.output_size() ||
        model.output_norm.scale.size() != model.network.output_size()) {
      fail(ErrorKind::schema, "checkpoint ids or normalization do not match the layer sizes");
    }
    return model;
  });
}

}  // namespace infodense
