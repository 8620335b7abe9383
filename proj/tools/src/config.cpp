#include "infodense_cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace infodense::cli {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) { fail(ErrorKind::config, message); }

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error("key '" + std::string(key) + "' has the wrong type");
  }
}

std::uint64_t get_u64(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_error("key '" + std::string(key) + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

int get_int(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) config_error("key '" + std::string(key) + "' must be an integer");
  return v.get<int>();
}

std::int64_t get_i64(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer()) config_error("key '" + std::string(key) + "' must be an integer");
  return v.get<std::int64_t>();
}

double get_double(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) config_error("key '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

template <typename E, typename Parse>
E get_enum(const json& j, const char* key, Parse parse) {
  const auto name = get<std::string>(j, key);
  const auto value = parse(name);
  if (!value) config_error("key '" + std::string(key) + "' has unknown value '" + name + "'");
  return *value;
}

void one_of(const std::string& value, const char* key, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  config_error("key '" + std::string(key) + "' has unknown value '" + value + "'");
}

std::string to_string(MissingPolicy p) { return p == MissingPolicy::drop_incomplete ? "drop_incomplete" : "forward_fill"; }
std::string to_string(LossReduction r) { return r == LossReduction::sum ? "sum" : "mean"; }
std::string to_string(NmaeDenominator d) {
  return d == NmaeDenominator::global_range ? "global_range" : "per_sensor_range";
}
std::string to_string(CrossMiMode m) { return m == CrossMiMode::surrogate ? "surrogate" : "mean_per_column"; }

json convert_override(const std::string& key, const json& prototype, const std::string& text) {
  try {
    switch (prototype.type()) {
      case json::value_t::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
      case json::value_t::number_unsigned:
      case json::value_t::number_integer: {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case json::value_t::number_float: {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
        break;
      }
      case json::value_t::string:
        return text;
      case json::value_t::array: {
        json list = json::array();
        std::stringstream items(text);
        std::string item;
        while (std::getline(items, item, ',')) {
          if (item.empty()) continue;
          if (key == "k_sweep") {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size()) config_error("key 'k_sweep' expects integers, got '" + item + "'");
            list.push_back(v);
          } else {
            list.push_back(item);
          }
        }
        return list;
      }
      case json::value_t::object:
        return json::parse(text);
      default:
        break;
    }
  } catch (const std::logic_error&) {
    // stoll/stod/json parse failures fall through to the diagnostic below
  }
  config_error("cannot read '" + text + "' as a value for '" + key + "'");
}

}  // namespace

json default_config_json() {
  const RunConfig c;
  json j;
  j["input"] = c.input;
  j["input_format"] = c.input_format;
  j["timestamp_column"] = c.schema.timestamp_column;
  j["sensor_column"] = c.schema.sensor_column;
  j["modality_column"] = c.schema.modality_column;
  j["value_column"] = c.schema.value_column;
  j["strict"] = c.schema.strict;
  j["modality"] = c.modality;
  j["sensors"] = json::array();
  j["interval_seconds"] = c.interval_seconds;
  j["missing_policy"] = to_string(c.missing_policy);

  j["frame_len"] = c.frames.frame_len;
  j["stride"] = c.frames.stride;
  j["bins"] = c.bins;
  j["bin_strategy"] = std::string(infodense::to_string(c.strategy));
  j["measure"] = c.measure;

  j["method"] = std::string(infodense::to_string(c.method));
  j["k"] = c.k;
  j["k_sweep"] = json::array();
  j["epsilon"] = c.epsilon;
  j["selection"] = c.selection_path;

  j["learning_rate"] = c.train.learning_rate;
  j["batch_size"] = c.train.batch_size;
  j["train_fraction"] = c.train.train_fraction;
  j["patience"] = c.train.patience;
  j["max_epochs"] = c.train.max_epochs;
  j["loss_reduction"] = to_string(c.train.reduction);
  j["shuffle_batches"] = c.train.shuffle_batches;
  j["holdout_fraction"] = c.holdout_fraction;
  j["checkpoint"] = c.checkpoint_path;
  j["nmae_denominator"] = to_string(c.denominator);

  j["source_modality"] = c.source_modality;
  j["target_modalities"] = json::array();
  j["modalities"] = json::object();
  j["modalities_from"] = c.modalities_from;
  j["mi_mode"] = to_string(c.mi_mode);
  j["include_self"] = c.include_self;

  j["synth_kind"] = c.synth_kind;
  j["n_clusters"] = c.synth.n_clusters;
  j["sensors_per_cluster"] = c.synth.sensors_per_cluster;
  j["samples"] = c.synth.samples;
  j["sigma"] = c.synth.sigma;
  j["noise_spread"] = c.synth.noise_spread;
  j["hub_angle_deg"] = c.synth.hub_angle_deg;
  j["amplitude_jitter"] = c.synth.amplitude_jitter;
  j["waveform"] = std::string(infodense::to_string(c.synth.waveform));
  j["n_pollutants"] = c.cross.n_pollutants;

  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("configuration must be a JSON object");
  const json defaults = default_config_json();
  for (const auto& item : j.items()) {
    if (!defaults.contains(item.key())) config_error("unknown configuration key '" + item.key() + "'");
  }
  for (const auto& item : defaults.items()) {
    if (!j.contains(item.key())) config_error("missing configuration key '" + item.key() + "'");
  }

  RunConfig c;
  c.input = get<std::string>(j, "input");
  c.input_format = get<std::string>(j, "input_format");
  one_of(c.input_format, "input_format", {"long", "wide"});
  c.schema.timestamp_column = get<std::string>(j, "timestamp_column");
  c.schema.sensor_column = get<std::string>(j, "sensor_column");
  c.schema.modality_column = get<std::string>(j, "modality_column");
  c.schema.value_column = get<std::string>(j, "value_column");
  c.schema.strict = get<bool>(j, "strict");
  c.modality = get<std::string>(j, "modality");
  c.sensors = get<std::vector<std::string>>(j, "sensors");
  c.interval_seconds = get_i64(j, "interval_seconds");
  if (c.interval_seconds < 0) config_error("interval_seconds must be nonnegative");
  c.missing_policy = get_enum<MissingPolicy>(j, "missing_policy", parse_missing_policy);

  c.frames.frame_len = get_i64(j, "frame_len");
  c.frames.stride = get_i64(j, "stride");
  if (c.frames.frame_len < 2) config_error("frame_len must be at least 2");
  if (c.frames.stride < 0) config_error("stride must be nonnegative");
  c.bins = get_int(j, "bins");
  if (c.bins < 2) config_error("bins must be at least 2");
  c.strategy = get_enum<BinStrategy>(j, "bin_strategy", parse_bin_strategy);
  c.measure = get<std::string>(j, "measure");
  one_of(c.measure, "measure", {"angle", "mi", "both"});

  c.method = get_enum<SelectionMethod>(j, "method", parse_selection_method);
  c.k = static_cast<std::size_t>(get_u64(j, "k"));
  if (c.k < 1) config_error("k must be at least 1");
  for (const json& v : j.at("k_sweep")) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) config_error("k_sweep entries must be positive integers");
    c.k_sweep.push_back(v.get<std::size_t>());
  }
  c.epsilon = get_double(j, "epsilon");
  if (!(c.epsilon > 0.0)) config_error("epsilon must be positive");
  c.selection_path = get<std::string>(j, "selection");

  c.train.learning_rate = get_double(j, "learning_rate");
  if (!(c.train.learning_rate > 0.0)) config_error("learning_rate must be positive");
  c.train.batch_size = get_i64(j, "batch_size");
  if (c.train.batch_size < 1) config_error("batch_size must be at least 1");
  c.train.train_fraction = get_double(j, "train_fraction");
  if (!(c.train.train_fraction > 0.0 && c.train.train_fraction < 1.0)) {
    config_error("train_fraction must lie in (0, 1)");
  }
  c.train.patience = get_int(j, "patience");
  if (c.train.patience < 1) config_error("patience must be at least 1");
  c.train.max_epochs = get_int(j, "max_epochs");
  if (c.train.max_epochs < 0) config_error("max_epochs must be nonnegative");
  const auto reduction = get<std::string>(j, "loss_reduction");
  one_of(reduction, "loss_reduction", {"sum", "mean"});
  c.train.reduction = reduction == "sum" ? LossReduction::sum : LossReduction::mean;
  c.train.shuffle_batches = get<bool>(j, "shuffle_batches");
  c.holdout_fraction = get_double(j, "holdout_fraction");
  if (!(c.holdout_fraction > 0.0 && c.holdout_fraction < 1.0)) config_error("holdout_fraction must lie in (0, 1)");
  c.checkpoint_path = get<std::string>(j, "checkpoint");
  const auto denominator = get<std::string>(j, "nmae_denominator");
  one_of(denominator, "nmae_denominator", {"global_range", "per_sensor_range"});
  c.denominator =
      denominator == "global_range" ? NmaeDenominator::global_range : NmaeDenominator::per_sensor_range;

  c.source_modality = get<std::string>(j, "source_modality");
  c.target_modalities = get<std::vector<std::string>>(j, "target_modalities");
  c.modalities = get<std::map<std::string, std::vector<std::string>>>(j, "modalities");
  c.modalities_from = get<std::string>(j, "modalities_from");
  const auto mi_mode = get<std::string>(j, "mi_mode");
  one_of(mi_mode, "mi_mode", {"surrogate", "mean_per_column"});
  c.mi_mode = mi_mode == "surrogate" ? CrossMiMode::surrogate : CrossMiMode::mean_per_column;
  c.include_self = get<bool>(j, "include_self");

  c.synth_kind = get<std::string>(j, "synth_kind");
  one_of(c.synth_kind, "synth_kind", {"clusters", "cross_modal"});
  c.synth.n_clusters = get_int(j, "n_clusters");
  c.synth.sensors_per_cluster = get_int(j, "sensors_per_cluster");
  c.synth.samples = get_i64(j, "samples");
  c.synth.sigma = get_double(j, "sigma");
  c.synth.noise_spread = get_double(j, "noise_spread");
  c.synth.hub_angle_deg = get_double(j, "hub_angle_deg");
  c.synth.amplitude_jitter = get_double(j, "amplitude_jitter");
  c.synth.waveform = get_enum<LatentWaveform>(j, "waveform", parse_latent_waveform);
  c.cross.n_pollutants = get_int(j, "n_pollutants");

  c.output_dir = get<std::string>(j, "output_dir");
  if (c.output_dir.empty()) config_error("output_dir must not be empty");
  c.seed = get_u64(j, "seed");

  c.train.seed = c.seed;
  c.synth.seed = c.seed;
  c.synth.frame_len = c.frames.frame_len;
  c.cross.seed = c.seed;
  c.cross.samples = c.synth.samples;
  c.cross.frame_len = c.frames.frame_len;
  c.cross.sigma = c.synth.sigma;

  c.effective = j;
  json hashed = j;
  hashed.erase("output_dir");
  c.hash = fnv1a_hex(hashed.dump());
  return c;
}

RunConfig load_config(const std::string& file_path, const std::map<std::string, std::string>& overrides) {
  json merged = default_config_json();
  if (!file_path.empty()) {
    std::ifstream in(file_path);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + file_path + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      config_error("config file '" + file_path + "' is not valid JSON: " + e.what());
    }
    if (!file.is_object()) config_error("config file must hold a JSON object");
    for (const auto& item : file.items()) {
      if (!merged.contains(item.key())) config_error("unknown configuration key '" + item.key() + "'");
      merged[item.key()] = item.value();
    }
  }
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') merged["output_dir"] = dir;
  const json defaults = default_config_json();
  for (const auto& [key, text] : overrides) {
    if (!defaults.contains(key)) config_error("unknown configuration key '" + key + "'");
    merged[key] = convert_override(key, defaults.at(key), text);
  }
  return config_from_json(merged);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace infodense::cli
