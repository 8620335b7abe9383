#pragma once

// JSON and CSV encodings of fields, selections, reports and checkpoints.
// Output is deterministic: the same value always serializes to the same bytes.

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "infodense/eigenphase.hpp"
#include "infodense/metrics.hpp"
#include "infodense/mutualinfo.hpp"
#include "infodense/regress.hpp"
#include "infodense/select.hpp"
#include "infodense/synth.hpp"

namespace infodense {

/// Extra top-level string members (provenance, config hash) for JSON output.
using JsonMeta = std::map<std::string, std::string>;

std::string to_json(const AngleField& field, const JsonMeta& meta = {});
std::string to_json(const MiField& field, const JsonMeta& meta = {});
std::string to_json(const SelectionResult& selection, const JsonMeta& meta = {});
std::string to_json(const EvalReport& report, const JsonMeta& meta = {});
std::string to_json(const GroundTruth& truth, const JsonMeta& meta = {});

AngleField angle_field_from_json(std::string_view text);
MiField mi_field_from_json(std::string_view text);
SelectionResult selection_from_json(std::string_view text);

/// Long form over all ordered pairs: sensor_a,sensor_b,omega_deg,tau
void write_csv(std::ostream& out, const AngleField& field);
/// Long form over all ordered pairs: sensor_a,sensor_b,gamma_nats
void write_csv(std::ostream& out, const MiField& field);

/// Table layout: virtual_sensor_id,physical_sensor_id,mae,r2,nmae with a
/// closing "Average Performance" row. Physical ids fill the second column top
/// down; other cells in it are "-", as are missing R2 values.
void write_csv(std::ostream& out, const EvalReport& report, std::span<const std::string> physical_ids = {});

/// epoch,train_mse,val_mse
void write_csv(std::ostream& out, const TrainReport& report);

/// modality_a,modality_b,mutual_information_nats,phase_deg,similarity
void write_csv(std::ostream& out, std::span<const ModalityIdReport> rows);

struct CheckpointInfo {
  std::uint64_t seed = 0;
  TrainConfig config;
};

/// Versioned JSON checkpoint; weights are stored row-major per layer.
std::string checkpoint_to_json(const VirtualSensorModel& model, const CheckpointInfo& info,
                               const JsonMeta& meta = {});
VirtualSensorModel checkpoint_from_json(std::string_view text);

}  // namespace infodense
