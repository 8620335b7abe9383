#pragma once

// Subcommands of the infodense tool. Each reads the run configuration, writes
// its artifacts into the output directory and records them in
// `<command>_manifest.json` together with the configuration hash.

#include <string>
#include <vector>

#include <infodense/infodense.hpp>

#include "infodense_cli/config.hpp"

namespace infodense::cli {

/// Load the configured input (long or wide CSV) and align it.
TimeSeriesMatrix load_matrix(const RunConfig& config, LoadResult* log = nullptr);

/// Rows used for selection and training, and the held-out tail.
struct RowSplit {
  Eigen::Index fit_rows = 0;
  Eigen::Index holdout_rows = 0;
};
RowSplit split_rows(Eigen::Index total, double holdout_fraction);

SelectionResult run_selection(const TimeSeriesMatrix& fit_part, const RunConfig& config, std::size_t k);

void cmd_ingest(const RunConfig& config);
void cmd_idfield(const RunConfig& config);
void cmd_select(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_evaluate(const RunConfig& config);
void cmd_pipeline(const RunConfig& config);
void cmd_cmi(const RunConfig& config);
void cmd_synth(const RunConfig& config);

/// Exit status for an error kind: 2 configuration, 3 data, 4 numeric.
int exit_code(ErrorKind kind) noexcept;

}  // namespace infodense::cli
