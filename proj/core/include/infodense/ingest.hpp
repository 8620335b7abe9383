#pragma once

// Loading, temporal alignment, z-score normalization and framing of raw
// sensor time series.

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace infodense {

using Timestamp = std::chrono::sys_seconds;

/// Parses `YYYY-MM-DD[T| ]HH:MM[:SS][Z|+HH:MM|-HH:MM]` into UTC seconds.
std::optional<Timestamp> parse_timestamp(std::string_view text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_timestamp(Timestamp t);

struct RawRecord {
  Timestamp timestamp;
  std::string sensor_id;
  std::string modality;
  double value = 0.0;
};

/// Column names for long-form CSV input.
struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string sensor_column = "sensor_id";
  std::string modality_column = "modality";
  std::string value_column = "value";
  /// Abort on the first unparseable row instead of counting and skipping it.
  bool strict = false;
};

struct LoadResult {
  std::vector<RawRecord> records;
  std::size_t rows_read = 0;
  std::size_t rejected = 0;
};

LoadResult load_long_csv(std::istream& source, const CsvSchema& schema = {});

/// Wide CSV: first column is the timestamp, one further column per sensor.
/// Every cell becomes a record tagged with `modality`; empty cells are gaps.
LoadResult load_wide_csv(std::istream& source, const std::string& modality = "",
                         bool strict = false);

/// Aligned T x N readings. Rows are strictly increasing timestamps, columns
/// follow `sensor_ids`, every cell is finite.
class TimeSeriesMatrix {
 public:
  TimeSeriesMatrix(std::vector<Timestamp> timestamps, std::vector<std::string> sensor_ids,
                   Eigen::MatrixXd values);

  const std::vector<Timestamp>& timestamps() const noexcept { return timestamps_; }
  const std::vector<std::string>& sensor_ids() const noexcept { return sensor_ids_; }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

  /// Column index of `sensor_id`; throws missing-sensor when absent.
  Eigen::Index column_of(std::string_view sensor_id) const;

  /// New matrix restricted to the given sensors, in the given order.
  TimeSeriesMatrix select_columns(std::span<const std::string> ids) const;
  /// New matrix with rows [begin, end).
  TimeSeriesMatrix slice_rows(Eigen::Index begin, Eigen::Index end) const;

  friend bool operator==(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b);

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<std::string> sensor_ids_;
  Eigen::MatrixXd values_;
};

void write_wide_csv(std::ostream& out, const TimeSeriesMatrix& matrix);

enum class MissingPolicy { drop_incomplete, forward_fill };

std::optional<MissingPolicy> parse_missing_policy(std::string_view name);

/// Snaps records onto a grid of `interval` and builds the aligned matrix.
///
/// Several records for one sensor in one grid slot are averaged, which also
/// serves to downsample onto a coarser grid. Rows are the slots in which at
/// least one sensor reported. Under `drop_incomplete` only slots where every
/// sensor reported survive; under `forward_fill` a gap repeats the sensor's
/// previous value and leading rows before every sensor has reported are
/// dropped. Sensors default to every id present in `records`, sorted.
TimeSeriesMatrix align(std::span<const RawRecord> records, std::chrono::seconds interval,
                       MissingPolicy policy = MissingPolicy::drop_incomplete,
                       std::span<const std::string> sensors = {});

/// Slices `series` into floor((T - d) / s) + 1 contiguous frames of length d.
Eigen::MatrixXd window(std::span<const double> series, Eigen::Index frame_len,
                       Eigen::Index stride);

enum class Normalization { zscore, none };

/// Per-sensor frames (rows are frames).
struct FrameSet {
  std::string sensor_id;
  Eigen::MatrixXd frames;
  Normalization normalization = Normalization::none;

  Eigen::Index frame_len() const noexcept { return frames.cols(); }
  Eigen::Index count() const noexcept { return frames.rows(); }
};

/// Frames of one column. Requires at least two frames of length >= 2.
FrameSet make_frameset(const TimeSeriesMatrix& matrix, Eigen::Index column,
                       Eigen::Index frame_len, Eigen::Index stride,
                       Normalization tag = Normalization::zscore);

/// Column-wise z-score with the n-1 sample variance. A column with variance
/// at or below `tolerance` is a degenerate sensor.
TimeSeriesMatrix normalize(const TimeSeriesMatrix& matrix, double tolerance = 1e-12);

}  // namespace infodense
