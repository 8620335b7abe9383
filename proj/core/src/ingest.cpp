#include "infodense/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "csv.hpp"
#include "infodense/errors.hpp"

namespace infodense {

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = detail::trim(text);
  // YYYY-MM-DD
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)},
                            day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;

  int h = 0, mi = 0, s = 0;
  std::string_view rest = text.substr(10);
  if (!rest.empty()) {
    if (rest.front() != 'T' && rest.front() != ' ') return std::nullopt;
    rest.remove_prefix(1);
    if (rest.size() < 5 || rest[2] != ':') return std::nullopt;
    if (!parse_int(rest.substr(0, 2), h) || !parse_int(rest.substr(3, 2), mi)) return std::nullopt;
    rest.remove_prefix(5);
    if (!rest.empty() && rest.front() == ':') {
      if (rest.size() < 3 || !parse_int(rest.substr(1, 2), s)) return std::nullopt;
      rest.remove_prefix(3);
      // Fractional seconds are truncated.
      if (!rest.empty() && rest.front() == '.') {
        rest.remove_prefix(1);
        while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
      }
    }
    if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  }

  int offset_seconds = 0;
  if (!rest.empty()) {
    if (rest == "Z") {
      rest = {};
    } else if ((rest.front() == '+' || rest.front() == '-') && rest.size() == 6 && rest[3] == ':') {
      int oh = 0, om = 0;
      if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om)) {
        return std::nullopt;
      }
      offset_seconds = (oh * 3600 + om * 60) * (rest.front() == '-' ? -1 : 1);
    } else {
      return std::nullopt;
    }
  }

  return sys_days{date} + hours{h} + minutes{mi} + seconds{s} - seconds{offset_seconds};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day date{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ",
                static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()), static_cast<long>(tod.hours().count()),
                static_cast<long>(tod.minutes().count()), static_cast<long>(tod.seconds().count()));
  return buffer;
}

LoadResult load_long_csv(std::istream& source, const CsvSchema& schema) {
  LoadResult result;
  std::string line;
  if (!detail::read_line(source, line)) fail(ErrorKind::schema, "missing CSV header");
  detail::strip_bom(line);
  const auto header = detail::split_csv_line(line);

  auto find_column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (detail::trim(header[i]) == name) return i;
    }
    if (required) fail(ErrorKind::schema, "CSV header lacks column '" + name + "'");
    return std::nullopt;
  };
  const std::size_t ts_col = *find_column(schema.timestamp_column, true);
  const std::size_t id_col = *find_column(schema.sensor_column, true);
  const std::size_t value_col = *find_column(schema.value_column, true);
  const auto modality_col = find_column(schema.modality_column, false);

  std::size_t line_no = 1;
  while (detail::read_line(source, line)) {
    ++line_no;
    if (detail::trim(line).empty() || line == "\r") continue;
    ++result.rows_read;
    const auto fields = detail::split_csv_line(line);
    auto field = [&](std::size_t i) -> std::string_view {
      return i < fields.size() ? detail::trim(fields[i]) : std::string_view{};
    };
    const auto ts = parse_timestamp(field(ts_col));
    const auto value = detail::parse_finite(field(value_col));
    const auto id = field(id_col);
    if (!ts || !value || id.empty() || fields.size() != header.size()) {
      if (schema.strict) {
        fail(ErrorKind::schema, "unparseable CSV row at line " + std::to_string(line_no));
      }
      ++result.rejected;
      continue;
    }
    result.records.push_back(RawRecord{*ts, std::string(id),
                                       modality_col ? std::string(field(*modality_col)) : "",
                                       *value});
  }
  return result;
}

LoadResult load_wide_csv(std::istream& source, const std::string& modality, bool strict) {
  LoadResult result;
  std::string line;
  if (!detail::read_line(source, line)) fail(ErrorKind::schema, "missing CSV header");
  detail::strip_bom(line);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2) fail(ErrorKind::schema, "wide CSV needs a timestamp and a sensor column");
  std::vector<std::string> ids;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const auto id = detail::trim(header[i]);
    if (id.empty()) fail(ErrorKind::schema, "empty sensor id in wide CSV header");
    ids.emplace_back(id);
  }

  std::size_t line_no = 1;
  while (detail::read_line(source, line)) {
    ++line_no;
    if (detail::trim(line).empty() || line == "\r") continue;
    ++result.rows_read;
    const auto fields = detail::split_csv_line(line);
    const auto ts = parse_timestamp(fields.front());
    if (!ts || fields.size() != header.size()) {
      if (strict) fail(ErrorKind::schema, "unparseable CSV row at line " + std::to_string(line_no));
      ++result.rejected;
      continue;
    }
    bool bad = false;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto cell = detail::trim(fields[i]);
      if (cell.empty()) continue;
      const auto value = detail::parse_finite(cell);
      if (!value) {
        bad = true;
        continue;
      }
      result.records.push_back(RawRecord{*ts, ids[i - 1], modality, *value});
    }
    if (bad) {
      if (strict) fail(ErrorKind::schema, "unparseable cell at line " + std::to_string(line_no));
      ++result.rejected;
    }
  }
  return result;
}

TimeSeriesMatrix::TimeSeriesMatrix(std::vector<Timestamp> timestamps,
                                   std::vector<std::string> sensor_ids, Eigen::MatrixXd values)
    : timestamps_(std::move(timestamps)),
      sensor_ids_(std::move(sensor_ids)),
      values_(std::move(values)) {
  require(static_cast<Eigen::Index>(timestamps_.size()) == values_.rows(),
          "timestamp count does not match matrix rows");
  require(static_cast<Eigen::Index>(sensor_ids_.size()) == values_.cols(),
          "sensor id count does not match matrix columns");
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    require(timestamps_[i - 1] < timestamps_[i], "timestamps must be strictly increasing");
  }
  std::set<std::string> unique(sensor_ids_.begin(), sensor_ids_.end());
  require(unique.size() == sensor_ids_.size(), "duplicate sensor id");
  if (!values_.allFinite()) fail(ErrorKind::numeric, "time-series matrix contains non-finite values");
}

Eigen::Index TimeSeriesMatrix::column_of(std::string_view sensor_id) const {
  const auto it = std::find(sensor_ids_.begin(), sensor_ids_.end(), sensor_id);
  if (it == sensor_ids_.end()) {
    fail(ErrorKind::missing_sensor, "sensor '" + std::string(sensor_id) + "' not in matrix");
  }
  return static_cast<Eigen::Index>(it - sensor_ids_.begin());
}

TimeSeriesMatrix TimeSeriesMatrix::select_columns(std::span<const std::string> ids) const {
  Eigen::MatrixXd out(rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = values_.col(column_of(ids[j]));
  }
  return {timestamps_, std::vector<std::string>(ids.begin(), ids.end()), std::move(out)};
}

TimeSeriesMatrix TimeSeriesMatrix::slice_rows(Eigen::Index begin, Eigen::Index end) const {
  require(0 <= begin && begin <= end && end <= rows(), "row slice out of range");
  return {std::vector<Timestamp>(timestamps_.begin() + begin, timestamps_.begin() + end),
          sensor_ids_, values_.middleRows(begin, end - begin)};
}

bool operator==(const TimeSeriesMatrix& a, const TimeSeriesMatrix& b) {
  return a.timestamps_ == b.timestamps_ && a.sensor_ids_ == b.sensor_ids_ &&
         a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
         a.values_ == b.values_;
}

void write_wide_csv(std::ostream& out, const TimeSeriesMatrix& matrix) {
  out << "timestamp";
  for (const auto& id : matrix.sensor_ids()) out << ',' << id;
  out << '\n';
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    out << format_timestamp(matrix.timestamps()[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      out << ',' << detail::format_double(matrix.values()(r, c));
    }
    out << '\n';
  }
}

std::optional<MissingPolicy> parse_missing_policy(std::string_view name) {
  if (name == "drop_incomplete") return MissingPolicy::drop_incomplete;
  if (name == "forward_fill") return MissingPolicy::forward_fill;
  return std::nullopt;
}

TimeSeriesMatrix align(std::span<const RawRecord> records, std::chrono::seconds interval,
                       MissingPolicy policy, std::span<const std::string> sensors) {
  require(interval.count() > 0, "alignment interval must be positive");

  std::vector<std::string> ids;
  if (sensors.empty()) {
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.sensor_id);
    ids.assign(seen.begin(), seen.end());
  } else {
    ids.assign(sensors.begin(), sensors.end());
  }
  if (ids.empty()) fail(ErrorKind::empty_result, "no sensors to align");

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < ids.size(); ++i) column.emplace(ids[i], i);

  // slot -> per-sensor list of values. Values are sorted before averaging so
  // that the result does not depend on record order.
  std::map<Timestamp, std::vector<std::vector<double>>> slots;
  std::vector<std::size_t> per_sensor(ids.size(), 0);
  for (const auto& r : records) {
    const auto it = column.find(r.sensor_id);
    if (it == column.end()) continue;
    const auto epoch = r.timestamp.time_since_epoch();
    const auto snapped = Timestamp{epoch - ((epoch % interval) + interval) % interval};
    auto& cell = slots[snapped];
    if (cell.empty()) cell.resize(ids.size());
    cell[it->second].push_back(r.value);
    ++per_sensor[it->second];
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (per_sensor[i] == 0) fail(ErrorKind::missing_sensor, "sensor '" + ids[i] + "' has no records");
  }

  auto mean_of = [](std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  };

  std::vector<Timestamp> stamps;
  std::vector<std::vector<double>> rows;
  std::vector<std::optional<double>> last(ids.size());
  for (auto& [stamp, cell] : slots) {
    std::vector<double> row(ids.size());
    bool complete = true;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!cell[i].empty()) {
        row[i] = mean_of(cell[i]);
        last[i] = row[i];
      } else if (policy == MissingPolicy::forward_fill && last[i]) {
        row[i] = *last[i];
      } else {
        complete = false;
      }
    }
    if (!complete) continue;
    stamps.push_back(stamp);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::empty_result, "no time slot has every sensor present");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < ids.size(); ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return {std::move(stamps), std::move(ids), std::move(values)};
}

Eigen::MatrixXd window(std::span<const double> series, Eigen::Index frame_len, Eigen::Index stride) {
  require(frame_len >= 1, "frame length must be at least 1");
  require(stride >= 1, "stride must be at least 1");
  const auto length = static_cast<Eigen::Index>(series.size());
  if (length < frame_len) {
    fail(ErrorKind::insufficient_data, "series of length " + std::to_string(length) +
                                           " is shorter than frame length " +
                                           std::to_string(frame_len));
  }
  const Eigen::Index count = (length - frame_len) / stride + 1;
  Eigen::MatrixXd frames(count, frame_len);
  for (Eigen::Index f = 0; f < count; ++f) {
    for (Eigen::Index i = 0; i < frame_len; ++i) {
      frames(f, i) = series[static_cast<std::size_t>(f * stride + i)];
    }
  }
  return frames;
}

FrameSet make_frameset(const TimeSeriesMatrix& matrix, Eigen::Index column, Eigen::Index frame_len,
                       Eigen::Index stride, Normalization tag) {
  require(0 <= column && column < matrix.cols(), "column index out of range");
  require(frame_len >= 2, "frame length must be at least 2");
  const Eigen::VectorXd series = matrix.values().col(column);
  FrameSet set{matrix.sensor_ids()[static_cast<std::size_t>(column)],
               window({series.data(), static_cast<std::size_t>(series.size())}, frame_len, stride),
               tag};
  if (set.count() < 2) {
    fail(ErrorKind::insufficient_data,
         "sensor '" + set.sensor_id + "' yields fewer than two frames");
  }
  return set;
}

TimeSeriesMatrix normalize(const TimeSeriesMatrix& matrix, double tolerance) {
  if (matrix.rows() < 2) fail(ErrorKind::insufficient_data, "normalization needs at least two rows");
  Eigen::MatrixXd out = matrix.values();
  const double denom = static_cast<double>(matrix.rows() - 1);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double mean = out.col(c).mean();
    out.col(c).array() -= mean;
    const double variance = out.col(c).squaredNorm() / denom;
    if (!(variance > tolerance)) {
      fail(ErrorKind::degenerate,
           "sensor '" + matrix.sensor_ids()[static_cast<std::size_t>(c)] + "' has zero variance");
    }
    out.col(c) /= std::sqrt(variance);
  }
  return {matrix.timestamps(), matrix.sensor_ids(), std::move(out)};
}

}  // namespace infodense
