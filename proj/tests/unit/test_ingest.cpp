#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace infodense;
using testing_support::at;
using testing_support::raises;

namespace {

std::vector<RawRecord> grid_records(const std::vector<std::string>& ids, int stamps) {
  std::vector<RawRecord> out;
  for (const auto& id : ids) {
    for (int t = 0; t < stamps; ++t) out.push_back({at(15 * t), id, "traffic", 10.0 * t + (id == "B" ? 1.0 : 0.0)});
  }
  return out;
}

}  // namespace

TEST(Timestamp, ParsesCommonForms) {
  EXPECT_EQ(parse_timestamp("2024-01-01T00:15:00Z"), at(15));
  EXPECT_EQ(parse_timestamp("2024-01-01 00:15"), at(15));
  EXPECT_EQ(parse_timestamp("2024-01-01T01:15:00+01:00"), at(15));
  EXPECT_FALSE(parse_timestamp("yesterday"));
  EXPECT_FALSE(parse_timestamp("2024-13-01T00:00:00Z"));
  EXPECT_EQ(format_timestamp(at(15)), "2024-01-01T00:15:00Z");
}

TEST(LoadLongCsv, ThreeValidRows) {
  std::istringstream in(
      "timestamp,sensor_id,modality,value\n"
      "2024-01-01T00:00:00Z,a,traffic,1\n"
      "2024-01-01T00:15:00Z,a,traffic,2\n"
      "2024-01-01T00:30:00Z,a,traffic,3\n");
  const LoadResult r = load_long_csv(in);
  EXPECT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.rejected, 0u);
  EXPECT_EQ(r.records[2].value, 3.0);
  EXPECT_EQ(r.records[1].timestamp, at(15));
}

TEST(LoadLongCsv, NanRowIsRejected) {
  std::istringstream in(
      "timestamp,sensor_id,modality,value\n"
      "2024-01-01T00:00:00Z,a,traffic,1\n"
      "2024-01-01T00:15:00Z,a,traffic,NaN\n");
  const LoadResult r = load_long_csv(in);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.rejected, 1u);
}

TEST(LoadLongCsv, HeaderOnly) {
  std::istringstream in("timestamp,sensor_id,modality,value\n");
  EXPECT_TRUE(load_long_csv(in).records.empty());
}

TEST(LoadLongCsv, MalformedHeaderIsSchemaError) {
  std::istringstream in("time,id,value\n2024-01-01T00:00:00Z,a,1\n");
  EXPECT_TRUE(raises([&] { load_long_csv(in); }, ErrorKind::schema));
}

TEST(LoadLongCsv, StrictModeAborts) {
  std::istringstream in(
      "timestamp,sensor_id,modality,value\n"
      "2024-01-01T00:00:00Z,a,traffic,oops\n");
  CsvSchema schema;
  schema.strict = true;
  EXPECT_TRUE(raises([&] { load_long_csv(in, schema); }, ErrorKind::schema));
}

TEST(LoadLongCsv, CustomColumnNames) {
  std::istringstream in("value,when,who\n4.5,2024-01-01T00:00:00Z,x\n");
  CsvSchema schema;
  schema.timestamp_column = "when";
  schema.sensor_column = "who";
  const LoadResult r = load_long_csv(in, schema);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].sensor_id, "x");
  EXPECT_EQ(r.records[0].value, 4.5);
}

TEST(LoadWideCsv, EmptyCellsAreGaps) {
  std::istringstream in(
      "timestamp,a,b\n"
      "2024-01-01T00:00:00Z,1,2\n"
      "2024-01-01T00:15:00Z,3,\n");
  const LoadResult r = load_wide_csv(in, "traffic");
  EXPECT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].modality, "traffic");
}

TEST(Align, AlreadyAligned) {
  const auto m = align(grid_records({"A", "B"}, 4), std::chrono::minutes(15));
  EXPECT_EQ(m.rows(), 4);
  EXPECT_EQ(m.cols(), 2);
  EXPECT_EQ(m.values()(3, 1), 31.0);
}

TEST(Align, DropIncompleteRemovesGapRow) {
  auto records = grid_records({"A", "B"}, 4);
  std::erase_if(records, [](const RawRecord& r) { return r.sensor_id == "B" && r.timestamp == at(30); });
  const auto m = align(records, std::chrono::minutes(15));
  EXPECT_EQ(m.rows(), 3);
  EXPECT_EQ(std::count(m.timestamps().begin(), m.timestamps().end(), at(30)), 0);
}

TEST(Align, ForwardFillRepeatsPreviousValue) {
  auto records = grid_records({"A", "B"}, 4);
  std::erase_if(records, [](const RawRecord& r) { return r.sensor_id == "B" && r.timestamp == at(30); });
  const auto m = align(records, std::chrono::minutes(15), MissingPolicy::forward_fill);
  ASSERT_EQ(m.rows(), 4);
  EXPECT_EQ(m.values()(2, 1), m.values()(1, 1));
}

TEST(Align, SnapsAndAveragesWithinSlot) {
  std::vector<RawRecord> records{{at(0), "A", "", 1.0}, {at(5), "A", "", 3.0}, {at(16), "A", "", 7.0}};
  const auto m = align(records, std::chrono::minutes(15));
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m.values()(0, 0), 2.0);
  EXPECT_EQ(m.timestamps()[1], at(15));
}

TEST(Align, MissingSensorAndEmptyResult) {
  const auto records = grid_records({"A"}, 3);
  const std::vector<std::string> wanted{"A", "Z"};
  EXPECT_TRUE(raises([&] { align(records, std::chrono::minutes(15), MissingPolicy::drop_incomplete, wanted); },
                     ErrorKind::missing_sensor));
  std::vector<RawRecord> disjoint{{at(0), "A", "", 1.0}, {at(15), "B", "", 1.0}};
  EXPECT_TRUE(raises([&] { align(disjoint, std::chrono::minutes(15)); }, ErrorKind::empty_result));
}

TEST(Align, OrderOfRecordsDoesNotMatter) {
  auto records = grid_records({"A", "B", "C"}, 20);
  records.push_back({at(3), "A", "", 100.0});  // shares a slot with at(0)
  const auto reference = align(records, std::chrono::minutes(15));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(records.begin(), records.end(), rng);
    EXPECT_TRUE(align(records, std::chrono::minutes(15)) == reference);
  }
}

TEST(Window, ExactTiling) {
  const std::vector<double> x{1, 2, 3, 4};
  const Eigen::MatrixXd f = window(x, 2, 2);
  ASSERT_EQ(f.rows(), 2);
  EXPECT_EQ(f(0, 0), 1);
  EXPECT_EQ(f(0, 1), 2);
  EXPECT_EQ(f(1, 0), 3);
  EXPECT_EQ(f(1, 1), 4);
  EXPECT_EQ(window(x, 2, 1).rows(), 3);
}

TEST(Window, TooShortSeries) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_TRUE(raises([&] { window(x, 4, 1); }, ErrorKind::insufficient_data));
}

TEST(Window, FrameCountFormulaProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const int T = std::uniform_int_distribution<int>(1, 60)(rng);
    const int d = std::uniform_int_distribution<int>(1, T)(rng);
    const int s = std::uniform_int_distribution<int>(1, T)(rng);
    std::vector<double> x(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i) x[static_cast<std::size_t>(i)] = i;
    const Eigen::MatrixXd f = window(x, d, s);
    ASSERT_EQ(f.rows(), (T - d) / s + 1) << T << " " << d << " " << s;
    for (Eigen::Index r = 0; r < f.rows(); ++r) EXPECT_EQ(f(r, 0), static_cast<double>(r * s));
  }
}

TEST(Normalize, HandZScore) {
  Eigen::MatrixXd v(3, 1);
  v << 1, 2, 3;
  const auto n = normalize(testing_support::matrix_of(v));
  EXPECT_NEAR(n.values()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(n.values()(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(n.values()(2, 0), 1.0, 1e-15);
}

TEST(Normalize, ConstantColumnNamesTheSensor) {
  Eigen::MatrixXd v(3, 2);
  v << 1, 5, 2, 5, 3, 5;
  try {
    normalize(testing_support::matrix_of(v, {"ok", "flat"}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
}

TEST(Normalize, IdempotentAndPermutationCommuting) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(4.0, 3.0);
  Eigen::MatrixXd v(200, 4);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  const auto once = normalize(testing_support::matrix_of(v));
  const auto twice = normalize(once);
  EXPECT_LT((once.values() - twice.values()).cwiseAbs().maxCoeff(), 1e-9);
  for (Eigen::Index c = 0; c < 4; ++c) {
    EXPECT_NEAR(once.values().col(c).mean(), 0.0, 1e-12);
    EXPECT_NEAR(once.values().col(c).squaredNorm() / 199.0, 1.0, 1e-12);
  }
  const std::vector<std::string> order{"s2", "s0", "s3", "s1"};
  const auto permuted_first = normalize(once.select_columns(order));
  const auto normalized_first = once.select_columns(order);
  EXPECT_LT((permuted_first.values() - normalized_first.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FrameSetTest, ZscoreFrames) {
  Eigen::MatrixXd v(8, 1);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  const auto fs = make_frameset(normalize(testing_support::matrix_of(v)), 0, 4, 4);
  EXPECT_EQ(fs.count(), 2);
  EXPECT_EQ(fs.frame_len(), 4);
  EXPECT_EQ(fs.normalization, Normalization::zscore);
  EXPECT_TRUE(raises([&] { make_frameset(testing_support::matrix_of(v), 0, 8, 8); }, ErrorKind::insufficient_data));
}

TEST(TimeSeriesMatrixTest, Invariants) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_TRUE(raises([&] { TimeSeriesMatrix({at(15), at(0)}, {"a", "b"}, v); }, ErrorKind::contract));
  EXPECT_TRUE(raises([&] { TimeSeriesMatrix({at(0), at(15)}, {"a", "a"}, v); }, ErrorKind::contract));
  v(0, 0) = std::nan("");
  EXPECT_TRUE(raises([&] { TimeSeriesMatrix({at(0), at(15)}, {"a", "b"}, v); }, ErrorKind::numeric));
  const auto m = testing_support::matrix_of(Eigen::MatrixXd::Ones(2, 2));
  EXPECT_TRUE(raises([&] { m.column_of("zz"); }, ErrorKind::missing_sensor));
}

TEST(WideCsv, RoundTrip) {
  Eigen::MatrixXd v(3, 2);
  v << 0.1, 2, 1e-7, -3.25, 12345.678, 0;
  const auto m = testing_support::matrix_of(v, {"x", "y"});
  std::stringstream text;
  write_wide_csv(text, m);
  const LoadResult r = load_wide_csv(text);
  EXPECT_TRUE(align(r.records, std::chrono::minutes(15)) == m);
}
