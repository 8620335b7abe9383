#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <infodense/infodense.hpp>

namespace testing_support {

inline ::testing::AssertionResult raises(const std::function<void()>& body, infodense::ErrorKind kind) {
  try {
    body();
  } catch (const infodense::Error& e) {
    if (e.kind() == kind) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "raised " << infodense::to_string(e.kind()) << ": " << e.what();
  }
  return ::testing::AssertionFailure() << "nothing raised";
}

inline infodense::Timestamp at(int minutes) {
  return infodense::Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}} + std::chrono::minutes(minutes);
}

inline infodense::TimeSeriesMatrix matrix_of(const Eigen::MatrixXd& values, std::vector<std::string> ids = {}) {
  if (ids.empty()) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) ids.push_back("s" + std::to_string(c));
  }
  std::vector<infodense::Timestamp> stamps;
  for (Eigen::Index t = 0; t < values.rows(); ++t) stamps.push_back(at(15 * static_cast<int>(t)));
  return {stamps, ids, values};
}

}  // namespace testing_support
