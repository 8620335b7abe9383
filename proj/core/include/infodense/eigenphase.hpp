#pragma once

// Phase in eigen space: angles between the principal eigenvectors of each
// sensor's frame covariance. A small angle means two sensors vary along the
// same dominant direction and are largely redundant.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "infodense/ingest.hpp"

namespace infodense {

struct CovMatrix {
  std::string sensor_id;
  Eigen::MatrixXd matrix;
};

struct PrincipalComponent {
  std::string sensor_id;
  /// Unit norm; the entry of largest magnitude is positive.
  Eigen::VectorXd vector;
  double eigenvalue = 0.0;
  /// (lambda1 - lambda2) / lambda1.
  double spectral_gap = 0.0;
  /// Set when the gap falls below `kMinSpectralGap`; the direction is then
  /// poorly determined.
  bool weak_gap = false;
};

inline constexpr double kMinSpectralGap = 0.05;
/// Dense symmetric eigendecomposition up to this dimension, power iteration above.
inline constexpr Eigen::Index kDenseEigenLimit = 512;

/// Sample covariance (n-1 denominator) of the frames, d x d.
CovMatrix covariance(const FrameSet& frames);

PrincipalComponent principal_eigenvector(const CovMatrix& cov);

/// Angle in degrees in [0, 180] between two principal vectors.
double angle(const PrincipalComponent& a, const PrincipalComponent& b);

struct AngleField {
  std::vector<std::string> sensor_ids;
  Eigen::MatrixXd omega;  // degrees, symmetric, zero diagonal
};

AngleField angle_field(std::span<const PrincipalComponent> components);

/// tau = |cos(omega)|, omega in degrees.
double similarity_score(double omega_deg);

struct FrameOptions {
  Eigen::Index frame_len = 96;
  Eigen::Index stride = 96;  // 0 means stride = frame_len
};

/// Principal components for every column of an already normalized matrix.
std::vector<PrincipalComponent> principal_components(const TimeSeriesMatrix& normalized,
                                                     const FrameOptions& options);

/// normalize -> frame -> covariance -> principal vector -> angle field.
AngleField eigen_phase_field(const TimeSeriesMatrix& matrix, const FrameOptions& options);

}  // namespace infodense
