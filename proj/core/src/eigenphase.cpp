#include "infodense/eigenphase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "infodense/errors.hpp"

namespace infodense {

namespace {

void apply_sign_convention(Eigen::VectorXd& v) {
  // First entry whose magnitude is within rounding of the maximum decides.
  const double largest = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= largest - 1e-12) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

struct PowerResult {
  Eigen::VectorXd vector;
  double value = 0.0;
};

PowerResult power_iteration(const Eigen::MatrixXd& c, double tolerance = 1e-10,
                            int max_iterations = 10000) {
  const Eigen::Index d = c.rows();
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = 1.0 + static_cast<double>(i % 7) / 7.0;
  v.normalize();
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd w = c * v;
    const double norm = w.norm();
    if (norm == 0.0) return {v, 0.0};
    w /= norm;
    const double change = (w - v).cwiseAbs().maxCoeff();
    v = std::move(w);
    if (change < tolerance) break;
  }
  const double value = v.dot(c * v);
  return {v, value};
}

}  // namespace

CovMatrix covariance(const FrameSet& frames) {
  const Eigen::Index n = frames.count();
  if (n < 2) {
    fail(ErrorKind::insufficient_data, "covariance of '" + frames.sensor_id + "' needs at least two frames");
  }
  const Eigen::RowVectorXd mean = frames.frames.colwise().mean();
  const Eigen::MatrixXd centered = frames.frames.rowwise() - mean;
  Eigen::MatrixXd c = (centered.transpose() * centered) / static_cast<double>(n - 1);
  // Exact symmetry regardless of how the product was blocked.
  c = (0.5 * (c + c.transpose())).eval();
  return {frames.sensor_id, std::move(c)};
}

PrincipalComponent principal_eigenvector(const CovMatrix& cov) {
  const Eigen::MatrixXd& c = cov.matrix;
  require(c.rows() == c.cols(), "covariance of '" + cov.sensor_id + "' is not square");
  require(c.rows() >= 2, "covariance of '" + cov.sensor_id + "' must be at least 2 x 2");
  if (!c.allFinite()) fail(ErrorKind::numeric, "covariance of '" + cov.sensor_id + "' is not finite");
  const double scale = c.cwiseAbs().maxCoeff();
  require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, scale),
          "covariance of '" + cov.sensor_id + "' is not symmetric");
  if (scale == 0.0) fail(ErrorKind::degenerate, "covariance of '" + cov.sensor_id + "' is all zero");

  PrincipalComponent pc;
  pc.sensor_id = cov.sensor_id;
  double second = 0.0;
  if (c.rows() <= kDenseEigenLimit) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) {
      fail(ErrorKind::numeric, "eigendecomposition of '" + cov.sensor_id + "' failed");
    }
    const Eigen::Index d = c.rows();
    pc.eigenvalue = solver.eigenvalues()[d - 1];
    second = solver.eigenvalues()[d - 2];
    require(solver.eigenvalues()[0] >= -1e-8 * std::abs(pc.eigenvalue),
            "covariance of '" + cov.sensor_id + "' is not positive semi-definite");
    pc.vector = solver.eigenvectors().col(d - 1);
  } else {
    auto top = power_iteration(c);
    pc.eigenvalue = top.value;
    pc.vector = std::move(top.vector);
    const Eigen::MatrixXd deflated = c - pc.eigenvalue * pc.vector * pc.vector.transpose();
    second = power_iteration(deflated).value;
  }
  if (pc.eigenvalue <= 0.0) fail(ErrorKind::degenerate, "covariance of '" + cov.sensor_id + "' has no positive eigenvalue");
  pc.vector.normalize();
  apply_sign_convention(pc.vector);
  pc.spectral_gap = std::max(0.0, (pc.eigenvalue - second) / pc.eigenvalue);
  pc.weak_gap = pc.spectral_gap < kMinSpectralGap;
  return pc;
}

double angle(const PrincipalComponent& a, const PrincipalComponent& b) {
  require(a.vector.size() == b.vector.size(),
          "principal vectors of '" + a.sensor_id + "' and '" + b.sensor_id + "' differ in dimension");
  const double na = a.vector.norm();
  const double nb = b.vector.norm();
  require(na > 0.0 && nb > 0.0, "zero principal vector");
  // Same value as acos of the clamped cosine, without its loss of precision
  // near 0 and 180 degrees.
  const Eigen::VectorXd ua = a.vector / na;
  const Eigen::VectorXd ub = b.vector / nb;
  const double radians = 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
  return std::clamp(radians * 180.0 / std::numbers::pi, 0.0, 180.0);
}

AngleField angle_field(std::span<const PrincipalComponent> components) {
  const auto n = static_cast<Eigen::Index>(components.size());
  if (n < 2) fail(ErrorKind::insufficient_data, "angle field needs at least two sensors");
  AngleField field;
  field.omega = Eigen::MatrixXd::Zero(n, n);
  for (const auto& pc : components) field.sensor_ids.push_back(pc.sensor_id);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = angle(components[static_cast<std::size_t>(i)], components[static_cast<std::size_t>(j)]);
      field.omega(i, j) = w;
      field.omega(j, i) = w;
    }
  }
  return field;
}

double similarity_score(double omega_deg) {
  require(omega_deg >= 0.0 && omega_deg <= 180.0, "angle must lie in [0, 180] degrees");
  return std::abs(std::cos(omega_deg * std::numbers::pi / 180.0));
}

std::vector<PrincipalComponent> principal_components(const TimeSeriesMatrix& normalized,
                                                     const FrameOptions& options) {
  const Eigen::Index stride = options.stride == 0 ? options.frame_len : options.stride;
  std::vector<PrincipalComponent> out;
  out.reserve(static_cast<std::size_t>(normalized.cols()));
  for (Eigen::Index c = 0; c < normalized.cols(); ++c) {
    const FrameSet frames = make_frameset(normalized, c, options.frame_len, stride);
    out.push_back(principal_eigenvector(covariance(frames)));
  }
  return out;
}

AngleField eigen_phase_field(const TimeSeriesMatrix& matrix, const FrameOptions& options) {
  const auto components = principal_components(normalize(matrix), options);
  return angle_field(components);
}

}  // namespace infodense
