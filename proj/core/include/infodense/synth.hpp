#pragma once

// Synthetic sensor fields with planted cluster structure, and brute-force
// oracles used to cross-check the estimators.

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "infodense/ingest.hpp"

namespace infodense {

enum class LatentWaveform {
  /// Per cluster j: the frame-periodic profile cos(h x) + cos(2 h x) / 2 with
  /// h = 2j + 1, scaled each frame by an amplitude drawn from
  /// [1 - jitter, 1 + jitter]. Harmonic sets are disjoint, so distinct
  /// clusters are exactly orthogonal over whole frames.
  daily_sinusoid,
  /// Per cluster: moving average of white noise, rescaled to unit deviation.
  smoothed_noise,
};

std::optional<LatentWaveform> parse_latent_waveform(std::string_view name);
std::string_view to_string(LatentWaveform waveform) noexcept;

struct SynthSpec {
  int n_clusters = 3;
  int sensors_per_cluster = 4;
  Eigen::Index samples = 5000;
  Eigen::Index frame_len = 50;
  LatentWaveform waveform = LatentWaveform::daily_sinusoid;
  double amplitude_jitter = 0.5;
  /// Within-cluster hub structure. Position 0 of each cluster carries the
  /// cluster latent itself; the other positions carry it tilted by this angle
  /// in directions orthogonal to every cluster latent, so the hub is the
  /// member closest in angle to its cluster mates. 0 gives a shared latent.
  double hub_angle_deg = 0.0;
  /// Gains are drawn once per position within a cluster and reused by every
  /// cluster, so all clusters have the same composition.
  bool symmetric_gains = true;
  double gain_min = 0.5;
  double gain_max = 1.5;
  double offset_min = -2.0;
  double offset_max = 2.0;
  /// Base noise deviation. Within a cluster the i-th of m sensors gets
  /// sigma * (1 + noise_spread * (i / (m - 1) - 1/2)).
  double sigma = 0.1;
  double noise_spread = 1.0;
  /// When non-empty, overrides the formula above: entry i is the noise
  /// deviation of position i in every cluster.
  std::vector<double> position_sigma;
  std::chrono::seconds interval{900};
  Timestamp start{std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}};
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::vector<std::string> sensor_ids;
  std::vector<int> cluster;       // parallel to sensor_ids
  std::vector<int> position;      // index within the cluster; 0 is the hub
  std::vector<double> noise_sigma;  // parallel to sensor_ids
  Eigen::MatrixXd latents;        // T x n_clusters, the hub latents
};

struct SynthField {
  TimeSeriesMatrix matrix;
  GroundTruth truth;
};

/// Sensor s in cluster j emits gain_s * z_j(t) + offset_s + noise. Cluster
/// slots are assigned to sensor ids in seeded random order.
SynthField generate(const SynthSpec& spec);

enum class DerivedKind {
  linear,     // affine in the primary driver
  quadratic,  // square of the primary driver
  random,     // independent uniform noise
};

struct DerivedModality {
  std::string name;
  DerivedKind kind = DerivedKind::linear;
};

struct CrossModalSpec {
  int n_pollutants = 10;
  Eigen::Index samples = 5000;
  Eigen::Index frame_len = 50;
  double sigma = 0.05;
  std::vector<DerivedModality> derived{{"linear", DerivedKind::linear},
                                       {"quadratic", DerivedKind::quadratic},
                                       {"random", DerivedKind::random}};
  std::chrono::seconds interval{3600};
  std::uint64_t seed = 0;
};

struct CrossModalField {
  TimeSeriesMatrix matrix;
  std::string source;  // name of the pollutant block
  std::map<std::string, std::vector<std::string>> modalities;  // modality -> column ids
};

/// A block of pollutant species driven by two latent daily profiles, plus
/// derived modalities that depend on the first driver.
CrossModalField generate_cross_modal(const CrossModalSpec& spec);

/// Direct evaluation of sum p(a,b) log(p(a,b) / (p(a) p(b))) with marginals
/// recomputed inside the loop.
double oracle_mi(const Eigen::MatrixXd& joint_counts);

struct Eigenpair {
  Eigen::VectorXd vector;  // unit norm, sign not normalized
  double value = 0.0;
};

/// Largest eigenpair of a symmetric 2 x 2 (closed form) or 3 x 3 (cyclic
/// Jacobi rotations) matrix.
Eigenpair oracle_eigen(const Eigen::MatrixXd& symmetric);

}  // namespace infodense
