#include "infodense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "infodense/errors.hpp"

namespace infodense {

namespace {

std::vector<Timestamp> time_grid(Timestamp start, std::chrono::seconds interval, Eigen::Index samples) {
  std::vector<Timestamp> stamps(static_cast<std::size_t>(samples));
  for (Eigen::Index t = 0; t < samples; ++t) stamps[static_cast<std::size_t>(t)] = start + interval * t;
  return stamps;
}

std::string numbered_id(std::string_view prefix, int index, int count) {
  const int width = std::max(2, static_cast<int>(std::to_string(std::max(count - 1, 0)).size()));
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return std::string(prefix) + digits;
}

/// Frame-locked profile cos(h x) + cos(2 h x) / 2 with a per-frame amplitude.
/// Its positive peaks (1.5) dominate the troughs (-0.75), so the largest
/// entry of the profile has a definite sign. Columns: the profile, then the
/// same amplitude times sin(h x) and sin(2 h x).
Eigen::MatrixXd modulated_profile(Eigen::Index samples, Eigen::Index frame_len, int harmonic, double jitter,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd z(samples, 3);
  double amplitude = 1.0;
  for (Eigen::Index t = 0; t < samples; ++t) {
    if (t % frame_len == 0) amplitude = 1.0 + jitter * unit(rng);
    const double x = 2.0 * std::numbers::pi * harmonic * static_cast<double>(t % frame_len) /
                     static_cast<double>(frame_len);
    z(t, 0) = amplitude * (std::cos(x) + 0.5 * std::cos(2.0 * x));
    z(t, 1) = amplitude * std::sin(x);
    z(t, 2) = amplitude * std::sin(2.0 * x);
  }
  return z;
}

Eigen::VectorXd smoothed_noise(Eigen::Index samples, Eigen::Index width, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd white(samples + width - 1);
  for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = normal(rng);
  Eigen::VectorXd z(samples);
  for (Eigen::Index t = 0; t < samples; ++t) z[t] = white.segment(t, width).mean();
  z.array() -= z.mean();
  const double sd = std::sqrt(z.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(samples - 1, 1)));
  if (sd > 0.0) z /= sd;
  return z;
}

}  // namespace

std::optional<LatentWaveform> parse_latent_waveform(std::string_view name) {
  if (name == "daily_sinusoid") return LatentWaveform::daily_sinusoid;
  if (name == "smoothed_noise") return LatentWaveform::smoothed_noise;
  return std::nullopt;
}

std::string_view to_string(LatentWaveform waveform) noexcept {
  return waveform == LatentWaveform::daily_sinusoid ? "daily_sinusoid" : "smoothed_noise";
}

SynthField generate(const SynthSpec& spec) {
  require(spec.n_clusters >= 1, "need at least one cluster");
  require(spec.sensors_per_cluster >= 1, "need at least one sensor per cluster");
  require(spec.frame_len >= 2, "frame length must be at least 2");
  require(spec.samples >= 2 * spec.frame_len, "need at least two frames of samples");
  require(spec.sigma >= 0.0, "noise sigma must be nonnegative");
  require(spec.noise_spread >= 0.0 && spec.noise_spread < 2.0, "noise spread must lie in [0, 2)");
  require(spec.amplitude_jitter >= 0.0 && spec.amplitude_jitter < 1.0, "amplitude jitter must lie in [0, 1)");
  require(spec.gain_min > 0.0 && spec.gain_min <= spec.gain_max, "gain range must be positive and ordered");
  require(spec.offset_min <= spec.offset_max, "offset range must be ordered");
  require(spec.interval.count() > 0, "sampling interval must be positive");
  require(spec.position_sigma.empty() ||
              static_cast<int>(spec.position_sigma.size()) == spec.sensors_per_cluster,
          "position_sigma needs one entry per sensor in a cluster");
  for (double v : spec.position_sigma) require(v >= 0.0, "noise sigma must be nonnegative");
  if (spec.waveform == LatentWaveform::daily_sinusoid) {
    // Cluster j uses harmonics 2j+1 and 4j+2; the highest must stay below Nyquist.
    require(2 * (4 * (spec.n_clusters - 1) + 2) < spec.frame_len, "frame too short to hold the cluster harmonics");
  }
  require(spec.hub_angle_deg >= 0.0 && spec.hub_angle_deg <= 20.0, "hub angle must lie in [0, 20] degrees");
  require(spec.hub_angle_deg == 0.0 || spec.waveform == LatentWaveform::daily_sinusoid,
          "hub structure needs the daily_sinusoid waveform");

  std::mt19937_64 rng(spec.seed);
  const int m = spec.sensors_per_cluster;
  const int n = spec.n_clusters * m;

  std::vector<std::pair<int, int>> slots;  // (cluster, index within cluster)
  for (int j = 0; j < spec.n_clusters; ++j) {
    for (int i = 0; i < m; ++i) slots.emplace_back(j, i);
  }
  std::shuffle(slots.begin(), slots.end(), rng);

  GroundTruth truth;
  truth.latents.resize(spec.samples, spec.n_clusters);
  std::vector<Eigen::MatrixXd> waves;
  for (int j = 0; j < spec.n_clusters; ++j) {
    if (spec.waveform == LatentWaveform::daily_sinusoid) {
      waves.push_back(modulated_profile(spec.samples, spec.frame_len, 2 * j + 1, spec.amplitude_jitter, rng));
    } else {
      waves.push_back(smoothed_noise(spec.samples, std::max<Eigen::Index>(1, spec.frame_len / 8), rng));
    }
    truth.latents.col(j) = waves.back().col(0);
  }

  // Spoke i of a cluster leans by the hub angle towards its own sine harmonics,
  // at evenly spaced bearings. Over whole frames the sines are orthogonal to
  // the profile (squared norm 5/8 per sample against 1/2) and to every other
  // cluster.
  const double lean = std::tan(spec.hub_angle_deg * std::numbers::pi / 180.0) * std::sqrt(1.25);
  auto latent = [&](int cluster, int index) -> Eigen::VectorXd {
    const Eigen::MatrixXd& w = waves[static_cast<std::size_t>(cluster)];
    if (lean == 0.0 || index == 0) return w.col(0);
    const double bearing = 2.0 * std::numbers::pi * (index - 1) / (m - 1);
    return w.col(0) + lean * (std::cos(bearing) * w.col(1) + std::sin(bearing) * w.col(2));
  };

  std::uniform_real_distribution<double> gain_dist(spec.gain_min, spec.gain_max);
  std::vector<double> position_gain(static_cast<std::size_t>(m));
  for (double& g : position_gain) g = gain_dist(rng);
  std::uniform_real_distribution<double> offset_dist(spec.offset_min, spec.offset_max);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd values(spec.samples, n);
  for (int q = 0; q < n; ++q) {
    const auto [cluster, index] = slots[static_cast<std::size_t>(q)];
    const double level = m > 1 ? static_cast<double>(index) / (m - 1) - 0.5 : 0.0;
    const double sigma = spec.position_sigma.empty() ? spec.sigma * (1.0 + spec.noise_spread * level)
                                                     : spec.position_sigma[static_cast<std::size_t>(index)];
    const double gain = spec.symmetric_gains ? position_gain[static_cast<std::size_t>(index)] : gain_dist(rng);
    const double offset = offset_dist(rng);
    const Eigen::VectorXd z = latent(cluster, index);
    for (Eigen::Index t = 0; t < spec.samples; ++t) {
      values(t, q) = gain * z[t] + offset + sigma * normal(rng);
    }
    truth.sensor_ids.push_back(numbered_id("s", q, n));
    truth.cluster.push_back(cluster);
    truth.position.push_back(index);
    truth.noise_sigma.push_back(sigma);
  }

  return {TimeSeriesMatrix(time_grid(spec.start, spec.interval, spec.samples), truth.sensor_ids, std::move(values)),
          std::move(truth)};
}

CrossModalField generate_cross_modal(const CrossModalSpec& spec) {
  require(spec.n_pollutants >= 1, "need at least one pollutant species");
  require(spec.frame_len >= 6, "frame length must be at least 6");
  require(spec.samples >= 2 * spec.frame_len, "need at least two frames of samples");
  require(spec.sigma >= 0.0, "noise sigma must be nonnegative");
  require(spec.interval.count() > 0, "sampling interval must be positive");

  std::mt19937_64 rng(spec.seed);
  const Eigen::VectorXd primary = modulated_profile(spec.samples, spec.frame_len, 1, 0.5, rng);
  const Eigen::VectorXd secondary = modulated_profile(spec.samples, spec.frame_len, 3, 0.5, rng);

  const auto n_cols = static_cast<Eigen::Index>(spec.n_pollutants) + static_cast<Eigen::Index>(spec.derived.size());
  Eigen::MatrixXd values(spec.samples, n_cols);
  std::vector<std::string> ids;
  CrossModalField field{TimeSeriesMatrix({}, {}, Eigen::MatrixXd(0, 0)), "pollutants", {}};

  std::uniform_real_distribution<double> primary_weight(0.5, 1.0);
  std::uniform_real_distribution<double> secondary_weight(-0.5, 0.5);
  std::uniform_real_distribution<double> gain_dist(0.5, 1.5);
  std::uniform_real_distribution<double> offset_dist(0.0, 5.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int p = 0; p < spec.n_pollutants; ++p) {
    const double w1 = primary_weight(rng);
    const double w2 = secondary_weight(rng);
    const double gain = gain_dist(rng);
    const double offset = offset_dist(rng);
    for (Eigen::Index t = 0; t < spec.samples; ++t) {
      values(t, p) = gain * (w1 * primary[t] + w2 * secondary[t]) + offset + spec.sigma * normal(rng);
    }
    ids.push_back(numbered_id("poll_", p, spec.n_pollutants));
    field.modalities[field.source].push_back(ids.back());
  }

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::Index col = spec.n_pollutants;
  for (const auto& derived : spec.derived) {
    require(!derived.name.empty() && derived.name != field.source && !field.modalities.contains(derived.name),
            "derived modality names must be unique and non-empty");
    for (Eigen::Index t = 0; t < spec.samples; ++t) {
      switch (derived.kind) {
        case DerivedKind::linear: values(t, col) = 2.0 * primary[t] + 1.0 + spec.sigma * normal(rng); break;
        case DerivedKind::quadratic: values(t, col) = primary[t] * primary[t] + spec.sigma * normal(rng); break;
        case DerivedKind::random: values(t, col) = uniform(rng); break;
      }
    }
    ids.push_back(derived.name);
    field.modalities[derived.name] = {derived.name};
    ++col;
  }

  field.matrix = TimeSeriesMatrix(time_grid(Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 1 / 1}},
                                            spec.interval, spec.samples),
                                  std::move(ids), std::move(values));
  return field;
}

double oracle_mi(const Eigen::MatrixXd& joint_counts) {
  const Eigen::Index rows = joint_counts.rows();
  const Eigen::Index cols = joint_counts.cols();
  double total = 0.0;
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = 0; b < cols; ++b) total += joint_counts(a, b);
  }
  require(total > 0.0, "empty joint table");
  double mi = 0.0;
  for (Eigen::Index a = 0; a < rows; ++a) {
    for (Eigen::Index b = 0; b < cols; ++b) {
      const double p_ab = joint_counts(a, b) / total;
      if (p_ab == 0.0) continue;
      double p_a = 0.0;
      for (Eigen::Index bb = 0; bb < cols; ++bb) p_a += joint_counts(a, bb) / total;
      double p_b = 0.0;
      for (Eigen::Index aa = 0; aa < rows; ++aa) p_b += joint_counts(aa, b) / total;
      mi += p_ab * std::log(p_ab / (p_a * p_b));
    }
  }
  return mi;
}

Eigenpair oracle_eigen(const Eigen::MatrixXd& symmetric) {
  const Eigen::Index d = symmetric.rows();
  require(symmetric.cols() == d && (d == 2 || d == 3), "oracle handles 2 x 2 and 3 x 3 matrices only");

  if (d == 2) {
    const double a = symmetric(0, 0);
    const double b = 0.5 * (symmetric(0, 1) + symmetric(1, 0));
    const double c = symmetric(1, 1);
    const double half_trace = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    const double lambda = half_trace + radius;
    Eigen::Vector2d v;
    if (b == 0.0) {
      v = a >= c ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
    } else {
      // Two equivalent null vectors of (C - lambda I); keep the better conditioned one.
      const Eigen::Vector2d first(b, lambda - a);
      const Eigen::Vector2d second(lambda - c, b);
      v = first.norm() >= second.norm() ? first : second;
    }
    return {v.normalized(), lambda};
  }

  // Cyclic Jacobi: rotate away each off-diagonal entry in turn until the
  // off-diagonal mass is negligible. Columns of `vectors` accumulate the rotations.
  Eigen::Matrix3d a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::Matrix3d vectors = Eigen::Matrix3d::Identity();
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off <= 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
        rotation(p, p) = c;
        rotation(q, q) = c;
        rotation(p, q) = s;
        rotation(q, p) = -s;
        a = rotation.transpose() * a * rotation;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        vectors = vectors * rotation;
      }
    }
  }
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < 3; ++i) {
    if (a(i, i) > a(best, best)) best = i;
  }
  return {vectors.col(best).normalized(), a(best, best)};
}

}  // namespace infodense
