#include <cmath>
#include <random>
#include <set>

#include "support.hpp"

using namespace infodense;
using testing_support::raises;

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean();
  const Eigen::ArrayXd y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

}  // namespace

TEST(Generate, NoiselessPairIsAffine) {
  SynthSpec spec;
  spec.n_clusters = 1;
  spec.sensors_per_cluster = 2;
  spec.sigma = 0.0;
  spec.samples = 1000;
  const auto f = generate(spec);
  EXPECT_NEAR(std::abs(pearson(f.matrix.values().col(0), f.matrix.values().col(1))), 1.0, 1e-12);
}

TEST(Generate, ClustersAreUncorrelated) {
  SynthSpec spec;
  spec.n_clusters = 2;
  spec.sensors_per_cluster = 2;
  spec.samples = 10000;
  spec.seed = 4;
  const auto f = generate(spec);
  for (Eigen::Index i = 0; i < f.matrix.cols(); ++i) {
    for (Eigen::Index j = 0; j < f.matrix.cols(); ++j) {
      if (f.truth.cluster[i] == f.truth.cluster[j]) continue;
      EXPECT_LT(std::abs(pearson(f.matrix.values().col(i), f.matrix.values().col(j))), 0.1);
    }
  }
  EXPECT_LT(std::abs(pearson(f.truth.latents.col(0), f.truth.latents.col(1))), 1e-9);
}

TEST(Generate, DeterministicAndWellFormed) {
  SynthSpec spec;
  spec.seed = 17;
  spec.hub_angle_deg = 15.0;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_TRUE(a.matrix == b.matrix);
  EXPECT_EQ(a.truth.cluster, b.truth.cluster);
  EXPECT_EQ(a.matrix.cols(), 12);
  EXPECT_EQ(a.matrix.rows(), 5000);
  std::vector<int> per_cluster(3, 0), hubs(3, 0);
  for (std::size_t s = 0; s < a.truth.cluster.size(); ++s) {
    ++per_cluster[static_cast<std::size_t>(a.truth.cluster[s])];
    if (a.truth.position[s] == 0) ++hubs[static_cast<std::size_t>(a.truth.cluster[s])];
  }
  EXPECT_EQ(per_cluster, (std::vector<int>{4, 4, 4}));
  EXPECT_EQ(hubs, (std::vector<int>{1, 1, 1}));
  spec.seed = 18;
  EXPECT_FALSE(generate(spec).matrix == a.matrix);
}

TEST(Generate, InvalidSpecs) {
  SynthSpec spec;
  spec.n_clusters = 0;
  EXPECT_TRUE(raises([&] { generate(spec); }, ErrorKind::contract));
  spec = {};
  spec.hub_angle_deg = 30.0;
  EXPECT_TRUE(raises([&] { generate(spec); }, ErrorKind::contract));
  spec = {};
  spec.position_sigma = {0.1, 0.1};
  EXPECT_TRUE(raises([&] { generate(spec); }, ErrorKind::contract));
  spec = {};
  spec.sigma = -1.0;
  EXPECT_TRUE(raises([&] { generate(spec); }, ErrorKind::contract));
}

TEST(Generate, PositionSigmaOverride) {
  SynthSpec spec;
  spec.n_clusters = 2;
  spec.sensors_per_cluster = 3;
  spec.position_sigma = {0.0, 0.2, 0.4};
  const auto f = generate(spec);
  for (std::size_t s = 0; s < f.truth.noise_sigma.size(); ++s) {
    EXPECT_EQ(f.truth.noise_sigma[s], spec.position_sigma[static_cast<std::size_t>(f.truth.position[s])]);
  }
}

TEST(CrossModal, BlocksAndShapes) {
  CrossModalSpec spec;
  spec.samples = 1000;
  const auto f = generate_cross_modal(spec);
  EXPECT_EQ(f.modalities.at(f.source).size(), 10u);
  EXPECT_EQ(f.modalities.size(), 4u);
  EXPECT_EQ(f.matrix.rows(), 1000);
  EXPECT_TRUE(generate_cross_modal(spec).matrix == f.matrix);
}

TEST(OracleMi, Examples) {
  EXPECT_EQ(oracle_mi((Eigen::MatrixXd(2, 2) << 1, 1, 1, 1).finished()), 0.0);
  EXPECT_NEAR(oracle_mi((Eigen::MatrixXd(2, 2) << 1, 0, 0, 1).finished()), std::log(2.0), 1e-15);
}

TEST(OracleEigen, Examples) {
  auto e = oracle_eigen((Eigen::MatrixXd(2, 2) << 2, 0, 0, 1).finished());
  EXPECT_NEAR(e.value, 2.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vector(0)), 1.0, 1e-15);
  e = oracle_eigen((Eigen::MatrixXd(2, 2) << 1, 1, 1, 1).finished());
  EXPECT_NEAR(e.value, 2.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vector(0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(std::abs(e.vector(1)), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(OracleEigen, AgreesWithDenseSolver) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 2 + trial % 2;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
    const Eigen::MatrixXd c = a + a.transpose();
    const auto o = oracle_eigen(c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    EXPECT_NEAR(o.value, es.eigenvalues()(n - 1), 1e-10);
  }
}
