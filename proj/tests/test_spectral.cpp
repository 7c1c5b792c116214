#include <gtest/gtest.h>

#include "dcsc/spectral.hpp"
#include "test_support.hpp"

using namespace dcsc;
using namespace dcsc::testing;

TEST(Eigendecompose, PathGraph) {
  auto basis = eigendecompose(laplacian(path_graph(3), LaplacianVariant::combinatorial), 2);
  ASSERT_EQ(basis.eigenvalues.size(), 2u);
  EXPECT_NEAR(basis.eigenvalues[0], 0.0, 1e-12);
  EXPECT_NEAR(basis.eigenvalues[1], 1.0, 1e-12);
  EXPECT_NEAR(basis.next_eigenvalue, 3.0, 1e-12);
  EXPECT_LT((basis.vectors.transpose() * basis.vectors - Eigen::Matrix2d::Identity()).norm(), 1e-8);
}

TEST(Eigendecompose, KernelVectors) {
  auto p = SbmParams::from_degree(60, 2, 12.0, 0.5);
  auto g = sbm_generate(p, 1).graph;
  ASSERT_EQ(count_components(g), 1);

  auto comb = eigendecompose(laplacian(g, LaplacianVariant::combinatorial), 1);
  EXPECT_NEAR(comb.eigenvalues[0], 0.0, 1e-10);
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(60, 1.0 / std::sqrt(60.0));
  EXPECT_LT((comb.vectors.col(0) - constant).norm(), 1e-8);

  auto norm = eigendecompose(laplacian(g, LaplacianVariant::normalized), 1);
  Eigen::VectorXd sqrt_deg(60);
  for (int i = 0; i < 60; ++i) sqrt_deg[i] = std::sqrt(g.degree(i));
  sqrt_deg.normalize();
  EXPECT_NEAR(norm.eigenvalues[0], 0.0, 1e-10);
  EXPECT_LT((norm.vectors.col(0) - sqrt_deg).norm(), 1e-8);
}

TEST(Eigendecompose, DisjointTrianglesSpanIndicators) {
  auto basis = eigendecompose(laplacian(disjoint_cliques(2, 3), LaplacianVariant::combinatorial), 2);
  EXPECT_NEAR(basis.eigenvalues[0], 0.0, 1e-10);
  EXPECT_NEAR(basis.eigenvalues[1], 0.0, 1e-10);
  Eigen::MatrixXd ind = Eigen::MatrixXd::Zero(6, 2);
  ind.block(0, 0, 3, 1).setConstant(1.0 / std::sqrt(3.0));
  ind.block(3, 1, 3, 1).setConstant(1.0 / std::sqrt(3.0));
  Eigen::MatrixXd H = basis.vectors * basis.vectors.transpose();
  EXPECT_LT((H - ind * ind.transpose()).norm(), 1e-8);
}

TEST(Eigendecompose, SignConventionAndOrthonormality) {
  auto p = SbmParams::from_degree(200, 4, 12.0, 0.2);
  auto L = laplacian(sbm_generate(p, 4).graph, LaplacianVariant::normalized);
  auto basis = eigendecompose(L, 4);
  EXPECT_LT((basis.vectors.transpose() * basis.vectors - Eigen::MatrixXd::Identity(4, 4)).norm(), 1e-8);
  for (int c = 0; c < 4; ++c) {
    const auto v = basis.vectors.col(c);
    Eigen::Index first = 0;
    while (std::abs(v[first]) < 1e-10 * v.cwiseAbs().maxCoeff()) ++first;
    EXPECT_GT(v[first], 0.0);
  }
  for (int c = 1; c < 4; ++c) EXPECT_LE(basis.eigenvalues[c - 1], basis.eigenvalues[c]);
  auto oracle = dense_spectrum(L.dense());
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(basis.eigenvalues[c], oracle.values[c], 1e-10);
  EXPECT_NEAR(basis.next_eigenvalue, oracle.values[4], 1e-10);
}

TEST(Eigendecompose, Errors) {
  auto L = laplacian(path_graph(10), LaplacianVariant::normalized);
  EXPECT_THROW(eigendecompose(L, 0), ParameterError);
  EXPECT_THROW(eigendecompose(L, 10), ParameterError);
  try {
    eigendecompose(L, 2, 5);
    FAIL();
  } catch (const CapacityError& err) {
    EXPECT_NE(std::string(err.what()).find("CSC"), std::string::npos);
  }
}

class ProjectorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto p = SbmParams::from_degree(50, 3, 10.0, 0.2);
    L_ = std::make_unique<LaplacianMatrix>(laplacian(sbm_generate(p, 8).graph, LaplacianVariant::normalized));
    basis_ = eigendecompose(*L_, 3);
  }
  std::unique_ptr<LaplacianMatrix> L_;
  SpectralBasis basis_;
};

TEST_F(ProjectorTest, FixesRangeAndAnnihilatesComplement) {
  Eigen::MatrixXd X = basis_.vectors * Eigen::MatrixXd::Random(3, 5);
  EXPECT_LT((ideal_projector_apply(basis_, X) - X).norm(), 1e-12);
  auto full = dense_spectrum(L_->dense());
  Eigen::MatrixXd Y = full.vectors.rightCols(10) * Eigen::MatrixXd::Random(10, 4);
  EXPECT_LT(ideal_projector_apply(basis_, Y).norm(), 1e-10);
}

TEST_F(ProjectorTest, MatchesDenseProjectorAndIsIdempotent) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(50, 7);
  Eigen::MatrixXd H = dense_projector(dense_spectrum(L_->dense()), 3);
  const Eigen::MatrixXd once = ideal_projector_apply(basis_, X);
  EXPECT_LT((once - H * X).norm(), 1e-10);
  EXPECT_LT((ideal_projector_apply(basis_, once) - once).norm(), 1e-10);
}

TEST(SpectralSimilarity, IdenticalAndOrthogonal) {
  SpectralBasis a, b;
  a.k = b.k = 3;
  a.vectors = Eigen::MatrixXd::Zero(8, 3);
  b.vectors = Eigen::MatrixXd::Zero(8, 3);
  for (int c = 0; c < 3; ++c) {
    a.vectors(c, c) = 1.0;
    b.vectors(4 + c, c) = 1.0;
  }
  EXPECT_EQ(spectral_similarity(a, a), 0.0);
  EXPECT_NEAR(spectral_similarity(a, b), std::sqrt(6.0), 1e-15);
}

TEST(SpectralSimilarity, MatchesDenseProjectorDifference) {
  auto p = SbmParams::from_degree(300, 4, 25.0, 1.0 / 6.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = sbm_generate(p, seed);
    auto g2 = perturb_edges(s.graph, 0.03, p, s.labels, seed + 50);
    auto La = laplacian(s.graph, LaplacianVariant::normalized);
    auto Lb = laplacian(g2, LaplacianVariant::normalized);
    auto a = eigendecompose(La, 4), b = eigendecompose(Lb, 4);
    const double oracle = (dense_projector(dense_spectrum(La.dense()), 4) -
                           dense_projector(dense_spectrum(Lb.dense()), 4)).norm();
    const double rho = spectral_similarity(a, b);
    EXPECT_NEAR(rho, oracle, 1e-8);
    EXPECT_LE(rho, std::sqrt(8.0) + 1e-9);
    EXPECT_EQ(spectral_similarity(a, a), 0.0);
  }
}

TEST(EdgeSimilarity, Basics) {
  auto empty = laplacian(Graph::from_edges(4, {}), LaplacianVariant::combinatorial);
  auto one = laplacian(Graph::from_edges(4, {{1, 3, 1.0}}), LaplacianVariant::combinatorial);
  EXPECT_EQ(edge_similarity(one, one), 0.0);
  EXPECT_DOUBLE_EQ(edge_similarity(empty, one), 2.0);
  auto norm = laplacian(Graph::from_edges(4, {}), LaplacianVariant::normalized);
  EXPECT_THROW(edge_similarity(empty, norm), ParameterError);
}

TEST(EdgeSimilarity, MatchesDenseDifference) {
  auto p = SbmParams::from_degree(200, 4, 15.0, 0.2);
  auto s = sbm_generate(p, 2);
  auto s2 = perturb_nodes(perturb_edges(s.graph, 0.05, p, s.labels, 3), 0.02, p, s.labels, 4);
  for (auto v : {LaplacianVariant::combinatorial, LaplacianVariant::normalized}) {
    auto La = laplacian(s.graph, v), Lb = laplacian(s2.graph, v);
    EXPECT_NEAR(edge_similarity(La, Lb),
                (dense_laplacian(s.graph, v) - dense_laplacian(s2.graph, v)).norm(), 1e-10);
  }
}

TEST(ScAssign, DisjointCliques) {
  auto L = laplacian(disjoint_cliques(2, 5), LaplacianVariant::normalized);
  auto a = sc_assign(L, 2, {}, 3);
  EXPECT_LE(a.feature_cost, 1e-6);
  for (int i = 1; i < 5; ++i) EXPECT_EQ(a.labels[i], a.labels[0]);
  for (int i = 6; i < 10; ++i) EXPECT_EQ(a.labels[i], a.labels[5]);
  EXPECT_NE(a.labels[0], a.labels[5]);
}

TEST(ScAssign, SingleCluster) {
  auto p = SbmParams::from_degree(40, 1, 8.0, 1.0);
  auto L = laplacian(sbm_generate(p, 2).graph, LaplacianVariant::combinatorial);
  auto a = sc_assign(L, 1, {}, 3);
  EXPECT_EQ(a.cluster_sizes, std::vector<int>{40});
  EXPECT_NEAR(a.feature_cost, 0.0, 1e-10);
}

TEST(ScAssign, RecoversPlantedPartition) {
  auto p = SbmParams::from_degree(300, 4, 25.0, 1.0 / 6.0);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = sbm_generate(p, seed);
    auto a = sc_assign(laplacian(s.graph, LaplacianVariant::normalized), 4, {}, seed);
    if (adjusted_rand_index(a.labels, s.labels) >= 0.95) ++good;
  }
  EXPECT_GE(good, 45);
}

TEST(SubspacePerturbation, DavisKahanStyleBound) {
  auto p = SbmParams::from_degree(300, 4, 25.0, 1.0 / 6.0);
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto s = sbm_generate(p, seed);
    auto g2 = perturb_edges(s.graph, 0.03, p, s.labels, seed + 7);
    auto La = laplacian(s.graph, LaplacianVariant::normalized), Lb = laplacian(g2, LaplacianVariant::normalized);
    auto a = eigendecompose(La, 4), b = eigendecompose(Lb, 4);
    const double alpha = perturbation_eigengap(a, b);
    if (alpha <= 0.01) continue;
    ++checked;
    EXPECT_LE(spectral_similarity(a, b), std::sqrt(2.0) / alpha * edge_similarity(La, Lb));
  }
  EXPECT_GT(checked, 0);
}
