#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rons/errors.hpp"
#include "rons/fv.hpp"
#include "rons/metric.hpp"
#include "rons/nls.hpp"

namespace rons {
namespace {

TEST(AssembleMetric, OrthonormalModesGiveIdentity) {
  const auto m = assemble_metric(Matrix::Identity(3, 3));
  EXPECT_EQ(m.kind(), MetricTensor::Kind::diagonal);
  EXPECT_EQ(m.to_dense(), Matrix::Identity(3, 3));
}

TEST(AssembleMetric, DenseTwoByTwoEigenvalues) {
  Matrix p(2, 2);
  p << 2, 1, 1, 2;
  const auto m = assemble_metric(p);
  EXPECT_EQ(m.kind(), MetricTensor::Kind::dense);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.to_dense());
  EXPECT_NEAR(eig.eigenvalues()[0], 1.0, 1e-14);
  EXPECT_NEAR(eig.eigenvalues()[1], 3.0, 1e-14);
  Vector b(2);
  b << 3, 3;
  EXPECT_NEAR((m.solve(b) - Vector::Ones(2)).norm(), 0.0, 1e-14);
}

TEST(AssembleMetric, IndicatorModesOnUniformGrid) {
  // <phi_i, phi_j> of cell indicators, integrated piecewise by quadrature.
  const std::size_t n = 1024;
  const auto grid = build_grid(10.0, n);
  Matrix pairings = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = grid.right_face(i) - grid.widths()[static_cast<Eigen::Index>(i)];
    pairings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        testing::integrate([](double) { return 1.0; }, lo, grid.right_face(i));
  }
  const auto m = assemble_metric(pairings);
  EXPECT_EQ(m.kind(), MetricTensor::Kind::diagonal);
  const Vector d = m.diagonal_entries();
  for (Eigen::Index i = 0; i < d.size(); ++i) EXPECT_NEAR(d[i], 10.0 / 1024.0, 1e-15);
  EXPECT_EQ(fv_metric(grid, 1).diagonal_entries(), Vector::Constant(n, 10.0 / 1024.0));
}

TEST(AssembleMetric, RejectsNonSquare) {
  EXPECT_THROW(assemble_metric(Matrix::Zero(2, 3)), DimensionError);
}

TEST(AssembleMetric, RejectsAsymmetry) {
  Matrix p(2, 2);
  p << 1, 0.5, 0.4, 1;
  EXPECT_THROW(assemble_metric(p), ValidationError);
}

TEST(AssembleMetric, NotPositiveDefiniteFailsOnSolve) {
  Matrix p(2, 2);
  p << 1, 2, 2, 1;
  const auto m = assemble_metric(p);
  EXPECT_THROW(m.solve(Vector::Ones(2)), SingularMetricError);
}

TEST(BlockMetric, TwoScalarBlocks) {
  const auto m = assemble_block_metric(
      {MetricTensor::diagonal(Vector::Constant(1, 2.0)), MetricTensor::diagonal(Vector::Constant(1, 3.0))});
  Matrix expected(2, 2);
  expected << 2, 0, 0, 3;
  EXPECT_EQ(m.to_dense(), expected);
  EXPECT_EQ(m.block_sizes(), (std::vector<std::size_t>{1, 1}));
}

TEST(BlockMetric, ShallowWaterFieldsStayDiagonal) {
  const auto grid = build_grid(10.0, 64);
  const auto one = fv_metric(grid, 1);
  const auto m = assemble_block_metric({one, one});
  EXPECT_EQ(m.kind(), MetricTensor::Kind::diagonal);
  EXPECT_EQ(m.size(), 128u);
  EXPECT_EQ(m.diagonal_entries(), Vector::Constant(128, 10.0 / 64.0));
  EXPECT_EQ(m.diagonal_entries(), fv_metric(grid, 2).diagonal_entries());
}

TEST(BlockMetric, SingleBlockIsUnchanged) {
  Matrix p(2, 2);
  p << 2, 1, 1, 2;
  const auto a = assemble_metric(p);
  const auto b = assemble_block_metric({a});
  EXPECT_EQ(a.to_dense(), b.to_dense());
  EXPECT_EQ(b.kind(), MetricTensor::Kind::dense);
}

TEST(BlockMetric, MixedBlocksSolveBlockwise) {
  std::mt19937_64 rng(7);
  const Matrix a = testing::random_spd(rng, 3);
  const auto m = assemble_block_metric(
      {MetricTensor::dense(a), MetricTensor::diagonal(Vector::Constant(2, 4.0))});
  EXPECT_EQ(m.kind(), MetricTensor::Kind::block_diagonal);
  const Vector x = testing::random_vector(rng, 5);
  EXPECT_LT((m.to_dense() * m.solve(x) - x).norm(), 1e-12);
  EXPECT_LT((m.apply(x) - m.to_dense() * x).norm(), 1e-12);
}

TEST(BlockMetric, EmptyListRejected) {
  EXPECT_THROW(assemble_block_metric({}), ValidationError);
}

TEST(ComplexifyMetric, SingleOrthonormalMode) {
  const auto m = complexify_metric(ComplexMatrix::Identity(1, 1));
  EXPECT_EQ(m.to_dense(), Matrix::Identity(2, 2));
}

TEST(ComplexifyMetric, OffDiagonalImaginaryPairing) {
  ComplexMatrix p(2, 2);
  p << Complex(1, 0), Complex(0, 0.5), Complex(0, -0.5), Complex(1, 0);
  Matrix expected(4, 4);
  expected << 1, 0, 0, 0.5,
              0, 1, -0.5, 0,
              0, -0.5, 1, 0,
              0.5, 0, 0, 1;
  EXPECT_EQ(complexify_metric(p).to_dense(), expected);
}

TEST(ComplexifyMetric, DiscreteFourierModesAreOrthonormal) {
  const double length = 2.0 * M_PI;
  const std::size_t n = 32;
  const auto basis = nls::fourier_basis(length, n, 6);
  const ComplexMatrix gram = basis.dx() * basis.modes.transpose() * basis.modes.conjugate();
  const Matrix m = complexify_metric(gram).to_dense();
  EXPECT_LT((m - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ComplexifyMetric, RejectsNonHermitian) {
  ComplexMatrix p(2, 2);
  p << Complex(1, 0), Complex(0, 0.5), Complex(0, 0.5), Complex(1, 0);
  EXPECT_THROW(complexify_metric(p), ValidationError);
}

TEST(ComplexifyMetric, StackedSolveMatchesComplexSolve) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 1 + trial % 7;
    const ComplexMatrix mt = testing::random_hpd(rng, n);
    const ComplexVector f = testing::random_complex_vector(rng, n);
    // Galerkin system sum_j <phi_j, phi_i> adot_j = <F, phi_i>, i.e.
    // M~^T adot = conj(f~) for pairings linear in the first slot.
    const ComplexVector z = mt.transpose().lu().solve(f.conjugate());
    const auto m = complexify_metric(mt);
    const Vector stacked = m.solve(assemble_rhs(f));
    const ComplexVector back = unstack_complex(stacked);
    EXPECT_LT((back - z).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
  }
}

}  // namespace
}  // namespace rons
