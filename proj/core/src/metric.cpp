#include "rons/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rons/errors.hpp"

namespace rons {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kDiagonalTol = 1e-14;

void require_square(Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (rows != cols || rows == 0) {
    throw DimensionError(std::string(what) + " must be square and non-empty, got " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

MetricTensor MetricTensor::dense(Matrix m) {
  require_square(m.rows(), m.cols(), "metric");
  MetricTensor out;
  out.kind_ = Kind::dense;
  out.size_ = static_cast<std::size_t>(m.rows());
  auto factor = std::make_shared<Factor>();
  factor->llt.compute(m);
  factor->ok = factor->llt.info() == Eigen::Success;
  out.factor_ = std::move(factor);
  out.dense_ = std::move(m);
  out.block_sizes_ = {out.size_};
  return out;
}

MetricTensor MetricTensor::diagonal(Vector d) {
  if (d.size() == 0) throw DimensionError("metric must be non-empty");
  MetricTensor out;
  out.kind_ = Kind::diagonal;
  out.size_ = static_cast<std::size_t>(d.size());
  out.diag_ = std::move(d);
  out.diag_positive_ = (out.diag_.array() > 0.0).all();
  out.inv_diag_ = out.diag_.cwiseInverse();
  out.block_sizes_ = {out.size_};
  return out;
}

Vector MetricTensor::diagonal_entries() const {
  switch (kind_) {
    case Kind::diagonal:
      return diag_;
    case Kind::dense:
      return dense_.diagonal();
    case Kind::block_diagonal: {
      Vector d(static_cast<Eigen::Index>(size_));
      Eigen::Index off = 0;
      for (const auto& b : blocks_) {
        const auto n = static_cast<Eigen::Index>(b.size());
        d.segment(off, n) = b.diagonal_entries();
        off += n;
      }
      return d;
    }
  }
  return {};
}

Matrix MetricTensor::to_dense() const {
  switch (kind_) {
    case Kind::diagonal:
      return diag_.asDiagonal();
    case Kind::dense:
      return dense_;
    case Kind::block_diagonal: {
      const auto n = static_cast<Eigen::Index>(size_);
      Matrix m = Matrix::Zero(n, n);
      Eigen::Index off = 0;
      for (const auto& b : blocks_) {
        const auto bn = static_cast<Eigen::Index>(b.size());
        m.block(off, off, bn, bn) = b.to_dense();
        off += bn;
      }
      return m;
    }
  }
  return {};
}

Vector MetricTensor::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != size_) {
    throw DimensionError("metric solve: rhs length " + std::to_string(rhs.size()) +
                         " != " + std::to_string(size_));
  }
  switch (kind_) {
    case Kind::diagonal: {
      if (!diag_positive_) {
        throw SingularMetricError("diagonal metric has a non-positive entry");
      }
      return rhs.cwiseProduct(inv_diag_);
    }
    case Kind::dense: {
      if (!factor_ || !factor_->ok) {
        throw SingularMetricError("metric is not symmetric positive-definite");
      }
      return factor_->llt.solve(rhs);
    }
    case Kind::block_diagonal: {
      Vector out(rhs.size());
      Eigen::Index off = 0;
      for (const auto& b : blocks_) {
        const auto n = static_cast<Eigen::Index>(b.size());
        out.segment(off, n) = b.solve(rhs.segment(off, n));
        off += n;
      }
      return out;
    }
  }
  return {};
}

Vector MetricTensor::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != size_) {
    throw DimensionError("metric apply: length mismatch");
  }
  switch (kind_) {
    case Kind::diagonal:
      return x.cwiseProduct(diag_);
    case Kind::dense:
      return dense_ * x;
    case Kind::block_diagonal: {
      Vector out(x.size());
      Eigen::Index off = 0;
      for (const auto& b : blocks_) {
        const auto n = static_cast<Eigen::Index>(b.size());
        out.segment(off, n) = b.apply(x.segment(off, n));
        off += n;
      }
      return out;
    }
  }
  return {};
}

MetricTensor assemble_metric(const Matrix& inner_products) {
  require_square(inner_products.rows(), inner_products.cols(), "inner-product matrix");
  const double scale = inner_products.cwiseAbs().maxCoeff();
  const double asym = (inner_products - inner_products.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * scale) {
    throw ValidationError("inner-product matrix is not symmetric (max |M_ij - M_ji| = " +
                          std::to_string(asym) + ")");
  }
  const double max_diag = inner_products.diagonal().cwiseAbs().maxCoeff();
  Matrix off = inner_products;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() <= kDiagonalTol * max_diag) {
    return MetricTensor::diagonal(inner_products.diagonal());
  }
  return MetricTensor::dense(inner_products);
}

MetricTensor assemble_block_metric(const std::vector<MetricTensor>& blocks) {
  if (blocks.empty()) throw ValidationError("block metric needs at least one block");
  if (blocks.size() == 1) return blocks.front();

  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  bool all_diagonal = true;
  for (const auto& b : blocks) {
    sizes.push_back(b.size());
    total += b.size();
    all_diagonal = all_diagonal && b.kind() == MetricTensor::Kind::diagonal;
  }

  MetricTensor out;
  if (all_diagonal) {
    Vector d(static_cast<Eigen::Index>(total));
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      const auto n = static_cast<Eigen::Index>(b.size());
      d.segment(off, n) = b.diagonal_entries();
      off += n;
    }
    out = MetricTensor::diagonal(std::move(d));
  } else {
    out.kind_ = MetricTensor::Kind::block_diagonal;
    out.size_ = total;
    out.blocks_ = blocks;
  }
  out.block_sizes_ = std::move(sizes);
  return out;
}

MetricTensor complexify_metric(const ComplexMatrix& complex_pairings) {
  require_square(complex_pairings.rows(), complex_pairings.cols(), "complex pairings");
  const double scale = complex_pairings.cwiseAbs().maxCoeff();
  const double herm = (complex_pairings - complex_pairings.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kSymmetryTol * scale) {
    throw ValidationError("complex pairings are not Hermitian (max deviation " +
                          std::to_string(herm) + ")");
  }
  const auto n = complex_pairings.rows();
  const Matrix re = complex_pairings.real();
  const Matrix im = complex_pairings.imag();
  Matrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = re;
  m.topRightCorner(n, n) = im;
  m.bottomLeftCorner(n, n) = -im;
  m.bottomRightCorner(n, n) = re;
  return assemble_metric(m);
}

}  // namespace rons
