#include "opmi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace opmi {
namespace {

// Gram matrices with reciprocal condition below this go through the SVD.
constexpr double kGramRcondFloor = 1e-10;

void check_inputs(const MatrixRef& X, const VectorRef& y) {
  if (X.rows() != y.size()) {
    throw std::invalid_argument("dimension mismatch: X has " + std::to_string(X.rows()) +
                                " rows, y has " + std::to_string(y.size()));
  }
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite input");
}

}  // namespace

LstsqSolution min_norm_lstsq_svd(const MatrixRef& X, const VectorRef& y) {
  check_inputs(X, y);
  LstsqSolution out;
  out.beta_hat = Vector::Zero(X.cols());
  if (X.size() == 0) return out;

  Eigen::BDCSVD<DenseMatrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double rcond =
      std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(X.rows(), X.cols()));
  const double cutoff = rcond * (s.size() > 0 ? s(0) : 0.0);
  Vector coeffs = svd.matrixU().transpose() * y;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      coeffs(i) /= s(i);
      ++out.rank;
    } else {
      coeffs(i) = 0.0;
    }
  }
  out.beta_hat = svd.matrixV() * coeffs;
  return out;
}

LstsqSolution min_norm_lstsq(const MatrixRef& X, const VectorRef& y) {
  check_inputs(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (n == 0 || p == 0) return min_norm_lstsq_svd(X, y);

  if (n <= p) {
    DenseMatrix gram = DenseMatrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X);
    Eigen::LLT<DenseMatrix, Eigen::Lower> llt(gram);
    if (llt.info() == Eigen::Success && llt.rcond() > kGramRcondFloor) {
      LstsqSolution out;
      out.beta_hat = X.transpose() * llt.solve(y);
      out.rank = n;
      return out;
    }
  } else {
    DenseMatrix gram = DenseMatrix::Zero(p, p);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
    Eigen::LLT<DenseMatrix, Eigen::Lower> llt(gram);
    if (llt.info() == Eigen::Success && llt.rcond() > kGramRcondFloor) {
      LstsqSolution out;
      out.beta_hat = llt.solve(X.transpose() * y);
      out.rank = p;
      return out;
    }
  }
  return min_norm_lstsq_svd(X, y);
}

Vector ridge_solve(const MatrixRef& X, const VectorRef& y, double n_lambda, RidgeForm form) {
  if (!(n_lambda > 0.0)) {
    throw std::invalid_argument("ridge_solve requires n_lambda > 0; use min_norm_lstsq for 0");
  }
  check_inputs(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (form == RidgeForm::kAuto) form = p > n ? RidgeForm::kDual : RidgeForm::kPrimal;

  if (form == RidgeForm::kDual) {
    DenseMatrix gram = DenseMatrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X);
    gram.diagonal().array() += n_lambda;
    Eigen::LLT<DenseMatrix, Eigen::Lower> llt(gram);
    return X.transpose() * llt.solve(y);
  }
  DenseMatrix gram = DenseMatrix::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  gram.diagonal().array() += n_lambda;
  Eigen::LLT<DenseMatrix, Eigen::Lower> llt(gram);
  return llt.solve(X.transpose() * y);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

DenseMatrix dct_design_matrix(int D) {
  if (D < 1) throw std::invalid_argument("dct_design_matrix requires D >= 1");
  const double M = 2.0 * D - 1.0;
  const double scale = 1.0 / std::sqrt(M + 2.0);
  DenseMatrix W(D, D);
  for (int k = 0; k < D; ++k) {
    for (int l = 0; l < D; ++l) {
      // Reduce k*l mod M exactly before the trig call to keep the angle small.
      const long long kk = k + kDctIndexBase;
      const long long ll = l + kDctIndexBase;
      const long long prod = (kk * ll) % static_cast<long long>(M);
      W(k, l) = scale * std::cos(2.0 * std::numbers::pi * static_cast<double>(prod) / M);
    }
  }
  return W;
}

Vector sample_unit_sphere(RngStream& stream, int dim) {
  if (dim < 1) throw std::invalid_argument("sample_unit_sphere requires dim >= 1");
  Vector v(dim);
  double norm = 0.0;
  do {
    for (auto& x : v) x = stream.normal();
    norm = v.norm();
  } while (!(norm > 0.0));
  return v / norm;
}

DenseMatrix gaussian_matrix(RngStream& stream, Eigen::Index rows, Eigen::Index cols) {
  DenseMatrix m(rows, cols);
  double* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = stream.normal();
  return m;
}

Vector gaussian_vector(RngStream& stream, Eigen::Index size) {
  Vector v(size);
  for (auto& x : v) x = stream.normal();
  return v;
}

}  // namespace opmi
