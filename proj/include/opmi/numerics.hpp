#pragma once

#include <Eigen/Dense>

#include "opmi/rng.hpp"

namespace opmi {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixRef = Eigen::Ref<const DenseMatrix>;
using VectorRef = Eigen::Ref<const Vector>;

struct LstsqSolution {
  Vector beta_hat;
  Eigen::Index rank = 0;
};

// Minimum-Euclidean-norm minimizer of ||y - X b||^2.
//
// Uses the Cholesky factorization of the smaller Gram matrix (X X^T when
// n <= p, X^T X otherwise). Falls back to a thin SVD pseudoinverse when the
// factorization fails or the Gram matrix is too ill-conditioned; the SVD
// truncates singular values below eps * max(n, p) * s_max.
LstsqSolution min_norm_lstsq(const MatrixRef& X, const VectorRef& y);

// Same, always through the SVD path.
LstsqSolution min_norm_lstsq_svd(const MatrixRef& X, const VectorRef& y);

enum class RidgeForm { kAuto, kPrimal, kDual };

// (X^T X + n_lambda I)^{-1} X^T y. kDual evaluates the identical
// X^T (X X^T + n_lambda I)^{-1} y; kAuto picks whichever system is smaller.
Vector ridge_solve(const MatrixRef& X, const VectorRef& y, double n_lambda,
                   RidgeForm form = RidgeForm::kAuto);

// Standard normal CDF.
double normal_cdf(double x);
// Standard normal density.
double normal_pdf(double x);

// Index base for the cosine design (rows/cols numbered from this value).
inline constexpr int kDctIndexBase = 1;

// D x D matrix with entry (k, l) = cos(2 pi k l / M) / sqrt(M + 2), M = 2D - 1,
// where k and l run from kDctIndexBase.
DenseMatrix dct_design_matrix(int D);

// Uniform draw from the unit sphere in R^dim (normalized Gaussian).
Vector sample_unit_sphere(RngStream& stream, int dim);

// Matrix of iid N(0, 1) entries filled column by column.
DenseMatrix gaussian_matrix(RngStream& stream, Eigen::Index rows, Eigen::Index cols);
Vector gaussian_vector(RngStream& stream, Eigen::Index size);

}  // namespace opmi
