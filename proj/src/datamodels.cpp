#include "opmi/datamodels.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace opmi {
namespace {

DenseMatrix normalize_row_prefix(const DenseMatrix& directions, int p) {
  DenseMatrix weights = directions.leftCols(p);
  for (Eigen::Index k = 0; k < weights.rows(); ++k) {
    double norm = weights.row(k).norm();
    // A zero row has probability zero; keep the matrix finite regardless.
    if (norm > 0.0) weights.row(k) /= norm;
  }
  return weights;
}

// n distinct indices from {0..D-1} \ {excluded}, uniformly without replacement.
std::vector<int> sample_rows_excluding(RngStream& stream, int D, int n, int excluded) {
  std::vector<int> pool(D - 1);
  for (int i = 0, k = 0; i < D; ++i) {
    if (i != excluded) pool[k++] = i;
  }
  for (int i = 0; i < n; ++i) {
    const auto j = i + static_cast<int>(stream.uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

Vector fit(const DenseMatrix& X, const Vector& y, double lambda, int n) {
  if (lambda > 0.0) return ridge_solve(X, y, n * lambda);
  return min_norm_lstsq(X, y).beta_hat;
}

}  // namespace

Vector QueryContext::query_features(int p) const {
  switch (kind) {
    case ModelKind::kGaussianLinear:
    case ModelKind::kLatentSpace:
    case ModelKind::kTimeSeries:
      return x0.head(p);
    case ModelKind::kReluFeatures:
      return (relu_weight_matrix(p).transpose() * z0).cwiseMax(0.0);
  }
  return {};
}

DenseMatrix QueryContext::relu_weight_matrix(int p) const {
  if (auto it = relu_weights.find(p); it != relu_weights.end()) return it->second;
  return normalize_row_prefix(relu_directions, p);
}

QueryContext make_context(const ExperimentConfig& config, RngStream& stream) {
  validate(config);
  QueryContext ctx;
  ctx.kind = config.model_kind;
  ctx.n = config.n;
  ctx.D = config.D;
  ctx.d = config.d;
  ctx.p_max = config.p_max();
  ctx.sigma = config.sigma;
  ctx.noise_bar = config.noise_bar;

  switch (ctx.kind) {
    case ModelKind::kGaussianLinear:
      ctx.x0 = gaussian_vector(stream, ctx.D);
      break;
    case ModelKind::kLatentSpace:
      ctx.loadings = gaussian_matrix(stream, ctx.d, ctx.p_max);
      ctx.z0 = gaussian_vector(stream, ctx.d);
      ctx.u0 = gaussian_vector(stream, ctx.p_max);
      ctx.x0 = ctx.loadings.transpose() * ctx.z0 + ctx.u0;
      break;
    case ModelKind::kTimeSeries:
      if (ctx.n > ctx.D - 1) {
        throw ConfigError(ConfigErrc::kBadN, "time_series needs n <= D - 1 sample times");
      }
      ctx.cosine_design = std::make_shared<const DenseMatrix>(dct_design_matrix(ctx.D));
      ctx.t0 = static_cast<int>(stream.uniform_index(ctx.D));
      ctx.x0 = ctx.cosine_design->row(ctx.t0).transpose();
      break;
    case ModelKind::kReluFeatures:
      ctx.relu_directions = gaussian_matrix(stream, ctx.D, ctx.p_max);
      ctx.z0 = gaussian_vector(stream, ctx.D);
      for (int p : config.p_grid) {
        ctx.relu_weights.try_emplace(p, normalize_row_prefix(ctx.relu_directions, p));
      }
      break;
  }
  return ctx;
}

double label_for_query(const QueryContext& ctx, const VectorRef& beta, RngStream& stream) {
  switch (ctx.kind) {
    case ModelKind::kGaussianLinear:
      return ctx.x0.dot(beta) + ctx.sigma * stream.normal();
    case ModelKind::kLatentSpace:
    case ModelKind::kReluFeatures:
      return ctx.z0.dot(beta) + ctx.sigma * stream.normal();
    case ModelKind::kTimeSeries:
      return ctx.x0.dot(beta);  // noise-free signal
  }
  return 0.0;
}

TrialOutput sample_trial(const QueryContext& ctx, int p, int m, double lambda, RngStream& stream) {
  if (p < 1 || p > (ctx.kind == ModelKind::kGaussianLinear || ctx.kind == ModelKind::kTimeSeries
                        ? ctx.D
                        : ctx.p_max)) {
    throw std::invalid_argument("sample_trial: p = " + std::to_string(p) + " out of range");
  }
  if (m != 0 && m != 1) throw std::invalid_argument("sample_trial: m must be 0 or 1");
  const int n = ctx.n;
  DenseMatrix X;
  Vector y;
  Vector query;

  switch (ctx.kind) {
    case ModelKind::kGaussianLinear: {
      const int D = ctx.D;
      const Vector beta = gaussian_vector(stream, D) / std::sqrt(static_cast<double>(D));
      X = gaussian_matrix(stream, n, p);
      // The D - p unobserved features enter each label only through
      // x_i,tail^T beta_tail ~ N(0, ||beta_tail||^2), independent of X.
      const double tail_sd = beta.tail(D - p).norm();
      y = X * beta.head(p);
      for (int i = 0; i < n; ++i) y(i) += tail_sd * stream.normal() + ctx.sigma * stream.normal();
      query = ctx.x0.head(p);
      if (m == 1) {
        X.row(0) = query.transpose();
        y(0) = label_for_query(ctx, beta, stream);
      }
      break;
    }
    case ModelKind::kLatentSpace: {
      const int d = ctx.d;
      const Vector beta = gaussian_vector(stream, d) / std::sqrt(static_cast<double>(d));
      DenseMatrix Z = gaussian_matrix(stream, n, d);
      DenseMatrix U = gaussian_matrix(stream, n, p);
      if (m == 1) {
        Z.row(0) = ctx.z0.transpose();
        U.row(0) = ctx.u0.head(p).transpose();
      }
      X = Z * ctx.loadings.leftCols(p) + U;
      y = Z * beta;
      for (int i = 0; i < n; ++i) y(i) += ctx.sigma * stream.normal();
      if (m == 1) y(0) = label_for_query(ctx, beta, stream);
      query = ctx.x0.head(p);
      break;
    }
    case ModelKind::kTimeSeries: {
      const DenseMatrix& W = *ctx.cosine_design;
      const int D = ctx.D;
      const Vector beta = gaussian_vector(stream, D) / std::sqrt(static_cast<double>(D));
      std::vector<int> rows = sample_rows_excluding(stream, D, n, ctx.t0);
      if (m == 1) rows[0] = ctx.t0;
      X.resize(n, p);
      y.resize(n);
      for (int i = 0; i < n; ++i) {
        X.row(i) = W.row(rows[i]).head(p);
        y(i) = W.row(rows[i]).dot(beta);
      }
      if (m == 1) y(0) = label_for_query(ctx, beta, stream);
      query = ctx.x0.head(p);
      break;
    }
    case ModelKind::kReluFeatures: {
      const int D = ctx.D;
      const Vector beta = gaussian_vector(stream, D) / std::sqrt(static_cast<double>(D));
      DenseMatrix Z = gaussian_matrix(stream, n, D);
      if (m == 1) Z.row(0) = ctx.z0.transpose();
      DenseMatrix uncached;
      const DenseMatrix* V = nullptr;
      if (auto it = ctx.relu_weights.find(p); it != ctx.relu_weights.end()) {
        V = &it->second;
      } else {
        uncached = ctx.relu_weight_matrix(p);
        V = &uncached;
      }
      X = (Z * *V).cwiseMax(0.0);
      y = Z * beta;
      for (int i = 0; i < n; ++i) y(i) += ctx.sigma * stream.normal();
      if (m == 1) y(0) = label_for_query(ctx, beta, stream);
      query = X.row(0).transpose();
      if (m == 0) query = (V->transpose() * ctx.z0).cwiseMax(0.0);
      break;
    }
  }

  TrialOutput out;
  out.m = m;
  if (m == 1) out.y0 = y(0);
  out.y_hat = query.dot(fit(X, y, lambda, n));
  if (m == 0 && ctx.noise_bar > 0.0) out.y_hat += ctx.noise_bar * stream.normal();
  return out;
}

}  // namespace opmi
