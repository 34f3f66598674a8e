#pragma once

// Generative processes for one membership-inference trial.
//
// A QueryContext holds everything that stays fixed while the posterior of the
// model output y0_hat is being sampled: the query point and any model-level
// randomness tied to it. sample_trial() redraws the training set (and the
// true coefficients), optionally puts the query into row 0, fits, and returns
// the model output at the query.

#include <limits>
#include <map>
#include <memory>

#include "opmi/core.hpp"
#include "opmi/numerics.hpp"
#include "opmi/rng.hpp"

namespace opmi {

struct QueryContext {
  ModelKind kind = ModelKind::kGaussianLinear;
  int n = 0;
  int D = 0;
  int d = 0;
  int p_max = 0;
  double sigma = 0.0;
  double noise_bar = 0.0;

  // gaussian_linear: x0 in R^D. latent_space: observed covariates in R^p_max.
  // time_series: row t0 of the cosine design. relu_features: unused (depends on p).
  Vector x0;

  // latent_space: columns are the covariate loadings w_j (d x p_max);
  // z0 is the query's latent vector, u0 its covariate noise.
  DenseMatrix loadings;
  Vector u0;
  // latent_space: latent vector (d). relu_features: input vector (D).
  Vector z0;

  // time_series
  std::shared_ptr<const DenseMatrix> cosine_design;
  int t0 = 0;  // zero-based row of cosine_design

  // relu_features: unnormalized Gaussian directions (D x p_max); the weight
  // matrix for p features rescales the first p columns to unit-norm rows.
  DenseMatrix relu_directions;
  std::map<int, DenseMatrix> relu_weights;  // cached per grid p

  // Query features restricted to the model's first p parameters.
  Vector query_features(int p) const;
  // D x p matrix with unit-norm rows used by the ReLU feature map.
  DenseMatrix relu_weight_matrix(int p) const;
};

struct TrialOutput {
  double y_hat = 0.0;
  int m = 0;
  // Label placed in the training set for the query (m = 1); NaN for m = 0.
  double y0 = std::numeric_limits<double>::quiet_NaN();
};

// Per-repeat draw of the fixed quantities. Validates the config.
QueryContext make_context(const ExperimentConfig& config, RngStream& stream);

// Label of the query under the model's label rule, given the true
// coefficients of the current trial.
double label_for_query(const QueryContext& ctx, const VectorRef& beta, RngStream& stream);

// One trial: fresh data, optional replacement of row 0 by the query (m = 1),
// min-norm fit (lambda == 0) or ridge fit with penalty n * lambda.
TrialOutput sample_trial(const QueryContext& ctx, int p, int m, double lambda, RngStream& stream);

}  // namespace opmi
