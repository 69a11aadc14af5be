#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdpscope/features.hpp"

namespace rdpscope {

// Orthonormal DCT-II coefficient of one row:
//   X_k = c_k * sum_n x_n cos(pi (2n+1) k / 2N), c_0 = sqrt(1/N), else sqrt(2/N).
// Throws IndexOutOfRange when index >= row length (or the row is empty).
double dct_component(std::span<const double> row, std::size_t index);

// Per-attribute z-scoring; zero-variance attributes keep scale 1 so they
// center to zero instead of dividing by zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Eigen::MatrixXd& rows);
  std::vector<double> apply(std::span<const double> row) const;  // ArityMismatch
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
};

enum class ProjectionKind { Svd, Ica };

// A fitted linear map from a raw attribute row to k coordinates:
//   project(x) = basis^T ((x - mean) / scale).
struct Projection {
  ProjectionKind kind = ProjectionKind::Svd;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<double> mean;
  std::vector<double> scale;
  Eigen::MatrixXd basis;                 // attributes x k
  std::vector<double> singular_values;   // SVD only, non-increasing
  bool converged = true;                 // ICA fixed-point status

  std::vector<double> project(std::span<const double> row) const;  // ArityMismatch

  std::string to_json() const;
  static Projection from_json(std::string_view text);
};

struct SvdOptions {
  bool standardize = true;
};

// Rank-k truncated SVD of the (standardized) matrix. basis = V_k S_k^-1, so
// projecting a training row reproduces its row of U. Throws DegenerateMatrix
// when the matrix has fewer than 2 distinct rows or k exceeds min(rows, cols).
Projection fit_svd(const Eigen::MatrixXd& rows, int k, const SvdOptions& options = {});

struct IcaOptions {
  bool standardize = true;
  double tolerance = 1e-6;
  int max_iterations = 500;
};

// Whitens to k dimensions, then fixed-point ICA with the log-cosh contrast
// and symmetric decorrelation, deterministically initialized from the seed.
// Non-convergence sets converged = false; it is not an error.
Projection fit_ica(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
                   const IcaOptions& options = {});

// The fitted derived-attribute stage: one standardizer for the DCT input
// plus the SVD and ICA projections. Fit on training rows only; held-out rows
// are projected, never refit.
struct TransformSet {
  int dct_index = 1;
  Standardizer standardizer;
  Projection svd;
  Projection ica;
  std::size_t fit_rows = 0;

  std::vector<double> derived(std::span<const double> base_row) const;  // 1 + 2k values
};

struct TransformOptions {
  int dct_index = 1;
  int components = 20;
  std::uint64_t seed = 1;
  IcaOptions ica;
};

// Fits dct/svd/ica on the base-attribute block of the table (components are
// clamped to the feasible rank). Throws DegenerateMatrix via fit_svd/fit_ica.
TransformSet fit_transforms(const FeatureTable& base, const TransformOptions& options = {});

// Appends dct_col, svd0..k-1, ica0..k-1 to every row, producing a table on
// the full schema.
FeatureTable apply_transforms(const TransformSet& transforms, const FeatureTable& base);

}  // namespace rdpscope
