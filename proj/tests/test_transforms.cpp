#include <cmath>
#include <vector>

#include "doctest.h"
#include "rdpscope/random.hpp"
#include "rdpscope/transforms.hpp"

using namespace rdpscope;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  }
  return m;
}

double frobenius(const Eigen::MatrixXd& m) { return m.norm(); }

}  // namespace

TEST_CASE("dct: constant row has zero non-DC coefficients") {
  const std::vector<double> row(16, 3.5);
  CHECK(dct_component(row, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dct_component(row, 7) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dct_component(row, 0) == doctest::Approx(3.5 * std::sqrt(16.0)).epsilon(1e-12));
}

TEST_CASE("dct: direct evaluation of [1, 0] at index 1") {
  const std::vector<double> row = {1.0, 0.0};
  CHECK(dct_component(row, 1) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
}

TEST_CASE("dct: zero row and index validation") {
  const std::vector<double> zeros(8, 0.0);
  CHECK(dct_component(zeros, 3) == 0.0);
  CHECK_THROWS_AS(dct_component(zeros, 8), IndexOutOfRange);
  CHECK_THROWS_AS(dct_component(std::vector<double>{}, 0), IndexOutOfRange);
}

TEST_CASE("dct Parseval: energy is preserved by the orthonormal transform") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<double> row(n);
    for (double& x : row) x = rng.range(-10, 10);
    double time_energy = 0;
    for (double x : row) time_energy += x * x;
    double freq_energy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = dct_component(row, k);
      freq_energy += c * c;
    }
    CHECK(freq_energy == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("svd: orthonormal matrix has unit singular values (pre-standardized)") {
  // Householder-style orthonormal basis from QR of a random matrix.
  Rng rng(7);
  const Eigen::MatrixXd m = random_matrix(20, 20, rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
  SvdOptions opt;
  opt.standardize = false;
  const Projection p = fit_svd(q, 20, opt);
  REQUIRE(p.singular_values.size() == 20);
  for (double s : p.singular_values) CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("svd: rank-1 matrix has exactly one singular value above 1e-10") {
  Eigen::VectorXd u(12), v(9);
  Rng rng(8);
  for (int i = 0; i < 12; ++i) u(i) = rng.gaussian();
  for (int i = 0; i < 9; ++i) v(i) = rng.gaussian();
  const Eigen::MatrixXd m = u * v.transpose();
  SvdOptions opt;
  opt.standardize = false;
  const Projection p = fit_svd(m, 9, opt);
  int above = 0;
  for (double s : p.singular_values) {
    if (s > 1e-10) ++above;
  }
  CHECK(above == 1);
}

TEST_CASE("svd: full-rank reconstruction within 1e-8 relative") {
  Rng rng(9);
  const Eigen::MatrixXd m = random_matrix(14, 10, rng);
  const Projection p = fit_svd(m, 10);

  // Rebuild the standardized matrix from projections: X ~= U S V^T where
  // U rows are the projected training rows.
  Standardizer st{p.mean, p.scale};
  const Eigen::MatrixXd x = st.apply(m);
  Eigen::MatrixXd u(14, 10);
  for (int i = 0; i < 14; ++i) {
    std::vector<double> row(m.cols());
    for (int j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    const auto coords = p.project(row);
    for (int j = 0; j < 10; ++j) u(i, j) = coords[static_cast<std::size_t>(j)];
  }
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(10, 10);
  for (int j = 0; j < 10; ++j) sigma(j, j) = p.singular_values[static_cast<std::size_t>(j)];
  // Recover V from basis = V S^-1.
  Eigen::MatrixXd v = p.basis;
  for (int j = 0; j < 10; ++j) v.col(j) *= sigma(j, j);
  const Eigen::MatrixXd recon = u * sigma * v.transpose();
  CHECK(frobenius(recon - x) <= 1e-8 * frobenius(x));
}

TEST_CASE("svd: reconstruction error shrinks as k grows (optimality ordering)") {
  Rng rng(10);
  for (int trial = 0; trial < 6; ++trial) {
    const Eigen::MatrixXd m = random_matrix(30, 15, rng);
    const Projection full = fit_svd(m, 15);
    Standardizer st{full.mean, full.scale};
    const Eigen::MatrixXd x = st.apply(m);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double previous = 1e300;
    for (int k = 1; k <= 5; ++k) {
      const Eigen::MatrixXd approx = svd.matrixU().leftCols(k) *
                                     svd.singularValues().head(k).asDiagonal() *
                                     svd.matrixV().leftCols(k).transpose();
      const double err = frobenius(x - approx);
      CHECK(err <= previous + 1e-9);
      previous = err;
    }
  }
}

TEST_CASE("svd: basis columns orthonormal under the standardized metric") {
  Rng rng(11);
  const Eigen::MatrixXd m = random_matrix(40, 12, rng);
  const Projection p = fit_svd(m, 6);
  // With basis = V S^-1, (X basis)^T (X basis) = I.
  Standardizer st{p.mean, p.scale};
  const Eigen::MatrixXd z = st.apply(m) * p.basis;
  const Eigen::MatrixXd gram = z.transpose() * z;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("svd degenerate inputs") {
  Eigen::MatrixXd one_row(1, 4);
  one_row << 1, 2, 3, 4;
  CHECK_THROWS_AS(fit_svd(one_row, 1), DegenerateMatrix);

  Eigen::MatrixXd same(3, 4);
  same << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;
  CHECK_THROWS_AS(fit_svd(same, 2), DegenerateMatrix);

  Rng rng(3);
  const Eigen::MatrixXd ok = random_matrix(5, 4, rng);
  CHECK_THROWS_AS(fit_svd(ok, 5), DegenerateMatrix);  // k > min(rows, cols)
}

TEST_CASE("projection: training row reproduces its U row; mean maps to zero") {
  Rng rng(12);
  const Eigen::MatrixXd m = random_matrix(25, 8, rng);
  const Projection p = fit_svd(m, 4);

  Standardizer st{p.mean, p.scale};
  const Eigen::MatrixXd x = st.apply(m);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<double> row0(8);
  for (int j = 0; j < 8; ++j) row0[static_cast<std::size_t>(j)] = m(0, j);
  const auto coords = p.project(row0);
  for (int j = 0; j < 4; ++j) {
    // Left singular vectors are sign-ambiguous only jointly with V; the
    // fitted basis fixes the convention, so values must match exactly.
    CHECK(coords[static_cast<std::size_t>(j)] == doctest::Approx(svd.matrixU()(0, j)).epsilon(1e-8));
  }

  const auto zero = p.project(p.mean);
  for (double c : zero) CHECK(c == doctest::Approx(0.0).epsilon(1e-10));

  CHECK_THROWS_AS(p.project(std::vector<double>{1.0, 2.0}), ArityMismatch);
}

TEST_CASE("ica recovers two mixed uniform sources") {
  Rng rng(77);
  const int n = 10'000;
  Eigen::MatrixXd sources(n, 2);
  for (int i = 0; i < n; ++i) {
    sources(i, 0) = rng.range(-1.7320508, 1.7320508);
    sources(i, 1) = rng.range(-1.7320508, 1.7320508);
  }
  Eigen::MatrixXd mixing(2, 2);
  mixing << 0.6, 1.4, -0.8, 0.5;
  const Eigen::MatrixXd mixed = sources * mixing.transpose();

  const Projection p = fit_ica(mixed, 2, 4242);
  CHECK(p.converged);

  // Each recovered component must correlate with exactly one source.
  Eigen::MatrixXd recovered(n, 2);
  for (int i = 0; i < n; ++i) {
    std::vector<double> row = {mixed(i, 0), mixed(i, 1)};
    const auto coords = p.project(row);
    recovered(i, 0) = coords[0];
    recovered(i, 1) = coords[1];
  }
  auto correlation = [&](int a, int b) {
    const auto sa = sources.col(a).array() - sources.col(a).mean();
    const auto rb = recovered.col(b).array() - recovered.col(b).mean();
    return std::abs((sa * rb).sum() / std::sqrt(sa.square().sum() * rb.square().sum()));
  };
  const double direct = std::min(correlation(0, 0), correlation(1, 1));
  const double swapped = std::min(correlation(0, 1), correlation(1, 0));
  CHECK(std::max(direct, swapped) > 0.95);
}

TEST_CASE("ica projections have unit variance (whitening)") {
  Rng rng(13);
  const Eigen::MatrixXd m = random_matrix(400, 6, rng);
  const Projection p = fit_ica(m, 4, 99);
  Eigen::MatrixXd z(400, 4);
  for (int i = 0; i < 400; ++i) {
    std::vector<double> row(6);
    for (int j = 0; j < 6; ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    const auto coords = p.project(row);
    for (int j = 0; j < 4; ++j) z(i, j) = coords[static_cast<std::size_t>(j)];
  }
  for (int j = 0; j < 4; ++j) {
    const double mean = z.col(j).mean();
    const double var = (z.col(j).array() - mean).square().sum() / (400 - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("ica on pure gaussians stays finite and flags its convergence state") {
  Rng rng(14);
  const Eigen::MatrixXd m = random_matrix(2'000, 2, rng);
  const Projection p = fit_ica(m, 2, 1);
  // Gaussian inputs make the rotation unidentifiable; the fit must still
  // produce a finite basis and an honest convergence flag.
  CHECK(p.basis.allFinite());
  if (!p.converged) CHECK(p.converged == false);
}

TEST_CASE("ica determinism: identical seed, identical basis") {
  Rng rng(15);
  const Eigen::MatrixXd m = random_matrix(300, 5, rng);
  const Projection a = fit_ica(m, 3, 123);
  const Projection b = fit_ica(m, 3, 123);
  CHECK((a.basis.array() == b.basis.array()).all());
  const Projection c = fit_ica(m, 3, 124);
  CHECK_FALSE((a.basis.array() == c.basis.array()).all());
}

TEST_CASE("projection JSON manifest round trips") {
  Rng rng(16);
  const Eigen::MatrixXd m = random_matrix(50, 7, rng);
  for (const Projection& p : {fit_svd(m, 3), fit_ica(m, 3, 5)}) {
    const Projection q = Projection::from_json(p.to_json());
    CHECK(q.kind == p.kind);
    CHECK(q.k == p.k);
    CHECK(q.seed == p.seed);
    CHECK(q.mean == p.mean);
    CHECK(q.scale == p.scale);
    CHECK(q.converged == p.converged);
    CHECK((q.basis.array() == p.basis.array()).all());
    std::vector<double> row(7);
    for (int j = 0; j < 7; ++j) row[static_cast<std::size_t>(j)] = m(3, j);
    CHECK(p.project(row) == q.project(row));
  }
}

TEST_CASE("zero-variance attributes are centered, not divided by zero") {
  Rng rng(17);
  Eigen::MatrixXd m = random_matrix(30, 4, rng);
  m.col(2).setConstant(7.0);
  const Projection p = fit_svd(m, 2);
  CHECK(p.scale[2] == 1.0);
  std::vector<double> row(4);
  for (int j = 0; j < 4; ++j) row[static_cast<std::size_t>(j)] = m(0, j);
  for (double c : p.project(row)) CHECK(std::isfinite(c));
}
