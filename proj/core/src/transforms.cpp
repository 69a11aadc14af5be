#include "rdpscope/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "rdpscope/errors.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::MatrixXd to_matrix(const FeatureTable& table) {
  const std::size_t n = table.rows.size();
  const std::size_t d = table.schema.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    if (table.rows[i].values.size() != d) {
      throw SchemaMismatch("row " + std::to_string(i) + " does not match the table schema");
    }
    for (std::size_t j = 0; j < d; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i].values[j];
    }
  }
  return m;
}

void require_two_distinct_rows(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    throw DegenerateMatrix("need at least 2 rows, got " + std::to_string(rows.rows()));
  }
  for (Eigen::Index i = 1; i < rows.rows(); ++i) {
    if (rows.row(i) != rows.row(0)) return;
  }
  throw DegenerateMatrix("matrix has fewer than 2 distinct rows");
}

// (W W^T)^(-1/2) W; eigenvalues clamped away from zero.
Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
  Eigen::VectorXd inv_sqrt = es.eigenvalues();
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) {
    inv_sqrt(i) = 1.0 / std::sqrt(std::max(inv_sqrt(i), 1e-12));
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows.push_back(m(i, j));
  }
  return rows;
}

}  // namespace

double dct_component(std::span<const double> row, std::size_t index) {
  const std::size_t n = row.size();
  if (index >= n) {
    throw IndexOutOfRange("dct index " + std::to_string(index) + " out of range for row of " +
                          std::to_string(n));
  }
  const double norm = index == 0 ? std::sqrt(1.0 / static_cast<double>(n))
                                 : std::sqrt(2.0 / static_cast<double>(n));
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += row[i] * std::cos(kPi * (2.0 * static_cast<double>(i) + 1.0) *
                             static_cast<double>(index) / (2.0 * static_cast<double>(n)));
  }
  return norm * acc;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  const auto n = rows.rows();
  const auto d = rows.cols();
  Standardizer s;
  s.mean.resize(static_cast<std::size_t>(d), 0.0);
  s.scale.resize(static_cast<std::size_t>(d), 1.0);
  if (n == 0) return s;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = rows.col(j).mean();
    s.mean[static_cast<std::size_t>(j)] = mean;
    if (n > 1) {
      const double ss = (rows.col(j).array() - mean).square().sum();
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (sd > 0) s.scale[static_cast<std::size_t>(j)] = sd;
    }
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) {
    throw ArityMismatch("row arity " + std::to_string(row.size()) + " != " +
                        std::to_string(mean.size()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != mean.size()) {
    throw ArityMismatch("matrix arity does not match standardizer");
  }
  Eigen::MatrixXd out = rows;
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    out.col(j) = (out.col(j).array() - mean[static_cast<std::size_t>(j)]) /
                 scale[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<double> Projection::project(std::span<const double> row) const {
  if (row.size() != mean.size()) {
    throw ArityMismatch("row arity " + std::to_string(row.size()) + " != " +
                        std::to_string(mean.size()));
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(row.size()));
  for (std::size_t j = 0; j < row.size(); ++j) x(static_cast<Eigen::Index>(j)) = (row[j] - mean[j]) / scale[j];
  const Eigen::VectorXd y = basis.transpose() * x;
  return std::vector<double>(y.data(), y.data() + y.size());
}

Projection fit_svd(const Eigen::MatrixXd& rows, int k, const SvdOptions& options) {
  require_two_distinct_rows(rows);
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw DegenerateMatrix("k = " + std::to_string(k) + " outside [1, min(rows, attributes)]");
  }

  Projection p;
  p.kind = ProjectionKind::Svd;
  p.k = k;
  if (options.standardize) {
    const Standardizer s = Standardizer::fit(rows);
    p.mean = s.mean;
    p.scale = s.scale;
  } else {
    p.mean.assign(static_cast<std::size_t>(d), 0.0);
    p.scale.assign(static_cast<std::size_t>(d), 1.0);
  }
  Standardizer s{p.mean, p.scale};
  const Eigen::MatrixXd x = s.apply(rows);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  p.singular_values.assign(sigma.data(), sigma.data() + sigma.size());

  const double tol = std::max(n, d) * sigma(0) * 1e-15;
  p.basis = Eigen::MatrixXd::Zero(d, k);
  for (int j = 0; j < k; ++j) {
    if (sigma(j) > tol) p.basis.col(j) = svd.matrixV().col(j) / sigma(j);
  }
  return p;
}

Projection fit_ica(const Eigen::MatrixXd& rows, int k, std::uint64_t seed,
                   const IcaOptions& options) {
  require_two_distinct_rows(rows);
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  if (k < 1 || k > std::min(n, d)) {
    throw DegenerateMatrix("k = " + std::to_string(k) + " outside [1, min(rows, attributes)]");
  }

  Projection p;
  p.kind = ProjectionKind::Ica;
  p.k = k;
  p.seed = seed;
  if (options.standardize) {
    const Standardizer s = Standardizer::fit(rows);
    p.mean = s.mean;
    p.scale = s.scale;
  } else {
    p.mean.assign(static_cast<std::size_t>(d), 0.0);
    p.scale.assign(static_cast<std::size_t>(d), 1.0);
  }
  Standardizer s{p.mean, p.scale};
  const Eigen::MatrixXd x = s.apply(rows);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double tol = std::max(n, d) * sigma(0) * 1e-12;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++rank;
  }
  if (k > rank) {
    throw DegenerateMatrix("k = " + std::to_string(k) + " exceeds whitened rank " +
                           std::to_string(rank));
  }

  // Whitening map: z = K^T x_std has unit sample covariance in k dimensions.
  Eigen::MatrixXd whiten(d, k);
  const double root = std::sqrt(static_cast<double>(n - 1));
  for (int j = 0; j < k; ++j) whiten.col(j) = svd.matrixV().col(j) * (root / sigma(j));
  const Eigen::MatrixXd z = x * whiten;  // n x k

  Rng rng(seed);
  Eigen::MatrixXd w(k, k);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.gaussian();
  }
  w = symmetric_decorrelation(w);

  p.converged = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd y = z * w.transpose();          // n x k
    const Eigen::MatrixXd g = y.array().tanh();           // log-cosh contrast
    const Eigen::MatrixXd gp = 1.0 - g.array().square();  // derivative
    const Eigen::VectorXd gp_mean = gp.colwise().mean();
    Eigen::MatrixXd w_next =
        (g.transpose() * z) / static_cast<double>(n) - gp_mean.asDiagonal() * w;
    w_next = symmetric_decorrelation(w_next);

    double delta = 0;
    for (int j = 0; j < k; ++j) {
      delta = std::max(delta, std::abs(1.0 - std::abs(w_next.row(j).dot(w.row(j)))));
    }
    w = w_next;
    if (delta < options.tolerance) {
      p.converged = true;
      break;
    }
  }

  p.basis = whiten * w.transpose();  // project(x) = W K^T x_std
  return p;
}

std::string Projection::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == ProjectionKind::Svd ? "svd" : "ica";
  j["k"] = k;
  j["seed"] = seed;
  j["attributes"] = mean.size();
  j["mean"] = mean;
  j["scale"] = scale;
  j["basis"] = matrix_to_json(basis);
  j["converged"] = converged;
  if (!singular_values.empty()) j["singular_values"] = singular_values;
  return j.dump(2);
}

Projection Projection::from_json(std::string_view text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Projection p;
  p.kind = j.at("kind") == "svd" ? ProjectionKind::Svd : ProjectionKind::Ica;
  p.k = j.at("k").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.mean = j.at("mean").get<std::vector<double>>();
  p.scale = j.at("scale").get<std::vector<double>>();
  p.converged = j.at("converged").get<bool>();
  if (j.contains("singular_values")) {
    p.singular_values = j.at("singular_values").get<std::vector<double>>();
  }
  const auto d = static_cast<Eigen::Index>(j.at("attributes").get<std::size_t>());
  const auto flat = j.at("basis").get<std::vector<double>>();
  if (flat.size() != static_cast<std::size_t>(d * p.k)) {
    throw SchemaMismatch("projection manifest basis has wrong element count");
  }
  p.basis = Eigen::MatrixXd(d, p.k);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (int c = 0; c < p.k; ++c) p.basis(i, c) = flat[static_cast<std::size_t>(i) * p.k + c];
  }
  return p;
}

std::vector<double> TransformSet::derived(std::span<const double> base_row) const {
  const std::vector<double> standardized = standardizer.apply(base_row);
  std::vector<double> out;
  out.reserve(41);
  out.push_back(dct_component(standardized, static_cast<std::size_t>(dct_index)));
  const std::vector<double> sv = svd.project(base_row);
  const std::vector<double> ic = ica.project(base_row);
  for (std::size_t i = 0; i < 20; ++i) out.push_back(i < sv.size() ? sv[i] : 0.0);
  for (std::size_t i = 0; i < 20; ++i) out.push_back(i < ic.size() ? ic[i] : 0.0);
  return out;
}

TransformSet fit_transforms(const FeatureTable& base, const TransformOptions& options) {
  const Eigen::MatrixXd m = to_matrix(base);
  if (options.dct_index < 0 || options.dct_index >= m.cols()) {
    throw IndexOutOfRange("dct index " + std::to_string(options.dct_index) +
                          " out of range for " + std::to_string(m.cols()) + " attributes");
  }
  TransformSet tf;
  tf.dct_index = options.dct_index;
  tf.fit_rows = base.rows.size();
  tf.standardizer = Standardizer::fit(m);

  const int cap = static_cast<int>(std::min<Eigen::Index>(m.rows(), m.cols()));
  const int k_svd = std::clamp(std::min(options.components, 20), 1, cap);
  tf.svd = fit_svd(m, k_svd);

  // ICA cannot exceed the whitened rank; count it from the SVD spectrum.
  const Eigen::VectorXd sigma =
      Eigen::Map<const Eigen::VectorXd>(tf.svd.singular_values.data(),
                                        static_cast<Eigen::Index>(tf.svd.singular_values.size()));
  const double tol = std::max(m.rows(), m.cols()) * sigma(0) * 1e-12;
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++rank;
  }
  const int k_ica = std::clamp(std::min(options.components, 20), 1, std::max(rank, 1));
  IcaOptions ica_opts = options.ica;
  tf.ica = fit_ica(m, k_ica, options.seed, ica_opts);
  return tf;
}

FeatureTable apply_transforms(const TransformSet& transforms, const FeatureTable& base) {
  FeatureTable out;
  out.schema = FeatureSchema::full();
  out.rows.reserve(base.rows.size());
  for (const FeatureVector& row : base.rows) {
    FeatureVector full = row;
    const std::vector<double> extra = transforms.derived(row.values);
    full.values.insert(full.values.end(), extra.begin(), extra.end());
    if (full.values.size() != out.schema.size()) {
      throw SchemaMismatch("augmented row arity does not match the full schema");
    }
    out.rows.push_back(std::move(full));
  }
  return out;
}

}  // namespace rdpscope
