#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::mv {

namespace {

void sign_by_largest(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
}

}  // namespace

PcaResult pca(const Eigen::MatrixXd& data, bool standardize, std::vector<std::string> variables) {
  const auto n = data.rows();
  const auto p = data.cols();
  if (n <= p) throw std::invalid_argument("pca needs more observations than variables");

  PcaResult r;
  r.standardized = standardize;
  r.variables = std::move(variables);
  r.center = data.colwise().mean().transpose();
  r.analyzed = data.rowwise() - r.center.transpose();
  r.scale = Eigen::VectorXd::Ones(p);
  if (standardize) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sd = std::sqrt(r.analyzed.col(j).squaredNorm() / static_cast<double>(n - 1));
      if (!(sd > 0.0)) {
        const std::string name = j < static_cast<Eigen::Index>(r.variables.size())
                                     ? r.variables[static_cast<std::size_t>(j)]
                                     : "#" + std::to_string(j);
        throw DataError("pca: column '" + name + "' is constant and cannot be standardized");
      }
      r.scale(j) = sd;
      r.analyzed.col(j) /= sd;
    }
  }

  const Eigen::MatrixXd S = r.analyzed.transpose() * r.analyzed / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  r.eigenvalues = es.eigenvalues().reverse().cwiseMax(0.0);
  r.loadings = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < p; ++k) sign_by_largest(r.loadings.col(k));
  r.pct_variance = r.eigenvalues / r.eigenvalues.sum() * 100.0;
  r.scores = r.analyzed * r.loadings;
  return r;
}

BiplotGeometry biplot_layout(const PcaResult& pca) {
  if (pca.analyzed.cols() < 2) throw std::invalid_argument("biplot needs at least two components");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(pca.analyzed, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd U = svd.matrixU().leftCols(2);
  Eigen::MatrixXd V = svd.matrixV().leftCols(2);
  const Eigen::Vector2d d = svd.singularValues().head(2);
  for (int k = 0; k < 2; ++k) {
    if (V.col(k).dot(pca.loadings.col(k)) < 0) {
      V.col(k) = -V.col(k);
      U.col(k) = -U.col(k);
    }
  }
  BiplotGeometry g;
  const Eigen::Vector2d root = d.cwiseSqrt();
  g.points = U * root.asDiagonal();
  g.vectors = V * root.asDiagonal();
  g.singular_values = d;
  g.pct_variance = pca.pct_variance.head(2);
  g.axes_equated = true;
  g.variables = pca.variables;
  return g;
}

std::vector<std::size_t> group_outliers(const Eigen::MatrixXd& coords,
                                        std::span<const data::Region> groups, std::size_t count) {
  const auto n = coords.rows();
  if (static_cast<std::size_t>(n) != groups.size())
    throw std::invalid_argument("group_outliers: group vector length mismatch");
  std::map<data::Region, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) members[groups[static_cast<std::size_t>(i)]].push_back(i);

  const Eigen::RowVectorXd grand = coords.colwise().mean();
  Eigen::MatrixXd resid(n, coords.cols());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(coords.cols(), coords.cols());
  Eigen::Index df = 0;
  for (const auto& [g, rows] : members) {
    Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(coords.cols());
    for (auto i : rows) m += coords.row(i);
    m /= static_cast<double>(rows.size());
    const bool singleton = rows.size() < 2;
    for (auto i : rows) {
      resid.row(i) = coords.row(i) - (singleton ? grand : m);
      if (!singleton) W += resid.row(i).transpose() * resid.row(i);
    }
    if (!singleton) df += static_cast<Eigen::Index>(rows.size()) - 1;
  }
  if (df < 1) throw NumericError("group_outliers: no group has two or more members");
  const auto ldlt = (W / static_cast<double>(df)).ldlt();

  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd r = resid.row(i).transpose();
    d2[static_cast<std::size_t>(i)] = r.dot(ldlt.solve(r));
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d2[a] > d2[b]; });
  order.resize(std::min(count, order.size()));
  return order;
}

Eigen::MatrixXd component_loadings(const PcaResult& pca, int k) {
  if (k < 1 || k > pca.loadings.cols()) throw std::invalid_argument("component_loadings: bad k");
  return pca.loadings.leftCols(k) * pca.eigenvalues.head(k).cwiseSqrt().asDiagonal();
}

}  // namespace moralstat::mv
