#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::mv {

namespace {

struct Grouping {
  std::vector<std::string> labels;
  std::vector<std::size_t> of;
  std::vector<int> n;
};

Grouping make_grouping(std::span<const std::string> groups) {
  Grouping g;
  g.labels.assign(groups.begin(), groups.end());
  std::sort(g.labels.begin(), g.labels.end());
  g.labels.erase(std::unique(g.labels.begin(), g.labels.end()), g.labels.end());
  g.n.assign(g.labels.size(), 0);
  for (const auto& s : groups) {
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(g.labels.begin(), g.labels.end(), s) - g.labels.begin());
    g.of.push_back(idx);
    ++g.n[idx];
  }
  return g;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double denom = ca.norm() * cb.norm();
  return denom > 0 ? ca.dot(cb) / denom : 0.0;
}

}  // namespace

CdaResult canonical_discriminant(const Eigen::MatrixXd& data, std::span<const std::string> groups,
                                 std::optional<std::size_t> orient_variable) {
  const auto n = data.rows();
  const auto p = data.cols();
  if (static_cast<std::size_t>(n) != groups.size())
    throw std::invalid_argument("canonical_discriminant: group vector length mismatch");
  const Grouping grp = make_grouping(groups);
  const auto g = static_cast<Eigen::Index>(grp.labels.size());
  if (g < 2) throw std::invalid_argument("canonical_discriminant needs at least two groups");

  const Eigen::RowVectorXd grand = data.colwise().mean();
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(g, p);
  for (Eigen::Index i = 0; i < n; ++i) means.row(static_cast<Eigen::Index>(grp.of[static_cast<std::size_t>(i)])) += data.row(i);
  for (Eigen::Index k = 0; k < g; ++k) means.row(k) /= static_cast<double>(grp.n[static_cast<std::size_t>(k)]);

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd d = data.row(i) - means.row(static_cast<Eigen::Index>(grp.of[static_cast<std::size_t>(i)]));
    W += d.transpose() * d;
  }
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < g; ++k) {
    const Eigen::RowVectorXd d = means.row(k) - grand;
    B += static_cast<double>(grp.n[static_cast<std::size_t>(k)]) * d.transpose() * d;
  }
  const auto df = static_cast<int>(n - g);
  if (df < 1) throw NumericError("canonical_discriminant: no within-group degrees of freedom");

  Eigen::LLT<Eigen::MatrixXd> llt(W);
  Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(W);
  const auto& sv = wsvd.singularValues();
  if (llt.info() != Eigen::Success || !(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw NumericError("canonical_discriminant: within-group SSCP matrix is singular");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(B, W);
  const Eigen::Index s = std::min<Eigen::Index>(p, g - 1);
  CdaResult r;
  r.eigenvalues = es.eigenvalues().reverse().head(s).cwiseMax(0.0);
  // es normalizes v'Wv = 1; rescale so the pooled within covariance of scores is I.
  r.coefficients = es.eigenvectors().rowwise().reverse().leftCols(s) * std::sqrt(static_cast<double>(df));
  const Eigen::MatrixXd centered = data.rowwise() - grand;
  r.scores = centered * r.coefficients;
  r.structure.resize(p, s);
  for (Eigen::Index k = 0; k < s; ++k)
    for (Eigen::Index j = 0; j < p; ++j) r.structure(j, k) = correlation(data.col(j), r.scores.col(k));

  for (Eigen::Index k = 0; k < s; ++k) {
    bool flip = false;
    if (k == 0 && orient_variable) {
      flip = r.structure(static_cast<Eigen::Index>(*orient_variable), 0) < 0;
    } else {
      Eigen::Index imax = 0;
      r.structure.col(k).cwiseAbs().maxCoeff(&imax);
      flip = r.structure(imax, k) < 0;
    }
    if (flip) {
      r.coefficients.col(k) *= -1;
      r.scores.col(k) *= -1;
      r.structure.col(k) *= -1;
    }
  }

  const double total = r.eigenvalues.sum();
  r.pct = total > 0 ? Eigen::VectorXd(r.eigenvalues / total * 100.0) : Eigen::VectorXd::Zero(s);
  r.group_means = (means.rowwise() - grand) * r.coefficients;
  r.group_n = grp.n;
  r.group_labels = grp.labels;
  r.group_of = grp.of;
  r.df_within = df;
  return r;
}

double one_way_f(const Eigen::VectorXd& values, std::span<const std::string> groups) {
  const Grouping grp = make_grouping(groups);
  const auto g = grp.labels.size();
  const auto n = static_cast<std::size_t>(values.size());
  std::vector<double> sum(g, 0.0);
  for (std::size_t i = 0; i < n; ++i) sum[grp.of[i]] += values(static_cast<Eigen::Index>(i));
  const double grand = values.mean();
  double ssb = 0.0, ssw = 0.0;
  for (std::size_t k = 0; k < g; ++k) {
    const double m = sum[k] / grp.n[k];
    ssb += grp.n[k] * (m - grand) * (m - grand);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double m = sum[grp.of[i]] / grp.n[grp.of[i]];
    const double d = values(static_cast<Eigen::Index>(i)) - m;
    ssw += d * d;
  }
  return (ssb / static_cast<double>(g - 1)) / (ssw / static_cast<double>(n - g));
}

num::EllipseGeom confidence_circle(const CdaResult& cda, std::string_view group, double level) {
  auto it = std::find(cda.group_labels.begin(), cda.group_labels.end(), group);
  if (it == cda.group_labels.end())
    throw std::invalid_argument("confidence_circle: unknown group '" + std::string(group) + "'");
  const auto k = static_cast<std::size_t>(it - cda.group_labels.begin());
  const int ng = cda.group_n[k];
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (Eigen::Index d = 0; d < std::min<Eigen::Index>(2, cda.group_means.cols()); ++d)
    center(d) = cda.group_means(static_cast<Eigen::Index>(k), d);
  const double radius = std::sqrt(num::chi2_quantile(level, 2) / ng);
  return num::make_ellipse(center, Eigen::Matrix2d::Identity(), radius, level);
}

}  // namespace moralstat::mv
