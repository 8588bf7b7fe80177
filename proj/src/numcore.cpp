#include "moralstat/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "moralstat/error.hpp"

namespace moralstat::num {

Eigen::MatrixXd covariance(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw std::invalid_argument("covariance needs at least 2 rows");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd S = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  return (S + S.transpose()) / 2.0;
}

double chi2_quantile(double prob, int df) {
  if (df != 2) throw std::invalid_argument("chi2_quantile supports df = 2 only");
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("chi2_quantile: probability must lie in (0, 1)");
  return -2.0 * std::log1p(-prob);
}

double mahalanobis_sq(const Eigen::VectorXd& y, const Eigen::VectorXd& center,
                      const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols() || S.rows() != y.size() || y.size() != center.size())
    throw std::invalid_argument("mahalanobis_sq: dimension mismatch");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (!(smin > 1e-12 * smax) || smax == 0.0) {
    std::ostringstream os;
    os << "mahalanobis_sq: covariance is singular (condition estimate "
       << (smin > 0 ? smax / smin : std::numeric_limits<double>::infinity()) << ")";
    throw NumericError(os.str());
  }
  const Eigen::VectorXd d = y - center;
  const double q = d.dot(S.ldlt().solve(d));
  return std::max(q, 0.0);
}

Eigen::VectorXd mahalanobis_all(const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd S = covariance(points);
  const Eigen::VectorXd center = points.colwise().mean().transpose();
  Eigen::VectorXd out(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out(i) = mahalanobis_sq(points.row(i).transpose(), center, S);
  return out;
}

std::vector<std::size_t> outside_ellipse(const Eigen::MatrixXd& points, double coverage) {
  if (points.rows() < 3 || points.cols() != 2)
    throw std::invalid_argument("outside_ellipse needs an n x 2 sample with n >= 3");
  const double cutoff = chi2_quantile(coverage, 2);
  const Eigen::MatrixXd S = covariance(points);
  const Eigen::VectorXd center = points.colwise().mean().transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd ev = es.eigenvalues();
  std::vector<std::size_t> out;
  if (ev(0) <= 1e-10 * std::max(ev(1), 1e-300)) {
    // Degenerate sample: anything off the line (or beyond its extent) is outside.
    const Eigen::Vector2d major = es.eigenvectors().col(1);
    const double halflen = std::sqrt(cutoff * std::max(ev(1), 0.0));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const Eigen::Vector2d d = points.row(i).transpose() - center;
      const double along = d.dot(major);
      const double off = (d - along * major).norm();
      if (off > 1e-9 * (1.0 + d.norm()) || std::abs(along) > halflen)
        out.push_back(static_cast<std::size_t>(i));
    }
    return out;
  }
  const auto ldlt = S.ldlt();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd d = points.row(i).transpose() - center;
    if (d.dot(ldlt.solve(d)) > cutoff) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<double> rank_transform(std::span<const double> values, RankOne rank_one_is) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const bool descending = rank_one_is == RankOne::Highest;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> rank_transform(const Eigen::VectorXd& values, RankOne rank_one_is) {
  return rank_transform(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                        rank_one_is);
}

double sign_test_probability(unsigned n) { return std::ldexp(1.0, -static_cast<int>(n)); }

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Fences boxplot_fences(std::span<const double> values) {
  const double q1 = quantile(values, 0.25);
  const double q3 = quantile(values, 0.75);
  const double iqr = q3 - q1;
  return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

std::vector<std::size_t> boxplot_outside(std::span<const double> values) {
  std::vector<std::size_t> out;
  if (values.empty()) return out;
  const auto f = boxplot_fences(values);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < f.lower || values[i] > f.upper) out.push_back(i);
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace moralstat::num
