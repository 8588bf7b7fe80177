#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "moralstat/dataset.hpp"

namespace moralstat::num {

using data::Point;

// Unbiased (n - 1) sample covariance of the columns of `data`.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& data);

// Upper-`prob` quantile of chi-square with 2 df: -2 ln(1 - prob).
double chi2_quantile(double prob, int df = 2);

// (y - center)' S^-1 (y - center). Throws NumericError when S is singular.
double mahalanobis_sq(const Eigen::VectorXd& y, const Eigen::VectorXd& center,
                      const Eigen::MatrixXd& S);

inline constexpr int kBoundaryPoints = 360;

// Ellipse { p : (p - center)' shape^-1 (p - center) <= radius^2 }. When the shape
// is rank-deficient the ellipse collapses to a segment (degenerate = true).
struct EllipseGeom {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Matrix2d shape = Eigen::Matrix2d::Identity();
  double radius = 1.0;
  std::optional<double> coverage;
  bool degenerate = false;

  // center + radius * shape^{1/2} (cos t, sin t) for t = 2 pi k / n.
  std::vector<Point> boundary(int n = kBoundaryPoints) const;
  // End points of the major axis; the whole geometry for a degenerate ellipse.
  std::pair<Point, Point> major_axis() const;
  // Support function: max over the ellipse of u'(p - center).
  double extent(const Eigen::Vector2d& direction) const;
  // Squared radius-scaled distance of p; only meaningful when !degenerate.
  double quadratic_form(const Eigen::Vector2d& p) const;
};

// Shape is symmetrized and eigenvalues below 1e-10 (relative) are clamped to 0.
EllipseGeom make_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& shape,
                         double radius, std::optional<double> coverage = std::nullopt);

// Data ellipse of an n x 2 sample at the given coverage; degenerate when S is singular.
EllipseGeom data_ellipse(const Eigen::MatrixXd& points, double coverage);

// Rows whose squared Mahalanobis distance exceeds chi2_quantile(coverage, 2).
std::vector<std::size_t> outside_ellipse(const Eigen::MatrixXd& points, double coverage);

// Per-row squared Mahalanobis distance from the column means.
Eigen::VectorXd mahalanobis_all(const Eigen::MatrixXd& points);

struct LoessFit {
  double span = 2.0 / 3.0;
  int degree = 1;
  Eigen::VectorXd fitted;  // aligned with the input abscissae
};

inline constexpr double kDefaultLoessSpan = 2.0 / 3.0;

LoessFit loess(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
               double span = kDefaultLoessSpan, int degree = 1);

enum class RankOne { Highest, Lowest };

// Ranks 1..n; tied values share the average of the ranks they cover.
std::vector<double> rank_transform(std::span<const double> values, RankOne rank_one_is);
std::vector<double> rank_transform(const Eigen::VectorXd& values, RankOne rank_one_is);

// (1/2)^n, exact in binary floating point.
double sign_test_probability(unsigned n);

// Linear interpolation between order statistics (R's type 7).
double quantile(std::span<const double> values, double p);

struct Fences {
  double lower;
  double upper;
};

// Tukey 1.5 IQR fences with type-7 quartiles.
Fences boxplot_fences(std::span<const double> values);
std::vector<std::size_t> boxplot_outside(std::span<const double> values);

double mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

}  // namespace moralstat::num
