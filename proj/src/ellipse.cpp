#include <cmath>
#include <numbers>
#include <stdexcept>

#include "moralstat/numcore.hpp"

namespace moralstat::num {

namespace {

// Symmetric square root of a PSD 2x2 matrix.
Eigen::Matrix2d sqrt_psd(const Eigen::Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  const Eigen::Vector2d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

EllipseGeom make_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& shape,
                         double radius, std::optional<double> coverage) {
  if (!(radius >= 0.0)) throw std::invalid_argument("ellipse radius must be >= 0");
  Eigen::Matrix2d sym = (shape + shape.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(sym);
  Eigen::Vector2d ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev(1)), 1e-300);
  bool degenerate = false;
  for (int i = 0; i < 2; ++i) {
    if (ev(i) <= 1e-10 * scale) {
      ev(i) = 0.0;
      degenerate = true;
    }
  }
  EllipseGeom g;
  g.center = center;
  g.shape = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  g.radius = radius;
  g.coverage = coverage;
  g.degenerate = degenerate;
  return g;
}

std::vector<Point> EllipseGeom::boundary(int n) const {
  const Eigen::Matrix2d root = sqrt_psd(shape);
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    const Eigen::Vector2d p = center + radius * root * Eigen::Vector2d(std::cos(t), std::sin(t));
    out.push_back({p.x(), p.y()});
  }
  return out;
}

std::pair<Point, Point> EllipseGeom::major_axis() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(shape);
  const Eigen::Vector2d v = es.eigenvectors().col(1) * radius * std::sqrt(std::max(es.eigenvalues()(1), 0.0));
  return {{center.x() - v.x(), center.y() - v.y()}, {center.x() + v.x(), center.y() + v.y()}};
}

double EllipseGeom::extent(const Eigen::Vector2d& direction) const {
  return radius * std::sqrt(std::max(direction.dot(shape * direction), 0.0));
}

double EllipseGeom::quadratic_form(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d d = p - center;
  return d.dot(shape.ldlt().solve(d));
}

EllipseGeom data_ellipse(const Eigen::MatrixXd& points, double coverage) {
  if (points.cols() != 2 || points.rows() < 3)
    throw std::invalid_argument("data_ellipse needs an n x 2 sample with n >= 3");
  const Eigen::Matrix2d S = covariance(points);
  const Eigen::Vector2d center = points.colwise().mean().transpose();
  return make_ellipse(center, S, std::sqrt(chi2_quantile(coverage, 2)), coverage);
}

}  // namespace moralstat::num
