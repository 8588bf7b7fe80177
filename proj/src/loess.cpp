#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moralstat/numcore.hpp"

namespace moralstat::num {

namespace {

double tricube(double u) {
  if (u >= 1.0) return 0.0;
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

}  // namespace

LoessFit loess(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double span, int degree) {
  const auto n = static_cast<std::size_t>(x.size());
  if (static_cast<std::size_t>(y.size()) != n) throw std::invalid_argument("loess: x and y differ in length");
  if (n < 4) throw std::invalid_argument("loess needs at least 4 points");
  if (!(span > 0.0 && span <= 1.0)) throw std::invalid_argument("loess: span must lie in (0, 1]");
  if (degree != 0 && degree != 1) throw std::invalid_argument("loess: degree must be 0 or 1");
  const auto q = std::min(n, static_cast<std::size_t>(std::ceil(span * static_cast<double>(n) - 1e-9)));
  if (q < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("loess: span too small for the local polynomial degree");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x(a) < x(b); });
  std::vector<double> xs(n), ys(n);
  std::vector<std::size_t> position(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = x(order[k]);
    ys[k] = y(order[k]);
    position[order[k]] = k;
  }

  LoessFit fit;
  fit.span = span;
  fit.degree = degree;
  fit.fitted.resize(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = position[i];
    const double x0 = xs[pos];
    std::size_t lo = pos, hi = pos;
    while (hi - lo + 1 < q) {
      if (lo == 0) {
        ++hi;
      } else if (hi + 1 == n) {
        --lo;
      } else if (x0 - xs[lo - 1] <= xs[hi + 1] - x0) {
        --lo;
      } else {
        ++hi;
      }
    }
    const double dmax = std::max(x0 - xs[lo], xs[hi] - x0);

    double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
    for (std::size_t k = lo; k <= hi; ++k) {
      const double d = xs[k] - x0;
      const double w = dmax > 0.0 ? tricube(std::abs(d) / dmax) : 1.0;
      sw += w;
      swx += w * d;
      swxx += w * d * d;
      swy += w * ys[k];
      swxy += w * d * ys[k];
    }
    double value = swy / sw;
    if (degree == 1) {
      const double det = sw * swxx - swx * swx;
      if (std::abs(det) > 1e-12 * std::max(sw * swxx, 1e-300))
        value = (swxx * swy - swx * swxy) / det;
    }
    fit.fitted(static_cast<Eigen::Index>(i)) = value;
  }
  return fit;
}

}  // namespace moralstat::num
