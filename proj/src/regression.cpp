#include <stdexcept>

#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::mv {

RegressionFit simple_regression(const Eigen::VectorXd& y, const Eigen::MatrixXd& predictors,
                                std::vector<std::string> names) {
  if (predictors.rows() != y.size()) throw std::invalid_argument("simple_regression: row mismatch");
  Eigen::MatrixXd X(y.size(), predictors.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(predictors.cols()) = predictors;

  RegressionFit fit;
  fit.names.push_back("(Intercept)");
  for (Eigen::Index j = 0; j < predictors.cols(); ++j)
    fit.names.push_back(static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                   : "x" + std::to_string(j + 1));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::string msg = "regression design is rank deficient; dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < X.cols(); ++k) msg += " " + fit.names[static_cast<std::size_t>(perm(k))];
    throw NumericError(msg);
  }
  fit.coefficients = qr.solve(y);
  fit.fitted = X * fit.coefficients;
  fit.residuals = y - fit.fitted;
  const double sst = (y.array() - y.mean()).square().sum();
  const double sse = fit.residuals.squaredNorm();
  fit.r_squared = sst > 0 ? 1.0 - sse / sst : 1.0;

  // Residuals of an exact fit are rounding noise; do not flag them.
  const double scale = std::max(y.cwiseAbs().maxCoeff(), 1.0);
  if (fit.residuals.cwiseAbs().maxCoeff() > 1e-9 * scale) {
    std::vector<double> r(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    fit.outside = num::boxplot_outside(r);
  }
  return fit;
}

RegressionFit response_surface(const Eigen::VectorXd& y, const Eigen::VectorXd& x1,
                               const Eigen::VectorXd& x2) {
  if (x1.size() != y.size() || x2.size() != y.size())
    throw std::invalid_argument("response_surface: length mismatch");
  Eigen::MatrixXd P(y.size(), 5);
  P.col(0) = x1;
  P.col(1) = x2;
  P.col(2) = x1.array().square();
  P.col(3) = x2.array().square();
  P.col(4) = x1.array() * x2.array();
  return simple_regression(y, P, {"x1", "x2", "x1^2", "x2^2", "x1:x2"});
}

}  // namespace moralstat::mv
