#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::mv {

namespace {

constexpr double kGainTolerance = 1e-8;
constexpr int kMaxSweeps = 1000;

Eigen::VectorXd row_norms(const Eigen::MatrixXd& L, bool normalize) {
  Eigen::VectorXd h = Eigen::VectorXd::Ones(L.rows());
  if (normalize) {
    h = L.rowwise().norm();
    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (h(i) == 0.0) h(i) = 1.0;
  }
  return h;
}

double raw_criterion(const Eigen::MatrixXd& A) {
  const double p = static_cast<double>(A.rows());
  const Eigen::MatrixXd sq = A.array().square().matrix();
  double v = 0.0;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double m2 = sq.col(j).sum() / p;
    v += sq.col(j).squaredNorm() / p - m2 * m2;
  }
  return v;
}

// Column permutation of `rotated` maximizing total |congruence| with `input`.
std::vector<Eigen::Index> best_permutation(const Eigen::MatrixXd& input, const Eigen::MatrixXd& rotated) {
  const auto k = input.cols();
  Eigen::MatrixXd cong(k, k);  // cong(i, j): input column i vs rotated column j
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double denom = input.col(i).norm() * rotated.col(j).norm();
      cong(i, j) = denom > 0 ? std::abs(input.col(i).dot(rotated.col(j))) / denom : 0.0;
    }
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 8) {
    std::vector<Eigen::Index> best = perm;
    double best_score = -1.0;
    do {
      double s = 0.0;
      for (Eigen::Index i = 0; i < k; ++i) s += cong(i, perm[static_cast<std::size_t>(i)]);
      if (s > best_score + 1e-12) {
        best_score = s;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Greedy for wide solutions.
  std::vector<bool> used(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < k; ++j)
      if (!used[static_cast<std::size_t>(j)] && (pick < 0 || cong(i, j) > cong(i, pick))) pick = j;
    used[static_cast<std::size_t>(pick)] = true;
    perm[static_cast<std::size_t>(i)] = pick;
  }
  return perm;
}

}  // namespace

double varimax_criterion(const Eigen::MatrixXd& loadings, bool normalize) {
  const Eigen::VectorXd h = row_norms(loadings, normalize);
  return raw_criterion(h.cwiseInverse().asDiagonal() * loadings);
}

VarimaxResult varimax(const Eigen::MatrixXd& loadings, bool normalize) {
  const auto p = loadings.rows();
  const auto k = loadings.cols();
  if (k < 2) throw std::invalid_argument("varimax needs at least two columns");

  const Eigen::VectorXd h = row_norms(loadings, normalize);
  const Eigen::MatrixXd A = h.cwiseInverse().asDiagonal() * loadings;
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(k, k);
  double crit = raw_criterion(A);
  int sweeps = 0;
  for (;;) {
    if (++sweeps > kMaxSweeps) throw NumericError("varimax did not converge in 1000 sweeps");
    const Eigen::MatrixXd B = A * T;
    const Eigen::RowVectorXd colsq = B.array().square().colwise().sum();
    const Eigen::MatrixXd target =
        B.array().cube().matrix() - B * (colsq / static_cast<double>(p)).asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * target, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd next = svd.matrixU() * svd.matrixV().transpose();
    const double next_crit = raw_criterion(A * next);
    const double gain = next_crit - crit;
    if (gain < -kGainTolerance) break;  // keep the better rotation
    T = next;
    crit = next_crit;
    if (gain < kGainTolerance) break;
  }

  Eigen::MatrixXd rotated = h.asDiagonal() * (A * T);
  const auto perm = best_permutation(loadings, rotated);
  VarimaxResult out;
  out.loadings.resize(p, k);
  out.rotation.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto src = perm[static_cast<std::size_t>(i)];
    Eigen::VectorXd col = rotated.col(src);
    Eigen::VectorXd rot = T.col(src);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0) {
      col = -col;
      rot = -rot;
    }
    out.loadings.col(i) = col;
    out.rotation.col(i) = rot;
  }
  out.sweeps = sweeps;
  out.criterion = crit;
  return out;
}

Eigen::MatrixXd factor_scores(const Eigen::MatrixXd& data, const Eigen::MatrixXd& rotated_loadings) {
  if (data.cols() != rotated_loadings.rows())
    throw std::invalid_argument("factor_scores: loadings do not match the data's variables");
  if (data.rows() < 2) throw std::invalid_argument("factor_scores needs at least two rows");
  const double dof = static_cast<double>(data.rows() - 1);
  Eigen::MatrixXd Z = data.rowwise() - data.colwise().mean();
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double sd = std::sqrt(Z.col(j).squaredNorm() / dof);
    if (!(sd > 0.0)) throw DataError("factor_scores: constant column");
    Z.col(j) /= sd;
  }
  const Eigen::MatrixXd R = Z.transpose() * Z / dof;
  const Eigen::MatrixXd weights = R.ldlt().solve(rotated_loadings);
  return Z * weights;
}

}  // namespace moralstat::mv
