#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "moralstat/dataset.hpp"
#include "moralstat/numcore.hpp"

namespace moralstat::mv {

// ---------------------------------------------------------------------------
// Principal components and the biplot

struct PcaResult {
  Eigen::VectorXd eigenvalues;   // descending, all p
  Eigen::VectorXd pct_variance;  // eigenvalues / sum * 100
  Eigen::MatrixXd loadings;      // p x p, unit-norm eigenvectors in columns
  Eigen::MatrixXd scores;        // n x p, analyzed * loadings
  Eigen::MatrixXd analyzed;      // centered (and, if standardized, scaled) data
  Eigen::VectorXd center;
  Eigen::VectorXd scale;         // ones when not standardized
  bool standardized = true;
  std::vector<std::string> variables;
};

// Eigen-analysis of the correlation (standardize) or covariance matrix. Each
// loading column is signed so its largest-magnitude entry is positive.
PcaResult pca(const Eigen::MatrixXd& data, bool standardize, std::vector<std::string> variables = {});

struct BiplotGeometry {
  Eigen::MatrixXd points;   // n x 2, G = U D^{1/2}
  Eigen::MatrixXd vectors;  // p x 2, H = V D^{1/2}
  Eigen::Vector2d singular_values = Eigen::Vector2d::Zero();
  Eigen::Vector2d pct_variance = Eigen::Vector2d::Zero();
  bool axes_equated = true;
  std::vector<std::string> variables;
};

// Symmetric scaling of the rank-2 SVD of pca.analyzed.
BiplotGeometry biplot_layout(const PcaResult& pca);

// The `count` rows furthest (squared Mahalanobis, pooled within-group covariance)
// from their group centroid in an n x 2 configuration. Singleton groups are
// measured from the grand centroid.
std::vector<std::size_t> group_outliers(const Eigen::MatrixXd& coords,
                                        std::span<const data::Region> groups, std::size_t count);

// ---------------------------------------------------------------------------
// Varimax rotation and factor scores

// First k principal-component loadings scaled by sqrt(eigenvalue).
Eigen::MatrixXd component_loadings(const PcaResult& pca, int k);

struct VarimaxResult {
  Eigen::MatrixXd loadings;  // p x k, aligned to the input columns
  Eigen::MatrixXd rotation;  // k x k orthogonal, loadings = input * rotation
  int sweeps = 0;
  double criterion = 0.0;
};

double varimax_criterion(const Eigen::MatrixXd& loadings, bool normalize);
VarimaxResult varimax(const Eigen::MatrixXd& loadings, bool normalize = true);

// Regression-method scores R^{-1} L applied to standardized data.
Eigen::MatrixXd factor_scores(const Eigen::MatrixXd& data, const Eigen::MatrixXd& rotated_loadings);

// ---------------------------------------------------------------------------
// Canonical discriminant analysis

struct CdaResult {
  Eigen::VectorXd eigenvalues;   // s = min(p, g - 1), descending
  Eigen::VectorXd pct;           // eigenvalue share in percent
  Eigen::MatrixXd coefficients;  // p x s raw canonical coefficients
  Eigen::MatrixXd scores;        // n x s, centered at the grand mean
  Eigen::MatrixXd structure;     // p x s correlations of variables with scores
  Eigen::MatrixXd group_means;   // g x s
  std::vector<int> group_n;
  std::vector<std::string> group_labels;  // sorted
  std::vector<std::size_t> group_of;      // row -> group index
  int df_within = 0;
};

// Orientation: dimension 1 makes `orient_variable`'s structure coefficient
// positive when given; otherwise (and for later dimensions) the
// largest-magnitude structure coefficient is positive.
CdaResult canonical_discriminant(const Eigen::MatrixXd& data, std::span<const std::string> groups,
                                 std::optional<std::size_t> orient_variable = std::nullopt);

// One-way ANOVA F of a single variable across groups.
double one_way_f(const Eigen::VectorXd& values, std::span<const std::string> groups);

num::EllipseGeom confidence_circle(const CdaResult& cda, std::string_view group, double level);

// ---------------------------------------------------------------------------
// Multivariate linear model and Type II MANOVA

struct Term {
  std::string name;
  Eigen::MatrixXd columns;
  std::vector<std::string> column_names;
};

Term numeric_term(std::string name, const Eigen::VectorXd& values);
// Treatment (dummy) coding; the reference level defaults to the alphabetically first.
Term factor_term(std::string name, std::span<const std::string> labels,
                 std::optional<std::string> reference = std::nullopt);

struct MlmFit {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd X;             // intercept first, then each term's columns
  Eigen::MatrixXd coefficients;  // cols(X) x p_y
  Eigen::MatrixXd fitted;
  Eigen::MatrixXd residuals;
  Eigen::MatrixXd residual_sscp;
  int df_error = 0;
  std::vector<std::string> responses;
  std::vector<Term> terms;
  std::vector<std::pair<std::string, std::vector<int>>> term_columns;
  Eigen::VectorXd grand_means;

  Eigen::VectorXd r_squared() const;
};

MlmFit mlm_fit(const Eigen::MatrixXd& Y, std::vector<std::string> responses, std::vector<Term> terms);

struct ManovaRow {
  std::string term;
  int df = 0;
  double roy_stat = 0.0;
  double approx_f = 0.0;
  int df_num = 0;
  int df_den = 0;
  double p_value = 1.0;
  Eigen::MatrixXd ssp_h;
};

// Roy's largest root with the approximate F = lambda (df_e - d + q) / d, d = max(p_y, q).
std::vector<ManovaRow> manova_type2(const MlmFit& fit);

double f_upper_tail(double f, double df1, double df2);
double roy_critical(double alpha, int q, int p_y, int df_error);

struct HeGeometry {
  num::EllipseGeom e_ellipse;
  std::vector<std::pair<std::string, num::EllipseGeom>> h_ellipses;
  std::vector<double> lambda_alpha;  // per term
  double alpha = 0.05;
  std::pair<int, int> responses{0, 1};
};

HeGeometry he_geometry(const MlmFit& fit, const std::vector<ManovaRow>& rows,
                       std::pair<int, int> responses = {0, 1}, double alpha = 0.05);

// max over directions u of extent_H(u) / extent_E(u).
double protrusion_ratio(const num::EllipseGeom& h, const num::EllipseGeom& e);

// Region + Suicides + Literacy + Donations + Infants + Wealth on (Crime_prop, Crime_pers).
MlmFit fit_crime_model(const data::MoralDataset& ds);

// ---------------------------------------------------------------------------
// Univariate regressions

struct RegressionFit {
  Eigen::VectorXd coefficients;  // intercept first
  std::vector<std::string> names;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double r_squared = 0.0;
  std::vector<std::size_t> outside;  // 1.5 IQR boxplot rule on residuals
};

RegressionFit simple_regression(const Eigen::VectorXd& y, const Eigen::MatrixXd& predictors,
                                std::vector<std::string> names = {});

// y ~ x1 + x2 + x1^2 + x2^2 + x1 x2
RegressionFit response_surface(const Eigen::VectorXd& y, const Eigen::VectorXd& x1,
                               const Eigen::VectorXd& x2);

}  // namespace moralstat::mv
