#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>

#include "moralstat/error.hpp"
#include "moralstat/mvstats.hpp"

namespace moralstat::mv {

namespace {

struct LsSolution {
  Eigen::MatrixXd coefficients;
  Eigen::MatrixXd residuals;
};

LsSolution least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         const std::vector<std::string>& column_names) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    std::ostringstream os;
    os << "design matrix is rank deficient (rank " << qr.rank() << " of " << X.cols()
       << "); dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < X.cols(); ++k) {
      const auto c = static_cast<std::size_t>(perm(k));
      os << ' ' << (c < column_names.size() ? column_names[c] : std::to_string(c));
    }
    throw NumericError(os.str());
  }
  LsSolution s;
  s.coefficients = qr.solve(Y);
  s.residuals = Y - X * s.coefficients;
  return s;
}

Eigen::MatrixXd sscp(const Eigen::MatrixXd& R) {
  Eigen::MatrixXd E = R.transpose() * R;
  return (E + E.transpose()) / 2.0;
}

struct Design {
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::vector<int>>> term_columns;
};

Design build_design(Eigen::Index n, const std::vector<Term>& terms, std::optional<std::size_t> skip) {
  Eigen::Index cols = 1;
  for (std::size_t t = 0; t < terms.size(); ++t)
    if (t != skip) cols += terms[t].columns.cols();
  Design d;
  d.X.resize(n, cols);
  d.X.col(0).setOnes();
  d.names.push_back("(Intercept)");
  Eigen::Index at = 1;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (t == skip) continue;
    const auto& term = terms[t];
    if (term.columns.rows() != n)
      throw std::invalid_argument("term '" + term.name + "' has the wrong number of rows");
    std::vector<int> idx;
    for (Eigen::Index c = 0; c < term.columns.cols(); ++c) {
      d.X.col(at) = term.columns.col(c);
      idx.push_back(static_cast<int>(at));
      d.names.push_back(static_cast<std::size_t>(c) < term.column_names.size()
                            ? term.column_names[static_cast<std::size_t>(c)]
                            : term.name);
      ++at;
    }
    d.term_columns.emplace_back(term.name, std::move(idx));
  }
  return d;
}

// Largest root of H v = lambda E v.
double largest_root(const Eigen::MatrixXd& H, const Eigen::MatrixXd& E) {
  Eigen::LLT<Eigen::MatrixXd> llt(E);
  if (llt.info() != Eigen::Success) throw NumericError("error SSCP matrix is singular");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, E);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

}  // namespace

Term numeric_term(std::string name, const Eigen::VectorXd& values) {
  Term t;
  t.column_names = {name};
  t.name = std::move(name);
  t.columns = values;
  return t;
}

Term factor_term(std::string name, std::span<const std::string> labels,
                 std::optional<std::string> reference) {
  std::vector<std::string> levels(labels.begin(), labels.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const std::string ref = reference.value_or(levels.empty() ? std::string() : levels.front());
  if (std::find(levels.begin(), levels.end(), ref) == levels.end())
    throw std::invalid_argument("factor_term: reference level '" + ref + "' not present");
  std::vector<std::string> coded;
  for (const auto& l : levels)
    if (l != ref) coded.push_back(l);

  Term t;
  t.columns = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                    static_cast<Eigen::Index>(coded.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t c = 0; c < coded.size(); ++c)
      if (labels[i] == coded[c]) t.columns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = 1.0;
  for (const auto& c : coded) t.column_names.push_back(name + c);
  t.name = std::move(name);
  return t;
}

MlmFit mlm_fit(const Eigen::MatrixXd& Y, std::vector<std::string> responses, std::vector<Term> terms) {
  const Design d = build_design(Y.rows(), terms, std::nullopt);
  auto sol = least_squares(d.X, Y, d.names);
  MlmFit fit;
  fit.Y = Y;
  fit.X = d.X;
  fit.coefficients = std::move(sol.coefficients);
  fit.residuals = std::move(sol.residuals);
  fit.fitted = Y - fit.residuals;
  fit.residual_sscp = sscp(fit.residuals);
  fit.df_error = static_cast<int>(Y.rows() - d.X.cols());
  if (fit.df_error < 1) throw NumericError("model leaves no error degrees of freedom");
  fit.responses = std::move(responses);
  fit.terms = std::move(terms);
  fit.term_columns = d.term_columns;
  fit.grand_means = Y.colwise().mean().transpose();
  return fit;
}

Eigen::VectorXd MlmFit::r_squared() const {
  const Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  Eigen::VectorXd r2(Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    r2(j) = 1.0 - residuals.col(j).squaredNorm() / centered.col(j).squaredNorm();
  return r2;
}

double f_upper_tail(double f, double df1, double df2) {
  if (!(f > 0.0)) return 1.0;
  boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

std::vector<ManovaRow> manova_type2(const MlmFit& fit) {
  const auto py = static_cast<int>(fit.Y.cols());
  std::vector<ManovaRow> rows;
  for (std::size_t t = 0; t < fit.terms.size(); ++t) {
    const Design reduced = build_design(fit.Y.rows(), fit.terms, t);
    const auto sol = least_squares(reduced.X, fit.Y, reduced.names);
    ManovaRow row;
    row.term = fit.terms[t].name;
    row.df = static_cast<int>(fit.terms[t].columns.cols());
    row.ssp_h = sscp(sol.residuals) - fit.residual_sscp;
    row.ssp_h = (row.ssp_h + row.ssp_h.transpose()) / 2.0;
    row.roy_stat = largest_root(row.ssp_h, fit.residual_sscp);
    const int d = std::max(py, row.df);
    row.df_num = d;
    row.df_den = fit.df_error - d + row.df;
    if (row.df_den < 1) throw NumericError("term '" + row.term + "' leaves no denominator df");
    row.approx_f = row.roy_stat * row.df_den / row.df_num;
    row.p_value = f_upper_tail(row.approx_f, row.df_num, row.df_den);
    rows.push_back(std::move(row));
  }
  return rows;
}

double roy_critical(double alpha, int q, int p_y, int df_error) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("roy_critical: alpha must lie in (0, 1)");
  const int d = std::max(p_y, q);
  const int df2 = df_error - d + q;
  if (q < 1 || p_y < 1 || df2 < 1) throw std::invalid_argument("roy_critical: invalid degrees of freedom");
  boost::math::fisher_f dist(d, df2);
  const double fcrit = boost::math::quantile(boost::math::complement(dist, alpha));
  return fcrit * d / df2;
}

HeGeometry he_geometry(const MlmFit& fit, const std::vector<ManovaRow>& rows,
                       std::pair<int, int> responses, double alpha) {
  const auto [a, b] = responses;
  if (a < 0 || b < 0 || a >= fit.Y.cols() || b >= fit.Y.cols() || a == b)
    throw std::invalid_argument("he_geometry: invalid response pair");
  auto sub = [a, b](const Eigen::MatrixXd& m) {
    Eigen::Matrix2d s;
    s << m(a, a), m(a, b), m(b, a), m(b, b);
    return s;
  };
  const double df = fit.df_error;
  const Eigen::Vector2d center(fit.grand_means(a), fit.grand_means(b));
  const double radius = std::sqrt(num::chi2_quantile(0.68, 2));

  HeGeometry he;
  he.alpha = alpha;
  he.responses = responses;
  he.e_ellipse = num::make_ellipse(center, sub(fit.residual_sscp) / df, radius, 0.68);
  const auto py = static_cast<int>(fit.Y.cols());
  for (const auto& row : rows) {
    const double lambda = roy_critical(alpha, row.df, py, fit.df_error);
    he.lambda_alpha.push_back(lambda);
    he.h_ellipses.emplace_back(row.term, num::make_ellipse(center, sub(row.ssp_h) / (lambda * df), radius, 0.68));
  }
  return he;
}

double protrusion_ratio(const num::EllipseGeom& h, const num::EllipseGeom& e) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(e.shape);
  if (es.eigenvalues()(0) <= 0.0) throw NumericError("protrusion_ratio: error ellipse is degenerate");
  const Eigen::Matrix2d inv_root = es.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> rel(inv_root * h.shape * inv_root);
  const double top = std::max(rel.eigenvalues()(1), 0.0);
  return std::sqrt(top) * h.radius / e.radius;
}

MlmFit fit_crime_model(const data::MoralDataset& ds) {
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(ds.size()), 2);
  Y.col(0) = ds.column("Crime_prop");
  Y.col(1) = ds.column("Crime_pers");
  std::vector<std::string> region;
  for (auto r : ds.regions()) region.emplace_back(1, data::region_letter(r));
  std::vector<Term> terms;
  terms.push_back(factor_term("Region", region));
  for (const char* v : {"Suicides", "Literacy", "Donations", "Infants", "Wealth"})
    terms.push_back(numeric_term(v, ds.column(v)));
  return mlm_fit(Y, {"Crime_prop", "Crime_pers"}, std::move(terms));
}

}  // namespace moralstat::mv
