#include "tcf/baselines.hpp"

#include <cmath>
#include <sstream>

#include "tcf/error.hpp"

namespace tcf {

std::string variant_name(LogLinearVariant v) {
  switch (v) {
    case LogLinearVariant::LL1: return "LL1";
    case LogLinearVariant::LL2: return "LL2";
    case LogLinearVariant::LL3: return "LL3";
    case LogLinearVariant::LL3S: return "LL3S";
  }
  return "?";
}

namespace {

// Column positions of each coefficient block.
struct Layout {
  Eigen::Index n, t, p, controls;
  Eigen::Index unit0, period0, cov0, logz0, tau0, cols;
  LogLinearVariant v;

  Layout(LogLinearVariant variant, const PanelDataset& d)
      : n(d.N()), t(d.T()), p(static_cast<Eigen::Index>(d.covariates.size())), controls(d.K() - 1), v(variant) {
    unit0 = 1;
    period0 = unit0 + n - 1;
    cov0 = period0 + t - 1;
    logz0 = cov0 + p;
    tau0 = logz0 + (v == LogLinearVariant::LL2 ? controls : 0);
    Eigen::Index taus = 0;
    if (v == LogLinearVariant::LL3) taus = controls * t;
    if (v == LogLinearVariant::LL3S) taus = controls;
    cols = tau0 + taus;
  }

  bool uses_control_rows() const { return v == LogLinearVariant::LL3 || v == LogLinearVariant::LL3S; }
};

double log_offset(const PanelDataset& d, Eigen::Index i) { return d.offsets ? std::log((*d.offsets)(i)) : 0.0; }

double log_control(const PanelDataset& d, std::size_t k, Eigen::Index i, Eigen::Index t, int* shifted) {
  if (!d.control_mask(k)(i, t)) {
    std::ostringstream os;
    os << "log-linear model (2): control '" << d.controls[k].name << "' missing at (" << i << "," << t << ")";
    throw InputError(os.str());
  }
  const double z = d.controls[k].values(i, t);
  if (z < 0.0) throw InputError("log-linear model (2): negative control count");
  if (z == 0.0) {
    if (shifted) ++*shifted;
    return 0.0;  // log(0 + 1)
  }
  return std::log(z);
}

Vector outcome_row(const Layout& L, const PanelDataset& d, Eigen::Index i, Eigen::Index t, int* shifted) {
  Vector x = Vector::Zero(L.cols);
  x(0) = 1.0;
  if (i > 0) x(L.unit0 + i - 1) = 1.0;
  if (t > 0) x(L.period0 + t - 1) = 1.0;
  for (Eigen::Index q = 0; q < L.p; ++q) x(L.cov0 + q) = d.covariates[static_cast<std::size_t>(q)](i, t);
  if (L.v == LogLinearVariant::LL2)
    for (Eigen::Index k = 0; k < L.controls; ++k) x(L.logz0 + k) = log_control(d, static_cast<std::size_t>(k), i, t, shifted);
  return x;
}

Vector control_row(const Layout& L, const PanelDataset& d, Eigen::Index k, Eigen::Index i, Eigen::Index t) {
  Vector x = Vector::Zero(L.cols);
  x(0) = 1.0;
  if (i > 0) x(L.unit0 + i - 1) = 1.0;
  for (Eigen::Index q = 0; q < L.p; ++q) x(L.cov0 + q) = d.covariates[static_cast<std::size_t>(q)](i, t);
  if (L.v == LogLinearVariant::LL3) {
    x(L.tau0 + k * L.t + t) = 1.0;
  } else {
    if (t > 0) x(L.period0 + t - 1) = 1.0;
    x(L.tau0 + k) = 1.0;
  }
  return x;
}

std::vector<std::string> coefficient_names(const Layout& L, const PanelDataset& d) {
  std::vector<std::string> names{"intercept"};
  auto unit_label = [&](Eigen::Index i) {
    return d.unit_ids.empty() ? std::to_string(i + 1) : d.unit_ids[static_cast<std::size_t>(i)];
  };
  auto period_label = [&](Eigen::Index t) {
    return d.periods.empty() ? std::to_string(t + 1) : std::to_string(d.periods[static_cast<std::size_t>(t)]);
  };
  for (Eigen::Index i = 1; i < L.n; ++i) names.push_back("unit:" + unit_label(i));
  for (Eigen::Index t = 1; t < L.t; ++t) names.push_back("period:" + period_label(t));
  for (Eigen::Index q = 0; q < L.p; ++q) {
    names.push_back(static_cast<std::size_t>(q) < d.covariate_names.size() ? d.covariate_names[static_cast<std::size_t>(q)]
                                                                           : "x" + std::to_string(q + 1));
  }
  for (Eigen::Index k = 0; L.v == LogLinearVariant::LL2 && k < L.controls; ++k)
    names.push_back("log:" + d.controls[static_cast<std::size_t>(k)].name);
  for (Eigen::Index k = 0; L.v == LogLinearVariant::LL3 && k < L.controls; ++k)
    for (Eigen::Index t = 0; t < L.t; ++t)
      names.push_back("tau:" + d.controls[static_cast<std::size_t>(k)].name + ":" + period_label(t));
  for (Eigen::Index k = 0; L.v == LogLinearVariant::LL3S && k < L.controls; ++k)
    names.push_back("tau:" + d.controls[static_cast<std::size_t>(k)].name);
  return names;
}

}  // namespace

NBFit fit_nb(const PanelDataset& d, const NBModelSpec& spec, const std::optional<Mask>& exclude) {
  d.validate();
  if (exclude && (exclude->rows() != d.N() || exclude->cols() != d.T())) {
    throw ShapeError("negative binomial fit: exclusion mask has the wrong shape");
  }
  const Layout L(spec.variant, d);
  std::vector<Vector> rows;
  std::vector<double> ys, offs;
  int shifted = 0;
  for (Eigen::Index t = 0; t < L.t; ++t)
    for (Eigen::Index i = 0; i < L.n; ++i) {
      if (d.w(i, t) || !d.y_is_observed(i, t) || (exclude && (*exclude)(i, t))) continue;
      rows.push_back(outcome_row(L, d, i, t, &shifted));
      ys.push_back(d.y_obs(i, t));
      offs.push_back(log_offset(d, i));
    }
  if (L.uses_control_rows()) {
    for (Eigen::Index k = 0; k < L.controls; ++k) {
      const Mask obs = d.control_mask(static_cast<std::size_t>(k));
      for (Eigen::Index t = 0; t < L.t; ++t)
        for (Eigen::Index i = 0; i < L.n; ++i) {
          if (!obs(i, t)) continue;
          rows.push_back(control_row(L, d, k, i, t));
          ys.push_back(d.controls[static_cast<std::size_t>(k)].values(i, t));
          offs.push_back(log_offset(d, i));
        }
    }
  }
  if (rows.empty()) throw InputError("negative binomial fit: no observed outcome cells");

  Matrix x(static_cast<Eigen::Index>(rows.size()), L.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  const Vector y = Eigen::Map<const Vector>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  const Vector off = Eigen::Map<const Vector>(offs.data(), static_cast<Eigen::Index>(offs.size()));

  NBFit fit;
  static_cast<GlmFit&>(fit) = fit_nb_glm(x, y, off, spec.glm);
  fit.variant = spec.variant;
  fit.names = coefficient_names(L, d);
  fit.zero_controls_shifted = shifted;
  fit.rows = static_cast<int>(rows.size());
  return fit;
}

Vector nb_design_row(const NBFit& fit, const PanelDataset& d, Eigen::Index i, Eigen::Index t) {
  const Layout L(fit.variant, d);
  if (L.cols != fit.coefficients.size()) throw ShapeError("negative binomial fit does not match this dataset");
  return outcome_row(L, d, i, t, nullptr);
}

Vector impute_nb(const NBFit& fit, const PanelDataset& d, const std::vector<CellIndex>& cells) {
  Vector out(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [i, t] = cells[c];
    if (i < 0 || t < 0 || i >= d.N() || t >= d.T()) throw InputError("impute_nb: cell outside the panel");
    out(static_cast<Eigen::Index>(c)) =
        std::exp(nb_design_row(fit, d, i, t).dot(fit.coefficients) + log_offset(d, i));
  }
  return out;
}

Matrix impute_nb(const NBFit& fit, const PanelDataset& d) {
  std::vector<CellIndex> cells;
  for (Eigen::Index t = 0; t < d.T(); ++t)
    for (Eigen::Index i = 0; i < d.N(); ++i) cells.emplace_back(i, t);
  const Vector v = impute_nb(fit, d, cells);
  return Eigen::Map<const Matrix>(v.data(), d.N(), d.T());
}

namespace {

// Treated cells that enter Delta, with their design rows.
struct TreatedCells {
  std::vector<Vector> x;
  std::vector<double> off, y1;
};

TreatedCells treated_cells(const NBFit& fit, const PanelDataset& d) {
  TreatedCells tc;
  for (Eigen::Index t = 0; t < d.T(); ++t)
    for (Eigen::Index i = 0; i < d.N(); ++i) {
      if (!d.w(i, t) || !d.y_is_observed(i, t) || d.y_obs(i, t) == 0.0) continue;
      tc.x.push_back(nb_design_row(fit, d, i, t));
      tc.off.push_back(log_offset(d, i));
      tc.y1.push_back(d.y_obs(i, t));
    }
  if (tc.x.empty()) throw InputError("delta: no treated cell with a positive outcome");
  return tc;
}

}  // namespace

double nb_delta(const NBFit& fit, const PanelDataset& d, const Vector& beta) {
  const TreatedCells tc = treated_cells(fit, d);
  double sum = 0.0;
  for (std::size_t c = 0; c < tc.x.size(); ++c) sum += (std::exp(tc.x[c].dot(beta) + tc.off[c]) - tc.y1[c]) / tc.y1[c];
  return sum / static_cast<double>(tc.x.size());
}

Vector nb_delta_gradient(const NBFit& fit, const PanelDataset& d, const Vector& beta) {
  const TreatedCells tc = treated_cells(fit, d);
  Vector g = Vector::Zero(beta.size());
  for (std::size_t c = 0; c < tc.x.size(); ++c) g += std::exp(tc.x[c].dot(beta) + tc.off[c]) / tc.y1[c] * tc.x[c];
  return g / static_cast<double>(tc.x.size());
}

DeltaInterval delta_method_interval(const NBFit& fit, const PanelDataset& d) {
  DeltaInterval out;
  out.point = nb_delta(fit, d, fit.coefficients);
  const Vector g = nb_delta_gradient(fit, d, fit.coefficients);
  const double var = g.dot(fit.covariance * g);
  out.sd = std::sqrt(std::max(var, 0.0));
  out.lo = out.point - 1.96 * out.sd;
  out.hi = out.point + 1.96 * out.sd;
  out.unreliable = fit.covariance_singular;
  return out;
}

Imputation matrix_completion_baseline(const PanelDataset& d, CompletionVariant v, const SolverConfig& cfg,
                                      ImputeOptions opts) {
  opts.controls = v == CompletionVariant::MC1 ? ControlUse::ignored : ControlUse::covariates;
  return impute_counterfactuals(d, cfg, opts);
}

}  // namespace tcf
