#include "tcf/panel_csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

#include "tcf/csv.hpp"
#include "tcf/error.hpp"

namespace tcf {

namespace {

const char* const kRequired[] = {"unit_id", "period", "outcome_id", "value", "treated"};

struct CellRecord {
  double value = 0.0;
  bool treated = false;
  long line = 0;
};

// A value that may be given on several rows but must agree.
struct Agreed {
  double value = std::numeric_limits<double>::quiet_NaN();
  long line = 0;

  void set(double v, long at, const std::string& what) {
    if (line != 0 && v != value) {
      throw InputError("panel csv line " + std::to_string(at) + ": " + what + " disagrees with line " +
                       std::to_string(line));
    }
    value = v;
    line = at;
  }
};

}  // namespace

LoadedPanel load_panel(std::istream& is, const PanelSchema& schema) {
  if (schema.primary_outcome.empty()) throw InputError("panel: no primary outcome named");
  const CsvTable table = read_csv(is);
  std::map<std::string, int> col;
  for (const char* name : kRequired) {
    col[name] = table.column(name);
    if (col[name] < 0) throw InputError(std::string("panel csv: missing column '") + name + "'");
  }
  std::vector<int> cov_col;
  for (const std::string& c : schema.covariates) {
    cov_col.push_back(table.column(c));
    if (cov_col.back() < 0) throw InputError("panel csv: missing covariate column '" + c + "'");
  }
  int offset_col = -1;
  if (schema.offset) {
    offset_col = table.column(*schema.offset);
    if (offset_col < 0) throw InputError("panel csv: missing offset column '" + *schema.offset + "'");
  }

  std::vector<std::string> outcomes{schema.primary_outcome};
  outcomes.insert(outcomes.end(), schema.control_outcomes.begin(), schema.control_outcomes.end());
  std::map<std::string, std::size_t> outcome_index;
  for (std::size_t k = 0; k < outcomes.size(); ++k) outcome_index[outcomes[k]] = k;

  std::map<std::tuple<std::string, long long, std::size_t>, CellRecord> cells;
  std::set<std::string> units;
  std::set<long long> periods;
  std::map<std::pair<std::string, long long>, std::vector<Agreed>> covs;
  std::map<std::string, Agreed> offsets;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const long line = static_cast<long>(r) + 2;
    const std::string where = "panel csv line " + std::to_string(line);
    const auto it = outcome_index.find(row[static_cast<std::size_t>(col["outcome_id"])]);
    if (it == outcome_index.end()) continue;
    const std::string& unit = row[static_cast<std::size_t>(col["unit_id"])];
    if (unit.empty()) throw InputError(where + ": empty unit_id");
    const long long period = parse_integer(row[static_cast<std::size_t>(col["period"])], where + ": period");
    const double value = parse_double(row[static_cast<std::size_t>(col["value"])], where + ": value");
    if (!std::isfinite(value)) throw InputError(where + ": value must be a finite number");
    if (value < 0.0 && schema.transform == Transform::log1p) {
      throw InputError(where + ": negative value cannot be log-transformed");
    }
    const std::string& tr = row[static_cast<std::size_t>(col["treated"])];
    if (tr != "0" && tr != "1") throw InputError(where + ": treated must be 0 or 1");

    const auto key = std::make_tuple(unit, period, it->second);
    if (const auto prev = cells.find(key); prev != cells.end()) {
      throw InputError(where + ": duplicate (" + unit + ", " + std::to_string(period) + ", " + it->first +
                       ") also on line " + std::to_string(prev->second.line));
    }
    cells[key] = {value, tr == "1", line};
    units.insert(unit);
    periods.insert(period);

    auto& cv = covs[{unit, period}];
    cv.resize(cov_col.size());
    for (std::size_t p = 0; p < cov_col.size(); ++p) {
      const std::string& f = row[static_cast<std::size_t>(cov_col[p])];
      if (f.empty()) continue;
      cv[p].set(parse_double(f, where + ": " + schema.covariates[p]), line, "covariate " + schema.covariates[p]);
    }
    if (offset_col >= 0) {
      const std::string& f = row[static_cast<std::size_t>(offset_col)];
      if (!f.empty()) offsets[unit].set(parse_double(f, where + ": offset"), line, "offset of unit " + unit);
    }
  }

  const std::vector<std::string> unit_list(units.begin(), units.end());
  const std::vector<long long> period_list(periods.begin(), periods.end());
  const auto n = static_cast<Eigen::Index>(unit_list.size()), t = static_cast<Eigen::Index>(period_list.size());
  if (n == 0) throw InputError("panel csv: no rows for the requested outcomes");

  LoadedPanel out;
  PanelDataset& d = out.data;
  d.outcome_name = schema.primary_outcome;
  d.unit_ids = unit_list;
  d.periods = period_list;
  d.transform = schema.transform;
  d.covariate_names = schema.covariates;
  d.y_obs = Matrix::Constant(n, t, std::numeric_limits<double>::quiet_NaN());
  d.w = Mask::Constant(n, t, false);
  for (std::size_t k = 1; k < outcomes.size(); ++k)
    d.controls.push_back({outcomes[k], Matrix::Zero(n, t), Mask::Constant(n, t, true)});

  Mask y_rec = Mask::Constant(n, t, false);
  bool any_primary = false;
  for (Eigen::Index j = 0; j < t; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto found = cells.find({unit_list[static_cast<std::size_t>(i)], period_list[static_cast<std::size_t>(j)], k});
        if (found == cells.end()) {
          out.gaps.push_back({unit_list[static_cast<std::size_t>(i)], period_list[static_cast<std::size_t>(j)], outcomes[k]});
          if (k > 0) (*d.controls[k - 1].observed)(i, j) = false;
          continue;
        }
        if (k == 0) {
          any_primary = true;
          d.y_obs(i, j) = found->second.value;
          d.w(i, j) = found->second.treated;
          y_rec(i, j) = true;
        } else {
          d.controls[k - 1].values(i, j) = found->second.value;
        }
      }
  if (!any_primary) throw InputError("panel csv: no rows for primary outcome '" + schema.primary_outcome + "'");
  if (y_rec.count() != n * t) d.y_observed = y_rec;
  for (ControlOutcome& c : d.controls)
    if (c.observed->count() == n * t) c.observed.reset();

  for (std::size_t p = 0; p < schema.covariates.size(); ++p) {
    Matrix m(n, t);
    for (Eigen::Index j = 0; j < t; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto found = covs.find({unit_list[static_cast<std::size_t>(i)], period_list[static_cast<std::size_t>(j)]});
        if (found == covs.end() || found->second[p].line == 0) {
          throw InputError("panel csv: covariate '" + schema.covariates[p] + "' missing for unit " +
                           unit_list[static_cast<std::size_t>(i)] + ", period " +
                           std::to_string(period_list[static_cast<std::size_t>(j)]));
        }
        m(i, j) = found->second[p].value;
      }
    d.covariates.push_back(std::move(m));
  }
  if (schema.offset) {
    Vector off(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto found = offsets.find(unit_list[static_cast<std::size_t>(i)]);
      if (found == offsets.end()) {
        throw InputError("panel csv: offset missing for unit " + unit_list[static_cast<std::size_t>(i)]);
      }
      off(i) = found->second.value;
    }
    d.offsets = off;
  }
  d.validate();
  return out;
}

LoadedPanel load_panel(const std::string& path, const PanelSchema& schema) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open panel file '" + path + "'");
  return load_panel(is, schema);
}

void export_panel(std::ostream& os, const PanelDataset& d) {
  d.validate();
  const Eigen::Index n = d.N(), t = d.T();
  std::vector<std::string> units = d.unit_ids;
  if (units.empty()) {
    // Zero-padded so that sorted order is the row order.
    const std::size_t width = std::to_string(n).size();
    for (Eigen::Index i = 0; i < n; ++i) {
      std::string id = std::to_string(i + 1);
      units.push_back("u" + std::string(width - id.size(), '0') + id);
    }
  }
  std::vector<long long> periods = d.periods;
  if (periods.empty())
    for (Eigen::Index j = 0; j < t; ++j) periods.push_back(j + 1);

  CsvTable table;
  table.header = {"unit_id", "period", "outcome_id", "value", "treated"};
  std::vector<std::string> cov_names;
  for (std::size_t p = 0; p < d.covariates.size(); ++p)
    cov_names.push_back(p < d.covariate_names.size() ? d.covariate_names[p] : "x" + std::to_string(p + 1));
  table.header.insert(table.header.end(), cov_names.begin(), cov_names.end());
  if (d.offsets) table.header.push_back("offset");

  auto add = [&](Eigen::Index i, Eigen::Index j, const std::string& outcome, double value, bool treated) {
    std::vector<std::string> row{units[static_cast<std::size_t>(i)], std::to_string(periods[static_cast<std::size_t>(j)]),
                                 outcome, format_double(value), treated ? "1" : "0"};
    for (const Matrix& c : d.covariates) row.push_back(format_double(c(i, j)));
    if (d.offsets) row.push_back(format_double((*d.offsets)(i)));
    table.add_row(std::move(row));
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < t; ++j) {
      if (d.y_is_observed(i, j)) add(i, j, d.outcome_name, d.y_obs(i, j), d.w(i, j));
      for (std::size_t k = 0; k < d.controls.size(); ++k)
        if (d.control_mask(k)(i, j)) add(i, j, d.controls[k].name, d.controls[k].values(i, j), false);
    }
  table.write(os);
}

void export_panel(const std::string& path, const PanelDataset& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  export_panel(os, d);
}

}  // namespace tcf
