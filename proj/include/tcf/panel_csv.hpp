#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcf/panel.hpp"

namespace tcf {

/// Which columns of a long-format file make up the panel.
struct PanelSchema {
  std::string primary_outcome;
  std::vector<std::string> control_outcomes;
  std::vector<std::string> covariates;
  std::optional<std::string> offset;
  Transform transform = Transform::log1p;
};

/// (unit, period, outcome) triple with no row in the file.
struct PanelGap {
  std::string unit_id;
  long long period = 0;
  std::string outcome_id;
};

struct LoadedPanel {
  PanelDataset data;
  std::vector<PanelGap> gaps;
};

/*
 * Long-format CSV with columns unit_id, period, outcome_id, value,
 * treated, plus the schema's covariate and offset columns. Units are
 * ordered by sorted unit_id, periods numerically. Missing triples become
 * unobserved cells and are listed in `gaps`. Rows for outcomes not named
 * in the schema are ignored.
 *
 * Covariates are per unit-period and may sit on any outcome's row; an
 * offset is per unit and must not vary across that unit's rows.
 */
LoadedPanel load_panel(std::istream& is, const PanelSchema& schema);
LoadedPanel load_panel(const std::string& path, const PanelSchema& schema);

/// Writes every recorded cell in the format load_panel reads.
void export_panel(std::ostream& os, const PanelDataset& d);
void export_panel(const std::string& path, const PanelDataset& d);

}  // namespace tcf
