#pragma once

#include "biqm/reconstruct.hpp"

#include <string>
#include <utility>
#include <vector>

namespace biqm {

/// Real formatted with 17 significant digits, '.' decimal point, independent of locale.
std::string format_csv_real(double x);

/// Key/value rows of diagnostics.csv in fixed order.
std::vector<std::pair<std::string, std::string>> diagnostics_rows(const ReconstructionResult& result);

/// Writes potentials.csv, densities.csv, trace.csv, diagnostics.csv and, when a
/// field exists, field.csv into dir (created if missing). Returns the paths written.
std::vector<std::string> emit_csv(const ReconstructionResult& result, const std::string& dir);

}  // namespace biqm
