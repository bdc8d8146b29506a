#pragma once

#include <string>
#include <vector>

#include "qpath/mcsim.hpp"
#include "qpath/mlp.hpp"
#include "qpath/zeno.hpp"

namespace qpath {
namespace io {

/// Shortest exact decimal form a double round-trips from: %.17g.
std::string fmt17(double v);

enum class TableFormat { csv, json };

/// "csv" or "json"; throws std::invalid_argument otherwise.
TableFormat parse_format(const std::string& name);
const char* extension(TableFormat format);

// Table emitters. CSV files start with a "# schema=..." line followed by a
// header row; the JSON variant is {"schema":..., "columns":[...], "rows":[[...]]}.
// Floats are serialized with fmt17; non-finite values become empty cells (CSV)
// or null (JSON).
void write_ensemble(const std::string& path, TableFormat format,
                    const mcsim::Ensemble& ensemble,
                    const std::vector<std::uint64_t>* original_indices = nullptr);
void write_median(const std::string& path, TableFormat format,
                  const mcsim::MedianPath& median);
void write_mlp(const std::string& path, TableFormat format,
               const mlp::MostLikelyPath& mlp_path);
void write_profile(const std::string& path, TableFormat format,
                   const std::vector<std::pair<double, double>>& profile);
void write_portrait(const std::string& path, TableFormat format,
                    const std::vector<zeno::EnergyCurve>& curves);
void write_instanton(const std::string& path, TableFormat format,
                     const std::vector<double>& thetas, const std::vector<double>& exact,
                     const std::vector<double>& approx);

}  // namespace io
}  // namespace qpath
