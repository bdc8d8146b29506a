#include "qpath/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <variant>

namespace qpath {
namespace io {

namespace {

using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;
using Row = std::vector<Cell>;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

void emit_csv(std::ofstream& out, const std::string& schema,
              const std::vector<std::string>& columns, const std::vector<Row>& rows) {
    out << "# schema=" << schema << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? ',' : '\n');
    for (const Row& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (const auto* d = std::get_if<double>(&row[c])) {
                if (std::isfinite(*d)) out << fmt17(*d);
            } else if (const auto* u = std::get_if<std::uint64_t>(&row[c])) {
                out << *u;
            } else if (const auto* s = std::get_if<std::string>(&row[c])) {
                out << *s;
            }
            out << (c + 1 < row.size() ? ',' : '\n');
        }
    }
}

void emit_json(std::ofstream& out, const std::string& schema,
               const std::vector<std::string>& columns, const std::vector<Row>& rows) {
    out << "{\n  \"schema\": \"" << schema << "\",\n  \"columns\": [";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << '"' << columns[c] << '"' << (c + 1 < columns.size() ? ", " : "");
    out << "],\n  \"rows\": [\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << "    [";
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            if (const auto* d = std::get_if<double>(&rows[i][c])) {
                if (std::isfinite(*d))
                    out << fmt17(*d);
                else
                    out << "null";
            } else if (const auto* u = std::get_if<std::uint64_t>(&rows[i][c])) {
                out << *u;
            } else if (const auto* s = std::get_if<std::string>(&rows[i][c])) {
                out << '"' << *s << '"';
            } else {
                out << "null";
            }
            out << (c + 1 < rows[i].size() ? ", " : "");
        }
        out << (i + 1 < rows.size() ? "],\n" : "]\n");
    }
    out << "  ]\n}\n";
}

void emit(const std::string& path, TableFormat format, const std::string& schema,
          const std::vector<std::string>& columns, const std::vector<Row>& rows) {
    auto out = open_out(path);
    if (format == TableFormat::csv)
        emit_csv(out, schema, columns, rows);
    else
        emit_json(out, schema, columns, rows);
}

}  // namespace

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

TableFormat parse_format(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "json") return TableFormat::json;
    throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

const char* extension(TableFormat format) {
    return format == TableFormat::csv ? ".csv" : ".json";
}

void write_ensemble(const std::string& path, TableFormat format,
                    const mcsim::Ensemble& ensemble,
                    const std::vector<std::uint64_t>* original_indices) {
    std::vector<Row> rows;
    for (std::size_t i = 0; i < ensemble.trajectories.size(); ++i) {
        const auto& traj = ensemble.trajectories[i];
        const std::uint64_t idx = original_indices ? (*original_indices)[i] : i;
        for (std::size_t k = 0; k < traj.times.size(); ++k) {
            Row row{idx, static_cast<std::uint64_t>(k), traj.times[k], traj.states[k].x,
                    traj.states[k].y, traj.states[k].z};
            if (k < traj.readouts.size())
                row.emplace_back(traj.readouts[k]);
            else
                row.emplace_back(std::monostate{});
            rows.push_back(std::move(row));
        }
    }
    emit(path, format, "qpath.ensemble.v1", {"traj_index", "step", "t", "x", "y", "z", "r"},
         rows);
}

void write_median(const std::string& path, TableFormat format,
                  const mcsim::MedianPath& median) {
    std::vector<Row> rows;
    for (std::size_t k = 0; k < median.times.size(); ++k) {
        Row row{median.times[k],   median.median[k].x, median.median[k].y,
                median.median[k].z, median.p40[k].x,    median.p40[k].y,
                median.p40[k].z,    median.p60[k].x,    median.p60[k].y,
                median.p60[k].z};
        if (k < median.median_readout.size())
            row.emplace_back(median.median_readout[k]);
        else
            row.emplace_back(std::monostate{});
        rows.push_back(std::move(row));
    }
    emit(path, format, "qpath.median.v1",
         {"t", "x_med", "y_med", "z_med", "x_p40", "y_p40", "z_p40", "x_p60", "y_p60",
          "z_p60", "r_med"},
         rows);
}

void write_mlp(const std::string& path, TableFormat format,
               const mlp::MostLikelyPath& mlp_path) {
    std::vector<Row> rows;
    for (std::size_t k = 0; k < mlp_path.times.size(); ++k) {
        const auto& s = mlp_path.states[k];
        rows.push_back(Row{mlp_path.times[k], s.q.x, s.q.y, s.q.z, s.p.px, s.p.py, s.p.pz,
                           mlp_path.readouts[k], mlp_path.energies[k]});
    }
    emit(path, format, "qpath.mlp.v1", {"t", "x", "y", "z", "px", "py", "pz", "r", "H"}, rows);
}

void write_profile(const std::string& path, TableFormat format,
                   const std::vector<std::pair<double, double>>& profile) {
    std::vector<Row> rows;
    for (const auto& [z_F, exp_S] : profile) rows.push_back(Row{z_F, exp_S});
    emit(path, format, "qpath.profile.v1", {"z_F", "exp_S"}, rows);
}

void write_portrait(const std::string& path, TableFormat format,
                    const std::vector<zeno::EnergyCurve>& curves) {
    std::vector<Row> rows;
    for (const auto& curve : curves) {
        const std::string branch = curve.branch == zeno::Branch::upper ? "upper" : "lower";
        for (const auto& [theta, p] : curve.samples)
            rows.push_back(Row{curve.energy, branch, theta, p});
    }
    emit(path, format, "qpath.portrait.v1", {"E", "branch", "theta", "p_theta"}, rows);
}

void write_instanton(const std::string& path, TableFormat format,
                     const std::vector<double>& thetas, const std::vector<double>& exact,
                     const std::vector<double>& approx) {
    if (thetas.size() != exact.size() || thetas.size() != approx.size())
        throw std::invalid_argument("write_instanton: length mismatch");
    std::vector<Row> rows;
    for (std::size_t i = 0; i < thetas.size(); ++i)
        rows.push_back(Row{thetas[i], exact[i], approx[i]});
    emit(path, format, "qpath.instanton.v1", {"theta", "p_exact", "p_approx"}, rows);
}

}  // namespace io
}  // namespace qpath
