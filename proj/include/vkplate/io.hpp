#pragma once

// CSV (ledger, Korn table) and legacy VTK export.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vkplate/energy.hpp"
#include "vkplate/errors.hpp"
#include "vkplate/grid.hpp"
#include "vkplate/korn.hpp"

namespace vkplate {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const char* kLedgerHeader = "t,elastic,visc_diss_cum,cpl_work_cum,ext_work_cum,balance_residual,min_mu";
inline const char* kKornHeader = "h,lambda_min,constant,pair_slope";

/// 17 significant digits.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

template <class Row>
void write_row(std::ostream& out, const Row& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  out << '\n';
}

}  // namespace detail

inline std::string ledger_csv(const EnergyLedger& ledger) {
  std::ostringstream out;
  out << kLedgerHeader << '\n';
  for (const LedgerRow& r : ledger) {
    detail::write_row(out, std::vector<double>{r.t, r.elastic, r.visc_diss_cum, r.cpl_work_cum, r.ext_work_cum,
                                               r.balance_residual, r.min_mu});
  }
  return out.str();
}

inline std::string korn_csv(const KornStudy& study) {
  std::ostringstream out;
  out << kKornHeader << '\n';
  for (const KornRow& r : study.rows) {
    detail::write_row(out, std::vector<double>{r.h, r.lambda_min, r.constant, r.pair_slope});
  }
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = detail::open_for_write(path);
  out << text;
  detail::finish(out, path);
}

inline void export_csv(const EnergyLedger& ledger, const std::string& path) { write_text(path, ledger_csv(ledger)); }
inline void export_csv(const KornStudy& study, const std::string& path) { write_text(path, korn_csv(study)); }

/// Parsed CSV: header names plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first) {
      table.header = cells;
      first = false;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                    " fields");
    }
    std::vector<double> row;
    for (const std::string& c : cells) {
      double x = 0.0;
      if (c == "nan" || c == "-nan") {
        x = std::nan("");
      } else {
        const auto res = std::from_chars(c.data(), c.data() + c.size(), x);
        if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
          throw IoError("CSV line " + std::to_string(line_no) + ": bad number '" + c + "'");
        }
      }
      row.push_back(x);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

inline std::string state_vtk(const PlateMesh& mesh, const PlateState& s) {
  if (!s.conforms_to(mesh)) throw ValidationError("state does not match the mesh");
  const Grid2D& g = mesh.grid;
  const int nn = g.num_nodes();
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "vkplate state t=" << format_double(s.t) << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_GRID\n";
  out << "DIMENSIONS " << g.nx + 1 << ' ' << g.ny + 1 << " 1\n";
  out << "POINTS " << nn << " double\n";
  for (int n = 0; n < nn; ++n) {
    const Eigen::Vector2d x = g.node_xy(n);
    out << format_double(x[0]) << ' ' << format_double(x[1]) << " 0\n";
  }
  out << "POINT_DATA " << nn << "\n";
  out << "VECTORS u double\n";
  for (int n = 0; n < nn; ++n) {
    out << format_double(s.u[DofLayout::u_dof(n, 0)]) << ' ' << format_double(s.u[DofLayout::u_dof(n, 1)]) << " 0\n";
  }
  out << "SCALARS v double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) out << format_double(s.v[DofLayout::v_dof(n, 0)]) << '\n';
  out << "SCALARS mu double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < nn; ++n) out << format_double(s.mu[n]) << '\n';
  return out.str();
}

inline void export_vtk(const PlateMesh& mesh, const PlateState& s, const std::string& path) {
  write_text(path, state_vtk(mesh, s));
}

}  // namespace vkplate
