#include "schro/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "schro/errors.hpp"
#include "schro/density.hpp"

namespace schro {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

void expect_header(std::istream& in, const std::string& expected, const char* what) {
  std::string line;
  if (!next_line(in, line)) fail(ErrorCode::io, fmt::format("{} CSV is empty", what));
  if (line != expected)
    fail(ErrorCode::io, fmt::format("{} CSV header is '{}', expected '{}'", what, line, expected));
}

std::vector<double> parse_row(const std::string& line, std::size_t columns, std::size_t row) {
  const auto cells = split_csv(line);
  if (cells.size() != columns)
    fail(ErrorCode::io, fmt::format("CSV row {} has {} columns, expected {}", row, cells.size(), columns));
  std::vector<double> v;
  v.reserve(columns);
  for (const auto& c : cells) v.push_back(parse_double(c));
  return v;
}

void dump_value(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
  const auto pad = [&](int d) {
    if (indent >= 0) {
      out += '\n';
      out.append(static_cast<std::size_t>(indent * d), ' ');
    }
  };
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "\"" + format_double(d) + "\"";
      return;
    }
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        out += nlohmann::ordered_json(it.key()).dump();
        out += indent >= 0 ? ": " : ":";
        dump_value(it.value(), indent, depth + 1, out);
      }
      pad(depth);
      out += '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        pad(depth + 1);
        dump_value(e, indent, depth + 1, out);
      }
      pad(depth);
      out += ']';
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  // from_chars also takes "infinity", "NAN" and the like; only the exact tokens above are ours
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    fail(ErrorCode::io, fmt::format("'{}' is not a number", text));
  return v;
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
  const Point& p0 = curve.front();
  const std::size_t width = p0.is_coords() ? p0.coords().size() : p0.density().size();
  const char* stem = p0.is_coords() ? "x" : "rho";
  out << 't';
  for (std::size_t j = 0; j < width; ++j) out << ',' << stem << j;
  out << '\n';
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_double(curve.time(i));
    const Point& p = curve[i];
    const auto values = p.is_coords() ? std::span<const double>(p.coords()) : p.density().rho();
    for (double v : values) out << ',' << format_double(v);
    out << '\n';
  }
}

Curve read_curve_csv(std::istream& in, const SpaceBackend& backend) {
  std::string line;
  if (!next_line(in, line)) fail(ErrorCode::io, "curve CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "t") fail(ErrorCode::io, "curve CSV header must start with 't'");
  const bool density = header[1].rfind("rho", 0) == 0;
  const auto* db = dynamic_cast<const DensityBackend*>(&backend);
  if (density != (db != nullptr))
    fail(ErrorCode::io, "curve CSV payload does not match the backend kind");
  std::vector<double> times;
  std::vector<Point> pts;
  std::size_t row = 1;
  while (next_line(in, line)) {
    auto v = parse_row(line, header.size(), ++row);
    times.push_back(v[0]);
    std::vector<double> payload(v.begin() + 1, v.end());
    if (density)
      pts.emplace_back(GridDensity(db->grid(), std::move(payload)));
    else
      pts.emplace_back(Coords(std::move(payload)));
  }
  if (pts.size() < 2) fail(ErrorCode::io, "curve CSV needs at least two rows");
  return Curve(std::move(times), std::move(pts));
}

void write_density_csv(std::ostream& out, const GridDensity& density) {
  out << "x,rho\n";
  for (std::size_t i = 0; i < density.size(); ++i)
    out << format_double(density.grid().center(i)) << ',' << format_double(density[i]) << '\n';
}

GridDensity read_density_csv(std::istream& in, const Grid& grid) {
  expect_header(in, "x,rho", "density");
  std::vector<double> rho;
  std::string line;
  std::size_t row = 1;
  while (next_line(in, line)) {
    const auto v = parse_row(line, 2, ++row);
    const std::size_t i = rho.size();
    if (i >= grid.n) fail(ErrorCode::grid_mismatch, "density CSV has more rows than the grid has cells");
    if (std::abs(v[0] - grid.center(i)) > 1e-9 * std::max(1.0, std::abs(grid.center(i))))
      fail(ErrorCode::grid_mismatch,
           fmt::format("density CSV row {}: x = {} but the grid cell center is {}", row, v[0], grid.center(i)));
    rho.push_back(v[1]);
  }
  if (rho.size() != grid.n)
    fail(ErrorCode::grid_mismatch, fmt::format("density CSV has {} rows for {} cells", rho.size(), grid.n));
  return GridDensity(grid, std::move(rho));
}

void write_profile_csv(std::ostream& out, const CostProfile& profile) {
  out << "eps,cost,kinetic,fisher,converged\n";
  for (const auto& r : profile.rows)
    out << format_double(r.eps) << ',' << format_double(r.cost) << ',' << format_double(r.kinetic) << ','
        << format_double(r.fisher) << ',' << (r.converged ? 1 : 0) << '\n';
}

std::vector<ProfileRow> read_profile_csv(std::istream& in) {
  expect_header(in, "eps,cost,kinetic,fisher,converged", "profile");
  std::vector<ProfileRow> rows;
  std::string line;
  std::size_t row = 1;
  while (next_line(in, line)) {
    const auto v = parse_row(line, 5, ++row);
    if (v[4] != 0.0 && v[4] != 1.0) fail(ErrorCode::io, fmt::format("profile CSV row {}: converged must be 0 or 1", row));
    ProfileRow r;
    r.eps = v[0];
    r.cost = v[1];
    r.kinetic = v[2];
    r.fisher = v[3];
    r.converged = v[4] == 1.0;
    rows.push_back(r);
  }
  return rows;
}

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_value(value, indent, 0, out);
  out += '\n';
  return out;
}

nlohmann::ordered_json to_json(const EviReport& r) {
  return {{"property", r.property}, {"worst_residual", r.worst_residual}, {"samples", r.samples},
          {"skipped", r.skipped},   {"tolerance", r.tolerance},           {"pass", r.pass}};
}

nlohmann::ordered_json to_json(const CostProfile& profile) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : profile.rows)
    rows.push_back({{"eps", r.eps},
                    {"cost", r.cost},
                    {"kinetic", r.kinetic},
                    {"fisher", r.fisher},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"stationarity", r.stationarity},
                    {"monotone_descent", r.monotone_descent}});
  return {{"geodesic_cost", profile.geodesic_cost}, {"rows", rows}};
}

nlohmann::ordered_json to_json(const std::vector<DerivativeResidual>& residuals) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& d : residuals)
    out.push_back({{"eps", d.eps},
                   {"quotient", d.quotient},
                   {"predicted", d.predicted},
                   {"abs_error", d.abs_error},
                   {"rel_error", d.rel_error}});
  return out;
}

nlohmann::ordered_json to_json(const TaylorReport& t) {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : t.entries)
    entries.push_back({{"eps", e.eps}, {"ratio", e.ratio}, {"upper_excess", e.upper_excess}});
  return {{"fisher0", t.fisher0},
          {"limit_estimate", t.limit_estimate},
          {"rel_error_at_smallest", t.rel_error_at_smallest},
          {"approaches_monotonically", t.approaches_monotonically},
          {"worst_upper_excess", t.worst_upper_excess},
          {"entries", entries},
          {"pass", t.pass}};
}

nlohmann::ordered_json to_json(const GammaReport& g) {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : g.entries)
    entries.push_back({{"eps", e.eps},
                       {"excess", e.excess},
                       {"rate", e.rate},
                       {"distance", e.distance},
                       {"recovery_excess", e.recovery_excess}});
  return {{"entries", entries},
          {"excess_positive_decreasing", g.excess_positive_decreasing},
          {"distance_decreasing", g.distance_decreasing},
          {"recovery_nonnegative", g.recovery_nonnegative},
          {"recovery_decreasing", g.recovery_decreasing},
          {"pass", g.pass}};
}

nlohmann::ordered_json to_json(const MollifiedProfile& m) {
  auto entries = nlohmann::ordered_json::array();
  for (const auto& e : m.entries)
    entries.push_back({{"eps", e.eps},
                       {"eta", e.eta},
                       {"entropy_x", e.entropy_x},
                       {"entropy_y", e.entropy_y},
                       {"term", e.term},
                       {"cost_gap", e.cost_gap}});
  return {{"profile", to_json(m.profile)}, {"schedule", entries}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::io, fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, fmt::format("cannot open {} for writing", path.string()));
  f << text;
  if (!f) fail(ErrorCode::io, fmt::format("write to {} failed", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace schro
