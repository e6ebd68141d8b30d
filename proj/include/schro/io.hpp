#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "schro/analysis.hpp"
#include "schro/backend.hpp"
#include "schro/curve.hpp"
#include "schro/point.hpp"
#include "schro/regularizer.hpp"
#include "schro/verify.hpp"

namespace schro {

/// 17 significant digits ("%.17g"); non-finite values print as inf, -inf, nan.
std::string format_double(double v);

/// Parses what format_double prints. Throws Io on anything else.
double parse_double(const std::string& text);

/// Header `t,<payload>`: x0,x1,... for coordinates, rho0,rho1,... for densities.
void write_curve_csv(std::ostream& out, const Curve& curve);
/// Inverse of write_curve_csv; densities are placed on `backend`'s grid.
Curve read_curve_csv(std::istream& in, const SpaceBackend& backend);

/// Header `x,rho`, one row per cell center.
void write_density_csv(std::ostream& out, const GridDensity& density);
/// Cell centers must match `grid` (GridMismatch otherwise); the values are
/// renormalized, which leaves already normalized input unchanged.
GridDensity read_density_csv(std::istream& in, const Grid& grid);

/// Header `eps,cost,kinetic,fisher,converged`.
void write_profile_csv(std::ostream& out, const CostProfile& profile);
/// Rows without minimizers.
std::vector<ProfileRow> read_profile_csv(std::istream& in);

/// JSON text with every float printed by format_double (non-finite floats
/// become the strings "inf", "-inf", "nan"); keys keep insertion order.
std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

nlohmann::ordered_json to_json(const EviReport& report);
nlohmann::ordered_json to_json(const CostProfile& profile);
nlohmann::ordered_json to_json(const std::vector<DerivativeResidual>& residuals);
nlohmann::ordered_json to_json(const TaylorReport& report);
nlohmann::ordered_json to_json(const GammaReport& report);
nlohmann::ordered_json to_json(const MollifiedProfile& profile);

/// Writes `text` to `path` (parent directories created). Throws Io.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace schro
