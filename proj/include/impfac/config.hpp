#pragma once

#include <json.hpp>

#include "impfac/heat.hpp"

namespace impfac {

// Parsed and validated run description. `raw` holds the normalized document
// (defaults materialized, deterministic key order) so a round trip through
// serialization reproduces the same settings.
struct RunConfig {
    int schema = 1;
    std::uint64_t seed = 0;
    ImpulsiveSystem system;
    ProjectionSubspace subspace;
    Vec target;
    Vec alphas;
    QuadratureRule quadrature;
    Nonlinearity nonlinearity;
    PicardConfig picard;
    std::string output_path;
    nlohmann::ordered_json raw;
};

RunConfig parse_config(const nlohmann::ordered_json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Concrete nonlinearity families the config can name.
Nonlinearity make_bounded_nonlinearity(std::size_t dim, double amplitude, double state_gain,
                                       std::size_t forcing_mode, std::size_t sense_mode,
                                       std::size_t output_mode);
Nonlinearity make_linear_growth_nonlinearity(double d_coef, double g_bound);

}  // namespace impfac
