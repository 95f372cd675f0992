#pragma once

#include <map>
#include <optional>
#include <string>

#include "idashaper/numerics.hpp"

namespace idashaper {

/// Parsed scenario file: which system to run, the desired-inertia and V_d
/// parameters, gains, simulation setup, and sampling grids. The file format
/// is a flat key-value subset of TOML ([section], key = value, # comments)
/// with `schema = 1` required.
struct Scenario {
    int schema = 1;
    std::uint64_t seed = 0;

    std::string system_name;
    std::map<std::string, double> system_params;  // per-case overrides

    // [md]
    std::optional<VectorXd> md_a;
    std::optional<VectorXd> md_b;
    double lambda = 1.0;
    std::optional<std::pair<double, double>> domain;
    std::optional<MatrixXd> md_matrix;  ///< explicit constant desired inertia M_d
    double a_offset = 0.0;

    // [vd]
    std::string vd_preset;  ///< empty -> per-system default
    double phi_c = 10.0;
    std::optional<double> beta1;
    std::optional<double> beta2;

    // [gains]
    std::optional<VectorXd> kv_diag;

    // [sim]
    std::optional<VectorXd> q0;
    std::optional<VectorXd> p0;
    double t_final = 10.0;
    double dt = 1e-3;

    // [grids]
    int grid_count = 200;
    double p_scale = 1.0;
    std::optional<VectorXd> q_min;
    std::optional<VectorXd> q_max;
};

/// Parses scenario text. Throws SchemaError on malformed input, unknown
/// keys, or a schema version other than 1.
Scenario parse_scenario(const std::string& text);

/// Reads and parses a scenario file.
Scenario load_scenario(const std::string& path);

}  // namespace idashaper
