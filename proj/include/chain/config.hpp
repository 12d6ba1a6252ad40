#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chain/grid.hpp"
#include "chain/kernel_table.hpp"
#include "chain/solver.hpp"

namespace chain {

// Malformed, missing or unknown configuration entries.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PotentialConfig {
    std::string type = "constant";  // constant | well | zmod
    double a0 = 1.0, depth = 0.0, width = 1.0, amp = 0.0, period = 2.0;

    PotentialSpec build() const;
};

struct ScanConfig {
    std::vector<double> ells{0.5, 1.0, 2.0, 4.0, 8.0};
    double hz = 0.25;
    double margin = 1e-3;
    // Companion Newtonian-limit experiment.
    double newton_radius = 1.0;
    int newton_cells = 32;
    std::vector<double> newton_ells{2.0, 4.0, 8.0, 16.0};
};

struct ExportConfig {
    std::string field;  // field dump to slice
    char axis = 'z';
    int index = -1;     // -1: middle plane
};

struct Config {
    GridSpec grid;
    bool has_grid = false;
    PotentialConfig potential;
    SolverConfig solver;
    KernelTableOptions kernel;
    std::string kernel_table;  // optional path of a dumped table to reuse
    ScanConfig scan;
    ExportConfig export_;
    std::string verify_summary = "verify.json";
};

// Sections [domain] [potential] [solver] [kernel] [scan] [export] [verify]; key = value lines.
// Unknown sections or keys and unparsable values raise ConfigError naming the key.
Config parse_config(const std::string &text);
Config load_config(const std::string &path);

// The grid section is mandatory for commands that build tables.
const GridSpec &require_grid(const Config &c);

} // namespace chain
