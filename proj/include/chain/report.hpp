#pragma once

#include <string>

#include <json.hpp>

#include "chain/kernel_table.hpp"
#include "chain/poisson.hpp"
#include "chain/solver.hpp"

namespace chain {

nlohmann::json to_json(const GridSpec &g);
nlohmann::json to_json(const EnergyBreakdown &e);
// Report without the field samples.
nlohmann::json to_json(const SolveReport &r);
nlohmann::json kernel_summary(const KernelTable &t);
nlohmann::json to_json(const ScanResult &s);

void write_json(const nlohmann::json &j, const std::string &path);

// Mid-plane slices: x3 = 0 ("<prefix>_z.csv"; the whole plane for planar fields) and x1 nearest 0 ("<prefix>_x.csv").
void write_mid_slices(const Field &u, const std::string &dir, const std::string &prefix);

} // namespace chain
