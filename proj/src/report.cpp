#include "chain/report.hpp"

#include <fstream>
#include <stdexcept>

namespace chain {

using nlohmann::json;

json to_json(const GridSpec &g) {
    return {{"L", g.L}, {"nx", g.nx}, {"ell", g.ell}, {"nz", g.nz}, {"planar", g.planar}};
}

json to_json(const EnergyBreakdown &e) {
    return {{"norm_a_sq", e.norm_a_sq}, {"V1", e.V1}, {"V2", e.V2}, {"V0", e.V0}, {"log_norm_sq", e.log_norm_sq}, {"phi", e.phi}};
}

json to_json(const SolveReport &r) {
    return {{"class", r.cls},
            {"grid", to_json(r.u.grid)},
            {"energy", to_json(r.energy)},
            {"grad_norm", r.grad_norm},
            {"nehari_residual", r.nehari_residual},
            {"pde_residual", r.pde_residual},
            {"d3_fraction", r.d3_fraction},
            {"iterations", r.iterations},
            {"restart_dispersion", r.restart_dispersion},
            {"restart_phi", r.restart_phi}};
}

json kernel_summary(const KernelTable &t) {
    return {{"grid", to_json(t.grid)},
            {"patch", t.patch},
            {"calibration", t.calibration},
            {"crossover_R", t.meta.crossover_R},
            {"C_K", t.meta.C_K},
            {"sup_abs_k2_below_R", t.meta.sup_abs_k2_below_R},
            {"fit_slope", t.meta.fit_slope},
            {"fit_intercept", t.meta.fit_intercept},
            {"calibration_spread", t.meta.calibration_spread},
            {"quad_error", t.meta.quad_error}};
}

json to_json(const ScanResult &s) {
    json rows = json::array();
    for (const auto &r : s.rows)
        rows.push_back({{"ell", r.ell},
                        {"nz", r.nz},
                        {"c_r", r.c_r},
                        {"c_G", r.c_G},
                        {"two_ell_kappa", r.two_ell_kappa},
                        {"d3_radial", r.d3_radial},
                        {"d3_G", r.d3_G},
                        {"sigma_defect_G", r.sigma_defect_G},
                        {"error", r.error}});
    json j = {{"kappa", s.kappa}, {"rows", rows}};
    j["ell_star"] = s.ell_star ? json(*s.ell_star) : json(nullptr);
    return j;
}

void write_json(const json &j, const std::string &path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << '\n';
}

void write_mid_slices(const Field &u, const std::string &dir, const std::string &prefix) {
    const GridSpec &g = u.grid;
    write_slice_csv(u, 'z', g.planar ? 0 : g.nz / 2, dir + "/" + prefix + "_z.csv");
    write_slice_csv(u, 'x', g.nx / 2, dir + "/" + prefix + "_x.csv");
}

} // namespace chain
