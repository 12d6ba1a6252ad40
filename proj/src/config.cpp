#include "chain/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace chain {

PotentialSpec PotentialConfig::build() const {
    try {
        if (type == "constant") return PotentialSpec::constant(a0);
        if (type == "well") return PotentialSpec::well(a0, depth, width);
        if (type == "zmod") return PotentialSpec::zmod(a0, amp, period);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("[potential] ") + e.what());
    }
    throw ConfigError("potential.type: unknown potential '" + type + "'");
}

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>> &schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"domain", {"L", "nx", "ell", "nz"}},
        {"potential", {"type", "a0", "depth", "width", "amp", "period"}},
        {"solver", {"class", "max_iters", "tol_g", "step0", "armijo_factor", "sufficient_decrease", "seed_amplitude",
                    "seed_width", "seed_width_z", "restarts", "perturbation", "rng_seed", "flat_restart"}},
        {"kernel", {"patch", "cell_gauss", "quad_tol", "mem_limit_mb", "table"}},
        {"scan", {"ells", "hz", "margin", "newton_radius", "newton_cells", "newton_ells"}},
        {"export", {"field", "axis", "index"}},
        {"verify", {"summary"}},
    };
    return s;
}

template <class T> T parse_value(const std::string &key, const std::string &raw) {
    std::istringstream is(raw);
    T v;
    if (!(is >> v) || !(is >> std::ws).eof()) throw ConfigError(key + ": cannot parse '" + raw + "'");
    return v;
}

template <> bool parse_value<bool>(const std::string &key, const std::string &raw) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + raw + "'");
}

std::vector<double> parse_list(const std::string &key, const std::string &raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError(key + ": empty list entry");
        out.push_back(parse_value<double>(key, item.substr(b, e - b + 1)));
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

class Section {
public:
    Section(const ptree *t, std::string name) : t_(t), name_(std::move(name)) {}

    template <class T> void get(const std::string &k, T &dst) const {
        if (const auto v = raw(k)) dst = parse_value<T>(name_ + "." + k, *v);
    }
    void list(const std::string &k, std::vector<double> &dst) const {
        if (const auto v = raw(k)) dst = parse_list(name_ + "." + k, *v);
    }
    template <class T> T required(const std::string &k) const {
        const auto v = raw(k);
        if (!v) throw ConfigError("missing required key " + name_ + "." + k);
        return parse_value<T>(name_ + "." + k, *v);
    }
    bool present() const { return t_ != nullptr; }

private:
    std::optional<std::string> raw(const std::string &k) const {
        if (!t_) return std::nullopt;
        const auto it = t_->find(k);
        if (it == t_->not_found()) return std::nullopt;
        return it->second.data();
    }
    const ptree *t_;
    std::string name_;
};

} // namespace

Config parse_config(const std::string &text) {
    ptree root;
    try {
        std::istringstream is(text);
        boost::property_tree::ini_parser::read_ini(is, root);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(std::string("config syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    for (const auto &[name, sec] : root) {
        const auto it = schema().find(name);
        if (it == schema().end()) {
            if (!sec.data().empty()) throw ConfigError("key outside any section: " + name);
            throw ConfigError("unknown section [" + name + "]");
        }
        for (const auto &[key, val] : sec) {
            if (!val.empty()) throw ConfigError("nested key not allowed: " + name + "." + key);
            if (!it->second.count(key)) throw ConfigError("unknown key " + name + "." + key);
        }
    }
    auto section = [&](const std::string &n) {
        const auto it = root.find(n);
        return Section(it == root.not_found() ? nullptr : &it->second, n);
    };
    Config c;
    const Section dom = section("domain");
    if (dom.present()) {
        c.grid.L = dom.required<double>("L");
        c.grid.nx = dom.required<int>("nx");
        c.grid.ell = dom.required<double>("ell");
        c.grid.nz = dom.required<int>("nz");
        try {
            c.grid.validate();
        } catch (const std::exception &e) {
            throw ConfigError(std::string("domain: ") + e.what());
        }
        c.has_grid = true;
    }
    const Section pot = section("potential");
    pot.get("type", c.potential.type);
    pot.get("a0", c.potential.a0);
    pot.get("depth", c.potential.depth);
    pot.get("width", c.potential.width);
    pot.get("amp", c.potential.amp);
    pot.get("period", c.potential.period);
    c.potential.build();

    const Section sol = section("solver");
    std::string cls = to_string(c.solver.cls);
    sol.get("class", cls);
    try {
        c.solver.cls = solver_class_from_string(cls);
    } catch (const std::exception &) {
        throw ConfigError("solver.class: unknown class '" + cls + "'");
    }
    sol.get("max_iters", c.solver.max_iters);
    sol.get("tol_g", c.solver.tol_g);
    sol.get("step0", c.solver.step0);
    sol.get("armijo_factor", c.solver.armijo_factor);
    sol.get("sufficient_decrease", c.solver.sufficient_decrease);
    sol.get("seed_amplitude", c.solver.seed.amplitude);
    sol.get("seed_width", c.solver.seed.width);
    sol.get("seed_width_z", c.solver.seed.width_z);
    sol.get("restarts", c.solver.seed.restarts);
    sol.get("perturbation", c.solver.seed.perturbation);
    sol.get("rng_seed", c.solver.seed.rng_seed);
    sol.get("flat_restart", c.solver.seed.flat_restart);
    try {
        c.solver.validate();
    } catch (const std::exception &e) {
        throw ConfigError(e.what());
    }

    const Section ker = section("kernel");
    ker.get("patch", c.kernel.patch);
    ker.get("cell_gauss", c.kernel.cell_gauss);
    ker.get("quad_tol", c.kernel.quad_tol);
    ker.get("mem_limit_mb", c.kernel.mem_limit_mb);
    ker.get("table", c.kernel_table);
    if (c.kernel.patch < 0) throw ConfigError("kernel.patch must be nonnegative");
    if (c.kernel.cell_gauss != 7 && c.kernel.cell_gauss != 10 && c.kernel.cell_gauss != 15 && c.kernel.cell_gauss != 20)
        throw ConfigError("kernel.cell_gauss must be one of 7, 10, 15, 20");

    const Section sc = section("scan");
    sc.list("ells", c.scan.ells);
    sc.get("hz", c.scan.hz);
    sc.get("margin", c.scan.margin);
    sc.get("newton_radius", c.scan.newton_radius);
    sc.get("newton_cells", c.scan.newton_cells);
    sc.list("newton_ells", c.scan.newton_ells);
    for (double e : c.scan.ells)
        if (!(e > 0.0)) throw ConfigError("scan.ells entries must be positive");
    if (!(c.scan.hz > 0.0)) throw ConfigError("scan.hz must be positive");

    const Section ex = section("export");
    ex.get("field", c.export_.field);
    std::string axis(1, c.export_.axis);
    ex.get("axis", axis);
    if (axis != "x" && axis != "y" && axis != "z") throw ConfigError("export.axis must be x, y or z");
    c.export_.axis = axis[0];
    ex.get("index", c.export_.index);

    section("verify").get("summary", c.verify_summary);
    return c;
}

Config load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

const GridSpec &require_grid(const Config &c) {
    if (!c.has_grid) throw ConfigError("missing required section [domain] (keys L, nx, ell, nz)");
    return c.grid;
}

} // namespace chain
