#include "emulsion/config.hpp"

#include "emulsion/cache.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace emulsion {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) {
        throw config_error(key + ": expected a number, got '" + v + "'");
    }
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
        throw config_error(key + ": expected an integer, got '" + v + "'");
    }
    return x;
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& v, F conv) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(static_cast<T>(conv(key, trim(item))));
    }
    if (out.empty()) {
        throw config_error(key + ": empty list");
    }
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

template <class T>
std::string fmt_list(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) {
            s += ',';
        }
        if constexpr (std::is_floating_point_v<T>) {
            s += fmt(v[i]);
        } else {
            s += std::to_string(v[i]);
        }
    }
    return s;
}

void positive(const std::string& key, double x) {
    if (!(x > 0.0)) {
        throw config_error(key + ": must be positive");
    }
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "schema_version") {
        schema_version = static_cast<int>(to_long(key, v));
    } else if (key == "seed") {
        const long s = to_long(key, v);
        if (s < 0) {
            throw config_error("seed: must be non-negative");
        }
        seed = static_cast<std::uint64_t>(s);
    } else if (key == "threads") {
        threads = static_cast<int>(to_long(key, v));
    } else if (key == "entropy.schedule") {
        entropy.schedule = to_list<int>(key, v, to_long);
    } else if (key == "entropy.nu_nodes") {
        entropy.nu_nodes = static_cast<int>(to_long(key, v));
    } else if (key == "entropy.e_max") {
        entropy.e_max = to_double(key, v);
    } else if (key == "interface.m_schedule") {
        interface.m_schedule = to_list<long>(key, v, to_long);
    } else if (key == "interface.samples") {
        interface.samples = static_cast<int>(to_long(key, v));
    } else if (key == "interface.mu_max") {
        interface.mu_max = to_double(key, v);
    } else if (key == "interface.rule") {
        try {
            interface.rule = edge_rule_from_string(v);
        } catch (const std::exception& e) {
            throw config_error(key + ": " + e.what());
        }
    } else if (key == "pairs.a_max") {
        a_max = to_double(key, v);
    } else if (key == "percolation.length") {
        perc_length = to_long(key, v);
    } else if (key == "percolation.samples") {
        perc_samples = static_cast<int>(to_long(key, v));
    } else if (key == "percolation.tol") {
        perc_tol = to_double(key, v);
    } else if (key == "f.tol") {
        f_tol = to_double(key, v);
    } else if (key == "curve.tol") {
        curve_tol = to_double(key, v);
    } else if (key == "curve.alphas") {
        curve_alphas = to_list<double>(key, v, to_double);
    } else if (key == "probe.deltas") {
        probe_deltas = to_list<double>(key, v, to_double);
    } else if (key == "grid.step") {
        grid_step = to_double(key, v);
    } else if (key == "grid.columns") {
        grid_columns = static_cast<int>(to_long(key, v));
    } else if (key == "grid.first_column") {
        grid_first_column = static_cast<int>(to_long(key, v));
    } else if (key == "grid.row_min") {
        grid_row_min = static_cast<int>(to_long(key, v));
    } else if (key == "grid.row_max") {
        grid_row_max = static_cast<int>(to_long(key, v));
    } else if (key == "p") {
        p = to_double(key, v);
    } else if (key == "alpha") {
        alpha = to_double(key, v);
    } else if (key == "beta") {
        beta = to_double(key, v);
    } else if (key == "mu") {
        mu = to_double(key, v);
    } else if (key == "nu") {
        nu = to_double(key, v);
    } else if (key == "a") {
        a = to_double(key, v);
    } else if (key == "oracle.L") {
        oracle_L = static_cast<int>(to_long(key, v));
    } else if (key == "oracle.n") {
        oracle_n = to_long(key, v);
    } else if (key == "oracle.samples") {
        oracle_samples = static_cast<int>(to_long(key, v));
    } else {
        throw config_error("unknown key '" + key + "'");
    }
}

void RunConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw config_error("schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                           std::to_string(schema_version));
    }
    if (threads < 1) {
        throw config_error("threads: must be at least 1");
    }
    try {
        interface.validate();
    } catch (const std::exception& e) {
        throw config_error(std::string("interface: ") + e.what());
    }
    for (int L : entropy.schedule) {
        if (L < 2) {
            throw config_error("entropy.schedule: block sizes must be at least 2");
        }
    }
    if (entropy.nu_nodes < 2) {
        throw config_error("entropy.nu_nodes: must be at least 2");
    }
    positive("entropy.e_max", entropy.e_max - 1.0);
    positive("pairs.a_max", a_max - 2.0);
    positive("percolation.length", static_cast<double>(perc_length));
    positive("percolation.samples", perc_samples);
    positive("percolation.tol", perc_tol);
    positive("f.tol", f_tol);
    positive("curve.tol", curve_tol);
    positive("grid.step", grid_step);
    positive("grid.columns", grid_columns);
    if (grid_first_column < 0 || grid_first_column >= grid_columns || grid_row_min > grid_row_max) {
        throw config_error("grid: window is empty");
    }
    for (double d : probe_deltas) {
        positive("probe.deltas", d);
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw config_error("p: must lie in (0,1)");
    }
    positive("oracle.L", oracle_L - 1);
    positive("oracle.samples", oracle_samples);
}

std::map<std::string, std::string> RunConfig::entries() const {
    return {
        {"schema_version", std::to_string(schema_version)},
        {"seed", std::to_string(seed)},
        {"entropy.schedule", fmt_list(entropy.schedule)},
        {"entropy.nu_nodes", std::to_string(entropy.nu_nodes)},
        {"entropy.e_max", fmt(entropy.e_max)},
        {"interface.m_schedule", fmt_list(interface.m_schedule)},
        {"interface.samples", std::to_string(interface.samples)},
        {"interface.mu_max", fmt(interface.mu_max)},
        {"interface.rule", to_string(interface.rule)},
        {"pairs.a_max", fmt(a_max)},
        {"percolation.length", std::to_string(perc_length)},
        {"percolation.samples", std::to_string(perc_samples)},
        {"percolation.tol", fmt(perc_tol)},
        {"f.tol", fmt(f_tol)},
        {"curve.tol", fmt(curve_tol)},
        {"curve.alphas", fmt_list(curve_alphas)},
        {"probe.deltas", fmt_list(probe_deltas)},
        {"grid.step", fmt(grid_step)},
        {"grid.columns", std::to_string(grid_columns)},
        {"grid.first_column", std::to_string(grid_first_column)},
        {"grid.row_min", std::to_string(grid_row_min)},
        {"grid.row_max", std::to_string(grid_row_max)},
        {"p", fmt(p)},
        {"alpha", fmt(alpha)},
        {"beta", fmt(beta)},
        {"mu", fmt(mu)},
        {"nu", fmt(nu)},
        {"a", fmt(a)},
        {"oracle.L", std::to_string(oracle_L)},
        {"oracle.n", std::to_string(oracle_n)},
        {"oracle.samples", std::to_string(oracle_samples)},
    };
}

std::string RunConfig::canonical() const {
    std::string s;
    for (const auto& [k, v] : entries()) {
        s += k + "=" + v + "\n";
    }
    return s;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()); }

RunConfig parse_config(const std::string& text, const std::string& source) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    bool saw_schema = false;
    std::map<std::string, int> lines;
    while (std::getline(in, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error(source + ":" + std::to_string(n) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        try {
            c.set(key, line.substr(eq + 1));
        } catch (const config_error& e) {
            throw config_error(source + ":" + std::to_string(n) + ": " + e.what());
        }
        saw_schema = saw_schema || key == "schema_version";
        lines[key] = n;
    }
    if (!saw_schema) {
        throw config_error(source + ": missing schema_version");
    }
    try {
        c.validate();
    } catch (const config_error& e) {
        const std::string msg = e.what();
        const auto it = lines.find(msg.substr(0, msg.find(':')));
        if (it != lines.end()) {
            throw config_error(source + ":" + std::to_string(it->second) + ": " + msg);
        }
        throw config_error(source + ": " + msg);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error(path + ": cannot open");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

} // namespace emulsion
