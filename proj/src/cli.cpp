#include "emulsion/cli.hpp"

#include "emulsion/block_pairs.hpp"
#include "emulsion/cache.hpp"
#include "emulsion/config.hpp"
#include "emulsion/entropy.hpp"
#include "emulsion/free_energy.hpp"
#include "emulsion/interface.hpp"
#include "emulsion/oracle.hpp"
#include "emulsion/percolation.hpp"
#include "emulsion/phases.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <tbb/global_control.h>

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

namespace emulsion {

namespace {

using nlohmann::json;

std::string num(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

class Session {
public:
    Session(RunConfig cfg, std::string cache_dir) : cfg_(std::move(cfg)), cache_(std::move(cache_dir)) {
        cfg_.interface.seed = cfg_.seed;
    }
    ~Session() {
        if (phi_) {
            try {
                cache_.save_interface(*phi_);
            } catch (...) {
            }
        }
    }

    const RunConfig& cfg() const { return cfg_; }

    const EntropyTable& kappa() {
        if (!kappa_) {
            kappa_ = std::make_unique<EntropyTable>(cache_.entropy_table(cfg_.entropy));
        }
        return *kappa_;
    }
    InterfaceTable& phi() {
        if (!phi_) {
            phi_ = std::make_unique<InterfaceTable>(cfg_.interface);
            cache_.load_interface(*phi_);
        }
        return *phi_;
    }
    const PairTables& pairs() {
        if (!pairs_) {
            pairs_ = std::make_unique<PairTables>(kappa(), phi(), cfg_.a_max);
        }
        return *pairs_;
    }
    RModel caps(double p) const {
        return estimate_r_model(p, cfg_.perc_length, cfg_.perc_samples, cfg_.seed, cfg_.perc_tol);
    }
    void flush() {
        if (phi_) {
            cache_.save_interface(*phi_);
        }
    }

    json metadata(const std::string& command) {
        json m;
        m["program"] = "emulsion";
        m["format_version"] = 1;
        m["command"] = command;
        m["config"] = cfg_.entries();
        m["config_hash"] = cfg_.hash();
        m["seed"] = cfg_.seed;
        json keys;
        if (kappa_) {
            keys["entropy_table"] = kappa_->cache_key();
        }
        if (phi_) {
            keys["interface_table"] = phi_->cache_key();
        }
        if (pairs_) {
            keys["pair_tables"] = pairs_->cache_key();
        }
        m["cache_keys"] = keys;
        return m;
    }

private:
    RunConfig cfg_;
    Cache cache_;
    std::unique_ptr<EntropyTable> kappa_;
    std::unique_ptr<InterfaceTable> phi_;
    std::unique_ptr<PairTables> pairs_;
};

json gain_json(const PairGain& g) {
    return {{"value", g.value}, {"a", g.a}, {"b", g.strategy.b}, {"c", g.strategy.c}, {"mu", g.mu},
            {"bracket_breach", g.bracket_breach}};
}

json f_json(const FreeEnergyResult& r) {
    json j;
    j["alpha"] = r.params.alpha();
    j["beta"] = r.params.beta();
    j["p"] = r.p;
    j["f"] = r.f;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["bracket_breach"] = r.bracket_breach;
    j["tolerance"] = {{"kappa", r.tolerance.kappa},
                      {"interface", r.tolerance.interface},
                      {"optimizer", r.tolerance.optimizer},
                      {"total", r.tolerance.total()}};
    for (PairKind k : kPairKinds) {
        const int i = static_cast<int>(k);
        json g = gain_json(r.gains[i]);
        g["rho"] = r.rho.rho[i];
        j["pairs"][to_string(k)] = g;
    }
    return j;
}

struct Output {
    json doc;
    std::optional<Csv> csv;
    std::string plot; // gnuplot columns
};

Output cmd_kappa(Session& s) {
    const auto& c = s.cfg();
    Output o;
    const KappaEstimate k = kappa(c.mu, c.nu, c.entropy.schedule);
    o.doc["mu"] = c.mu;
    o.doc["nu"] = c.nu;
    o.doc["kappa"] = k.value;
    o.doc["error"] = k.error;
    o.doc["L_max"] = k.L_max;
    o.doc["per_size"] = k.per_size;
    const EntropyTable& t = s.kappa();
    if (t.covers(c.mu, c.nu)) {
        o.doc["kappa_table"] = t.kappa(c.mu, c.nu);
    }
    const DiagonalSupremum d = sup_kappa_diag(t, 2.0, 1.0 + t.e_max(), 1e-10);
    o.doc["sup_kappa_diag"] = {{"a_star", d.a_star}, {"kappa_star", d.kappa_star}, {"unimodal", d.unimodal}};
    Csv csv;
    csv.header = {"nu", "mu", "kappa", "error"};
    for (int j = 0; j < t.nu_count(); ++j) {
        for (int e = 0; e < t.e_count(); ++e) {
            const EntropyNode& n = t.node(j, e);
            csv.rows.push_back({num(t.nu_at(j)), num(t.nu_at(j) + t.e_at(e)), num(n.kappa), num(n.error)});
            o.plot += num(t.nu_at(j)) + " " + num(t.nu_at(j) + t.e_at(e)) + " " + num(n.kappa) + "\n";
        }
        o.plot += "\n";
    }
    o.csv = csv;
    return o;
}

Output cmd_phi(Session& s) {
    const auto& c = s.cfg();
    const InteractionParams q(c.alpha, c.beta);
    const auto row = s.phi().row(q);
    Output o;
    o.doc["alpha"] = c.alpha;
    o.doc["beta"] = c.beta;
    o.doc["mu"] = c.mu;
    o.doc["phi"] = (*row)(c.mu);
    o.doc["phi_top"] = row->top(c.mu);
    o.doc["stderr"] = row->stderr_at(c.mu);
    o.doc["extrapolation_error"] = row->extrapolation_error();
    Csv csv;
    csv.header = {"mu", "phi", "stderr", "phi_top"};
    for (std::size_t i = 0; i < row->size(); ++i) {
        const double mu = 1.0 / row->s_at(i);
        csv.rows.push_back({num(mu), num(row->phi_nodes()[i]), num(row->stderr_nodes()[i]), num(row->top_nodes()[i])});
        o.plot += num(mu) + " " + num(row->phi_nodes()[i]) + " " + num(row->stderr_nodes()[i]) + "\n";
    }
    o.csv = csv;
    return o;
}

Output cmd_psi(Session& s) {
    const auto& c = s.cfg();
    const InteractionParams q(c.alpha, c.beta);
    Output o;
    o.doc["alpha"] = c.alpha;
    o.doc["beta"] = c.beta;
    o.doc["a"] = c.a;
    Csv csv;
    csv.header = {"pair", "psi", "b", "c"};
    for (PairKind k : kPairKinds) {
        const PsiValue v = s.pairs().psi(k, q, c.a);
        o.doc["psi"][to_string(k)] = {{"value", v.value}, {"b", v.strategy.b}, {"c", v.strategy.c}};
        csv.rows.push_back({to_string(k), num(v.value), num(v.strategy.b), num(v.strategy.c)});
    }
    o.csv = csv;
    return o;
}

Output cmd_perc(Session& s) {
    const auto& c = s.cfg();
    Output o;
    Csv csv;
    csv.header = {"p", "rho_star", "stderr", "rho_extrapolated", "stderr_extrapolated"};
    for (int i = 1; i <= 9; ++i) {
        const double p = 0.1 * i;
        const PercolationEstimate e = rho_star(p, c.perc_length, c.perc_samples, c.seed);
        csv.rows.push_back({num(p), num(e.rho_star), num(e.stderr), num(e.rho_extrapolated), num(e.stderr_extrapolated)});
        o.plot += num(p) + " " + num(e.rho_star) + " " + num(e.rho_extrapolated) + "\n";
        o.doc["sweep"].push_back({{"p", p}, {"rho_star", e.rho_star}, {"rho_extrapolated", e.rho_extrapolated}});
    }
    const PercolationEstimate e = rho_star(c.p, c.perc_length, c.perc_samples, c.seed);
    o.doc["p"] = c.p;
    o.doc["rho_star"] = e.rho_star;
    o.doc["rho_extrapolated"] = e.rho_extrapolated;
    const CriticalDensity pc = estimate_p_c(c.perc_length, c.perc_samples, c.perc_tol, c.seed);
    o.doc["p_c"] = {{"estimate", pc.p_c}, {"bracket", {pc.bracket_lo, pc.bracket_hi}}, {"evaluations", pc.evaluations}};
    o.csv = csv;
    return o;
}

Output cmd_free_energy(Session& s) {
    const auto& c = s.cfg();
    const RModel caps = s.caps(c.p);
    Output o;
    const FreeEnergyResult r = evaluate_f(InteractionParams(c.alpha, c.beta), c.p, s.pairs(), caps, c.f_tol);
    o.doc = f_json(r);
    o.doc["caps"] = {{"rho_A", caps.rho_A}, {"rho_B", caps.rho_B}};
    return o;
}

Output cmd_curve(Session& s) {
    const auto& c = s.cfg();
    Output o;
    const CriticalCurve cc = trace_critical_curve(c.curve_alphas, c.p, c.curve_tol, s.phi());
    o.doc["p"] = c.p;
    o.doc["alpha_star"] = cc.alpha_star;
    o.doc["slope_right"] = cc.slope_right;
    o.doc["slope_discontinuity_detected"] = cc.slope_discontinuity_detected;
    o.doc["beta_star_empirical"] = 0.0;
    Csv csv;
    csv.header = {"alpha", "beta_c"};
    double bstar = 0.0;
    for (const auto& [a, b] : cc.samples) {
        csv.rows.push_back({num(a), num(b)});
        o.plot += num(a) + " " + num(b) + "\n";
        o.doc["samples"].push_back({a, b});
        bstar = std::max(bstar, b);
    }
    o.doc["beta_star_empirical"] = bstar;
    o.csv = csv;
    return o;
}

Output cmd_phase_diagram(Session& s) {
    const auto& c = s.cfg();
    const RModel caps = s.caps(c.p);
    const bool super = caps.rho_A >= 1.0;
    const PhaseGrid grid{c.grid_step, c.grid_columns, c.grid_first_column, c.grid_row_min, c.grid_row_max};
    const PhaseDiagram d = phase_diagram(c.p, super, grid, s.pairs(), caps);
    Output o;
    o.doc["p"] = c.p;
    o.doc["supercritical"] = super;
    o.doc["caps"] = {{"rho_A", caps.rho_A}, {"rho_B", caps.rho_B}};
    o.doc["labels"] = super ? "D/L from the interface criterion" : "D1/D2/L1/L2 from optimizer structure (interpretation)";
    o.doc["regions"] = d.regions;
    o.doc["regions_by_label"] = d.regions_by_label;
    o.doc["label_disagreements"] = d.label_disagreements;
    for (const BoundaryCurve& bc : d.curves) {
        json pts = json::array();
        for (const auto& [a, b] : bc.points) {
            pts.push_back({a, b});
        }
        o.doc["curves"].push_back({{"kind", bc.kind}, {"points", pts}});
    }
    o.doc["junctions"] = json::array();
    for (const TriplePoint& t : d.junctions) {
        json labs = json::array();
        for (Phase l : t.labels) {
            labs.push_back(to_string(l));
        }
        o.doc["junctions"].push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"error", t.error}, {"labels", labs}});
    }
    Csv csv;
    csv.header = {"alpha", "beta", "p", "f", "label", "S_excess"};
    int col = -1;
    for (const PhasePoint& pt : d.points) {
        csv.rows.push_back({num(pt.params.alpha()), num(pt.params.beta()), num(pt.p), num(pt.f), to_string(pt.label),
                            num(pt.S_excess)});
        const int i = static_cast<int>(std::lround(pt.params.alpha() / c.grid_step));
        if (col >= 0 && i != col) {
            o.plot += "\n";
        }
        col = i;
        o.plot += num(pt.params.alpha()) + " " + num(pt.params.beta()) + " " + num(pt.f) + " " +
                  std::to_string(static_cast<int>(pt.label)) + "\n";
    }
    o.csv = csv;
    return o;
}

Output cmd_oracle_check(Session& s) {
    const auto& c = s.cfg();
    const RModel caps = s.caps(c.p);
    Output o;
    Csv csv;
    csv.header = {"alpha", "beta", "p", "L", "n", "f_variational", "f_oracle", "stderr", "gap"};
    const std::vector<std::pair<double, double>> pts{{0.0, 0.0}, {c.alpha, c.beta}};
    for (const auto& [a, b] : pts) {
        const InteractionParams q(a, b);
        const double fv = evaluate_f(q, c.p, s.pairs(), caps, c.f_tol).f;
        const OracleResult r = quenched_f_mc(q, c.p, c.oracle_n, c.oracle_L, c.oracle_samples, c.seed);
        csv.rows.push_back({num(a), num(b), num(c.p), std::to_string(c.oracle_L), std::to_string(c.oracle_n), num(fv),
                            num(r.mean), num(r.stderr), num(fv - r.mean)});
        o.doc["points"].push_back({{"alpha", a}, {"beta", b}, {"f_variational", fv}, {"f_oracle", r.mean},
                                   {"stderr", r.stderr}, {"gap", fv - r.mean}});
    }
    o.csv = csv;
    return o;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
}

std::string render_csv(const Csv& csv, const json& meta) {
    std::string s;
    s += "# config_hash=" + meta["config_hash"].get<std::string>() + "\n";
    s += "# command=" + meta["command"].get<std::string>() + "\n";
    for (const auto& [k, v] : meta["config"].items()) {
        s += "# " + k + "=" + v.get<std::string>() + "\n";
    }
    for (const auto& [k, v] : meta["cache_keys"].items()) {
        s += "# cache_key." + k + "=" + v.get<std::string>() + "\n";
    }
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
        s += (i ? "," : "") + csv.header[i];
    }
    s += "\n";
    for (const auto& r : csv.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            s += (i ? "," : "") + r[i];
        }
        s += "\n";
    }
    return s;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Directed copolymer in a random emulsion: free energy and phase diagrams"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_prefix;
    std::string cache_dir;
    std::optional<long> seed;
    int threads = 0;
    bool plot = false;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", out_prefix, "output prefix: writes PREFIX.json and PREFIX.csv");
    app.add_option("--cache-dir", cache_dir, "directory for table caches");
    app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--threads", threads, "worker threads (default from config)");
    app.add_flag("--emit-plot-data", plot, "also write PREFIX.dat with gnuplot columns");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"kappa", "crossing entropy at (mu, nu) and the tabulated surface"},
        {"phi", "interface free energy row at (alpha, beta)"},
        {"psi", "block-pair free energies at (alpha, beta, a)"},
        {"perc", "percolation density sweep and critical density"},
        {"free-energy", "quenched free energy at (alpha, beta, p)"},
        {"curve", "supercritical critical curve"},
        {"phase-diagram", "labelled phase diagram at p"},
        {"oracle-check", "variational value against finite-size Monte Carlo"},
    };
    std::map<std::string, std::vector<std::string>> assignments;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("assignments", assignments[name], "key=value overrides");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int rc = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return rc;
    }
    std::string command;
    for (const auto& [name, help] : commands) {
        if (app.got_subcommand(name)) {
            command = name;
        }
    }
    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const std::string& a : assignments[command]) {
            const auto eq = a.find('=');
            if (eq == std::string::npos) {
                throw config_error("argument '" + a + "': expected key=value");
            }
            try {
                cfg.set(a.substr(0, eq), a.substr(eq + 1));
            } catch (const config_error& e) {
                throw config_error(std::string("command line: ") + e.what());
            }
        }
        if (seed) {
            cfg.set("seed", std::to_string(*seed));
        }
        if (threads > 0) {
            cfg.threads = threads;
        }
        cfg.validate();
        tbb::global_control gc(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(cfg.threads));

        Session s(cfg, cache_dir);
        Output o;
        if (command == "kappa") {
            o = cmd_kappa(s);
        } else if (command == "phi") {
            o = cmd_phi(s);
        } else if (command == "psi") {
            o = cmd_psi(s);
        } else if (command == "perc") {
            o = cmd_perc(s);
        } else if (command == "free-energy") {
            o = cmd_free_energy(s);
        } else if (command == "curve") {
            o = cmd_curve(s);
        } else if (command == "phase-diagram") {
            o = cmd_phase_diagram(s);
        } else {
            o = cmd_oracle_check(s);
        }
        s.flush();
        json doc;
        doc["metadata"] = s.metadata(command);
        doc["result"] = o.doc;
        const std::string text = doc.dump(2) + "\n";
        if (out_prefix.empty()) {
            out << text;
        } else {
            write_file(out_prefix + ".json", text);
            if (o.csv) {
                write_file(out_prefix + ".csv", render_csv(*o.csv, doc["metadata"]));
            }
            if (plot) {
                write_file(out_prefix + ".dat", "# " + command + " config_hash=" + cfg.hash() + "\n" + o.plot);
            }
        }
        return 0;
    } catch (const config_error& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace emulsion
