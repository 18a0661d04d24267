#include "emulsion/block_pairs.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace emulsion {

const char* to_string(PairKind k) {
    switch (k) {
    case PairKind::AA:
        return "AA";
    case PairKind::AB:
        return "AB";
    case PairKind::BA:
        return "BA";
    case PairKind::BB:
        return "BB";
    }
    return "?";
}

PairTables::PairTables(const EntropyTable& kappa, const InterfaceTable& phi, double a_max)
    : kappa_(kappa), phi_(phi), a_max_(a_max) {
    if (!(a_max > 2.0)) {
        throw std::invalid_argument("pair a_max must exceed 2");
    }
}

std::string PairTables::cache_key() const {
    std::ostringstream s;
    s << kappa_.cache_key() << "||" << phi_.cache_key() << "||a_max=" << a_max_;
    return s.str();
}

double PairTables::crossing_entropy(double d, double nu) const {
    const double e = d - nu;
    if (nu < 0.0 || nu > kappa_.nu_max() + 1e-12 || e < 1.0 - 1e-12 || e > kappa_.e_max() + 1e-12) {
        std::ostringstream s;
        s << "crossing entropy requested at (d=" << d << ", nu=" << nu << ") outside the entropy table; extend nu to "
          << nu << " or e_max to " << e;
        throw coverage_error(s.str());
    }
    const double nu0 = kappa_.nu_min();
    if (nu >= nu0) {
        return d * kappa_.kappa(d, nu);
    }
    const double d0 = nu0 + e;
    return (nu / nu0) * d0 * kappa_.kappa(d0, nu0);
}

CrossingGain PairTables::crossing_gain(double nu, double lambda) const {
    const double e_hi = std::min(kappa_.e_max(), a_max_ - nu);
    if (e_hi < 1.0) {
        throw coverage_error("pair bracket a_max too small for a crossing of width " + std::to_string(nu));
    }
    auto f = [&](double e) { return crossing_entropy(nu + e, nu) - lambda * (nu + e); };
    const Maximum m = maximize_unimodal(f, 1.0, e_hi);
    CrossingGain g;
    g.value = m.value;
    g.d = nu + m.x;
    g.bracket_breach = m.x >= e_hi - 1e-6 && e_hi > 1.0;
    return g;
}

double PairTables::bulk(PairKind kind, const InteractionParams& params) {
    return (kind == PairKind::AA || kind == PairKind::AB) ? 0.5 * params.alpha() : 0.5 * params.beta();
}

std::shared_ptr<const InterfaceRow> PairTables::interface_row(PairKind kind, const InteractionParams& params) const {
    if (kind == PairKind::AB) {
        return phi_.row(params);
    }
    if (kind == PairKind::BA) {
        return phi_.row(InteractionParams(params.beta(), params.alpha()));
    }
    throw std::invalid_argument("pure pairs have no interface");
}

PsiValue PairTables::psi_mixed(const InterfaceRow& row, double bulk, double a) const {
    const double pure = a * bulk + crossing_entropy(a, 1.0);
    auto mu_range = [&](double b) {
        const double nu = 1.0 - b;
        const double hi = std::min(row.mu_max(), (a - 2.0 + b) / b);
        const double lo = std::max(1.0, (a - nu - kappa_.e_max()) / b);
        return std::pair<double, double>(lo, hi);
    };
    auto objective = [&](double b, double mu) {
        const double c = mu * b;
        const double d = a - c;
        return c * row(mu) + d * bulk + crossing_entropy(d, 1.0 - b);
    };
    constexpr int kScan = 32;
    double best = -std::numeric_limits<double>::infinity();
    double best_b = 0.0;
    for (int i = 1; i <= kScan; ++i) {
        const double b = static_cast<double>(i) / kScan;
        const auto [lo, hi] = mu_range(b);
        if (lo > hi) {
            continue;
        }
        for (int j = 0; j < kScan; ++j) {
            const double mu = lo + (hi - lo) * j / (kScan - 1);
            const double v = objective(b, mu);
            if (v > best) {
                best = v;
                best_b = b;
            }
        }
    }
    PsiValue out{pure / a, {0.0, 0.0}};
    if (best_b == 0.0) {
        return out;
    }
    double best_mu = 1.0;
    auto inner = [&](double b, double* mu_out) {
        const auto [lo, hi] = mu_range(b);
        if (lo > hi) {
            return -std::numeric_limits<double>::infinity();
        }
        const Maximum m = maximize_unimodal([&](double mu) { return objective(b, mu); }, lo, hi);
        if (mu_out) {
            *mu_out = m.x;
        }
        return m.value;
    };
    const double b_lo = std::max(1e-9, best_b - 1.0 / kScan);
    const double b_hi = std::min(1.0, best_b + 1.0 / kScan);
    const Maximum mb = maximize_unimodal([&](double b) { return inner(b, nullptr); }, b_lo, b_hi);
    const double refined = inner(mb.x, &best_mu);
    if (refined > pure + kTieMargin * a) {
        out.value = refined / a;
        out.strategy = {mb.x, best_mu * mb.x};
    }
    return out;
}

PsiValue PairTables::psi(PairKind kind, const InteractionParams& params, double a) const {
    if (!(a >= 2.0)) {
        throw std::invalid_argument("block-pair time a must be at least 2");
    }
    const double bulk_energy = bulk(kind, params);
    if (!is_mixed(kind)) {
        return {bulk_energy + kappa_.kappa(a, 1.0), {0.0, 0.0}};
    }
    return psi_mixed(*interface_row(kind, params), bulk_energy, a);
}

PairGain PairTables::gain_mixed(const InterfaceRow& row, double bulk, double lambda) const {
    const LocalizationSup s = interface_gain(row, lambda);
    const double lam = lambda - bulk;
    auto h = [&](double b) { return b * s.value + crossing_gain(1.0 - b, lam).value; };
    const CrossingGain pure = crossing_gain(1.0, lam);
    PairGain g;
    g.value = pure.value;
    g.a = pure.d;
    g.bracket_breach = pure.bracket_breach;
    const Maximum m = maximize_scan(h, 0.0, 1.0, 17);
    if (m.x > 0.0 && m.value > pure.value + kTieMargin) {
        const CrossingGain cg = crossing_gain(1.0 - m.x, lam);
        g.value = m.value;
        g.strategy = {m.x, s.mu * m.x};
        g.mu = s.mu;
        g.a = g.strategy.c + cg.d;
        g.bracket_breach = cg.bracket_breach || g.a > a_max_;
    }
    return g;
}

PairGain PairTables::gain(PairKind kind, const InteractionParams& params, double lambda) const {
    const double bulk_energy = bulk(kind, params);
    if (!is_mixed(kind)) {
        const CrossingGain cg = crossing_gain(1.0, lambda - bulk_energy);
        PairGain g;
        g.value = cg.value;
        g.a = cg.d;
        g.bracket_breach = cg.bracket_breach;
        return g;
    }
    return gain_mixed(*interface_row(kind, params), bulk_energy, lambda);
}

double psi_AA(const PairTables& t, const InteractionParams& params, double a) {
    return t.psi(PairKind::AA, params, a).value;
}

double psi_BB(const PairTables& t, const InteractionParams& params, double a) {
    return t.psi(PairKind::BB, params, a).value;
}

PsiValue psi_AB(const PairTables& t, const InteractionParams& params, double a) {
    return t.psi(PairKind::AB, params, a);
}

PsiValue psi_BA(const PairTables& t, const InteractionParams& params, double a) {
    return t.psi(PairKind::BA, params, a);
}

nlohmann::json PsiTable::to_json() const {
    nlohmann::json j;
    j["kind"] = "psi_table";
    j["version"] = kVersion;
    j["cache_key"] = cache_key;
    j["a_grid"] = a_grid;
    nlohmann::json ps = nlohmann::json::array();
    for (const auto& p : params) {
        ps.push_back({p.alpha(), p.beta()});
    }
    j["params"] = ps;
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cells) {
        nlohmann::json cj{{"alpha", c.alpha}, {"beta", c.beta}, {"a", c.a}};
        for (PairKind k : kPairKinds) {
            const auto& v = c.psi[static_cast<int>(k)];
            cj[to_string(k)] = {{"psi", v.value}, {"b", v.strategy.b}, {"c", v.strategy.c}};
        }
        cs.push_back(cj);
    }
    j["cells"] = cs;
    return j;
}

PsiTable PsiTable::from_json(const nlohmann::json& j) {
    if (j.at("kind") != "psi_table" || j.at("version").get<int>() != kVersion) {
        throw std::runtime_error("psi table cache has an incompatible version");
    }
    PsiTable t;
    t.cache_key = j.at("cache_key").get<std::string>();
    t.a_grid = j.at("a_grid").get<std::vector<double>>();
    for (const auto& p : j.at("params")) {
        t.params.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    for (const auto& cj : j.at("cells")) {
        PsiCell c;
        c.alpha = cj.at("alpha").get<double>();
        c.beta = cj.at("beta").get<double>();
        c.a = cj.at("a").get<double>();
        for (PairKind k : kPairKinds) {
            const auto& v = cj.at(to_string(k));
            c.psi[static_cast<int>(k)] = {v.at("psi").get<double>(), {v.at("b").get<double>(), v.at("c").get<double>()}};
        }
        t.cells.push_back(c);
    }
    return t;
}

PsiTable build_psi_tables(const PairTables& tables, const std::vector<InteractionParams>& params,
                          const std::vector<double>& a_grid) {
    PsiTable t;
    std::ostringstream key;
    key << "psi-v" << PsiTable::kVersion << "||" << tables.cache_key() << "||grid=";
    for (const auto& p : params) {
        key << p.alpha() << ":" << p.beta() << ";";
    }
    key << "|a=";
    for (double a : a_grid) {
        key << a << ";";
    }
    t.cache_key = key.str();
    t.params = params;
    t.a_grid = a_grid;
    t.cells.resize(params.size() * a_grid.size());
    // Rows are created up front so the parallel loop only reads the interface table.
    for (const auto& p : params) {
        tables.interface_row(PairKind::AB, p);
        tables.interface_row(PairKind::BA, p);
    }
    tbb::parallel_for(std::size_t(0), t.cells.size(), [&](std::size_t i) {
        const auto& p = params[i / a_grid.size()];
        const double a = a_grid[i % a_grid.size()];
        PsiCell c;
        c.alpha = p.alpha();
        c.beta = p.beta();
        c.a = a;
        for (PairKind k : kPairKinds) {
            c.psi[static_cast<int>(k)] = tables.psi(k, p, a);
        }
        t.cells[i] = c;
    });
    return t;
}

} // namespace emulsion
