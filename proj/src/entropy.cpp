#include "emulsion/entropy.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace emulsion {

long round_to_lattice(double x) { return std::lround(x); }

namespace {

// Counting DP over (x, y, last step) in [0,w] x [0,L]. `Num` is mpz_class or long double.
template <class Num>
class CrossingDp {
public:
    CrossingDp(int L, long w) : L_(L), w_(w), stride_(L + 1) {
        const std::size_t n = static_cast<std::size_t>(w + 1) * (L + 1);
        r_.assign(n, Num(0));
        u_.assign(n, Num(0));
        d_.assign(n, Num(0));
        r_[0] = Num(1);
        nr_ = r_;
        nu_ = u_;
        nd_ = d_;
    }

    void step() {
        for (long x = 0; x <= w_; ++x) {
            for (int y = 0; y <= L_; ++y) {
                const std::size_t i = idx(x, y);
                if (x > 0) {
                    const std::size_t l = idx(x - 1, y);
                    nr_[i] = r_[l] + u_[l] + d_[l];
                } else {
                    nr_[i] = 0;
                }
                if (y > 0) {
                    const std::size_t b = i - 1;
                    nu_[i] = r_[b] + u_[b];
                } else {
                    nu_[i] = 0;
                }
                if (y < L_) {
                    const std::size_t a = i + 1;
                    nd_[i] = r_[a] + d_[a];
                } else {
                    nd_[i] = 0;
                }
            }
        }
        std::swap(r_, nr_);
        std::swap(u_, nu_);
        std::swap(d_, nd_);
    }

    Num at_target() const {
        const std::size_t i = idx(w_, L_);
        return r_[i] + u_[i] + d_[i];
    }

    Num max_entry() const {
        Num m = 0;
        for (std::size_t i = 0; i < r_.size(); ++i) {
            m = std::max({m, Num(r_[i]), Num(u_[i]), Num(d_[i])});
        }
        return m;
    }

    void scale(const Num& s) {
        for (std::size_t i = 0; i < r_.size(); ++i) {
            r_[i] *= s;
            u_[i] *= s;
            d_[i] *= s;
        }
    }

private:
    std::size_t idx(long x, int y) const { return static_cast<std::size_t>(x) * stride_ + y; }

    int L_;
    long w_;
    std::size_t stride_;
    std::vector<Num> r_, u_, d_, nr_, nu_, nd_;
};

double log_mpz(const mpz_class& z) {
    if (z <= 0) {
        return -std::numeric_limits<double>::infinity();
    }
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

} // namespace

CrossingCount count_block_crossings(int L, long m, double nu) {
    if (L < 1) {
        throw std::invalid_argument("block size L must be positive");
    }
    if (!(nu >= 0.0)) {
        throw std::invalid_argument("width fraction must be non-negative");
    }
    CrossingCount out;
    out.width = round_to_lattice(nu * L);
    const long minimum = out.width + L;
    if (m < minimum) {
        out.status = CrossingStatus::below_minimum;
        return out;
    }
    if ((m - minimum) % 2 != 0) {
        out.status = CrossingStatus::parity_violation;
        return out;
    }
    CrossingDp<mpz_class> dp(L, out.width);
    for (long t = 0; t < m; ++t) {
        dp.step();
    }
    out.count = dp.at_target();
    return out;
}

std::vector<long double> crossing_log_counts(int L, long width, long m_max) {
    if (L < 1 || width < 0 || m_max < 0) {
        throw std::invalid_argument("crossing_log_counts: bad sizes");
    }
    std::vector<long double> out(m_max + 1, -std::numeric_limits<long double>::infinity());
    CrossingDp<long double> dp(L, width);
    long double log_scale = 0.0L;
    auto record = [&](long t) {
        const long double v = dp.at_target();
        if (v > 0.0L) {
            out[t] = std::log(v) + log_scale;
        }
    };
    record(0);
    for (long t = 1; t <= m_max; ++t) {
        dp.step();
        record(t);
        if (t % 64 == 0) {
            const long double mx = dp.max_entry();
            if (mx > 1e300L) {
                dp.scale(1.0L / mx);
                log_scale += std::log(mx);
            }
        }
    }
    return out;
}

KappaEstimate kappa(double mu, double nu, const std::vector<int>& L_schedule) {
    if (L_schedule.size() < 2) {
        throw std::invalid_argument("kappa needs an L schedule of at least two sizes");
    }
    if (!(nu > 0.0) || !(mu >= nu + 1.0)) {
        throw std::invalid_argument("kappa requires nu > 0 and mu >= nu + 1");
    }
    KappaEstimate est;
    std::vector<double> sizes;
    for (int L : L_schedule) {
        const long w = round_to_lattice(nu * L);
        long m = std::max(round_to_lattice(mu * L), w + L);
        if ((m - w - L) % 2 != 0) {
            ++m;
        }
        const CrossingCount c = count_block_crossings(L, m, nu);
        est.sizes.push_back(L);
        est.per_size.push_back(log_mpz(c.count) / static_cast<double>(m));
        sizes.push_back(L);
    }
    const Extrapolation e = extrapolate_sizes(sizes, est.per_size);
    est.value = e.value;
    est.error = e.error;
    est.L_max = *std::max_element(L_schedule.begin(), L_schedule.end());
    return est;
}

std::string EntropyTableConfig::cache_key() const {
    std::ostringstream s;
    s << "entropy-v" << EntropyTable::kVersion << "|schedule=";
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        s << (i ? "," : "") << schedule[i];
    }
    s << "|nu_nodes=" << nu_nodes << "|e_max=" << e_max << "|rounding=" << kRoundingRule;
    return s.str();
}

EntropyTable EntropyTable::build(const EntropyTableConfig& config) {
    if (config.schedule.size() < 2) {
        throw std::invalid_argument("entropy table needs an L schedule of at least two sizes");
    }
    if (!std::is_sorted(config.schedule.begin(), config.schedule.end())) {
        throw std::invalid_argument("entropy table L schedule must be increasing");
    }
    const int L_min = config.schedule.front();
    for (int L : config.schedule) {
        if (L % L_min != 0) {
            throw std::invalid_argument("every L in the schedule must be a multiple of the smallest");
        }
    }
    if (L_min % 2 != 0 || config.nu_nodes < 4 || config.e_max < 2.0) {
        throw std::invalid_argument("entropy table grid too small");
    }
    EntropyTable t;
    t.config_ = config;
    t.dnu_ = 1.0 / L_min;
    t.de_ = 2.0 / L_min;
    t.e_count_ = static_cast<int>(std::floor((config.e_max - 1.0) / t.de_ + 1e-9)) + 1;

    const int n_sizes = static_cast<int>(config.schedule.size());
    const int n_nu = config.nu_nodes;
    // per_size[s][j][k] = finite-L entropy at node (j, k)
    std::vector<std::vector<double>> per_size(n_sizes * n_nu);
    tbb::parallel_for(0, n_sizes * n_nu, [&](int task) {
        const int s = task / n_nu;
        const int j = task % n_nu;
        const int L = config.schedule[s];
        const long w = static_cast<long>(j + 1) * (L / L_min);
        const long step = 2 * (L / L_min);
        const long m0 = w + L;
        const long m_max = m0 + step * (t.e_count_ - 1);
        const auto logs = crossing_log_counts(L, w, m_max);
        auto& row = per_size[task];
        row.resize(t.e_count_);
        for (int k = 0; k < t.e_count_; ++k) {
            const long m = m0 + step * k;
            row[k] = static_cast<double>(logs[m] / static_cast<long double>(m));
        }
    });

    t.nodes_.resize(static_cast<std::size_t>(n_nu) * t.e_count_);
    std::vector<double> sizes(config.schedule.begin(), config.schedule.end());
    std::vector<double> vals(n_sizes);
    for (int j = 0; j < n_nu; ++j) {
        int last_ok = -1;
        for (int k = 0; k < t.e_count_; ++k) {
            for (int s = 0; s < n_sizes; ++s) {
                vals[s] = per_size[s * n_nu + j][k];
            }
            // small blocks cannot hold long crossings of narrow widths (count 0); use the
            // largest sizes that still have finite values
            int first = n_sizes;
            while (first > 0 && std::isfinite(vals[first - 1])) {
                --first;
            }
            EntropyNode& node = t.nodes_[static_cast<std::size_t>(j) * t.e_count_ + k];
            if (n_sizes - first >= 2) {
                const std::vector<double> sz(sizes.begin() + first, sizes.end());
                const std::vector<double> vs(vals.begin() + first, vals.end());
                const Extrapolation e = extrapolate_sizes(sz, vs);
                node = {e.value, e.error, config.schedule.back()};
                if (first > 0) {
                    node.error = std::max(node.error, std::abs(e.value - vs.back()));
                }
                last_ok = k;
                continue;
            }
            // no usable sizes: linear continuation along e, floored at 0, error equal to the value gap
            if (last_ok < 1) {
                throw std::runtime_error("entropy table: no finite crossing counts at width node " + std::to_string(j));
            }
            const EntropyNode& a = t.nodes_[static_cast<std::size_t>(j) * t.e_count_ + last_ok - 1];
            const EntropyNode& b = t.nodes_[static_cast<std::size_t>(j) * t.e_count_ + last_ok];
            const double v = std::max(0.0, b.kappa + (b.kappa - a.kappa) * (k - last_ok));
            node = {v, std::max(b.error, std::abs(b.kappa - v) + b.kappa), 0};
        }
    }
    t.finalize();
    return t;
}

void EntropyTable::finalize() {
    std::vector<double> values(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        values[i] = nodes_[i].kappa;
    }
    spline_ = BicubicGrid(dnu_, dnu_, config_.nu_nodes, 1.0, de_, e_count_, std::move(values));
}

bool EntropyTable::covers(double mu, double nu) const { return spline_.covers(nu, mu - nu); }

double EntropyTable::kappa(double mu, double nu) const {
    if (!covers(mu, nu)) {
        std::ostringstream s;
        s << "entropy table does not cover (mu=" << mu << ", nu=" << nu << "); needs nu in [" << nu_min() << ", "
          << nu_max() << "] and mu - nu in [1, " << e_max() << "]";
        throw coverage_error(s.str());
    }
    return spline_(nu, mu - nu);
}

double EntropyTable::error_near(double mu, double nu) const {
    const double x = std::clamp((nu - dnu_) / dnu_, 0.0, double(config_.nu_nodes - 1));
    const double y = std::clamp((mu - nu - 1.0) / de_, 0.0, double(e_count_ - 1));
    const int i = std::min(static_cast<int>(x), config_.nu_nodes - 2);
    const int k = std::min(static_cast<int>(y), e_count_ - 2);
    return std::max({node(i, k).error, node(i + 1, k).error, node(i, k + 1).error, node(i + 1, k + 1).error});
}

double EntropyTable::max_error() const {
    double m = 0.0;
    for (const auto& n : nodes_) {
        m = std::max(m, n.error);
    }
    return m;
}

nlohmann::json EntropyTable::to_json() const {
    nlohmann::json j;
    j["kind"] = "entropy_table";
    j["version"] = kVersion;
    j["cache_key"] = cache_key();
    j["schedule"] = config_.schedule;
    j["nu_nodes"] = config_.nu_nodes;
    j["e_max"] = config_.e_max;
    j["rounding"] = kRoundingRule;
    std::vector<double> k, e;
    std::vector<int> lm;
    for (const auto& n : nodes_) {
        k.push_back(n.kappa);
        e.push_back(n.error);
        lm.push_back(n.L_max);
    }
    j["kappa"] = k;
    j["error"] = e;
    j["L_max"] = lm;
    return j;
}

EntropyTable EntropyTable::from_json(const nlohmann::json& j) {
    if (j.at("kind") != "entropy_table" || j.at("version").get<int>() != kVersion) {
        throw std::runtime_error("entropy table cache has an incompatible version");
    }
    EntropyTable t;
    t.config_.schedule = j.at("schedule").get<std::vector<int>>();
    t.config_.nu_nodes = j.at("nu_nodes").get<int>();
    t.config_.e_max = j.at("e_max").get<double>();
    if (j.at("cache_key").get<std::string>() != t.cache_key()) {
        throw std::runtime_error("entropy table cache key mismatch");
    }
    const int L_min = t.config_.schedule.front();
    t.dnu_ = 1.0 / L_min;
    t.de_ = 2.0 / L_min;
    t.e_count_ = static_cast<int>(std::floor((t.config_.e_max - 1.0) / t.de_ + 1e-9)) + 1;
    const auto k = j.at("kappa").get<std::vector<double>>();
    const auto e = j.at("error").get<std::vector<double>>();
    const auto lm = j.at("L_max").get<std::vector<int>>();
    if (k.size() != static_cast<std::size_t>(t.config_.nu_nodes) * t.e_count_ || e.size() != k.size() ||
        lm.size() != k.size()) {
        throw std::runtime_error("entropy table cache has the wrong shape");
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
        t.nodes_.push_back({k[i], e[i], lm[i]});
    }
    t.finalize();
    return t;
}

DiagonalSupremum sup_kappa_diag(const EntropyTable& table, double lo, double hi, double tol) {
    if (!(hi >= lo) || !(tol > 0.0)) {
        throw std::invalid_argument("sup_kappa_diag: bad bracket or tolerance");
    }
    auto f = [&](double a) { return table.kappa(a, 1.0); };
    const int bits = std::clamp(static_cast<int>(std::ceil(-std::log2(tol))) + 2, 8, 52);
    DiagonalSupremum out;
    constexpr int kProbe = 33;
    int turns = 0;
    if (hi > lo) {
        double prev = f(lo);
        int last_sign = 0;
        for (int i = 1; i < kProbe; ++i) {
            const double v = f(lo + (hi - lo) * i / (kProbe - 1));
            const int sign = v > prev ? 1 : (v < prev ? -1 : 0);
            if (sign != 0 && last_sign != 0 && sign != last_sign) {
                ++turns;
            }
            if (sign != 0) {
                last_sign = sign;
            }
            prev = v;
        }
    }
    Maximum m;
    if (turns > 1) {
        out.unimodal = false;
        m = maximize_scan(f, lo, hi, 257, bits);
    } else {
        m = maximize_unimodal(f, lo, hi, bits);
    }
    out.a_star = m.x;
    out.kappa_star = m.value;
    return out;
}

} // namespace emulsion
