#include "emulsion/interface.hpp"

#include "emulsion/entropy.hpp"
#include "emulsion/random.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace emulsion {

const char* to_string(EdgeRule rule) { return rule == EdgeRule::lower_side ? "lower_side" : "upper_side"; }

EdgeRule edge_rule_from_string(const std::string& s) {
    if (s == "lower_side") {
        return EdgeRule::lower_side;
    }
    if (s == "upper_side") {
        return EdgeRule::upper_side;
    }
    throw std::invalid_argument("unknown interface edge rule '" + s + "'");
}

bool interface_edge_upper(long y_from, long y_to, EdgeRule rule) {
    if (y_from == y_to) {
        return rule == EdgeRule::lower_side ? y_from > 0 : y_from >= 0;
    }
    return std::min(y_from, y_to) >= 0;
}

StepWeights quenched_weights(const InteractionParams& params, const CopolymerSequence& omega) {
    StepWeights w;
    w.upper.resize(omega.size());
    w.lower.resize(omega.size());
    const double ea = std::exp(params.alpha());
    const double eb = std::exp(params.beta());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const bool a = omega[i] == Species::A;
        w.upper[i] = a ? ea : 1.0;
        w.lower[i] = a ? 1.0 : eb;
    }
    return w;
}

StepWeights annealed_weights(const InteractionParams& params, std::size_t m) {
    StepWeights w;
    w.upper.assign(m, 0.5 * (std::exp(params.alpha()) + 1.0));
    w.lower.assign(m, 0.5 * (1.0 + std::exp(params.beta())));
    return w;
}

namespace {

// Transfer DP over (x, y, last step). Heights are stored with parity compression:
// at time t only y with y = t - x (mod 2) are reachable, so column x keeps index
// k = (y + O - r) / 2 with r = (t - x + O) mod 2.
class InterfaceDp {
public:
    InterfaceDp(long m_max, EdgeRule rule)
        : m_max_(m_max), off_(m_max / 2 + 2), depth_(off_ + 1), rule_(rule) {
        const std::size_t n = static_cast<std::size_t>(m_max + 2) * depth_;
        for (auto* v : {&r_, &u_, &d_, &nr_, &nu_, &nd_}) {
            v->assign(n, 0.0);
        }
    }

    std::vector<std::vector<double>> run(const StepWeights& w, const std::vector<long>& records) {
        std::vector<std::vector<double>> out;
        std::size_t next = 0;
        // Start at (0,0) as if arrived by a horizontal step: every direction allowed.
        r_[index(0, k_of(0, 0, 0))] = 1.0;
        ls_.assign(static_cast<std::size_t>(m_max_ + 2), -std::numeric_limits<double>::infinity());
        ls_[0] = 0.0;
        while (next < records.size() && records[next] == 0) {
            out.push_back(read(0));
            ++next;
        }
        for (long t = 0; t < m_max_; ++t) {
            step(t, w.upper[t], w.lower[t]);
            std::swap(r_, nr_);
            std::swap(u_, nu_);
            std::swap(d_, nd_);
            while (next < records.size() && records[next] == t + 1) {
                out.push_back(read(t + 1));
                ++next;
            }
        }
        return out;
    }

private:
    std::size_t index(long x, long k) const { return static_cast<std::size_t>(x) * depth_ + k; }
    long parity(long t, long x) const { return (t - x + off_) & 1; }
    long k_of(long t, long x, long y) const { return (y + off_ - parity(t, x)) / 2; }

    // Each column carries its own log scale, since columns near x = t hold far less
    // weight than the rest and would underflow under a common scale.
    void step(long t, double wu, double wl) {
        const long t1 = t + 1;
        const long y_cap = std::min(m_max_ - t1, off_ - 1);
        const bool upper_rule = rule_ == EdgeRule::upper_side;
        const double ninf = -std::numeric_limits<double>::infinity();
        for (long x = t1; x >= 0; --x) {
            const long b = std::min(t1 - x, y_cap);
            const long s = parity(t1, x);
            const long klo = (-b + off_ - s + 1) / 2;
            const long khi = (b + off_ - s) / 2;
            double* rn = &nr_[index(x, 0)];
            double* un = &nu_[index(x, 0)];
            double* dn = &nd_[index(x, 0)];
            const double ls_c = ls_[x];
            const double ls_l = x > 0 ? ls_[x - 1] : ninf;
            const double base = std::max(ls_c, ls_l);
            for (long k : {klo - 2, klo - 1, khi + 1, khi + 2}) {
                if (k >= 0 && k < depth_) {
                    rn[k] = un[k] = dn[k] = 0.0;
                }
            }
            if (base == ninf) {
                for (long k = klo; k <= khi; ++k) {
                    rn[k] = un[k] = dn[k] = 0.0;
                }
                continue;
            }
            const double fc = std::exp(ls_c - base);
            const double fl = std::exp(ls_l - base);
            const double* rc = &r_[index(x, 0)];
            const double* uc = &u_[index(x, 0)];
            const double* dc = &d_[index(x, 0)];
            const double* rl = x > 0 ? &r_[index(x - 1, 0)] : nullptr;
            const double* ul = x > 0 ? &u_[index(x - 1, 0)] : nullptr;
            const double* dl = x > 0 ? &d_[index(x - 1, 0)] : nullptr;
            double mx = 0.0;
            for (long k = klo; k <= khi; ++k) {
                const long y = 2 * k + s - off_;
                const bool h_up = upper_rule ? y >= 0 : y > 0;
                const double h = rl ? (rl[k] + ul[k] + dl[k]) * fl * (h_up ? wu : wl) : 0.0;
                const long ku = k - 1 + s;
                const double up = (rc[ku] + uc[ku]) * fc * (y - 1 >= 0 ? wu : wl);
                const long kd = k + s;
                const double dw = (rc[kd] + dc[kd]) * fc * (y >= 0 ? wu : wl);
                rn[k] = h;
                un[k] = up;
                dn[k] = dw;
                mx = std::max(mx, h + up + dw);
            }
            if (mx > 0.0) {
                const double inv = 1.0 / mx;
                for (long k = klo; k <= khi; ++k) {
                    rn[k] *= inv;
                    un[k] *= inv;
                    dn[k] *= inv;
                }
                ls_[x] = base + std::log(mx);
            } else {
                ls_[x] = ninf;
            }
        }
    }

    std::vector<double> read(long t) const {
        std::vector<double> v(t + 1, -std::numeric_limits<double>::infinity());
        for (long x = t % 2; x <= t; x += 2) {
            const std::size_t i = index(x, k_of(t, x, 0));
            const double z = r_[i] + u_[i] + d_[i];
            if (z > 0.0) {
                v[x] = std::log(z) + ls_[x];
            }
        }
        return v;
    }

    long m_max_;
    long off_;
    long depth_;
    EdgeRule rule_;
    std::vector<double> r_, u_, d_, nr_, nu_, nd_;
    std::vector<double> ls_;
};

} // namespace

std::vector<std::vector<double>> interface_log_profiles(const StepWeights& weights, const std::vector<long>& records,
                                                        EdgeRule rule) {
    if (records.empty() || !std::is_sorted(records.begin(), records.end()) || records.front() < 0) {
        throw std::invalid_argument("interface records must be sorted and non-negative");
    }
    const long m_max = records.back();
    if (weights.upper.size() < static_cast<std::size_t>(m_max) || weights.lower.size() < weights.upper.size()) {
        throw std::invalid_argument("interface weights shorter than the longest record");
    }
    InterfaceDp dp(m_max, rule);
    return dp.run(weights, records);
}

long interface_span(double mu, long m) {
    if (!(mu >= 1.0)) {
        throw std::invalid_argument("interface mu must be at least 1");
    }
    return round_to_lattice(static_cast<double>(m) / mu);
}

std::optional<double> interface_log_partition(const InteractionParams& params, double mu, long m,
                                              const CopolymerSequence& omega, EdgeRule rule) {
    if (static_cast<long>(omega.size()) != m) {
        throw std::invalid_argument("copolymer length must equal m");
    }
    const long span = interface_span(mu, m);
    if (span < 1) {
        throw std::invalid_argument("interface span round(m/mu) must be at least 1");
    }
    if ((m - span) % 2 != 0) {
        return std::nullopt;
    }
    const auto prof = interface_log_profiles(quenched_weights(params, omega), {m}, rule);
    return prof[0][span];
}

CopolymerSequence interface_sample(std::uint64_t seed, int k, long m) {
    CounterStream rng(derive_key(seed, Stream::interface, static_cast<std::uint64_t>(k / 2)));
    std::vector<Species> labels(m);
    for (auto& s : labels) {
        s = (rng.next() >> 63) ? Species::B : Species::A;
    }
    CopolymerSequence omega(std::move(labels));
    return (k % 2 == 1) ? omega.flipped() : omega;
}

namespace {

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return {mean, se};
}

} // namespace

PhiEstimate phi_interface(const InteractionParams& params, double mu, long m, int samples, std::uint64_t seed,
                          EdgeRule rule) {
    if (samples < 2) {
        throw std::invalid_argument("phi_interface needs at least two samples");
    }
    const long span = interface_span(mu, m);
    if (span < 1) {
        throw std::invalid_argument("interface span round(m/mu) must be at least 1");
    }
    if ((m - span) % 2 != 0) {
        throw std::domain_error("interface endpoint unreachable for every sample (parity)");
    }
    std::vector<double> vals(samples);
    tbb::parallel_for(0, samples, [&](int k) {
        const auto omega = interface_sample(seed, k, m);
        vals[k] = interface_log_profiles(quenched_weights(params, omega), {m}, rule)[0][span] / static_cast<double>(m);
    });
    const auto [mean, se] = mean_stderr(vals);
    return {mean, se, m, samples};
}

double annealed_phi_bound(const InteractionParams& params, double mu, long m, EdgeRule rule) {
    long span = interface_span(mu, m);
    if ((m - span) % 2 != 0) {
        ++m;
        span = interface_span(mu, m);
        if ((m - span) % 2 != 0) {
            ++m;
            span = interface_span(mu, m);
        }
    }
    const auto prof = interface_log_profiles(annealed_weights(params, m), {m}, rule);
    return prof[0][span] / static_cast<double>(m);
}

std::string InterfaceTableConfig::cache_key() const {
    std::ostringstream s;
    s << "interface-v" << InterfaceTable::kVersion << "|m=";
    for (std::size_t i = 0; i < m_schedule.size(); ++i) {
        s << (i ? "," : "") << m_schedule[i];
    }
    s << "|samples=" << samples << "|seed=" << seed << "|rule=" << to_string(rule) << "|mu_max=" << mu_max;
    return s.str();
}

void InterfaceTableConfig::validate() const {
    if (m_schedule.size() < 2) {
        throw std::invalid_argument("interface m schedule needs at least two lengths");
    }
    const long m0 = m_schedule.front();
    if (m0 < 4 || m0 % 2 != 0) {
        throw std::invalid_argument("smallest interface length must be even and at least 4");
    }
    for (std::size_t i = 1; i < m_schedule.size(); ++i) {
        if (m_schedule[i] <= m_schedule[i - 1] || m_schedule[i] % m0 != 0) {
            throw std::invalid_argument("interface lengths must increase and be multiples of the smallest");
        }
    }
    if (samples < 2) {
        throw std::invalid_argument("interface table needs at least two samples");
    }
    if (!(mu_max > 1.0)) {
        throw std::invalid_argument("interface mu_max must exceed 1");
    }
}

InterfaceRow::InterfaceRow(double alpha, double beta, double s0, double ds, std::vector<double> phi,
                           std::vector<double> stderr, std::vector<double> phi_top, double extrapolation_error,
                           long m_top, int samples, double mu_cap)
    : alpha_(alpha), beta_(beta), s0_(s0), ds_(ds), mu_cap_(mu_cap), phi_(std::move(phi)), stderr_(std::move(stderr)),
      phi_top_(std::move(phi_top)), extrapolation_error_(extrapolation_error), m_top_(m_top), samples_(samples) {
    spline_ = UniformSpline(s0_, ds_, phi_);
    spline_top_ = UniformSpline(s0_, ds_, phi_top_);
    spline_err_ = UniformSpline(s0_, ds_, stderr_);
}

void InterfaceRow::check(double mu) const {
    if (!(mu >= 1.0 - 1e-12) || !(1.0 / mu >= s0_ - 1e-12)) {
        std::ostringstream s;
        s << "interface row (" << alpha_ << "," << beta_ << ") does not cover mu=" << mu << "; range is [1, "
          << 1.0 / s0_ << "]";
        throw coverage_error(s.str());
    }
}

double InterfaceRow::operator()(double mu) const {
    check(mu);
    return spline_(1.0 / mu);
}

double InterfaceRow::top(double mu) const {
    check(mu);
    return spline_top_(1.0 / mu);
}

double InterfaceRow::stderr_at(double mu) const {
    check(mu);
    return std::max(0.0, spline_err_(1.0 / mu));
}

nlohmann::json InterfaceRow::to_json() const {
    return {{"alpha", alpha_},   {"beta", beta_},      {"s0", s0_},
            {"ds", ds_},         {"phi", phi_},        {"stderr", stderr_},
            {"phi_top", phi_top_}, {"extrapolation_error", extrapolation_error_},
            {"m_top", m_top_},   {"samples", samples_}, {"mu_cap", mu_cap_}};
}

InterfaceRow InterfaceRow::from_json(const nlohmann::json& j) {
    return InterfaceRow(j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("s0").get<double>(),
                        j.at("ds").get<double>(), j.at("phi").get<std::vector<double>>(),
                        j.at("stderr").get<std::vector<double>>(), j.at("phi_top").get<std::vector<double>>(),
                        j.at("extrapolation_error").get<double>(), j.at("m_top").get<long>(),
                        j.at("samples").get<int>(), j.at("mu_cap").get<double>());
}

InterfaceRow compute_interface_row(const InteractionParams& params, const InterfaceTableConfig& config) {
    config.validate();
    const auto& ms = config.m_schedule;
    const std::size_t n_m = ms.size();
    const long m_fine = ms[n_m - 2];
    const long m_coarse = ms.front();
    const long m_top = ms.back();
    // Output grid: s = x / m_fine with x even, from just below 1/mu_max up to 1.
    const double ds = 2.0 / static_cast<double>(m_fine);
    const long i_lo = std::max(1L, static_cast<long>(std::floor(1.0 / config.mu_max / ds)) - 1);
    const long i_hi = m_fine / 2;
    const std::size_t n_s = static_cast<std::size_t>(i_hi - i_lo + 1);
    const long coarse_stride = m_fine / m_coarse;

    const int samples = config.samples;
    // per-sample values at each output node: extrapolated, top-length, and previous extrapolant
    std::vector<std::vector<double>> ext(samples), top(samples), prev(samples);
    tbb::parallel_for(0, samples, [&](int k) {
        const auto omega = interface_sample(config.seed, k, m_top);
        const auto prof = interface_log_profiles(quenched_weights(params, omega), ms, config.rule);
        auto phi_at = [&](std::size_t mi, long i) {
            // node i has s = 2 i / m_fine, i.e. span 2 i m / m_fine at length m
            const long m = ms[mi];
            const long x = 2 * i * (m / m_fine);
            return prof[mi][x] / static_cast<double>(m);
        };
        auto richardson = [&](std::size_t a, std::size_t b, long i) {
            const double ma = static_cast<double>(ms[a]);
            const double mb = static_cast<double>(ms[b]);
            return (mb * phi_at(b, i) - ma * phi_at(a, i)) / (mb - ma);
        };
        ext[k].resize(n_s);
        top[k].resize(n_s);
        prev[k].assign(n_s, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t q = 0; q < n_s; ++q) {
            const long i = i_lo + static_cast<long>(q);
            ext[k][q] = richardson(n_m - 2, n_m - 1, i);
            top[k][q] = phi_at(n_m - 1, i);
            if (i % coarse_stride == 0) {
                const long ic = i / coarse_stride;
                // the previous extrapolant lives on the coarse grid of the smallest length
                if (n_m >= 3) {
                    const double m0 = static_cast<double>(ms[n_m - 3]);
                    const double m1 = static_cast<double>(ms[n_m - 2]);
                    const long x0 = 2 * ic * (ms[n_m - 3] / m_coarse);
                    const long x1 = 2 * ic * (ms[n_m - 2] / m_coarse);
                    const double p0 = prof[n_m - 3][x0] / m0;
                    const double p1 = prof[n_m - 2][x1] / m1;
                    prev[k][q] = (m1 * p1 - m0 * p0) / (m1 - m0);
                } else {
                    prev[k][q] = top[k][q];
                }
            }
        }
    });

    std::vector<double> phi(n_s), se(n_s), phi_top(n_s), col(samples);
    double ext_err = 0.0;
    for (std::size_t q = 0; q < n_s; ++q) {
        for (int k = 0; k < samples; ++k) {
            col[k] = ext[k][q];
        }
        std::tie(phi[q], se[q]) = mean_stderr(col);
        for (int k = 0; k < samples; ++k) {
            col[k] = top[k][q];
        }
        phi_top[q] = mean_stderr(col).first;
        if (!std::isnan(prev[0][q])) {
            for (int k = 0; k < samples; ++k) {
                col[k] = prev[k][q];
            }
            ext_err = std::max(ext_err, std::abs(mean_stderr(col).first - phi[q]));
        }
    }
    return InterfaceRow(params.alpha(), params.beta(), ds * static_cast<double>(i_lo), ds, std::move(phi),
                        std::move(se), std::move(phi_top), ext_err, m_top, samples, config.mu_max);
}

LocalizationSup interface_gain(const InterfaceRow& row, double lambda) {
    const double s_lo = std::max(row.s_at(0), 1.0 / row.mu_max());
    auto f = [&](double mu) { return mu * (row(mu) - lambda); };
    // scan the stored nodes, then refine in mu around every local maximum
    std::vector<double> v(row.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < row.size(); ++i) {
        const double s = row.s_at(i);
        if (s >= s_lo - 1e-12) {
            v[i] = (1.0 / s) * (row.phi_nodes()[i] - lambda);
        }
    }
    LocalizationSup best{row(1.0) - lambda, 1.0};
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!std::isfinite(v[i])) {
            continue;
        }
        if (v[i] > best.value) {
            best = {v[i], 1.0 / row.s_at(i)};
        }
        const bool left = i == 0 || v[i] >= v[i - 1];
        const bool right = i + 1 == row.size() || v[i] >= v[i + 1];
        if (!left || !right) {
            continue;
        }
        const double mu_a = std::max(1.0, 1.0 / row.s_at(std::min(i + 1, row.size() - 1)));
        const double mu_b = std::min(row.mu_max(), 1.0 / row.s_at(i > 0 ? i - 1 : 0));
        const Maximum m = maximize_unimodal(f, mu_a, std::max(mu_a, mu_b));
        if (m.value > best.value) {
            best = {m.value, m.x};
        }
    }
    return best;
}

InterfaceTable::InterfaceTable(InterfaceTableConfig config) : config_(std::move(config)) { config_.validate(); }

std::shared_ptr<const InterfaceRow> InterfaceTable::row(const InteractionParams& params) const {
    const std::pair<double, double> key{params.alpha(), params.beta()};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = rows_.find(key);
        if (it != rows_.end()) {
            return it->second;
        }
    }
    auto r = std::make_shared<const InterfaceRow>(compute_interface_row(params, config_));
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = rows_.emplace(key, r);
    dirty_ = dirty_ || inserted;
    return it->second;
}

std::size_t InterfaceTable::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return rows_.size();
}

bool InterfaceTable::dirty() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return dirty_;
}

nlohmann::json InterfaceTable::to_json() const {
    std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json j;
    j["kind"] = "interface_table";
    j["version"] = kVersion;
    j["cache_key"] = cache_key();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [k, r] : rows_) {
        rows.push_back(r->to_json());
    }
    j["rows"] = rows;
    return j;
}

void InterfaceTable::merge_json(const nlohmann::json& j) {
    if (j.at("kind") != "interface_table" || j.at("version").get<int>() != kVersion) {
        throw std::runtime_error("interface table cache has an incompatible version");
    }
    if (j.at("cache_key").get<std::string>() != cache_key()) {
        throw std::runtime_error("interface table cache key mismatch: cached '" +
                                 j.at("cache_key").get<std::string>() + "', requested '" + cache_key() + "'");
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (const auto& rj : j.at("rows")) {
        auto r = std::make_shared<const InterfaceRow>(InterfaceRow::from_json(rj));
        rows_.emplace(std::make_pair(r->alpha(), r->beta()), r);
    }
}

} // namespace emulsion
