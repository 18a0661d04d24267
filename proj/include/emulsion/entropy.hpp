#pragma once

#include "emulsion/numeric.hpp"

#include <gmpxx.h>
#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace emulsion {

// Raised when a table is queried outside its built range; the message names the
// point so the caller can rebuild with a wider grid.
class coverage_error : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Rounding rule for lattice sizes: nearest integer, halves away from zero; a step
// count with the wrong parity for the target is raised by one.
long round_to_lattice(double x);
inline constexpr const char* kRoundingRule = "nearest-half-away+parity-up";

enum class CrossingStatus { ok, parity_violation, below_minimum };

struct CrossingCount {
    mpz_class count;
    CrossingStatus status = CrossingStatus::ok;
    long width = 0;
};

// Exact number of directed self-avoiding paths from (0,0) to (w, L), w = round(nu L),
// with m steps inside [0,w] x [0,L].
CrossingCount count_block_crossings(int L, long m, double nu);

// log of the same counts for every m in [0, m_max] (-inf where zero), in extended precision.
std::vector<long double> crossing_log_counts(int L, long width, long m_max);

struct KappaEstimate {
    double value = 0.0;
    double error = 0.0;
    int L_max = 0;
    std::vector<int> sizes;
    std::vector<double> per_size;
};

// Crossing entropy per step at (mu, nu), extrapolated over the L schedule.
KappaEstimate kappa(double mu, double nu, const std::vector<int>& L_schedule);

struct EntropyTableConfig {
    std::vector<int> schedule{16, 32, 64, 128};
    int nu_nodes = 20;   // nu = j / L_min for j = 1..nu_nodes
    double e_max = 12.0; // excess steps e = mu - nu range over [1, e_max]

    std::string cache_key() const;
};

struct EntropyNode {
    double kappa = 0.0;
    double error = 0.0;
    int L_max = 0;
};

class EntropyTable {
public:
    static inline constexpr int kVersion = 1;

    static EntropyTable build(const EntropyTableConfig& config);

    double kappa(double mu, double nu) const;
    bool covers(double mu, double nu) const;
    // Largest extrapolation error among the nodes surrounding (mu, nu).
    double error_near(double mu, double nu) const;
    double max_error() const;

    double nu_min() const { return dnu_; }
    double nu_max() const { return dnu_ * config_.nu_nodes; }
    double e_max() const { return config_.e_max; }
    int nu_count() const { return config_.nu_nodes; }
    int e_count() const { return e_count_; }
    double nu_at(int j) const { return dnu_ * (j + 1); }
    double e_at(int k) const { return 1.0 + de_ * k; }
    const EntropyNode& node(int j, int k) const { return nodes_[static_cast<std::size_t>(j) * e_count_ + k]; }
    const EntropyTableConfig& config() const { return config_; }
    std::string cache_key() const { return config_.cache_key(); }

    nlohmann::json to_json() const;
    static EntropyTable from_json(const nlohmann::json& j);

private:
    void finalize();

    EntropyTableConfig config_;
    double dnu_ = 0.0;
    double de_ = 0.0;
    int e_count_ = 0;
    std::vector<EntropyNode> nodes_;
    BicubicGrid spline_;
};

struct DiagonalSupremum {
    double a_star = 0.0;
    double kappa_star = 0.0;
    bool unimodal = true;
};

// Maximizes a -> kappa(a, 1) over the bracket. Non-unimodal samples fall back to a
// grid scan and clear `unimodal`.
DiagonalSupremum sup_kappa_diag(const EntropyTable& table, double lo, double hi, double tol);

} // namespace emulsion
