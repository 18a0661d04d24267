#pragma once

#include "emulsion/model.hpp"
#include "emulsion/numeric.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emulsion {

// Which side of the interface owns horizontal edges lying on it (y = 0).
// The upper region is A (oil), the lower region B (water).
enum class EdgeRule { lower_side, upper_side };

const char* to_string(EdgeRule rule);
EdgeRule edge_rule_from_string(const std::string& s);

// True if the edge between heights y_from and y_to (equal for a horizontal edge)
// lies in the upper region.
bool interface_edge_upper(long y_from, long y_to, EdgeRule rule);

// Per-step Boltzmann weights of a monomer placed in the upper or lower region.
struct StepWeights {
    std::vector<double> upper;
    std::vector<double> lower;
};

StepWeights quenched_weights(const InteractionParams& params, const CopolymerSequence& omega);
StepWeights annealed_weights(const InteractionParams& params, std::size_t m);

// log Z_t(x, 0) for each recorded length t and every span x in [0, t]: paths of t
// steps from (0,0) to (x,0). Unreachable spans hold -inf.
std::vector<std::vector<double>> interface_log_profiles(const StepWeights& weights, const std::vector<long>& records,
                                                        EdgeRule rule);

long interface_span(double mu, long m);

// Exact log partition sum of m-step paths from (0,0) to (round(m/mu), 0);
// nullopt when the endpoint is unreachable by parity.
std::optional<double> interface_log_partition(const InteractionParams& params, double mu, long m,
                                              const CopolymerSequence& omega,
                                              EdgeRule rule = EdgeRule::lower_side);

// Disorder sample k of length m: even k are fresh sequences, odd k the label flip of k-1.
CopolymerSequence interface_sample(std::uint64_t seed, int k, long m);

struct PhiEstimate {
    double estimate = 0.0;
    double stderr = 0.0;
    long m = 0;
    int samples = 0;
};

PhiEstimate phi_interface(const InteractionParams& params, double mu, long m, int samples, std::uint64_t seed,
                          EdgeRule rule = EdgeRule::lower_side);

double annealed_phi_bound(const InteractionParams& params, double mu, long m = 400,
                          EdgeRule rule = EdgeRule::lower_side);

struct InterfaceTableConfig {
    std::vector<long> m_schedule{100, 200, 400};
    int samples = 16;
    std::uint64_t seed = 1;
    EdgeRule rule = EdgeRule::lower_side;
    double mu_max = 8.0;

    std::string cache_key() const;
    void validate() const;
};

// phi(alpha, beta; mu) for one (alpha, beta) on a uniform grid in s = 1/mu.
class InterfaceRow {
public:
    InterfaceRow() = default;
    InterfaceRow(double alpha, double beta, double s0, double ds, std::vector<double> phi, std::vector<double> stderr,
                 std::vector<double> phi_top, double extrapolation_error, long m_top, int samples, double mu_cap);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double mu_min() const { return 1.0; }
    // Upper end of the mu range searched by interface_gain; the stored grid reaches slightly beyond.
    double mu_max() const { return mu_cap_; }
    std::size_t size() const { return phi_.size(); }
    double s_at(std::size_t i) const { return s0_ + ds_ * static_cast<double>(i); }

    // Extrapolated interface free energy per step.
    double operator()(double mu) const;
    // Mean at the largest m, without extrapolation.
    double top(double mu) const;
    double stderr_at(double mu) const;
    double extrapolation_error() const { return extrapolation_error_; }
    long m_top() const { return m_top_; }
    int samples() const { return samples_; }

    const std::vector<double>& phi_nodes() const { return phi_; }
    const std::vector<double>& stderr_nodes() const { return stderr_; }
    const std::vector<double>& top_nodes() const { return phi_top_; }

    nlohmann::json to_json() const;
    static InterfaceRow from_json(const nlohmann::json& j);

private:
    void check(double mu) const;

    double alpha_ = 0, beta_ = 0, s0_ = 1, ds_ = 1, mu_cap_ = 1;
    std::vector<double> phi_, stderr_, phi_top_;
    double extrapolation_error_ = 0.0;
    long m_top_ = 0;
    int samples_ = 0;
    UniformSpline spline_, spline_top_, spline_err_;
};

InterfaceRow compute_interface_row(const InteractionParams& params, const InterfaceTableConfig& config);

struct LocalizationSup {
    double value = 0.0;
    double mu = 1.0;
};

// sup over mu in [1, mu_max] of mu * (phi(mu) - lambda), grid scan plus refinement.
LocalizationSup interface_gain(const InterfaceRow& row, double lambda);

// Lazily filled table of rows keyed by exact (alpha, beta); safe for concurrent use.
class InterfaceTable {
public:
    static inline constexpr int kVersion = 1;

    explicit InterfaceTable(InterfaceTableConfig config);

    const InterfaceTableConfig& config() const { return config_; }
    std::string cache_key() const { return config_.cache_key(); }

    std::shared_ptr<const InterfaceRow> row(const InteractionParams& params) const;
    double phi(const InteractionParams& params, double mu) const { return (*row(params))(mu); }
    std::size_t size() const;
    bool dirty() const;

    nlohmann::json to_json() const;
    void merge_json(const nlohmann::json& j);

private:
    InterfaceTableConfig config_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<double, double>, std::shared_ptr<const InterfaceRow>> rows_;
    mutable bool dirty_ = false;
};

} // namespace emulsion
