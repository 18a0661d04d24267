#pragma once

#include "emulsion/entropy.hpp"
#include "emulsion/interface.hpp"
#include "emulsion/model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <string>
#include <vector>

namespace emulsion {

// Block-pair type: first letter is the crossed block, second the neighbour.
enum class PairKind { AA = 0, AB = 1, BA = 2, BB = 3 };
inline constexpr std::array<PairKind, 4> kPairKinds{PairKind::AA, PairKind::AB, PairKind::BA, PairKind::BB};
const char* to_string(PairKind k);
inline bool is_mixed(PairKind k) { return k == PairKind::AB || k == PairKind::BA; }

// Fraction b of the pair width spent along the interface using c steps (both per L).
struct PairStrategy {
    double b = 0.0;
    double c = 0.0;
};

struct PsiValue {
    double value = 0.0;
    PairStrategy strategy;
};

// Optimum of a (psi(a) - lambda) over a: value, maximizing a and strategy.
struct PairGain {
    double value = 0.0;
    double a = 2.0;
    PairStrategy strategy;
    double mu = 1.0;          // interface steps per unit distance when b > 0
    bool bracket_breach = false;
};

struct CrossingGain {
    double value = 0.0;
    double d = 2.0;
    bool bracket_breach = false;
};

// Upstream tables shared by all pair computations.
class PairTables {
public:
    PairTables(const EntropyTable& kappa, const InterfaceTable& phi, double a_max = 12.0);

    const EntropyTable& kappa() const { return kappa_; }
    const InterfaceTable& phi() const { return phi_; }
    double a_max() const { return a_max_; }
    std::string cache_key() const;

    // Total crossing entropy d * kappa(d, nu) of a nu x 1 block in d steps. Widths below
    // the smallest tabulated one interpolate linearly to the exact value 0 at nu = 0.
    double crossing_entropy(double d, double nu) const;
    // sup over d of crossing_entropy(d, nu) - lambda * d.
    CrossingGain crossing_gain(double nu, double lambda) const;

    PsiValue psi(PairKind kind, const InteractionParams& params, double a) const;
    PairGain gain(PairKind kind, const InteractionParams& params, double lambda) const;

    // Interface row used by a mixed pair: AB uses (alpha, beta), BA the swapped parameters.
    std::shared_ptr<const InterfaceRow> interface_row(PairKind kind, const InteractionParams& params) const;
    // Bulk energy per step of the crossed block.
    static double bulk(PairKind kind, const InteractionParams& params);

    // Tie margin: a localized strategy must beat the pure crossing by more than this.
    static inline constexpr double kTieMargin = 1e-10;

private:
    PsiValue psi_mixed(const InterfaceRow& row, double bulk, double a) const;
    PairGain gain_mixed(const InterfaceRow& row, double bulk, double lambda) const;

    const EntropyTable& kappa_;
    const InterfaceTable& phi_;
    double a_max_;
};

double psi_AA(const PairTables& t, const InteractionParams& params, double a);
double psi_BB(const PairTables& t, const InteractionParams& params, double a);
PsiValue psi_AB(const PairTables& t, const InteractionParams& params, double a);
PsiValue psi_BA(const PairTables& t, const InteractionParams& params, double a);

struct PsiCell {
    double alpha = 0.0;
    double beta = 0.0;
    double a = 2.0;
    std::array<PsiValue, 4> psi;
};

class PsiTable {
public:
    static inline constexpr int kVersion = 1;

    std::string cache_key;
    std::vector<InteractionParams> params;
    std::vector<double> a_grid;
    std::vector<PsiCell> cells; // params-major, then a

    const PsiCell& cell(std::size_t param_index, std::size_t a_index) const {
        return cells.at(param_index * a_grid.size() + a_index);
    }
    nlohmann::json to_json() const;
    static PsiTable from_json(const nlohmann::json& j);
};

PsiTable build_psi_tables(const PairTables& tables, const std::vector<InteractionParams>& params,
                          const std::vector<double>& a_grid);

} // namespace emulsion
