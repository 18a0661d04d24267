#pragma once

#include "emulsion/block_pairs.hpp"
#include "emulsion/free_energy.hpp"
#include "emulsion/interface.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace emulsion {

// Delocalized entropy per step and localization threshold of the supercritical criterion.
struct CriticalConstants {
    double entropy = 0.0;   // f = alpha/2 + entropy in the delocalized phase
    double threshold = 0.0; // localized iff sup_mu mu (phi - alpha/2 - entropy) > threshold
};

// (1/2 log 5, 1/2 log(9/5)).
CriticalConstants exact_constants();
// The same two numbers as produced by the entropy table, so that the criterion matches
// the free-energy pipeline exactly: entropy = sup_a kappa(a,1), threshold = d/dnu of the
// crossing gain at nu = 1.
CriticalConstants calibrated_constants(const PairTables& tables);

struct Excess {
    double value = 0.0;
    double mu = 1.0;
    bool localized = false;
};

Excess localization_excess(const InteractionParams& params, const InterfaceTable& table,
                           const CriticalConstants& constants = exact_constants());

struct BetaC {
    double beta_c = 0.0;
    bool on_diagonal = false;
    bool widened = false;
    bool constant_predicate = false;
};

BetaC trace_beta_c(double alpha, double p, double tol, const InterfaceTable& table,
                   const CriticalConstants& constants = exact_constants());

struct CriticalCurve {
    std::vector<std::pair<double, double>> samples; // (alpha, beta_c)
    double alpha_star = 0.0;
    bool slope_discontinuity_detected = false;
    double slope_right = 1.0; // slope of beta_c just above alpha_star
};

CriticalCurve trace_critical_curve(const std::vector<double>& alphas, double p, double tol, const InterfaceTable& table,
                                   const CriticalConstants& constants = exact_constants(), double alpha_hi = 6.0);

struct TransitionProbe {
    double alpha = 0.0;
    double beta_c = 0.0;
    std::vector<double> deltas;
    std::vector<double> delta_f;
    double exponent = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

TransitionProbe transition_order_probe(double alpha, double p, const std::vector<double>& deltas,
                                       const PairTables& tables, const RModel& caps, double tol = 1e-7);

enum class Phase { D, L, D1, D2, L1, L2 };
const char* to_string(Phase p);

// Interface localization of a mixed pair at its optimal mu: the largest-length interface
// free energy minus the better one-sided bulk value and the free walk entropy. Positive
// means the walk prefers the interface to either side.
double interface_binding(const PairTables& tables, PairKind kind, const InteractionParams& params, double mu);

inline constexpr double kBindingMargin = 1e-9;

// Subcritical label from the optimizer structure of the pair types that are visited.
// Ties go toward the more delocalized label.
Phase classify_subcritical(const FreeEnergyResult& result, const PairTables& tables);

struct PhasePoint {
    InteractionParams params;
    double p = 0.5;
    double f = 0.0;
    Phase label = Phase::D;
    double S_excess = 0.0;       // sup_mu mu (phi - alpha/2 - 1/2 log 5) - 1/2 log(9/5)
    Phase f_label = Phase::D;    // supercritical label from comparing f with alpha/2 + entropy
    FreeEnergyResult result;
};

struct BoundaryCurve {
    std::string kind; // "D|L", "D1|D2", "L1|L2"
    std::vector<std::pair<double, double>> points;
};

struct TriplePoint {
    double alpha = 0.0;
    double beta = 0.0;
    double error = 0.0;
    std::vector<Phase> labels;
};

// Triangulated cone grid: vertices (i, j) with alpha = i * step, beta = j * step, |j| <= i,
// optionally restricted to a window; neighbours are (i+-1, j), (i, j+-1) and (i+-1, j+-1).
struct PhaseGrid {
    double step = 0.25;
    int columns = 16; // largest i
    int i_min = 0;
    int j_min = -1 << 20;
    int j_max = 1 << 20;

    int lo(int i) const { return std::max(-i, j_min); }
    int hi(int i) const { return std::min(i, j_max); }
    bool contains(int i, int j) const { return i >= i_min && i <= columns && j >= lo(i) && j <= hi(i); }
    std::vector<std::pair<int, int>> vertices() const;
};

struct PhaseDiagram {
    double p = 0.5;
    bool supercritical = true;
    PhaseGrid grid;
    std::vector<PhasePoint> points; // in PhaseGrid::vertices() order
    std::map<std::string, int> regions_by_label;
    int regions = 0;
    std::vector<BoundaryCurve> curves;
    std::vector<TriplePoint> junctions;
    int label_disagreements = 0; // supercritical: criterion vs free-energy route, outside the tolerance band

    const PhasePoint* at(int i, int j) const;

    std::vector<std::size_t> column_start; // index of (i, grid.lo(i)) for i >= grid.i_min
};

PhaseDiagram phase_diagram(double p, bool supercritical, const PhaseGrid& grid, const PairTables& tables,
                           const RModel& caps);

// Lowest beta per alpha column at which a boundary of the given kind is crossed.
std::map<int, double> boundary_by_column(const PhaseDiagram& d, const std::string& kind);

} // namespace emulsion
