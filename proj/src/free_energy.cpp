#include "emulsion/free_energy.hpp"

#include "emulsion/percolation.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emulsion {

double RModel::x_min() const { return std::max(0.0, 1.0 - rho_B); }
double RModel::x_max() const { return std::min(1.0, rho_A); }

RModel estimate_r_model(double p, long length, int samples, std::uint64_t seed, double snap_tol) {
    auto cap = [&](double q) {
        const double r = std::clamp(rho_star(q, length, samples, seed).rho_extrapolated, 0.0, 1.0);
        return r >= 1.0 - snap_tol ? 1.0 : r;
    };
    return {cap(p), cap(1.0 - p)};
}

FreeEnergyResult evaluate_f(const InteractionParams& params, double p, const PairTables& tables, const RModel& caps,
                            double tol, int max_iterations) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("free-energy tolerance must be positive");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("emulsion density p must lie in (0,1)");
    }
    const double x_lo = caps.x_min();
    const double x_hi = caps.x_max();
    if (x_lo > x_hi + 1e-15) {
        throw std::invalid_argument("percolation caps admit no visit frequencies (rho_A + rho_B < 1)");
    }
    FreeEnergyResult out;
    out.params = params;
    out.p = p;

    // Start from the best pure-crossing vertex at a common time a = 2.5.
    const double k0 = tables.kappa().kappa(2.5, 1.0);
    const double ha = 0.5 * params.alpha();
    const double hb = 0.5 * params.beta();
    double lambda = std::max(x_hi * ha + (1.0 - x_hi) * hb, x_lo * ha + (1.0 - x_lo) * hb) + k0;

    for (int it = 0; it < max_iterations; ++it) {
        out.lambda_history.push_back(lambda);
        std::array<PairGain, 4> g;
        for (PairKind k : kPairKinds) {
            g[static_cast<int>(k)] = tables.gain(k, params, lambda);
        }
        // Ties between pair types go to the pure (delocalized) pair.
        const PairKind ka = g[1].value > g[0].value ? PairKind::AB : PairKind::AA;
        const PairKind kb = g[2].value > g[3].value ? PairKind::BA : PairKind::BB;
        const PairGain& ga = g[static_cast<int>(ka)];
        const PairGain& gb = g[static_cast<int>(kb)];
        const double x = ga.value >= gb.value ? x_hi : x_lo;
        const double F = x * ga.value + (1.0 - x) * gb.value;
        const double D = x * ga.a + (1.0 - x) * gb.a;

        out.gains = g;
        out.rho.rho = {0.0, 0.0, 0.0, 0.0};
        out.rho.rho[static_cast<int>(ka)] += x;
        out.rho.rho[static_cast<int>(kb)] += 1.0 - x;
        for (PairKind k : kPairKinds) {
            out.a.a[static_cast<int>(k)] = g[static_cast<int>(k)].a;
        }
        out.iterations = it + 1;
        out.residual = std::max(0.0, F);
        out.bracket_breach = (x > 0.0 && ga.bracket_breach) || (x < 1.0 && gb.bracket_breach);
        if (F <= tol) {
            break;
        }
        lambda += F / D;
        if (it + 1 == max_iterations) {
            throw std::runtime_error("Dinkelbach iteration did not converge");
        }
    }
    out.f = lambda;

    ToleranceLedger& led = out.tolerance;
    double denom = 0.0;
    for (PairKind k : kPairKinds) {
        denom += out.rho.rho[static_cast<int>(k)] * out.a.a[static_cast<int>(k)];
    }
    for (PairKind k : kPairKinds) {
        const int i = static_cast<int>(k);
        const double w = out.rho.rho[i];
        if (w <= 0.0) {
            continue;
        }
        const PairGain& g = out.gains[i];
        const double d = g.a - g.strategy.c;
        led.kappa = std::max(led.kappa, tables.kappa().error_near(std::max(d, 1.0 - g.strategy.b + 1.0),
                                                                  std::max(1.0 - g.strategy.b, tables.kappa().nu_min())));
        if (g.strategy.b > 0.0) {
            const auto row = tables.interface_row(k, params);
            const double share = g.strategy.c / g.a;
            led.interface = std::max(led.interface, share * (row->extrapolation_error() + 2.0 * row->stderr_at(g.mu)));
        }
    }
    led.optimizer = denom > 0.0 ? out.residual / denom : out.residual;
    return out;
}

std::vector<FreeEnergyResult> f_surface(const std::vector<InteractionParams>& grid, double p,
                                        const PairTables& tables, const RModel& caps, double tol) {
    for (const auto& q : grid) {
        tables.interface_row(PairKind::AB, q);
        tables.interface_row(PairKind::BA, q);
    }
    std::vector<FreeEnergyResult> out(grid.size());
    tbb::parallel_for(std::size_t(0), grid.size(),
                      [&](std::size_t i) { out[i] = evaluate_f(grid[i], p, tables, caps, tol); });
    return out;
}

} // namespace emulsion
