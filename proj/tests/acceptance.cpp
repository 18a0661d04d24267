// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned below.

#include "emulsion/cache.hpp"
#include "emulsion/config.hpp"
#include "emulsion/free_energy.hpp"
#include "emulsion/oracle.hpp"
#include "emulsion/percolation.hpp"
#include "emulsion/phases.hpp"
#include "support/brute.hpp"
#include "support/gen.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace emulsion;

namespace {

// criterion 1
constexpr double kKappa2Rel = 0.005;
constexpr double kKappaStarRel = 0.02;
constexpr double kEntropySeconds = 120.0;
// criterion 2
constexpr double kRho09Tol = 0.01;
constexpr double kPcLo = 0.62, kPcHi = 0.67;
constexpr double kPercSeconds = 300.0;
constexpr long kPercLength = 512;
constexpr int kPercSamples = 64;
constexpr double kPercSnap = 0.005;
// criterion 3
constexpr double kDelocTol = 1e-3;
// criterion 5
constexpr double kOracleRel = 0.10;
// criterion 6
constexpr double kCurveTol = 1e-4;
// criterion 7
constexpr double kExpLo = 1.7, kExpHi = 2.3;
constexpr double kProbeAlpha = 3.0;
// criterion 8
constexpr double kShift = 0.1;
constexpr double kShiftTol = 1e-6;

const double kHalfLog5 = 0.5 * std::log(5.0);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Report {
    int failed = 0;
    void line(int id, const std::string& name, bool pass, const std::string& detail) {
        std::printf("criterion %d [%s] %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        std::fflush(stdout);
        failed += pass ? 0 : 1;
    }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct World {
    RunConfig config;
    Cache cache;
    EntropyTable kappa;
    InterfaceTable phi;
    PairTables pairs;

    World(const RunConfig& c, const std::string& dir)
        : config(c), cache(dir), kappa(cache.entropy_table(c.entropy)), phi([&] {
              InterfaceTableConfig ic = c.interface;
              ic.seed = c.seed;
              return ic;
          }()),
          pairs(kappa, phi, c.a_max) {
        cache.load_interface(phi);
    }
    void save() const { cache.save_interface(phi); }

    RModel caps(double p) const { return estimate_r_model(p, kPercLength, kPercSamples, config.seed, kPercSnap); }
};

void entropy_calibration(Report& r) {
    const auto t0 = Clock::now();
    EntropyTableConfig c;
    c.schedule = {16, 32, 64};
    const EntropyTable t = EntropyTable::build(c);
    const double k2 = t.kappa(2.0, 1.0);
    const DiagonalSupremum s = sup_kappa_diag(t, 2.0, 1.0 + t.e_max(), 1e-10);
    const double secs = seconds_since(t0);
    const double e2 = std::abs(k2 - std::log(2.0)) / std::log(2.0);
    const double es = std::abs(s.kappa_star - kHalfLog5) / kHalfLog5;
    r.line(1, "entropy calibration", e2 < kKappa2Rel && es < kKappaStarRel && secs < kEntropySeconds,
           fmt("kappa(2,1)=%.6f rel.err %.2e (<%.3g); sup kappa=%.6f at a=%.4f rel.err %.2e (<%.3g); build %.1fs (<%.0fs)",
               k2, e2, kKappa2Rel, s.kappa_star, s.a_star, es, kKappaStarRel, secs, kEntropySeconds));
}

void percolation(Report& r, std::uint64_t seed) {
    const auto t0 = Clock::now();
    const PercolationEstimate top = rho_star(0.9, kPercLength, kPercSamples, seed);
    bool monotone = true;
    double prev = -1.0;
    std::ostringstream sweep;
    for (int k = 1; k <= 9; ++k) {
        const double v = rho_star(0.1 * k, kPercLength, kPercSamples, seed).rho_star;
        monotone = monotone && v >= prev;
        prev = v;
        sweep << (k > 1 ? "," : "") << fmt("%.3f", v);
    }
    const CriticalDensity pc = estimate_p_c(kPercLength, kPercSamples, kPercSnap, seed);
    const double secs = seconds_since(t0);
    // diagnostic only: a tighter threshold moves the estimate toward the known value
    const CriticalDensity tight = estimate_p_c(kPercLength, kPercSamples, 0.001, seed);
    const bool ok = std::abs(top.rho_star - 1.0) <= kRho09Tol && monotone && pc.p_c >= kPcLo && pc.p_c <= kPcHi &&
                    secs < kPercSeconds;
    r.line(2, "percolation", ok,
           fmt("rho*(0.9)=%.4f (1+-%.2f); rho* over p=0.1..0.9 [%s] %s; p_c=%.4f at tol %.3f in [%.2f,%.2f]; %.1fs (<%.0fs); "
               "diagnostic p_c at tol 0.001: %.4f",
               top.rho_star, kRho09Tol, sweep.str().c_str(), monotone ? "nondecreasing" : "NOT monotone", pc.p_c, kPercSnap,
               kPcLo, kPcHi, secs, kPercSeconds, tight.p_c));
}

void delocalized_identity(Report& r, World& w) {
    const double p = 0.7;
    const RModel caps = w.caps(p);
    const std::vector<std::pair<double, double>> pts{{0.5, 0.25}, {1.0, 0.5}, {2.0, 1.0}, {3.0, 1.0}, {4.0, 1.2}};
    bool ok = true;
    double worst = 0.0;
    std::ostringstream d;
    for (auto [a, b] : pts) {
        const BetaC bc = trace_beta_c(a, p, kCurveTol, w.phi);
        const FreeEnergyResult f = evaluate_f({a, b}, p, w.pairs, caps, w.config.f_tol);
        const double gap = std::abs(f.f - (0.5 * a + kHalfLog5));
        const bool pure = f.rho.rho[0] == 1.0 && f.strategy(PairKind::AA).b == 0.0;
        const bool here = b < bc.beta_c && gap <= kDelocTol + f.tolerance.kappa && pure;
        ok = ok && here;
        worst = std::max(worst, gap);
        d << fmt(" (%.2g,%.2g):beta_c=%.3f gap=%.1e%s", a, b, bc.beta_c, gap, pure ? "" : " NOT pure-AA");
    }
    r.line(3, "delocalized identity", ok,
           fmt("p=0.7 caps (%.4f,%.4f); worst |f-(a/2+log5/2)|=%.2e (<=%.0e+kappa tol);", caps.rho_A, caps.rho_B, worst,
               kDelocTol) +
               d.str());
}

void symmetries(Report& r, World& w) {
    const double p = 0.6;
    const RModel c = w.caps(p);
    const RModel c_swap = w.caps(1.0 - p);
    const std::vector<std::pair<double, double>> pts{{1.0, 0.5}, {2.0, -1.0}, {0.5, 1.5}, {-1.0, 0.5}, {3.0, 2.0}};
    bool ok = true;
    double worst1 = 0.0, worst2 = 0.0, abs1 = 0.0, abs2 = 0.0;
    int localized = 0;
    for (auto [a, b] : pts) {
        const FreeEnergyResult f = evaluate_f({a, b}, p, w.pairs, c, w.config.f_tol);
        const FreeEnergyResult g = evaluate_f({b, a}, 1.0 - p, w.pairs, c_swap, w.config.f_tol);
        const FreeEnergyResult h = evaluate_f({-b, -a}, p, w.pairs, c, w.config.f_tol);
        const double d1 = std::abs(f.f - g.f);
        const double d2 = std::abs(f.f - 0.5 * (a + b) - h.f);
        const double t1 = f.tolerance.total() + g.tolerance.total();
        const double t2 = f.tolerance.total() + h.tolerance.total();
        ok = ok && d1 <= 2.0 * t1 && d2 <= 2.0 * t2;
        worst1 = std::max(worst1, d1 / std::max(t1, 1e-300));
        worst2 = std::max(worst2, d2 / std::max(t2, 1e-300));
        abs1 = std::max(abs1, d1);
        abs2 = std::max(abs2, d2);
        for (PairKind k : kPairKinds) {
            if (f.rho.rho[static_cast<int>(k)] > 0.0 && f.strategy(k).b > 0.0) {
                ++localized;
                break;
            }
        }
    }
    r.line(4, "symmetry suite", ok,
           fmt("p=0.6, 5 points (%d with interface strategies); label swap max diff %.2e, ratio to combined "
               "tolerance %.3f; sign flip max diff %.2e, ratio %.3f (<=2)",
               localized, abs1, worst1, abs2, worst2));
}

void oracle(Report& r, World& w) {
    // exhaustive comparison on random probes
    gen::Rng rng(w.config.seed);
    int probes = 0;
    double worst = 0.0;
    for (int L = 2; L <= 3; ++L) {
        for (long n = 2L * L; n <= 12; ++n) {
            for (int k = 0; k < 3; ++k) {
                const EmulsionField f = rng.field(oracle_extent(n, L), L);
                const CopolymerSequence omega(rng.species(n));
                const InteractionParams q(rng.uniform(-1, 2), rng.uniform(-1, 2));
                const double a = exact_log_Z(n, L, omega, f, q, 0.0);
                const double b = brute::oracle_log_z(n, L, omega, f, q);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
                ++probes;
            }
        }
    }
    const bool exact = worst <= 1e-12;
    const std::vector<std::pair<int, long>> schedule{{2, 200}, {4, 400}, {8, 1600}};
    std::vector<double> means;
    std::ostringstream d;
    for (auto [L, n] : schedule) {
        const OracleResult o = quenched_f_mc({0.0, 0.0}, 0.5, n, L, w.config.oracle_samples, w.config.seed);
        means.push_back(o.mean);
        d << fmt(" (L=%d,n=%ld):%.4f", L, n, o.mean);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i) {
        monotone = monotone && means[i] >= means[i - 1];
    }
    const double rel = std::abs(means.back() - kHalfLog5) / kHalfLog5;
    r.line(5, "oracle equivalence", exact && monotone && rel <= kOracleRel,
           fmt("%d exhaustive probes, worst rel. diff %.1e; f_n(0,0) at (8,1600) off log5/2 by %.1f%% (<=%.0f%%); trend %s;",
               probes, worst, 100 * rel, 100 * kOracleRel, monotone ? "increasing" : "NOT monotone") +
               d.str());
}

void critical_curve(Report& r, World& w) {
    const std::vector<double> alphas{0.25, 0.5, 1.0, 2.0, 4.0};
    const CriticalCurve c = trace_critical_curve(alphas, 0.7, kCurveTol, w.phi);
    bool diag = true, increasing = true;
    std::ostringstream d;
    double prev = -1e300;
    for (auto [a, b] : c.samples) {
        if (a < c.alpha_star) {
            diag = diag && std::abs(b - a) <= kCurveTol;
        }
        if (a >= 0.5) {
            increasing = increasing && b > prev;
            prev = b;
        }
        d << fmt(" %.2g:%.4f", a, b);
    }
    const bool small = !c.samples.empty() && c.samples.front().first < c.alpha_star;
    r.line(6, "supercritical critical curve", diag && small && increasing && c.slope_discontinuity_detected,
           fmt("p=0.7 beta_c:%s; alpha*=%.4f; beta_c=alpha below alpha* %s; strictly increasing %s; slope right of "
               "alpha* %.3f, discontinuity %s",
               d.str().c_str(), c.alpha_star, diag && small ? "yes" : "NO", increasing ? "yes" : "NO", c.slope_right,
               c.slope_discontinuity_detected ? "detected" : "NOT detected"));
}

void transition_order(Report& r, World& w) {
    const TransitionProbe t = transition_order_probe(kProbeAlpha, 0.7, w.config.probe_deltas, w.pairs, w.caps(0.7));
    std::ostringstream d;
    for (std::size_t i = 0; i < t.deltas.size(); ++i) {
        d << fmt(" %.2g:%.3e", t.deltas[i], t.delta_f[i]);
    }
    r.line(7, "transition order", t.exponent >= kExpLo && t.exponent <= kExpHi && t.C1 <= t.C2,
           fmt("alpha=%.1f beta_c=%.5f; exponent %.3f in [%.1f,%.1f]; C1=%.4f C2=%.4f; delta f:%s", t.alpha, t.beta_c,
               t.exponent, kExpLo, kExpHi, t.C1, t.C2, d.str().c_str()));
}

void subcritical_topology(Report& r, World& w) {
    const double p = 0.5;
    const RModel caps = w.caps(p);
    // window around the two junctions, in grid units of 1/16
    const PhaseGrid grid{0.0625, 24, 8, 4, 24};
    const PhaseDiagram d = phase_diagram(p, false, grid, w.pairs, caps);
    w.save();
    std::set<std::string> kinds;
    for (const auto& c : d.curves) {
        kinds.insert(c.kind);
    }
    std::ostringstream labels;
    for (const auto& [l, n] : d.regions_by_label) {
        labels << " " << l << ":" << n;
    }
    std::ostringstream junctions;
    for (const auto& j : d.junctions) {
        junctions << fmt(" (%.3f,%.3f)+-%.3f", j.alpha, j.beta, j.error);
    }
    const bool topology = d.regions == 4 && kinds.size() == 3 && d.junctions.size() == 2;

    // shift along the diagonal inside D1 and D2
    double worst = 0.0, worst_gauge = 0.0;
    int shifted = 0;
    for (const auto& pt : d.points) {
        if (pt.label != Phase::D1 && pt.label != Phase::D2) {
            continue;
        }
        const InteractionParams q(pt.params.alpha() + kShift, pt.params.beta() + kShift);
        const FreeEnergyResult s = evaluate_f(q, p, w.pairs, caps, w.config.f_tol);
        if (classify_subcritical(s, w.pairs) != pt.label) {
            continue;
        }
        worst = std::max(worst, std::abs(s.f - pt.f));
        worst_gauge = std::max(worst_gauge, std::abs(s.f - pt.f - 0.5 * kShift));
        ++shifted;
    }
    w.save();

    // no localized label at beta <= 0
    int nonpositive = 0, localized = 0;
    for (int i = 1; i <= 8; ++i) {
        for (int j = -i; j <= 0; ++j) {
            const FreeEnergyResult f = evaluate_f({0.5 * i, 0.5 * j}, p, w.pairs, caps, w.config.f_tol);
            const Phase l = classify_subcritical(f, w.pairs);
            localized += (l == Phase::L1 || l == Phase::L2) ? 1 : 0;
            ++nonpositive;
        }
    }
    w.save();
    const bool shift_ok = shifted > 0 && worst <= kShiftTol;
    r.line(8, "subcritical topology", topology && shift_ok && localized == 0,
           fmt("p=0.5 caps (%.4f,%.4f); window alpha in [0.5,1.5], beta in [0.25,1.5], step 1/16; regions %d (4):%s; "
               "curves %zu (3); junctions %zu (2):%s; D-shift t=%.1f over %d points max|f(a+t,b+t)-f|=%.4f (<=%.0e), "
               "max|f(a+t,b+t)-f-t/2|=%.2e; L labels at beta<=0: %d of %d",
               caps.rho_A, caps.rho_B, d.regions, labels.str().c_str(), kinds.size(), d.junctions.size(),
               junctions.str().c_str(), kShift, shifted, worst, kShiftTol, worst_gauge, localized, nonpositive));
}

void discontinuity(Report& r, World& w) {
    const PhaseGrid grid{0.25, 12, 2, 0, 12};
    const RModel c55 = w.caps(0.55);
    const RModel c70 = w.caps(0.70);
    const PhaseDiagram a = phase_diagram(0.55, c55.rho_A >= 1.0, grid, w.pairs, c55);
    w.save();
    const PhaseDiagram b = phase_diagram(0.70, c70.rho_A >= 1.0, grid, w.pairs, c70);
    w.save();
    const auto ba = boundary_by_column(a, "D|L");
    const auto bb = boundary_by_column(b, "D|L");
    double gap = 0.0;
    int common = 0;
    std::ostringstream d;
    for (const auto& [i, beta] : ba) {
        const auto it = bb.find(i);
        if (it == bb.end()) {
            continue;
        }
        ++common;
        gap = std::max(gap, std::abs(beta - it->second));
        d << fmt(" %.2f:%.3f/%.3f", i * grid.step, beta, it->second);
    }
    r.line(9, "discontinuity at p_c", common > 0 && gap > grid.step,
           fmt("caps p=0.55 (%.4f,%.4f) p=0.70 (%.4f,%.4f); D|L boundary beta per alpha (0.55/0.70):%s; max gap %.3f "
               "(> step %.2f) over %d common columns",
               c55.rho_A, c55.rho_B, c70.rho_A, c70.rho_B, d.str().c_str(), gap, grid.step, common));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string cache_dir;
    std::vector<int> only;
    app.add_option("--cache-dir", cache_dir, "table cache directory");
    app.add_option("--only", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    RunConfig config;
    World w(config, cache_dir);
    Report r;
    const std::vector<std::function<void()>> steps{
        [&] { entropy_calibration(r); },   [&] { percolation(r, config.seed); },
        [&] { delocalized_identity(r, w); }, [&] { symmetries(r, w); },
        [&] { oracle(r, w); },               [&] { critical_curve(r, w); },
        [&] { transition_order(r, w); },     [&] { subcritical_topology(r, w); },
        [&] { discontinuity(r, w); },
    };
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end()) {
            continue;
        }
        const auto t0 = Clock::now();
        try {
            steps[i]();
        } catch (const std::exception& e) {
            r.line(static_cast<int>(i + 1), "error", false, e.what());
        }
        w.save();
        std::printf("  (%.1fs)\n", seconds_since(t0));
    }
    std::printf("%d criteria failed\n", r.failed);
    return r.failed == 0 ? 0 : 1;
}
