#include "emulsion/phases.hpp"
#include "support/tables.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace emulsion;

TEST_CASE("critical constants") {
    const CriticalConstants e = exact_constants();
    CHECK(e.entropy == doctest::Approx(0.5 * std::log(5.0)).epsilon(1e-15));
    CHECK(e.threshold == doctest::Approx(0.5 * std::log(9.0 / 5.0)).epsilon(1e-15));
    const CriticalConstants c = calibrated_constants(fixture::pairs());
    CHECK(std::abs(c.entropy - e.entropy) < 0.02);
    // the coarse test table resolves the width direction poorly near nu = 1
    CHECK(c.threshold > 0.0);
    CHECK(c.threshold < 2.0);
}

TEST_CASE("localization excess") {
    const InterfaceTable& t = fixture::interface();
    const Excess weak = localization_excess({2.0, 0.0}, t);
    const Excess strong = localization_excess({3.0, 3.0}, t);
    CHECK_FALSE(weak.localized);
    CHECK(strong.localized);
    CHECK(strong.value > weak.value);
    CHECK(strong.localized == (strong.value > 0.0));
    CHECK(strong.mu >= 1.0);
}

TEST_CASE("beta_c") {
    const InterfaceTable& t = fixture::interface();
    CHECK(trace_beta_c(0.0, 0.7, 1e-4, t).beta_c == 0.0);
    const BetaC low = trace_beta_c(0.5, 0.7, 1e-4, t);
    CHECK(low.on_diagonal);
    CHECK(low.beta_c == 0.5);
    const BetaC high = trace_beta_c(3.0, 0.7, 1e-4, t);
    CHECK_FALSE(high.on_diagonal);
    CHECK(high.beta_c < 3.0);
    CHECK(localization_excess({3.0, high.beta_c + 0.01}, t).localized);
    CHECK_FALSE(localization_excess({3.0, high.beta_c - 0.01}, t).localized);
}

TEST_CASE("critical curve shape") {
    const CriticalCurve c = trace_critical_curve({0.5, 1.5, 3.0}, 0.7, 1e-3, fixture::interface());
    REQUIRE(c.samples.size() == 3);
    CHECK(c.samples[0].second == 0.5);
    CHECK(c.samples[1].second <= 1.5);
    CHECK(c.samples[2].second >= c.samples[1].second);
    CHECK(c.alpha_star > 0.5);
    CHECK(c.alpha_star < 1.5);
    CHECK(c.slope_discontinuity_detected);
    CHECK(c.slope_right < 0.8);
}

TEST_CASE("grid vertices") {
    const PhaseGrid g{0.5, 3};
    const auto v = g.vertices();
    CHECK(v.size() == 1 + 3 + 5 + 7);
    for (const auto& [i, j] : v) {
        CHECK(g.contains(i, j));
        CHECK(std::abs(j) <= i);
    }
    const PhaseGrid w{0.5, 6, 2, -1, 3};
    for (const auto& [i, j] : w.vertices()) {
        CHECK(i >= 2);
        CHECK(j >= -1);
        CHECK(j <= std::min(i, 3));
    }
    CHECK_FALSE(w.contains(1, 0));
}

namespace {

void check_structure(const PhaseDiagram& d) {
    const auto v = d.grid.vertices();
    REQUIRE(d.points.size() == v.size());
    int total = 0;
    for (const auto& [label, n] : d.regions_by_label) {
        CHECK(n >= 1);
        total += n;
    }
    CHECK(total == d.regions);
    for (std::size_t k = 0; k < v.size(); ++k) {
        CHECK(d.at(v[k].first, v[k].second) == &d.points[k]);
    }
    // every curve point is the midpoint of an edge whose ends carry different labels
    const double h = d.grid.step;
    for (const auto& c : d.curves) {
        for (const auto& [a, b] : c.points) {
            bool found = false;
            for (auto [di, dj] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
                const double ia = a / h - 0.5 * di;
                const double ja = b / h - 0.5 * dj;
                const int i = static_cast<int>(std::lround(ia));
                const int j = static_cast<int>(std::lround(ja));
                if (std::abs(ia - i) > 1e-9 || std::abs(ja - j) > 1e-9) {
                    continue;
                }
                const PhasePoint* p = d.at(i, j);
                const PhasePoint* q = d.at(i + di, j + dj);
                if (p && q && p->label != q->label) {
                    found = true;
                }
            }
            CHECK(found);
        }
    }
    for (const auto& t : d.junctions) {
        CHECK(t.labels.size() >= 3); // nearby junctions merge on a coarse grid
        CHECK(t.error > 0.0);
    }
}

} // namespace

TEST_CASE("supercritical diagram on a coarse grid") {
    const PhaseDiagram d = phase_diagram(0.7, true, PhaseGrid{0.5, 6}, fixture::pairs(), RModel{1.0, 0.76});
    check_structure(d);
    CHECK(d.at(2, 1)->label == Phase::D);
    CHECK(d.at(6, 6)->label == Phase::L);
    CHECK(d.at(2, 1)->f == doctest::Approx(0.5 + calibrated_constants(fixture::pairs()).entropy).epsilon(1e-8));
    CHECK(d.label_disagreements == 0);
    std::set<std::string> kinds;
    for (const auto& c : d.curves) {
        kinds.insert(c.kind);
    }
    CHECK(kinds == std::set<std::string>{"D|L"});
    const auto cols = boundary_by_column(d, "D|L");
    CHECK_FALSE(cols.empty());
    for (const auto& [i, beta] : cols) {
        CHECK(beta <= i * d.grid.step + 1e-12);
    }
}

TEST_CASE("subcritical labels") {
    const PairTables& t = fixture::pairs();
    const RModel caps{0.94, 0.94};
    const FreeEnergyResult deep = evaluate_f({0.25, 0.25}, 0.5, t, caps);
    CHECK(classify_subcritical(deep, t) == Phase::D1);
    const FreeEnergyResult both = evaluate_f({4.0, 3.5}, 0.5, t, caps);
    CHECK(classify_subcritical(both, t) == Phase::L2);
    const FreeEnergyResult below = evaluate_f({2.0, -1.0}, 0.5, t, caps);
    CHECK(classify_subcritical(below, t) == Phase::D2);
    CHECK(std::string(to_string(Phase::L1)) == "L1");
}

TEST_CASE("subcritical diagram on a coarse grid") {
    const PhaseDiagram d = phase_diagram(0.5, false, PhaseGrid{0.5, 4}, fixture::pairs(), RModel{0.94, 0.94});
    check_structure(d);
    CHECK_FALSE(d.supercritical);
    for (const auto& p : d.points) {
        CHECK(p.label != Phase::D);
        CHECK(p.label != Phase::L);
    }
}

TEST_CASE("transition probe") {
    const TransitionProbe pr = transition_order_probe(3.0, 0.7, {0.04, 0.08, 0.16}, fixture::pairs(), RModel{1.0, 0.76});
    REQUIRE(pr.delta_f.size() == 3);
    for (double v : pr.delta_f) {
        CHECK(v >= -1e-9);
    }
    CHECK(pr.C1 <= pr.C2);
    CHECK(std::isfinite(pr.exponent));
}
