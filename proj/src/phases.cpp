#include "emulsion/phases.hpp"

#include "emulsion/numeric.hpp"

#include <tbb/parallel_for.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

namespace emulsion {

CriticalConstants exact_constants() {
    return {0.5 * std::log(5.0), 0.5 * std::log(9.0 / 5.0)};
}

CriticalConstants calibrated_constants(const PairTables& tables) {
    const double d_hi = 1.0 + std::min(tables.kappa().e_max(), tables.a_max() - 1.0);
    const DiagonalSupremum s = sup_kappa_diag(tables.kappa(), 2.0, d_hi, 1e-12);
    CriticalConstants c;
    c.entropy = s.kappa_star;
    // one-sided: pairs only ever use widths nu <= 1
    const double h = 1e-3;
    auto K = [&](double nu) { return tables.crossing_gain(nu, c.entropy).value; };
    c.threshold = (3.0 * K(1.0) - 4.0 * K(1.0 - h) + K(1.0 - 2.0 * h)) / (2.0 * h);
    return c;
}

Excess localization_excess(const InteractionParams& params, const InterfaceTable& table,
                           const CriticalConstants& constants) {
    const auto row = table.row(params);
    const LocalizationSup s = interface_gain(*row, 0.5 * params.alpha() + constants.entropy);
    Excess e;
    e.value = s.value;
    e.mu = s.mu;
    e.localized = s.value > constants.threshold;
    return e;
}

BetaC trace_beta_c(double alpha, double p, double tol, const InterfaceTable& table,
                   const CriticalConstants& constants) {
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("trace_beta_c needs alpha >= 0");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("emulsion density p must lie in (0,1)");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("bisection tolerance must be positive");
    }
    BetaC out;
    if (alpha == 0.0) {
        out.on_diagonal = true;
        return out;
    }
    auto loc = [&](double beta) { return localization_excess(InteractionParams(alpha, beta), table, constants).localized; };
    if (!loc(alpha)) {
        out.beta_c = alpha;
        out.on_diagonal = true;
        return out;
    }
    double lo = 0.0;
    double hi = alpha;
    if (loc(lo)) {
        out.widened = true;
        lo = -alpha;
        if (loc(lo)) {
            out.constant_predicate = true;
            out.beta_c = lo;
            return out;
        }
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (loc(mid) ? hi : lo) = mid;
    }
    out.beta_c = 0.5 * (lo + hi);
    return out;
}

CriticalCurve trace_critical_curve(const std::vector<double>& alphas, double p, double tol, const InterfaceTable& table,
                                   const CriticalConstants& constants, double alpha_hi) {
    CriticalCurve c;
    double last_diag = 0.0;
    for (double a : alphas) {
        const BetaC b = trace_beta_c(a, p, tol, table, constants);
        c.samples.emplace_back(a, b.beta_c);
        if (b.on_diagonal) {
            last_diag = std::max(last_diag, a);
        }
    }
    auto diag_loc = [&](double a) {
        return localization_excess(InteractionParams(a, a), table, constants).localized;
    };
    double lo = last_diag;
    double hi = alpha_hi;
    for (const auto& [a, b] : c.samples) {
        if (a > last_diag && a < hi) {
            hi = a;
        }
    }
    if (!diag_loc(hi)) {
        c.alpha_star = hi;
        return c;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (diag_loc(mid) ? hi : lo) = mid;
    }
    c.alpha_star = 0.5 * (lo + hi);

    const double h = 0.05;
    const double b1 = trace_beta_c(c.alpha_star + h, p, tol, table, constants).beta_c;
    const double b2 = trace_beta_c(c.alpha_star + 2.0 * h, p, tol, table, constants).beta_c;
    c.slope_right = (b2 - b1) / h;
    c.slope_discontinuity_detected = std::abs(c.slope_right - 1.0) > 0.2;
    return c;
}

TransitionProbe transition_order_probe(double alpha, double p, const std::vector<double>& deltas,
                                       const PairTables& tables, const RModel& caps, double tol) {
    if (deltas.size() < 2) {
        throw std::invalid_argument("order probe needs at least two deltas");
    }
    const CriticalConstants cal = calibrated_constants(tables);
    const BetaC bc = trace_beta_c(alpha, p, tol, tables.phi(), cal);
    if (bc.on_diagonal) {
        throw std::domain_error("order probe needs alpha above alpha_star");
    }
    TransitionProbe t;
    t.alpha = alpha;
    t.beta_c = bc.beta_c;
    t.deltas = deltas;
    const double f0 = evaluate_f(InteractionParams(alpha, bc.beta_c), p, tables, caps, 1e-13).f;
    std::vector<double> lx, ly;
    t.C1 = std::numeric_limits<double>::infinity();
    t.C2 = 0.0;
    for (double d : deltas) {
        const double df = evaluate_f(InteractionParams(alpha, bc.beta_c + d), p, tables, caps, 1e-13).f - f0;
        t.delta_f.push_back(df);
        if (df > 0.0) {
            lx.push_back(std::log(d));
            ly.push_back(std::log(df));
        }
        t.C1 = std::min(t.C1, df / (d * d));
        t.C2 = std::max(t.C2, df / (d * d));
    }
    if (lx.size() < 2) {
        throw std::runtime_error("free-energy increments are below the noise floor for every delta");
    }
    t.exponent = fit_line(lx, ly).slope;
    return t;
}

const char* to_string(Phase p) {
    switch (p) {
    case Phase::D: return "D";
    case Phase::L: return "L";
    case Phase::D1: return "D1";
    case Phase::D2: return "D2";
    case Phase::L1: return "L1";
    case Phase::L2: return "L2";
    }
    return "?";
}

double interface_binding(const PairTables& tables, PairKind kind, const InteractionParams& params, double mu) {
    const auto row = tables.interface_row(kind, params);
    const auto free_row = tables.phi().row(InteractionParams(0.0, 0.0));
    mu = std::clamp(mu, 1.0, std::min(row->mu_max(), free_row->mu_max()));
    const double bulk = 0.5 * std::max({row->alpha(), row->beta(), 0.0});
    return row->top(mu) - bulk - free_row->top(mu);
}

Phase classify_subcritical(const FreeEnergyResult& r, const PairTables& tables) {
    auto visited = [&](PairKind k) { return r.rho.rho[static_cast<int>(k)] > 0.0; };
    auto state = [&](PairKind k) {
        // 0 pure crossing, 1 dip, 2 localized
        if (!visited(k) || r.strategy(k).b <= 0.0) {
            return 0;
        }
        const double e = interface_binding(tables, k, r.params, r.gains[static_cast<int>(k)].mu);
        return e > kBindingMargin ? 2 : 1;
    };
    const int ab = state(PairKind::AB);
    const int ba = state(PairKind::BA);
    if (ab == 2 && ba == 2) {
        return Phase::L2;
    }
    if (ab == 2 || ba == 2) {
        return Phase::L1;
    }
    if (ab == 1 || ba == 1) {
        return Phase::D2;
    }
    return Phase::D1;
}

std::vector<std::pair<int, int>> PhaseGrid::vertices() const {
    std::vector<std::pair<int, int>> v;
    for (int i = i_min; i <= columns; ++i) {
        for (int j = lo(i); j <= hi(i); ++j) {
            v.emplace_back(i, j);
        }
    }
    return v;
}

const PhasePoint* PhaseDiagram::at(int i, int j) const {
    if (!grid.contains(i, j)) {
        return nullptr;
    }
    return &points[column_start[i - grid.i_min] + (j - grid.lo(i))];
}

namespace {

bool is_delocalized(Phase p) { return p == Phase::D || p == Phase::D1 || p == Phase::D2; }

std::string boundary_kind(Phase a, Phase b) {
    if (is_delocalized(a) && is_delocalized(b)) {
        return "D1|D2";
    }
    if (!is_delocalized(a) && !is_delocalized(b)) {
        return "L1|L2";
    }
    return "D|L";
}

struct Mid {
    double a, b;
};

std::vector<std::vector<Mid>> cluster(const std::vector<Mid>& pts, double reach) {
    std::vector<int> comp(pts.size(), -1);
    std::vector<std::vector<Mid>> out;
    for (std::size_t s = 0; s < pts.size(); ++s) {
        if (comp[s] >= 0) {
            continue;
        }
        const int id = static_cast<int>(out.size());
        out.emplace_back();
        std::deque<std::size_t> q{s};
        comp[s] = id;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop_front();
            out.back().push_back(pts[u]);
            for (std::size_t w = 0; w < pts.size(); ++w) {
                if (comp[w] < 0 && std::max(std::abs(pts[w].a - pts[u].a), std::abs(pts[w].b - pts[u].b)) <= reach) {
                    comp[w] = id;
                    q.push_back(w);
                }
            }
        }
    }
    return out;
}

} // namespace

PhaseDiagram phase_diagram(double p, bool supercritical, const PhaseGrid& grid, const PairTables& tables,
                           const RModel& caps) {
    if (!(grid.step > 0.0) || grid.columns < 1 || grid.i_min < 0 || grid.i_min >= grid.columns) {
        throw std::invalid_argument("phase grid needs a positive step and at least two columns");
    }
    PhaseDiagram d;
    d.p = p;
    d.supercritical = supercritical;
    d.grid = grid;
    const auto verts = grid.vertices();
    for (int i = grid.i_min, n = 0; i <= grid.columns; ++i) {
        d.column_start.push_back(static_cast<std::size_t>(n));
        n += std::max(0, grid.hi(i) - grid.lo(i) + 1);
    }
    const double h = grid.step;
    for (const auto& [i, j] : verts) {
        const InteractionParams q(i * h, j * h);
        tables.interface_row(PairKind::AB, q);
        tables.interface_row(PairKind::BA, q);
    }
    tables.phi().row(InteractionParams(0.0, 0.0));
    const CriticalConstants exact = exact_constants();
    const CriticalConstants cal = calibrated_constants(tables);

    d.points.resize(verts.size());
    std::vector<char> excused(verts.size(), 0);
    tbb::parallel_for(std::size_t(0), verts.size(), [&](std::size_t n) {
        const auto [i, j] = verts[n];
        const InteractionParams q(i * h, j * h);
        PhasePoint& pt = d.points[n];
        pt.params = q;
        pt.p = p;
        pt.result = evaluate_f(q, p, tables, caps);
        pt.f = pt.result.f;
        const Excess se = localization_excess(q, tables.phi(), exact);
        pt.S_excess = se.value - exact.threshold;
        if (supercritical) {
            pt.label = se.localized ? Phase::L : Phase::D;
            const double gap = pt.f - (0.5 * q.alpha() + cal.entropy);
            pt.f_label = gap > 1e-8 + pt.result.tolerance.optimizer ? Phase::L : Phase::D;
            const Excess sc = localization_excess(q, tables.phi(), cal);
            const auto row = tables.phi().row(q);
            const double band = se.mu * (row->extrapolation_error() + 2.0 * row->stderr_at(se.mu));
            excused[n] = sc.localized != se.localized || std::abs(pt.S_excess) <= band;
        } else {
            pt.label = classify_subcritical(pt.result, tables);
            pt.f_label = pt.label;
        }
    });
    for (std::size_t n = 0; n < verts.size(); ++n) {
        if (d.points[n].label != d.points[n].f_label && !excused[n]) {
            ++d.label_disagreements;
        }
    }

    // connected regions, 4-neighbour
    std::vector<int> comp(verts.size(), -1);
    auto index = [&](int i, int j) { return static_cast<std::size_t>(d.at(i, j) - d.points.data()); };
    const int di[6] = {1, -1, 0, 0, 1, -1};
    const int dj[6] = {0, 0, 1, -1, 1, -1};
    for (std::size_t s = 0; s < verts.size(); ++s) {
        if (comp[s] >= 0) {
            continue;
        }
        const Phase lab = d.points[s].label;
        comp[s] = d.regions;
        std::deque<std::size_t> q{s};
        while (!q.empty()) {
            const auto [i, j] = verts[q.front()];
            q.pop_front();
            for (int k = 0; k < 6; ++k) {
                const PhasePoint* nb = d.at(i + di[k], j + dj[k]);
                if (nb == nullptr || nb->label != lab) {
                    continue;
                }
                const std::size_t w = index(i + di[k], j + dj[k]);
                if (comp[w] < 0) {
                    comp[w] = d.regions;
                    q.push_back(w);
                }
            }
        }
        ++d.regions_by_label[to_string(lab)];
        ++d.regions;
    }

    // boundary edges grouped by transition kind, then joined through shared cells
    std::map<std::string, std::vector<Mid>> edges;
    for (const auto& [i, j] : verts) {
        const PhasePoint* u = d.at(i, j);
        for (int k : {0, 2, 4}) {
            const PhasePoint* w = d.at(i + di[k], j + dj[k]);
            if (w != nullptr && w->label != u->label) {
                edges[boundary_kind(u->label, w->label)].push_back(
                    {(i + 0.5 * di[k]) * h, (j + 0.5 * dj[k]) * h});
            }
        }
    }
    for (const auto& [kind, mids] : edges) {
        for (auto& c : cluster(mids, h * (1.0 + 1e-9))) {
            std::sort(c.begin(), c.end(), [](const Mid& x, const Mid& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
            BoundaryCurve bc;
            bc.kind = kind;
            for (const Mid& m : c) {
                bc.points.emplace_back(m.a, m.b);
            }
            d.curves.push_back(std::move(bc));
        }
    }

    // triple junctions: triangles of the grid whose corners carry three labels
    std::vector<Mid> cells;
    std::vector<std::set<Phase>> cell_labels;
    for (const auto& [i, j] : verts) {
        for (const auto& tri : {std::array<std::pair<int, int>, 3>{{{i, j}, {i + 1, j}, {i + 1, j + 1}}},
                                std::array<std::pair<int, int>, 3>{{{i, j}, {i, j + 1}, {i + 1, j + 1}}}}) {
            std::set<Phase> labs;
            bool complete = true;
            for (const auto& [a, b] : tri) {
                const PhasePoint* pt = d.at(a, b);
                if (pt == nullptr) {
                    complete = false;
                    break;
                }
                labs.insert(pt->label);
            }
            if (complete && labs.size() == 3) {
                cells.push_back({(tri[0].first + tri[1].first + tri[2].first) * h / 3.0,
                                 (tri[0].second + tri[1].second + tri[2].second) * h / 3.0});
                cell_labels.push_back(labs);
            }
        }
    }
    for (const auto& c : cluster(cells, h * (1.0 + 1e-9))) {
        TriplePoint t;
        std::set<Phase> labs;
        for (const Mid& m : c) {
            t.alpha += m.a / c.size();
            t.beta += m.b / c.size();
            for (std::size_t n = 0; n < cells.size(); ++n) {
                if (cells[n].a == m.a && cells[n].b == m.b) {
                    labs.insert(cell_labels[n].begin(), cell_labels[n].end());
                }
            }
        }
        t.error = h;
        t.labels.assign(labs.begin(), labs.end());
        d.junctions.push_back(t);
    }
    return d;
}

std::map<int, double> boundary_by_column(const PhaseDiagram& d, const std::string& kind) {
    std::map<int, double> out;
    const double h = d.grid.step;
    for (int i = d.grid.i_min; i <= d.grid.columns; ++i) {
        for (int j = d.grid.lo(i); j < d.grid.hi(i); ++j) {
            const PhasePoint* u = d.at(i, j);
            const PhasePoint* w = d.at(i, j + 1);
            if (u->label != w->label && boundary_kind(u->label, w->label) == kind) {
                out[i] = (j + 0.5) * h;
                break;
            }
        }
    }
    return out;
}

} // namespace emulsion
