#include "emulsion/model.hpp"
#include "support/gen.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace emulsion;

namespace {

Species sp(char c) { return c == 'A' ? Species::A : Species::B; }

CopolymerSequence seq(const char* s) {
    std::vector<Species> v;
    for (; *s; ++s) {
        v.push_back(sp(*s));
    }
    return CopolymerSequence(v);
}

} // namespace

TEST_CASE("interaction params and cone") {
    CHECK(InteractionParams(1.0, 0.5).in_cone());
    CHECK(InteractionParams(1.0, -1.0).in_cone());
    CHECK_FALSE(InteractionParams(0.5, 1.0).in_cone());
    CHECK_FALSE(InteractionParams(-0.1, 0.0).in_cone());
    CHECK_THROWS(InteractionParams(NAN, 0.0));
    CHECK_THROWS(InteractionParams(0.0, INFINITY));
}

TEST_CASE("sample_copolymer") {
    CHECK(sample_copolymer(4, 7).labels() == sample_copolymer(4, 7).labels());
    CHECK(sample_copolymer(3, 1).size() == 3);
    CHECK_THROWS(sample_copolymer(0, 1));
    const auto big = sample_copolymer(100000, 3);
    CHECK(std::abs(static_cast<double>(big.count(Species::A)) / 1e5 - 0.5) < 0.01);
}

TEST_CASE("sample_emulsion") {
    const BlockExtent e{0, 0, 100, 100};
    const auto a = sample_emulsion(e, 0.5, 11);
    const auto b = sample_emulsion(e, 0.5, 11);
    bool same = true;
    for (long x = 0; x < 100; ++x) {
        for (long y = 0; y < 100; ++y) {
            same = same && a.label(x, y) == b.label(x, y);
        }
    }
    CHECK(same);
    for (double p : {0.2, 0.8}) {
        const auto f = sample_emulsion({0, 0, 200, 200}, p, 5);
        long n = 0;
        for (long x = 0; x < 200; ++x) {
            for (long y = 0; y < 200; ++y) {
                n += f.label(x, y) == Species::A;
            }
        }
        CHECK(std::abs(n / 40000.0 - p) < 0.02);
    }
    const auto one = sample_emulsion({3, -2, 1, 1}, 0.5, 1);
    CHECK_NOTHROW(one.label(3, -2));
    CHECK_THROWS_AS(one.label(4, -2), std::out_of_range);
    CHECK_THROWS(sample_emulsion(e, 0.0, 1));
    CHECK_THROWS(sample_emulsion(e, 1.0, 1));
}

TEST_CASE("emulsion coupling is monotone in p") {
    const BlockExtent e{-5, -5, 30, 30};
    const auto lo = sample_emulsion(e, 0.3, 9);
    const auto hi = sample_emulsion(e, 0.6, 9);
    bool ok = true;
    for (long x = -5; x < 25; ++x) {
        for (long y = -5; y < 25; ++y) {
            ok = ok && !(lo.label(x, y) == Species::A && hi.label(x, y) == Species::B);
        }
    }
    CHECK(ok);
}

TEST_CASE("paths reject reversals") {
    CHECK_THROWS(DirectedPath({0, 0}, {Step::right, Step::up, Step::down}));
    CHECK_THROWS(DirectedPath({0, 0}, {Step::down, Step::up}));
    CHECK_NOTHROW(DirectedPath({0, 0}, {Step::up, Step::right, Step::down}));
}

TEST_CASE("hamiltonian trivial cases") {
    const auto field = EmulsionField::filled({-2, -2, 6, 6}, 2, Species::A);
    const DirectedPath path({0, 0}, {Step::right, Step::up, Step::right, Step::up, Step::right, Step::down});
    CHECK(hamiltonian(path, seq("AAAAAA"), field, {1.3, 0.4}) == doctest::Approx(-1.3 * 6));
    CHECK(hamiltonian(path, seq("ABABAB"), field, {0.0, 0.0}) == 0.0);
    CHECK_THROWS(hamiltonian(path, seq("AAAAA"), field, {1.0, 0.0}));
}

TEST_CASE("hamiltonian on a hand-built six-step path") {
    // L = 2. Blocks: (0,-1) = B, (0,0) = A, (1,0) = B, the rest A.
    std::vector<Species> labels(16, Species::A);
    const BlockExtent e{-1, -2, 4, 4};
    auto set = [&](long x, long y, Species s) { labels[(y - e.y0) * e.nx + (x - e.x0)] = s; };
    set(0, -1, Species::B);
    set(1, 0, Species::B);
    const EmulsionField field(e, 2, labels);
    // R U R U reaches corner (2,2); then R D inside the next pair.
    // Edge midpoints: (0.5,0) boundary -> lower (0,-1) B; (1,0.5) A; (1.5,1) A; (2,1.5) A;
    // (2.5,2) boundary -> lower (1,0) B; (3,1.5) B.
    const DirectedPath path({0, 0}, {Step::right, Step::up, Step::right, Step::up, Step::right, Step::down});
    const auto blocks = attribute_edges(path, 2);
    const std::vector<BlockIndex> expect{{0, -1}, {0, 0}, {0, 0}, {0, 0}, {1, 0}, {1, 0}};
    CHECK(blocks == expect);
    // omega A A B A B A: matches are edge 2 (A in A), edge 4 (A in A), edge 5 (B in B)
    const double a = 1.5, b = 0.7;
    CHECK(hamiltonian(path, seq("AABABA"), field, {a, b}) == doctest::Approx(-(2 * a + b)));
}

TEST_CASE("block-pair rule") {
    // first step at a corner must be RIGHT
    CHECK_FALSE(is_valid_pair_prefix(DirectedPath({0, 0}, {Step::up}), 2));
    // may not leave the pair upward
    CHECK_FALSE(is_valid_pair_prefix(DirectedPath({0, 0}, {Step::right, Step::up, Step::up, Step::up}), 2));
    // may not touch the shared corner (L, 0)
    CHECK_FALSE(is_valid_pair_prefix(DirectedPath({0, 0}, {Step::right, Step::right}), 2));
    CHECK(is_valid_pair_prefix(DirectedPath({0, 0}, {Step::right, Step::down, Step::right, Step::down}), 2));
    CHECK_THROWS(attribute_edges(DirectedPath({1, 0}, {Step::right}), 2));
}

TEST_CASE("property: hamiltonian invariant under joint relabelling") {
    gen::Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int L = rng.integer(1, 3);
        std::vector<Step> steps;
        DirectedPath path({0, 0}, {});
        // random walk that respects the pair rule
        for (int i = 0; i < 12; ++i) {
            std::vector<Step> options;
            for (Step s : {Step::right, Step::up, Step::down}) {
                auto trial_steps = steps;
                trial_steps.push_back(s);
                try {
                    if (is_valid_pair_prefix(DirectedPath({0, 0}, trial_steps), L)) {
                        options.push_back(s);
                    }
                } catch (const std::invalid_argument&) {
                }
            }
            if (options.empty()) {
                break;
            }
            steps.push_back(options[rng.integer(0, static_cast<int>(options.size()) - 1)]);
        }
        path = DirectedPath({0, 0}, steps);
        const CopolymerSequence omega(rng.species(steps.size()));
        const auto field = rng.field({-8, -8, 16, 16}, L);
        const InteractionParams q(rng.uniform(-2, 2), rng.uniform(-2, 2));
        const double h = hamiltonian(path, omega, field, q);
        const double h_swapped = hamiltonian(path, omega.flipped(), field.flipped(), {q.beta(), q.alpha()});
        CHECK(h == doctest::Approx(h_swapped));
    }
}

TEST_CASE("cone_reduce") {
    const auto id = cone_reduce(1.0, 0.5, 0.7);
    CHECK(id.params == InteractionParams(1.0, 0.5));
    CHECK(id.offset == 0.0);
    CHECK(id.p == 0.7);
    const auto sw = cone_reduce(0.5, 1.0, 0.3);
    CHECK(sw.params == InteractionParams(1.0, 0.5));
    CHECK(sw.p == doctest::Approx(0.7));
    CHECK(sw.offset == 0.0);
    // (-beta, -alpha) with offset (alpha + beta) / 2
    const auto rf = cone_reduce(-0.5, -1.0, 0.7);
    CHECK(rf.params == InteractionParams(1.0, 0.5));
    CHECK(rf.offset == doctest::Approx(-0.75));
    CHECK(rf.p == 0.7);
}

TEST_CASE("property: cone_reduce lands in the cone and inverts exactly") {
    gen::Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const double a = rng.uniform(-5, 5);
        const double b = rng.uniform(-5, 5);
        const double p = rng.uniform(0.01, 0.99);
        const ReducedPoint r = cone_reduce(a, b, p);
        CHECK(r.params.in_cone());
        // applying the same transform to the reduced point returns the original
        const ReducedPoint back = apply_symmetry(r.transform, r.params.alpha(), r.params.beta(), r.p);
        CHECK(back.params.alpha() == a);
        CHECK(back.params.beta() == b);
        CHECK(back.p == doctest::Approx(p).epsilon(1e-15));
        CHECK(r.offset + r.transform.inverse().affine_offset == 0.0);
    }
}
