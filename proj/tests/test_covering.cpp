#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "meandim/covering.hpp"

using namespace meandim;

namespace {

GroupElement el(std::int64_t x) { return GroupElement({x}); }

std::vector<GroupElement> interval(std::int64_t lo, std::int64_t hi) {
    std::vector<GroupElement> out;
    for (std::int64_t x = lo; x <= hi; ++x) out.push_back(el(x));
    return out;
}

}  // namespace

TEST_CASE("hypothesis checking") {
    SECTION("single level, single shape, disjoint translates") {
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.005;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(0, 99);
        t.shapes = {{interval(0, 9)}};
        t.bases = {{{el(0), el(10), el(20), el(50)}}};
        const auto rep = check_hypotheses(t);
        CHECK(rep.all_ok());
        CHECK_THAT(rep.alpha, Catch::Matchers::WithinAbs(4.0 / 100.0, 1e-12));
    }

    SECTION("interval balls satisfy the per-level condition with C = 2") {
        // union of F_{1,k'}^{-1} F_{1,k} over intervals [-r,r] is
        // [-(r_{k-1}+r_k), r_{k-1}+r_k]
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.005;
        t.big_c = 2.0;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(-100, 100);
        t.shapes = {{interval(-2, 2), interval(-5, 5), interval(-11, 11)}};
        t.bases = {{{el(0)}, {el(0)}, {el(0)}}};
        const auto rep = check_hypotheses(t);
        CHECK(rep.per_level_ok);

        const std::vector<long> radii{2, 5, 11};
        for (std::size_t k = 1; k < radii.size(); ++k) {
            const long u = 2 * (radii[k - 1] + radii[k]) + 1;
            CHECK(u <= 2 * (2 * radii[k] + 1));
        }
    }

    SECTION("violated containment is reported") {
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.005;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(0, 20);
        t.shapes = {{interval(0, 9)}};
        t.bases = {{{el(0), el(15)}}};  // 15 + 9 = 24 escapes
        const auto rep = check_hypotheses(t);
        CHECK_FALSE(rep.containment_ok);
        CHECK_FALSE(rep.failures.empty());
        CHECK_THROWS_AS(select_subfamily(t), precondition_error);
    }

    SECTION("delta range enforced") {
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.5;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(0, 10);
        t.shapes = {{interval(0, 1)}};
        t.bases = {{{el(0)}}};
        CHECK_FALSE(check_hypotheses(t).delta_in_range);
    }
}

TEST_CASE("epsilon-disjointness decisions") {
    SECTION("pairwise disjoint family at tiny epsilon") {
        const std::vector<std::vector<GroupElement>> family{interval(0, 4), interval(5, 9),
                                                            interval(10, 14)};
        const auto r = epsilon_disjoint_check(family, 1e-9);
        CHECK(r.disjoint);
        CHECK(r.exact);
    }

    SECTION("two identical sets of size 10 are not 0.4-disjoint") {
        const std::vector<std::vector<GroupElement>> family{interval(0, 9), interval(0, 9)};
        const auto r = epsilon_disjoint_check(family, 0.4);  // need 6 + 6 > 10 cells
        CHECK(r.exact);
        CHECK_FALSE(r.disjoint);
    }

    SECTION("overlap of 1 cell in 10 passes at 0.1") {
        const std::vector<std::vector<GroupElement>> family{interval(0, 9), interval(9, 18)};
        const auto r = epsilon_disjoint_check(family, 0.1);  // need 9 + 9 <= 19 distinct
        CHECK(r.exact);
        CHECK(r.disjoint);
        ElementSet seen;
        for (std::size_t i = 0; i < family.size(); ++i) {
            CHECK(r.shrinkings[i].size() >= 9);
            for (const auto& g : r.shrinkings[i]) CHECK(seen.insert(g).second);
        }
    }

    SECTION("flow decision matches exhaustive assignment search on tiny families") {
        std::mt19937_64 rng(13);
        std::uniform_int_distribution<std::int64_t> pos(0, 7);
        std::uniform_int_distribution<int> len(1, 4), nsets(2, 3);
        std::uniform_real_distribution<double> eps_dist(0.05, 0.8);
        for (int trial = 0; trial < 60; ++trial) {
            std::vector<std::vector<GroupElement>> family;
            const int k = nsets(rng);
            for (int i = 0; i < k; ++i) {
                const std::int64_t a = pos(rng);
                family.push_back(interval(a, a + len(rng) - 1));
            }
            const double eps = eps_dist(rng);
            const auto got = epsilon_disjoint_check(family, eps);
            REQUIRE(got.exact);

            std::vector<GroupElement> cells;
            ElementSet cell_set;
            for (const auto& f : family)
                for (const auto& g : f)
                    if (cell_set.insert(g).second) cells.push_back(g);
            std::vector<long> need(family.size());
            for (std::size_t i = 0; i < family.size(); ++i)
                need[i] = detail::shrink_requirement(eps, family[i].size());
            std::function<bool(std::size_t, std::vector<long>&)> rec =
                [&](std::size_t idx, std::vector<long>& got_count) -> bool {
                if (idx == cells.size()) {
                    for (std::size_t i = 0; i < family.size(); ++i)
                        if (got_count[i] < need[i]) return false;
                    return true;
                }
                for (int s = -1; s < static_cast<int>(family.size()); ++s) {
                    if (s >= 0) {
                        const auto& f = family[static_cast<std::size_t>(s)];
                        if (std::find(f.begin(), f.end(), cells[idx]) == f.end()) continue;
                        ++got_count[static_cast<std::size_t>(s)];
                    }
                    const bool ok = rec(idx + 1, got_count);
                    if (s >= 0) --got_count[static_cast<std::size_t>(s)];
                    if (ok) return true;
                }
                return false;
            };
            std::vector<long> counts(family.size(), 0);
            const bool feasible = rec(0, counts);
            CHECK(got.disjoint == feasible);
        }
    }

    SECTION("epsilon range enforced") {
        CHECK_THROWS_AS(epsilon_disjoint_check({interval(0, 1)}, 0.0), precondition_error);
        CHECK_THROWS_AS(epsilon_disjoint_check({interval(0, 1)}, 1.0), precondition_error);
    }
}

TEST_CASE("subfamily selection") {
    SECTION("already disjoint translates covering most of F") {
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.005;
        t.big_c = 2.0;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(0, 99);
        t.shapes = {{interval(0, 9)}};
        std::vector<GroupElement> base;
        for (std::int64_t a = 0; a <= 80; a += 10) base.push_back(el(a));  // tiles [0, 90)
        t.bases = {{base}};
        const auto sel = select_subfamily(t, 0);
        CHECK(sel.met_bound);
        CHECK(sel.covered_cells == 90);
        CHECK(verify_selection(t, sel));
    }

    SECTION("dense interval instance meets the coverage bound") {
        IntervalInstanceParams p;
        p.ambient_length = 10000;
        p.shape_lengths = {10, 100, 1000};
        p.delta = 0.005;
        const auto t = make_interval_instance(p);
        const auto rep = check_hypotheses(t);
        REQUIRE(rep.all_ok());
        const auto sel = select_subfamily(t, 1);
        CHECK(sel.met_bound);
        CHECK(verify_selection(t, sel));
        CHECK(sel.coverage_fraction > rep.alpha - std::pow(t.delta, 0.25) - 1e-12);
    }

    SECTION("tiny adversarial overlap: exhaustive subfamily search agrees") {
        TranslateArray t;
        t.spec = GroupSpec::integer_lattice(1);
        t.delta = 0.004;  // epsilon0 ~ 2.5: disjointness vacuous, coverage binds
        t.big_c = 3.0;
        t.d_set = {identity_of(t.spec)};
        t.ambient = interval(0, 23);
        t.shapes = {{interval(0, 7), interval(0, 11)}};
        t.bases = {{{el(0), el(4), el(8), el(16)}, {el(0), el(6), el(12)}}};
        const auto rep = check_hypotheses(t);
        REQUIRE(rep.all_ok());
        const auto sel = select_subfamily(t, 3);
        CHECK(verify_selection(t, sel));

        struct Item {
            std::size_t level, shape;
            GroupElement a;
        };
        std::vector<Item> items;
        for (std::size_t j = 0; j < t.shapes[0].size(); ++j)
            for (const auto& a : t.bases[0][j]) items.push_back({0, j, a});
        std::size_t best_cover = 0;
        for (std::size_t mask = 0; mask < (1u << items.size()); ++mask) {
            ElementSet covered;
            for (std::size_t b = 0; b < items.size(); ++b)
                if (mask & (1u << b))
                    for (const auto& c : detail::translate_cells(
                             t.shapes[items[b].level][items[b].shape], items[b].a, t.spec))
                        covered.insert(c);
            best_cover = std::max(best_cover, covered.size());
        }
        CHECK(sel.covered_cells == best_cover);
        CHECK(static_cast<double>(best_cover) >= sel.coverage_target);
        CHECK(sel.met_bound);
    }

    SECTION("selections are epsilon0-disjoint by independent re-check") {
        IntervalInstanceParams p;
        p.ambient_length = 600;
        p.shape_lengths = {8, 40};
        p.delta = 1e-5;  // epsilon0 ~ 0.56: nonvacuous
        p.seed = 17;
        const auto t = make_interval_instance(p);
        REQUIRE(check_hypotheses(t).all_ok());
        const auto sel = select_subfamily(t, 17);
        CHECK(verify_selection(t, sel));
        CHECK(sel.met_bound);

        std::vector<std::vector<GroupElement>> family;
        for (const auto& ch : sel.chosen)
            family.push_back(detail::translate_cells(t.shapes[ch.level][ch.shape], ch.base, t.spec));
        const double eps0 = t.epsilon0();
        REQUIRE(eps0 < 1.0);
        const auto check = epsilon_disjoint_check(family, eps0, 100000);
        CHECK(check.disjoint);
    }

    SECTION("randomized instance battery, seeded") {
        std::mt19937_64 rng(2025);
        int met = 0;
        const int trials = 100;
        for (int i = 0; i < trials; ++i) {
            std::uniform_int_distribution<int> kind(0, 2);
            TranslateArray t;
            switch (kind(rng)) {
                case 0: {
                    IntervalInstanceParams p;
                    p.ambient_length = 500 + static_cast<long>(rng() % 2000);
                    p.shape_lengths = {3 + static_cast<long>(rng() % 8),
                                       30 + static_cast<long>(rng() % 50)};
                    p.delta = 1e-6 + 1e-4 * std::uniform_real_distribution<double>(0, 1)(rng);
                    p.seed = rng();
                    t = make_interval_instance(p);
                    break;
                }
                case 1: {
                    IntervalInstanceParams p;
                    p.ambient_length = 500 + static_cast<long>(rng() % 2000);
                    p.shape_lengths = {5 + static_cast<long>(rng() % 20)};
                    p.base_density = 0.35 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
                    p.singleton_level = true;
                    p.delta = 1e-5 + 5e-3 * std::uniform_real_distribution<double>(0, 1)(rng);
                    p.seed = rng();
                    t = make_interval_instance(p);
                    break;
                }
                default: {
                    TowerInstanceParams p;
                    p.ambient_length = 2000 + static_cast<long>(rng() % 3000);
                    p.top_length = p.ambient_length - 500;
                    p.delta = 2e-3 + 7e-3 * std::uniform_real_distribution<double>(0, 1)(rng);
                    p.base_density = 0.4 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng);
                    p.seed = rng();
                    t = make_tower_instance(p);
                    break;
                }
            }
            const auto rep = check_hypotheses(t);
            REQUIRE(rep.all_ok());
            const auto sel = select_subfamily(t, rng());
            CHECK(verify_selection(t, sel));
            if (sel.met_bound) ++met;
        }
        CHECK(met == trials);
    }
}
