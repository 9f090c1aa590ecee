#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <set>

#include "meandim/group.hpp"

using namespace meandim;

namespace {

GroupElement el(std::vector<std::int64_t> v) { return GroupElement(std::move(v)); }

// Independent oracle: 3x3 upper-triangular integer matrices for H3.
using Mat3 = std::array<std::array<std::int64_t, 3>, 3>;

Mat3 heis_matrix(std::int64_t a, std::int64_t b, std::int64_t c) {
    return {{{1, a, c}, {0, 1, b}, {0, 0, 1}}};
}

Mat3 mat_mul(const Mat3& x, const Mat3& y) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            std::int64_t s = 0;
            for (int k = 0; k < 3; ++k) s += x[i][k] * y[k][j];
            r[i][j] = s;
        }
    return r;
}

// Independent oracle: breadth-first word search over an arbitrary product rule.
template <typename State, typename Mul>
std::map<State, int> bfs_oracle(const State& ident, const std::vector<State>& gens, Mul mul,
                                int radius) {
    std::map<State, int> dist;
    dist[ident] = 0;
    std::vector<State> layer{ident};
    for (int n = 1; n <= radius; ++n) {
        std::vector<State> next;
        for (const State& p : layer)
            for (const State& s : gens) {
                State q = mul(p, s);
                if (dist.emplace(q, n).second) next.push_back(q);
            }
        layer = std::move(next);
    }
    return dist;
}

using Pair = std::array<std::int64_t, 2>;
Pair dinf_mul(const Pair& a, const Pair& b) {
    return {a[0] + (a[1] ? -b[0] : b[0]), a[1] ^ b[1]};
}

}  // namespace

TEST_CASE("multiplication in canonical normal forms") {
    const auto dinf = GroupSpec::infinite_dihedral();
    CHECK(multiply(el({3, 1}), el({2, 0}), dinf) == el({1, 1}));

    const auto z2 = GroupSpec::integer_lattice(2);
    CHECK(multiply(el({1, 0}), el({0, 1}), z2) == el({1, 1}));

    const auto h3 = GroupSpec::heisenberg();
    CHECK(multiply(el({1, 0, 0}), el({0, 1, 0}), h3) == el({1, 1, 1}));

    SECTION("H3 product law matches the matrix oracle on random triples") {
        std::mt19937_64 rng(7);
        std::uniform_int_distribution<std::int64_t> d(-5, 5);
        for (int t = 0; t < 200; ++t) {
            const std::int64_t a = d(rng), b = d(rng), c = d(rng);
            const std::int64_t p = d(rng), q = d(rng), r = d(rng);
            const auto got = multiply(el({a, b, c}), el({p, q, r}), h3);
            const auto m = mat_mul(heis_matrix(a, b, c), heis_matrix(p, q, r));
            CHECK(got == el({m[0][1], m[1][2], m[0][2]}));
        }
    }

    SECTION("identity and inverses") {
        for (const auto& spec : {dinf, z2, h3}) {
            const auto e = identity_of(spec);
            std::mt19937_64 rng(11);
            const auto sample = build_ball(spec, 4).elements;
            for (const auto& g : sample) {
                CHECK(multiply(g, e, spec) == g);
                CHECK(multiply(e, g, spec) == g);
                CHECK(multiply(g, inverse(g, spec), spec) == e);
            }
        }
    }

    SECTION("arity mismatch is a type error") {
        CHECK_THROWS_AS(multiply(el({1, 0}), el({1}), z2), precondition_error);
    }
}

TEST_CASE("word length by BFS") {
    const auto dinf = GroupSpec::infinite_dihedral();
    CHECK(word_length(identity_of(dinf), dinf) == 0);

    // rs translates by -1; normal form (-1, 0); oracle depth 2.
    const auto rs = multiply(el({0, 1}), el({1, 1}), dinf);
    CHECK(rs == el({-1, 0}));
    CHECK(word_length(rs, dinf) == 2);

    const auto z2 = GroupSpec::integer_lattice(2);
    CHECK(word_length(el({3, -2}), z2) == 5);

    SECTION("agrees with the independent word-search oracle on Dinf") {
        const auto oracle = bfs_oracle<Pair>({0, 0}, {{{0, 1}}, {{1, 1}}}, dinf_mul, 6);
        for (const auto& [st, len] : oracle)
            CHECK(word_length(el({st[0], st[1]}), dinf) == len);
    }

    SECTION("cap exhaustion raises a bounded-search error") {
        CHECK_THROWS_AS(word_length(el({100, 0}), GroupSpec::integer_lattice(1), 10),
                        search_limit_error);
    }
}

TEST_CASE("balls and their cardinalities") {
    const auto dinf = GroupSpec::infinite_dihedral();
    CHECK(ball(dinf, 2).size() == 5);  // gamma(n) = 2n+1

    const auto zxz2 = GroupSpec::direct_product(GroupSpec::integer_lattice(1), GroupSpec::cyclic(2));
    CHECK(ball(zxz2, 3).size() == 12);  // gamma(n) = 4n

    const auto z2 = GroupSpec::integer_lattice(2);
    CHECK(ball(z2, 2).size() == 13);  // 2n^2 + 2n + 1

    SECTION("Z^2 ball equals the l1-ball enumerated over a box") {
        const int n = 4;
        std::set<std::pair<std::int64_t, std::int64_t>> expect;
        for (std::int64_t x = -n; x <= n; ++x)
            for (std::int64_t y = -n; y <= n; ++y)
                if (std::abs(x) + std::abs(y) <= n) expect.insert({x, y});
        std::set<std::pair<std::int64_t, std::int64_t>> got;
        for (const auto& g : ball(z2, n)) got.insert({g.c[0], g.c[1]});
        CHECK(got == expect);
    }

    SECTION("nesting and one-step growth ball(n+1) = ball(n).S u ball(n)") {
        for (const auto& spec :
             {GroupSpec::infinite_dihedral(), GroupSpec::integer_lattice(2), GroupSpec::heisenberg(),
              GroupSpec::direct_product(GroupSpec::integer_lattice(1), GroupSpec::infinite_dihedral())}) {
            const auto t = build_ball(spec, 5);
            for (int n = 0; n < 5; ++n) {
                ElementSet grown;
                for (std::size_t i = 0; i < t.gamma(n); ++i) {
                    grown.insert(t.elements[i]);
                    for (const auto& s : spec.generators)
                        grown.insert(multiply(t.elements[i], s, spec));
                }
                ElementSet next(t.elements.begin(),
                                t.elements.begin() + static_cast<std::ptrdiff_t>(t.gamma(n + 1)));
                CHECK(grown == next);
            }
        }
    }
}

TEST_CASE("box balls of direct products") {
    const auto zxz = GroupSpec::direct_product(GroupSpec::integer_lattice(1), GroupSpec::integer_lattice(1));
    CHECK(box_ball(zxz, 1).size() == 9);
    CHECK(box_ball(zxz, 0).size() == 1);

    const auto zxd = GroupSpec::direct_product(GroupSpec::integer_lattice(1), GroupSpec::infinite_dihedral());
    CHECK(box_ball(zxd, 2).size() == 25);  // 5 * 5 factor balls
    CHECK(box_ball(zxd, 0) == std::vector<GroupElement>{identity_of(zxd)});
}

TEST_CASE("growth tables and degree fits") {
    SECTION("Dinf: sizes 2n+1 and degree ~ 1") {
        const auto t = growth_table(GroupSpec::infinite_dihedral(), 10);
        for (int n = 0; n <= 10; ++n) CHECK(t.sizes[static_cast<std::size_t>(n)] == 2u * n + 1u);
        CHECK_THAT(t.degree_fit, Catch::Matchers::WithinAbs(1.0, 0.05));
    }

    SECTION("Z^3 at n_max=8: degree within 0.15 of 3, sizes match the l1 count") {
        const auto t = growth_table(GroupSpec::integer_lattice(3), 8);
        for (int n = 0; n <= 8; ++n) {
            std::size_t count = 0;
            for (std::int64_t x = -n; x <= n; ++x)
                for (std::int64_t y = -n; y <= n; ++y)
                    for (std::int64_t z = -n; z <= n; ++z)
                        if (std::abs(x) + std::abs(y) + std::abs(z) <= n) ++count;
            CHECK(t.sizes[static_cast<std::size_t>(n)] == count);
        }
        CHECK_THAT(t.degree_fit, Catch::Matchers::WithinAbs(3.0, 0.15));
    }

    SECTION("Heisenberg at n_max=12: degree within 0.5 of 4, sizes match matrix BFS") {
        const auto t = growth_table(GroupSpec::heisenberg(), 12);
        using Triple = std::array<std::int64_t, 3>;
        auto mul = [](const Triple& u, const Triple& v) {
            const auto m = mat_mul(heis_matrix(u[0], u[1], u[2]), heis_matrix(v[0], v[1], v[2]));
            return Triple{m[0][1], m[1][2], m[0][2]};
        };
        const std::vector<Triple> gens{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
        const auto oracle = bfs_oracle<Triple>({0, 0, 0}, gens, mul, 12);
        std::vector<std::size_t> sizes(13, 0);
        for (const auto& [st, len] : oracle)
            for (int n = len; n <= 12; ++n) ++sizes[static_cast<std::size_t>(n)];
        for (int n = 0; n <= 12; ++n) CHECK(t.sizes[static_cast<std::size_t>(n)] == sizes[static_cast<std::size_t>(n)]);
        CHECK_THAT(t.degree_fit, Catch::Matchers::WithinAbs(4.0, 0.5));
    }

    SECTION("enumeration order: nondecreasing length, total, lex-consistent start") {
        const auto t = growth_table(GroupSpec::infinite_dihedral(), 4);
        const auto& e = t.ball.elements;
        CHECK(e.front() == identity_of(t.ball.spec));
        for (std::size_t i = 0; i + 1 < e.size(); ++i)
            CHECK(t.ball.word_length_of(e[i]) <= t.ball.word_length_of(e[i + 1]));
        // layer 1 lists generators in index order: r before s
        CHECK(e[1] == el({0, 1}));
        CHECK(e[2] == el({1, 1}));
        std::set<GroupElement> uniq(e.begin(), e.end());
        CHECK(uniq.size() == e.size());
    }

    SECTION("memory guard") {
        Limits lim;
        lim.ball_elements = 100;
        CHECK_THROWS_AS(growth_table(GroupSpec::integer_lattice(3), 10, lim), resource_error);
    }
}

TEST_CASE("K-boundaries") {
    const auto z = GroupSpec::integer_lattice(1);

    SECTION("Z: A=[-n,n], K=B(1) gives the four-element boundary") {
        const int n = 6;
        std::vector<GroupElement> a_set;
        for (std::int64_t x = -n; x <= n; ++x) a_set.push_back(el({x}));
        const auto b = boundary(a_set, ball(z, 1), z);
        const std::vector<GroupElement> expect{el({-n - 1}), el({-n}), el({n}), el({n + 1})};
        CHECK(b == expect);
    }

    SECTION("A=K={identity} is empty: Kg cannot meet both A and its complement") {
        const std::vector<GroupElement> single{identity_of(z)};
        CHECK(boundary(single, single, z).empty());
    }

    SECTION("Z^2: matches direct enumeration of the defining condition") {
        const auto z2 = GroupSpec::integer_lattice(2);
        const auto a_set = ball(z2, 5);
        const auto k_set = ball(z2, 1);
        const auto got = boundary(a_set, k_set, z2);

        std::set<std::pair<std::int64_t, std::int64_t>> a_look;
        for (const auto& g : a_set) a_look.insert({g.c[0], g.c[1]});
        std::set<std::pair<std::int64_t, std::int64_t>> expect;
        for (std::int64_t x = -8; x <= 8; ++x)
            for (std::int64_t y = -8; y <= 8; ++y) {
                bool meets_a = false, meets_comp = false;
                for (const auto& k : k_set) {
                    const auto kx = k.c[0] + x, ky = k.c[1] + y;
                    if (a_look.count({kx, ky})) meets_a = true;
                    else meets_comp = true;
                }
                if (meets_a && meets_comp) expect.insert({x, y});
            }
        std::set<std::pair<std::int64_t, std::int64_t>> got_pairs;
        for (const auto& g : got) got_pairs.insert({g.c[0], g.c[1]});
        CHECK(got_pairs == expect);
    }
}

TEST_CASE("invariance ratios and temperedness") {
    const auto z = GroupSpec::integer_lattice(1);
    CHECK(invariance_ratio(ball(z, 10), ball(z, 1), z) == Rational(4, 21));

    SECTION("Z ball sequence: ratio (4n-1)/(2n+1), witnessed C < 2") {
        const auto w = tempered_prefix(z, 20);
        REQUIRE(w.per_n.size() == 19);
        for (int n = 2; n <= 20; ++n)
            CHECK(w.per_n[static_cast<std::size_t>(n - 2)] == Rational(4 * n - 1, 2 * n + 1));
        CHECK(w.max_ratio == Rational(79, 41));
        CHECK(w.max_ratio.value() < 2.0);
    }

    SECTION("n_max=1 is vacuous") {
        CHECK(tempered_prefix(z, 1).max_ratio == Rational(1, 1));
    }
}

TEST_CASE("word metric properties") {
    const auto specs = {GroupSpec::infinite_dihedral(), GroupSpec::heisenberg(),
                        GroupSpec::direct_product(GroupSpec::integer_lattice(1),
                                                  GroupSpec::infinite_dihedral())};
    for (const auto& spec : specs) {
        const auto t = build_ball(spec, 6);
        std::mt19937_64 rng(311);
        std::uniform_int_distribution<std::size_t> pick(0, t.gamma(2) - 1);
        auto len = [&](const GroupElement& g) { return word_length(g, spec, 64); };
        for (int it = 0; it < 50; ++it) {
            const auto& g = t.elements[pick(rng)];
            const auto& h = t.elements[pick(rng)];
            const auto& k = t.elements[pick(rng)];
            // triangle inequality via left-invariant metric d(g,h) = l(g^-1 h)
            const auto gh = multiply(g, h, spec);
            CHECK(len(gh) <= len(g) + len(h));
            // left invariance: d(kg, kh) = d(g, h)
            const auto d1 = len(multiply(inverse(multiply(k, g, spec), spec), multiply(k, h, spec), spec));
            const auto d2 = len(multiply(inverse(g, spec), h, spec));
            CHECK(d1 == d2);
        }
    }
}

TEST_CASE("exact growth identities and polynomial sandwich") {
    const auto dinf_t = growth_table(GroupSpec::infinite_dihedral(), 50);
    for (int n = 1; n <= 50; ++n)
        CHECK(dinf_t.sizes[static_cast<std::size_t>(n)] == 2u * n + 1u);

    const auto zxz2 = GroupSpec::direct_product(GroupSpec::integer_lattice(1), GroupSpec::cyclic(2));
    const auto zxz2_t = growth_table(zxz2, 50);
    for (int n = 1; n <= 50; ++n)
        CHECK(zxz2_t.sizes[static_cast<std::size_t>(n)] == 4u * n);

    SECTION("fitted sandwich A n^d <= gamma(n) <= B n^d with bounded spread") {
        struct Case { GroupSpec spec; double deg; int n_max; };
        const std::vector<Case> cases{
            {GroupSpec::integer_lattice(1), 1.0, 20},
            {GroupSpec::integer_lattice(2), 2.0, 12},
            {GroupSpec::integer_lattice(3), 3.0, 8},
            {GroupSpec::infinite_dihedral(), 1.0, 20},
            {zxz2, 1.0, 20},
            {GroupSpec::heisenberg(), 4.0, 10},
        };
        for (const auto& c : cases) {
            const auto t = growth_table(c.spec, c.n_max);
            double lo = 1e300, hi = 0;
            for (int n = 1; n <= c.n_max; ++n) {
                const double ratio =
                    static_cast<double>(t.sizes[static_cast<std::size_t>(n)]) / std::pow(n, c.deg);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
            }
            CHECK(lo > 0.0);
            CHECK(hi / lo <= 16.0);
        }
    }
}

TEST_CASE("generator validation") {
    auto z2 = GroupSpec::integer_lattice(2);
    CHECK_NOTHROW(validate_generators(z2));

    SECTION("asymmetric list rejected") {
        z2.generators = {el({1, 0}), el({0, 1}), el({0, -1})};
        CHECK_THROWS_AS(validate_generators(z2), precondition_error);
    }
    SECTION("identity rejected") {
        z2.generators = {el({0, 0}), el({1, 0}), el({-1, 0}), el({0, 1}), el({0, -1})};
        CHECK_THROWS_AS(validate_generators(z2), precondition_error);
    }
    SECTION("non-generating list rejected") {
        z2.generators = {el({2, 0}), el({-2, 0}), el({0, 1}), el({0, -1})};
        CHECK_THROWS_AS(validate_generators(z2), precondition_error);
    }
    SECTION("bigger symmetric generating set accepted") {
        z2.generators = {el({1, 0}), el({-1, 0}), el({0, 1}), el({0, -1}), el({1, 1}), el({-1, -1})};
        CHECK_NOTHROW(validate_generators(z2));
    }
}
