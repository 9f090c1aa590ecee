#pragma once

// Word geometry for a closed catalog of polynomial-growth groups: elements in
// canonical normal form, Cayley-graph BFS, balls, growth functions, boundaries
// and Folner/temperedness diagnostics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "meandim/core.hpp"

namespace meandim {

enum class GroupKind {
    integer_lattice,    // Z^d, coords = d-vector
    cyclic_finite,      // Z/mZ, coord = residue in [0, m)
    infinite_dihedral,  // (n, flip): x -> (-1)^flip x + n
    heisenberg3,        // (a, b, c): upper triangular [[1,a,c],[0,1,b],[0,0,1]]
    direct_product,     // concatenated factor coordinates
};

// Canonical normal form: flat integer coordinate vector. Equality of elements
// is equality of coordinates; the identity is the all-zero vector.
struct GroupElement {
    std::vector<std::int64_t> c;

    GroupElement() = default;
    explicit GroupElement(std::vector<std::int64_t> coords) : c(std::move(coords)) {}

    bool is_identity() const {
        return std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; });
    }

    friend bool operator==(const GroupElement& a, const GroupElement& b) { return a.c == b.c; }
    friend bool operator!=(const GroupElement& a, const GroupElement& b) { return a.c != b.c; }
    friend bool operator<(const GroupElement& a, const GroupElement& b) { return a.c < b.c; }
};

struct ElementHash {
    std::size_t operator()(const GroupElement& g) const {
        return static_cast<std::size_t>(
            detail::fnv1a64(g.c.data(), g.c.size() * sizeof(std::int64_t)));
    }
};

using ElementSet = std::unordered_set<GroupElement, ElementHash>;

struct GroupSpec {
    GroupKind kind = GroupKind::integer_lattice;
    int lattice_dim = 1;                      // integer_lattice
    std::int64_t modulus = 0;                 // cyclic_finite
    std::shared_ptr<const GroupSpec> left;    // direct_product factors
    std::shared_ptr<const GroupSpec> right;
    std::vector<GroupElement> generators;     // symmetric, identity excluded
    std::string name;

    int arity() const {
        switch (kind) {
            case GroupKind::integer_lattice: return lattice_dim;
            case GroupKind::cyclic_finite: return 1;
            case GroupKind::infinite_dihedral: return 2;
            case GroupKind::heisenberg3: return 3;
            case GroupKind::direct_product: return left->arity() + right->arity();
        }
        return 0;
    }

    bool is_product() const { return kind == GroupKind::direct_product; }

    static GroupSpec integer_lattice(int d);
    static GroupSpec cyclic(std::int64_t m);
    static GroupSpec infinite_dihedral();
    static GroupSpec heisenberg();
    static GroupSpec direct_product(GroupSpec a, GroupSpec b);
};

inline GroupElement identity_of(const GroupSpec& spec) {
    return GroupElement(std::vector<std::int64_t>(spec.arity(), 0));
}

namespace detail {

inline std::int64_t mod_canonical(std::int64_t v, std::int64_t m) {
    std::int64_t r = v % m;
    return r < 0 ? r + m : r;
}

inline void multiply_span(const GroupSpec& spec, const std::int64_t* a, const std::int64_t* b,
                          std::int64_t* out) {
    switch (spec.kind) {
        case GroupKind::integer_lattice:
            for (int i = 0; i < spec.lattice_dim; ++i) out[i] = a[i] + b[i];
            return;
        case GroupKind::cyclic_finite:
            out[0] = mod_canonical(a[0] + b[0], spec.modulus);
            return;
        case GroupKind::infinite_dihedral:
            // (n, e)(m, f) = (n + (-1)^e m, e xor f)
            out[0] = a[0] + (a[1] ? -b[0] : b[0]);
            out[1] = a[1] ^ b[1];
            return;
        case GroupKind::heisenberg3:
            out[0] = a[0] + b[0];
            out[1] = a[1] + b[1];
            out[2] = a[2] + b[2] + a[0] * b[1];
            return;
        case GroupKind::direct_product: {
            const int la = spec.left->arity();
            multiply_span(*spec.left, a, b, out);
            multiply_span(*spec.right, a + la, b + la, out + la);
            return;
        }
    }
}

inline void inverse_span(const GroupSpec& spec, const std::int64_t* a, std::int64_t* out) {
    switch (spec.kind) {
        case GroupKind::integer_lattice:
            for (int i = 0; i < spec.lattice_dim; ++i) out[i] = -a[i];
            return;
        case GroupKind::cyclic_finite:
            out[0] = mod_canonical(-a[0], spec.modulus);
            return;
        case GroupKind::infinite_dihedral:
            out[0] = a[1] ? a[0] : -a[0];
            out[1] = a[1];
            return;
        case GroupKind::heisenberg3:
            out[0] = -a[0];
            out[1] = -a[1];
            out[2] = a[0] * a[1] - a[2];
            return;
        case GroupKind::direct_product: {
            const int la = spec.left->arity();
            inverse_span(*spec.left, a, out);
            inverse_span(*spec.right, a + la, out + la);
            return;
        }
    }
}

}  // namespace detail

inline GroupElement multiply(const GroupElement& g, const GroupElement& h, const GroupSpec& spec) {
    const std::size_t n = static_cast<std::size_t>(spec.arity());
    if (g.c.size() != n || h.c.size() != n)
        throw precondition_error("element arity does not match group spec '" + spec.name + "'");
    GroupElement out;
    out.c.resize(n);
    detail::multiply_span(spec, g.c.data(), h.c.data(), out.c.data());
    return out;
}

inline GroupElement inverse(const GroupElement& g, const GroupSpec& spec) {
    const std::size_t n = static_cast<std::size_t>(spec.arity());
    if (g.c.size() != n)
        throw precondition_error("element arity does not match group spec '" + spec.name + "'");
    GroupElement out;
    out.c.resize(n);
    detail::inverse_span(spec, g.c.data(), out.c.data());
    return out;
}

// Factor access / element splitting for direct products.
inline const GroupSpec& left_factor(const GroupSpec& spec) {
    if (!spec.is_product()) throw precondition_error("group '" + spec.name + "' is not a direct product");
    return *spec.left;
}
inline const GroupSpec& right_factor(const GroupSpec& spec) {
    if (!spec.is_product()) throw precondition_error("group '" + spec.name + "' is not a direct product");
    return *spec.right;
}
inline GroupElement project_left(const GroupElement& g, const GroupSpec& spec) {
    const int la = left_factor(spec).arity();
    return GroupElement(std::vector<std::int64_t>(g.c.begin(), g.c.begin() + la));
}
inline GroupElement project_right(const GroupElement& g, const GroupSpec& spec) {
    const int la = left_factor(spec).arity();
    return GroupElement(std::vector<std::int64_t>(g.c.begin() + la, g.c.end()));
}
inline GroupElement join(const GroupElement& g1, const GroupElement& g2) {
    GroupElement out;
    out.c.reserve(g1.c.size() + g2.c.size());
    out.c.insert(out.c.end(), g1.c.begin(), g1.c.end());
    out.c.insert(out.c.end(), g2.c.begin(), g2.c.end());
    return out;
}

// ----------------------------------------------------------------- balls --

// Layered Cayley-graph ball computed by BFS from the identity. `elements` is
// the total enumeration: nondecreasing word length, ties broken by the
// lexicographically least shortest word over generator indices (the BFS
// discovery order when parents are expanded in enumeration order).
struct BallTable {
    GroupSpec spec;
    int radius = 0;
    std::vector<GroupElement> elements;
    std::vector<std::size_t> offsets;  // layer n = [offsets[n], offsets[n+1])
    std::unordered_map<GroupElement, int, ElementHash> length;

    std::size_t gamma(int n) const { return offsets[static_cast<std::size_t>(n) + 1]; }
    std::size_t size() const { return elements.size(); }
    bool contains(const GroupElement& g) const { return length.count(g) != 0; }
    int word_length_of(const GroupElement& g) const {
        auto it = length.find(g);
        if (it == length.end())
            throw search_limit_error("element outside ball of radius " + std::to_string(radius));
        return it->second;
    }
};

inline BallTable build_ball(const GroupSpec& spec, int radius,
                            const Limits& lim = default_limits()) {
    if (radius < 0) throw precondition_error("negative ball radius");
    BallTable t;
    t.spec = spec;
    t.radius = radius;
    const GroupElement e = identity_of(spec);
    t.elements.push_back(e);
    t.length.emplace(e, 0);
    t.offsets = {0, 1};
    std::size_t layer_begin = 0;
    for (int n = 1; n <= radius; ++n) {
        const std::size_t layer_end = t.elements.size();
        for (std::size_t i = layer_begin; i < layer_end; ++i) {
            const GroupElement parent = t.elements[i];  // copy: vector may grow
            for (const GroupElement& s : spec.generators) {
                GroupElement next = multiply(parent, s, spec);
                if (t.length.emplace(next, n).second) {
                    if (t.elements.size() >= lim.ball_elements)
                        throw resource_error("ball element cap exceeded (" +
                                             std::to_string(lim.ball_elements) + ")");
                    t.elements.push_back(std::move(next));
                }
            }
        }
        layer_begin = layer_end;
        t.offsets.push_back(t.elements.size());
    }
    return t;
}

inline std::vector<GroupElement> ball(const GroupSpec& spec, int radius,
                                      const Limits& lim = default_limits()) {
    return build_ball(spec, radius, lim).elements;
}

// Minimal generator word length of g, by BFS with a radius cap.
inline int word_length(const GroupElement& g, const GroupSpec& spec, int max_radius = 256,
                       const Limits& lim = default_limits()) {
    if (g.is_identity()) return 0;
    ElementSet seen;
    seen.insert(identity_of(spec));
    std::vector<GroupElement> layer{identity_of(spec)};
    for (int n = 1; n <= max_radius; ++n) {
        std::vector<GroupElement> next_layer;
        for (const GroupElement& parent : layer) {
            for (const GroupElement& s : spec.generators) {
                GroupElement next = multiply(parent, s, spec);
                if (next == g) return n;
                if (seen.insert(next).second) {
                    if (seen.size() >= lim.ball_elements)
                        throw resource_error("ball element cap exceeded during word-length search");
                    next_layer.push_back(std::move(next));
                }
            }
        }
        if (next_layer.empty()) break;  // whole (finite) group exhausted
        layer = std::move(next_layer);
    }
    throw search_limit_error("word length search exceeded radius cap " +
                             std::to_string(max_radius) + "; raise the cap");
}

// The box ball B_{S1}(m) x B_{S2}(m) of a direct product, i.e. the unit ball
// of |g|_inf = max(l_{S1}(g_1), l_{S2}(g_2)).
inline std::vector<GroupElement> box_ball(const GroupSpec& spec, int m,
                                          const Limits& lim = default_limits()) {
    const BallTable b1 = build_ball(left_factor(spec), m, lim);
    const BallTable b2 = build_ball(right_factor(spec), m, lim);
    if (b1.size() * b2.size() > lim.window_cells)
        throw resource_error("box ball exceeds window cell cap");
    std::vector<GroupElement> out;
    out.reserve(b1.size() * b2.size());
    for (const GroupElement& a : b1.elements)
        for (const GroupElement& b : b2.elements) out.push_back(join(a, b));
    return out;
}

// ---------------------------------------------------------------- growth --

struct GrowthTable {
    BallTable ball;                   // enumeration + layer structure
    std::vector<std::size_t> sizes;   // gamma(0..n_max)
    double degree_fit = 0.0;          // estimated deg(G)

    int n_max() const { return ball.radius; }
};

namespace detail {

// Least-squares slope of log(sphere size) vs log(n) over the upper half of
// the radius range, plus one. Fitting increments instead of ball sizes kills
// the lower-order bias that otherwise dominates at desk-scale radii.
inline double fit_growth_degree(const std::vector<std::size_t>& gamma) {
    const int n_max = static_cast<int>(gamma.size()) - 1;
    if (n_max < 2) return 0.0;
    const int lo = std::max((n_max + 1) / 2, 1);
    std::vector<double> xs, ys;
    for (int n = lo; n <= n_max; ++n) {
        const auto sphere = gamma[static_cast<std::size_t>(n)] - gamma[static_cast<std::size_t>(n) - 1];
        if (sphere == 0) return 0.0;  // bounded group: growth degree 0
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(static_cast<double>(sphere)));
    }
    if (xs.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if (den == 0.0) return 0.0;
    return 1.0 + num / den;
}

}  // namespace detail

inline GrowthTable growth_table(const GroupSpec& spec, int n_max,
                                const Limits& lim = default_limits()) {
    GrowthTable t;
    t.ball = build_ball(spec, n_max, lim);
    t.sizes.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) t.sizes[static_cast<std::size_t>(n)] = t.ball.gamma(n);
    t.degree_fit = detail::fit_growth_degree(t.sizes);
    return t;
}

// ------------------------------------------------------------post Folner --

// K-boundary B(A,K) = {g : Kg meets both A and its complement}.
inline std::vector<GroupElement> boundary(const std::vector<GroupElement>& a_set,
                                          const std::vector<GroupElement>& k_set,
                                          const GroupSpec& spec) {
    if (a_set.empty() || k_set.empty()) throw precondition_error("boundary needs nonempty A and K");
    ElementSet a_lookup(a_set.begin(), a_set.end());
    std::vector<GroupElement> k_inv;
    k_inv.reserve(k_set.size());
    for (const GroupElement& k : k_set) k_inv.push_back(inverse(k, spec));

    ElementSet candidates;  // K^{-1} A = {g : Kg meets A}
    for (const GroupElement& ki : k_inv)
        for (const GroupElement& a : a_set) candidates.insert(multiply(ki, a, spec));

    std::vector<GroupElement> out;
    for (const GroupElement& g : candidates) {
        bool escapes = false;
        for (const GroupElement& k : k_set) {
            if (!a_lookup.count(multiply(k, g, spec))) { escapes = true; break; }
        }
        if (escapes) out.push_back(g);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline Rational invariance_ratio(const std::vector<GroupElement>& a_set,
                                 const std::vector<GroupElement>& k_set,
                                 const GroupSpec& spec) {
    const auto b = boundary(a_set, k_set, spec);
    return Rational(static_cast<std::int64_t>(b.size()), static_cast<std::int64_t>(a_set.size()));
}

struct TemperedWitness {
    Rational max_ratio{1, 1};           // smallest C witnessed on the prefix
    std::vector<Rational> per_n;        // ratio at n = 2..n_max
};

// max over 2 <= n <= n_max of |U_{k<n} B(k)^{-1} B(n)| / |B(n)| for the ball
// Folner sequence. B(k)^{-1} = B(k) for symmetric S, and the union over k < n
// collapses to B(n-1)B(n).
inline TemperedWitness tempered_prefix(const GroupSpec& spec, int n_max,
                                       const Limits& lim = default_limits()) {
    TemperedWitness w;
    if (n_max < 2) return w;  // vacuous maximum
    const BallTable t = build_ball(spec, n_max, lim);
    for (int n = 2; n <= n_max; ++n) {
        ElementSet prod;
        for (std::size_t i = 0; i < t.gamma(n - 1); ++i) {
            const GroupElement inv_a = inverse(t.elements[i], spec);
            for (std::size_t j = 0; j < t.gamma(n); ++j)
                prod.insert(multiply(inv_a, t.elements[j], spec));
        }
        const Rational r(static_cast<std::int64_t>(prod.size()),
                         static_cast<std::int64_t>(t.gamma(n)));
        w.per_n.push_back(r);
        if (w.max_ratio < r) w.max_ratio = r;
    }
    return w;
}

// ----------------------------------------------------------- catalog --

namespace detail {

inline GroupElement coords(std::initializer_list<std::int64_t> v) {
    return GroupElement(std::vector<std::int64_t>(v));
}

}  // namespace detail

inline GroupSpec GroupSpec::integer_lattice(int d) {
    if (d < 1) throw precondition_error("integer lattice needs dimension >= 1");
    GroupSpec s;
    s.kind = GroupKind::integer_lattice;
    s.lattice_dim = d;
    s.name = d == 1 ? "Z" : "Z^" + std::to_string(d);
    for (int i = 0; i < d; ++i) {
        std::vector<std::int64_t> plus(static_cast<std::size_t>(d), 0), minus(static_cast<std::size_t>(d), 0);
        plus[static_cast<std::size_t>(i)] = 1;
        minus[static_cast<std::size_t>(i)] = -1;
        s.generators.emplace_back(plus);
        s.generators.emplace_back(minus);
    }
    return s;
}

inline GroupSpec GroupSpec::cyclic(std::int64_t m) {
    if (m < 2) throw precondition_error("cyclic group needs modulus >= 2");
    GroupSpec s;
    s.kind = GroupKind::cyclic_finite;
    s.modulus = m;
    s.name = "Z/" + std::to_string(m) + "Z";
    s.generators.push_back(detail::coords({1}));
    if (m > 2) s.generators.push_back(detail::coords({m - 1}));
    return s;
}

inline GroupSpec GroupSpec::infinite_dihedral() {
    GroupSpec s;
    s.kind = GroupKind::infinite_dihedral;
    s.name = "Dinf";
    s.generators.push_back(detail::coords({0, 1}));  // r: x -> -x
    s.generators.push_back(detail::coords({1, 1}));  // s: x -> 1 - x
    return s;
}

inline GroupSpec GroupSpec::heisenberg() {
    GroupSpec s;
    s.kind = GroupKind::heisenberg3;
    s.name = "H3";
    s.generators.push_back(detail::coords({1, 0, 0}));
    s.generators.push_back(detail::coords({-1, 0, 0}));
    s.generators.push_back(detail::coords({0, 1, 0}));
    s.generators.push_back(detail::coords({0, -1, 0}));
    return s;
}

inline GroupSpec GroupSpec::direct_product(GroupSpec a, GroupSpec b) {
    GroupSpec s;
    s.kind = GroupKind::direct_product;
    s.name = a.name + " x " + b.name;
    auto la = std::make_shared<GroupSpec>(std::move(a));
    auto rb = std::make_shared<GroupSpec>(std::move(b));
    s.left = la;
    s.right = rb;
    // S = (S1 x {1}) u ({1} x S2)
    const GroupElement e1 = identity_of(*la), e2 = identity_of(*rb);
    for (const GroupElement& g : la->generators) s.generators.push_back(join(g, e2));
    for (const GroupElement& g : rb->generators) s.generators.push_back(join(e1, g));
    return s;
}

// Validates a (possibly user-supplied) generator list: symmetric, identity
// excluded, and generating (reaches the default catalog ball of radius 2).
inline void validate_generators(const GroupSpec& spec, const Limits& lim = default_limits()) {
    if (spec.generators.empty()) throw precondition_error("empty generator list");
    ElementSet gens;
    for (const GroupElement& s : spec.generators) {
        if (static_cast<int>(s.c.size()) != spec.arity())
            throw precondition_error("generator arity mismatch in group '" + spec.name + "'");
        if (s.is_identity()) throw precondition_error("generator list contains the identity");
        gens.insert(s);
    }
    for (const GroupElement& s : spec.generators)
        if (!gens.count(inverse(s, spec)))
            throw precondition_error("generator list is not symmetric (missing an inverse)");

    GroupSpec reference = spec;
    switch (spec.kind) {
        case GroupKind::integer_lattice: reference = GroupSpec::integer_lattice(spec.lattice_dim); break;
        case GroupKind::cyclic_finite: reference = GroupSpec::cyclic(spec.modulus); break;
        case GroupKind::infinite_dihedral: reference = GroupSpec::infinite_dihedral(); break;
        case GroupKind::heisenberg3: reference = GroupSpec::heisenberg(); break;
        case GroupKind::direct_product: {
            // factors validate themselves when constructed; check joint reach below
            break;
        }
    }
    const auto target = build_ball(reference, 2, lim).elements;
    ElementSet reached;
    for (const GroupElement& g : build_ball(spec, 16, lim).elements) reached.insert(g);
    for (const GroupElement& g : target)
        if (!reached.count(g))
            throw precondition_error("generator list does not generate group '" + spec.name +
                                     "' (test ball unreachable within radius 16)");
}

}  // namespace meandim
