#pragma once

// Structured text config: nested key/value blocks with line/column errors,
// a canonical serializer, and loaders for group, subshift, measure and
// covering-instance specs.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "meandim/core.hpp"
#include "meandim/covering.hpp"
#include "meandim/group.hpp"
#include "meandim/measure.hpp"
#include "meandim/subshift.hpp"

namespace meandim {

// ------------------------------------------------------------- the format --
//
//   key = value            # scalar entry, value runs to end of line
//   block {                # nested block
//     key = value
//   }
//
// Keys may repeat. Lists are whitespace/comma separated inside a value;
// vectors use parentheses: generators = (1 0) (-1 0).

class ConfigNode {
public:
    struct Scalar {
        std::string raw;
        int line = 0, col = 0;
    };
    using Child = std::shared_ptr<ConfigNode>;
    using Entry = std::pair<std::string, std::variant<Scalar, Child>>;

    std::vector<Entry> entries;
    int line = 0, col = 0;

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }

    const Scalar& scalar(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) {
                if (const auto* s = std::get_if<Scalar>(&v)) return *s;
                throw config_error("'" + key + "' is a block, expected a value", line, col);
            }
        throw config_error("missing key '" + key + "'", line, col);
    }

    std::string get_string(const std::string& key) const { return scalar(key).raw; }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    long get_int(const std::string& key) const {
        const Scalar& s = scalar(key);
        try {
            std::size_t used = 0;
            const long v = std::stol(s.raw, &used);
            if (used != s.raw.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw config_error("'" + key + "' is not an integer: '" + s.raw + "'", s.line, s.col);
        }
    }

    long get_int_or(const std::string& key, long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    double get_double(const std::string& key) const {
        const Scalar& s = scalar(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(s.raw, &used);
            if (used != s.raw.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw config_error("'" + key + "' is not a number: '" + s.raw + "'", s.line, s.col);
        }
    }

    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    std::vector<std::string> get_list(const std::string& key) const {
        const Scalar& s = scalar(key);
        std::vector<std::string> out;
        std::string cur;
        for (char c : s.raw) {
            if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) out.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) out.push_back(std::move(cur));
        return out;
    }

    std::vector<long> get_int_list(const std::string& key) const {
        std::vector<long> out;
        for (const auto& tok : get_list(key)) {
            try {
                out.push_back(std::stol(tok));
            } catch (const std::exception&) {
                const Scalar& s = scalar(key);
                throw config_error("'" + key + "' has a non-integer item '" + tok + "'", s.line,
                                   s.col);
            }
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& tok : get_list(key)) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                const Scalar& s = scalar(key);
                throw config_error("'" + key + "' has a non-numeric item '" + tok + "'", s.line,
                                   s.col);
            }
        }
        return out;
    }

    // integer vectors in parentheses: (1 0) (-1 0)
    std::vector<std::vector<std::int64_t>> get_vector_list(const std::string& key) const {
        const Scalar& s = scalar(key);
        std::vector<std::vector<std::int64_t>> out;
        std::vector<std::int64_t> cur;
        std::string tok;
        bool inside = false;
        auto flush_tok = [&] {
            if (tok.empty()) return;
            try {
                cur.push_back(std::stoll(tok));
            } catch (const std::exception&) {
                throw config_error("'" + key + "' has a non-integer coordinate '" + tok + "'",
                                   s.line, s.col);
            }
            tok.clear();
        };
        for (char c : s.raw) {
            if (c == '(') {
                if (inside) throw config_error("nested '(' in '" + key + "'", s.line, s.col);
                inside = true;
                cur.clear();
            } else if (c == ')') {
                if (!inside) throw config_error("unmatched ')' in '" + key + "'", s.line, s.col);
                flush_tok();
                out.push_back(cur);
                inside = false;
            } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                flush_tok();
            } else {
                tok.push_back(c);
            }
        }
        if (inside) throw config_error("unterminated '(' in '" + key + "'", s.line, s.col);
        flush_tok();
        if (!tok.empty()) throw config_error("stray token outside '()' in '" + key + "'", s.line, s.col);
        return out;
    }

    const ConfigNode& child(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) {
                if (const auto* c = std::get_if<Child>(&v)) return **c;
                throw config_error("'" + key + "' is a value, expected a block", line, col);
            }
        throw config_error("missing block '" + key + "'", line, col);
    }

    std::vector<const ConfigNode*> children(const std::string& key) const {
        std::vector<const ConfigNode*> out;
        for (const auto& [k, v] : entries)
            if (k == key)
                if (const auto* c = std::get_if<Child>(&v)) out.push_back(c->get());
        return out;
    }

    std::vector<std::string> scalars(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries)
            if (k == key)
                if (const auto* s = std::get_if<Scalar>(&v)) out.push_back(s->raw);
        return out;
    }

    void canonical(std::ostream& os, int indent = 0) const {
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        for (const auto& [k, v] : entries) {
            if (const auto* s = std::get_if<Scalar>(&v)) {
                os << pad << k << " = " << s->raw << "\n";
            } else {
                os << pad << k << " {\n";
                std::get<Child>(v)->canonical(os, indent + 1);
                os << pad << "}\n";
            }
        }
    }

    std::string canonical_string() const {
        std::ostringstream oss;
        canonical(oss);
        return oss.str();
    }
};

// ----------------------------------------------------------------- parser --

namespace detail {

struct ConfigParser {
    std::string_view text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    char peek() const { return pos < text.size() ? text[pos] : '\0'; }

    void advance() {
        if (pos >= text.size()) return;
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_blank_and_comments() {
        while (pos < text.size()) {
            const char c = peek();
            if (c == '#') {
                while (pos < text.size() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                return;
            }
        }
    }

    std::string parse_key() {
        std::string key;
        while (pos < text.size()) {
            const char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.') {
                key.push_back(c);
                advance();
            } else {
                break;
            }
        }
        return key;
    }

    ConfigNode parse_block(bool top_level) {
        ConfigNode node;
        node.line = line;
        node.col = col;
        while (true) {
            skip_blank_and_comments();
            if (pos >= text.size()) {
                if (!top_level) throw config_error("unexpected end of file inside block", line, col);
                return node;
            }
            if (peek() == '}') {
                if (top_level) throw config_error("unmatched '}'", line, col);
                advance();
                return node;
            }
            const int key_line = line, key_col = col;
            const std::string key = parse_key();
            if (key.empty())
                throw config_error(std::string("expected a key, found '") + peek() + "'", line, col);
            skip_inline_space();
            if (peek() == '{') {
                advance();
                auto child = std::make_shared<ConfigNode>(parse_block(false));
                child->line = key_line;
                child->col = key_col;
                node.entries.emplace_back(key, std::move(child));
            } else if (peek() == '=') {
                advance();
                skip_inline_space();
                ConfigNode::Scalar s;
                s.line = line;
                s.col = col;
                while (pos < text.size() && peek() != '\n' && peek() != '#') {
                    s.raw.push_back(peek());
                    advance();
                }
                while (!s.raw.empty() && std::isspace(static_cast<unsigned char>(s.raw.back())))
                    s.raw.pop_back();
                if (s.raw.empty())
                    throw config_error("empty value for key '" + key + "'", key_line, key_col);
                node.entries.emplace_back(key, std::move(s));
            } else {
                throw config_error("expected '=' or '{' after key '" + key + "'", line, col);
            }
        }
    }

    void skip_inline_space() {
        while (pos < text.size() && (peek() == ' ' || peek() == '\t')) advance();
    }
};

}  // namespace detail

inline ConfigNode parse_config_text(std::string_view text) {
    detail::ConfigParser p{text};
    return p.parse_block(true);
}

inline ConfigNode parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream oss;
    oss << in.rdbuf();
    const std::string text = oss.str();
    try {
        return parse_config_text(text);
    } catch (config_error& e) {
        throw config_error(std::string(e.what()) + " in " + path);
    }
}

// ---------------------------------------------------------------- loaders --

inline GroupSpec load_group_spec(const ConfigNode& node) {
    const std::string kind = node.get_string("kind");
    GroupSpec spec;
    if (kind == "integer_lattice") {
        spec = GroupSpec::integer_lattice(static_cast<int>(node.get_int_or("d", 1)));
    } else if (kind == "cyclic") {
        spec = GroupSpec::cyclic(node.get_int("m"));
    } else if (kind == "infinite_dihedral") {
        spec = GroupSpec::infinite_dihedral();
    } else if (kind == "heisenberg") {
        spec = GroupSpec::heisenberg();
    } else if (kind == "direct_product") {
        spec = GroupSpec::direct_product(load_group_spec(node.child("left")),
                                         load_group_spec(node.child("right")));
    } else {
        throw config_error("unknown group kind '" + kind + "'", node.line, node.col);
    }
    if (node.has("generators")) {
        spec.generators.clear();
        for (auto& coords : node.get_vector_list("generators"))
            spec.generators.emplace_back(std::move(coords));
        validate_generators(spec);
    }
    if (node.has("name")) spec.name = node.get_string("name");
    return spec;
}

inline SubshiftSpec load_subshift_spec(const ConfigNode& node) {
    Alphabet alphabet;
    if (node.has("alphabet")) {
        const auto toks = node.get_list("alphabet");
        if (toks.size() == 1) {
            bool numeric = !toks[0].empty();
            for (char c : toks[0])
                if (!std::isdigit(static_cast<unsigned char>(c))) numeric = false;
            if (numeric) alphabet = Alphabet(std::stoi(toks[0]));
            else alphabet = Alphabet(std::vector<std::string>{toks[0]});
        } else {
            alphabet = Alphabet(toks);
        }
    } else {
        alphabet = Alphabet(2);
    }
    if (alphabet.size() < 1) throw config_error("alphabet must be nonempty", node.line, node.col);

    const std::string kind = node.get_string("kind");
    if (kind == "full_shift") return SubshiftSpec::full_shift(std::move(alphabet));
    if (kind == "fiber_sft") {
        std::vector<std::vector<Symbol>> words;
        for (const auto& w : node.get_list("forbidden_words")) {
            std::vector<Symbol> word;
            for (char c : w) word.push_back(alphabet.index_of(std::string(1, c)));
            words.push_back(std::move(word));
        }
        return SubshiftSpec::fiber_sft(std::move(alphabet), std::move(words));
    }
    if (kind == "general_sft") {
        std::vector<ForbiddenPattern> pats;
        for (const ConfigNode* p : node.children("pattern")) {
            ForbiddenPattern fp;
            for (const std::string& raw : p->scalars("entry")) {
                // "<coords> -> <letter>"
                const auto arrow = raw.find("->");
                if (arrow == std::string::npos)
                    throw config_error("pattern entry needs 'coords -> letter'", p->line, p->col);
                std::istringstream coords(raw.substr(0, arrow));
                std::vector<std::int64_t> cell;
                std::int64_t v;
                while (coords >> v) cell.push_back(v);
                std::string letter = raw.substr(arrow + 2);
                letter.erase(0, letter.find_first_not_of(" \t"));
                letter.erase(letter.find_last_not_of(" \t") + 1);
                fp.offsets.emplace_back(std::move(cell));
                fp.letters.push_back(alphabet.index_of(letter));
            }
            if (fp.offsets.empty())
                throw config_error("forbidden pattern without entries", p->line, p->col);
            pats.push_back(std::move(fp));
        }
        return SubshiftSpec::general_sft(std::move(alphabet), std::move(pats));
    }
    throw config_error("unknown subshift kind '" + kind + "'", node.line, node.col);
}

inline MeasureSpec load_measure_spec(const ConfigNode& node) {
    const std::string kind = node.get_string("kind");
    if (kind == "bernoulli")
        return MeasureSpec::bernoulli(FiniteDistribution::from_weights(node.get_double_list("weights")));
    if (kind == "fiber_markov") {
        std::vector<std::vector<double>> rows;
        for (const std::string& raw : node.scalars("row")) {
            std::istringstream ss(raw);
            std::vector<double> row;
            double v;
            while (ss >> v) row.push_back(v);
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw config_error("fiber_markov needs 'row' entries", node.line, node.col);
        std::vector<double> pi;
        if (node.has("stationary")) pi = node.get_double_list("stationary");
        return MeasureSpec::fiber_markov(std::move(rows), std::move(pi));
    }
    if (kind == "max_entropy_markov") {
        std::vector<std::vector<int>> adj;
        for (const std::string& raw : node.scalars("row")) {
            std::istringstream ss(raw);
            std::vector<int> row;
            int v;
            while (ss >> v) row.push_back(v);
            adj.push_back(std::move(row));
        }
        if (adj.empty()) throw config_error("max_entropy_markov needs 'row' entries", node.line, node.col);
        return max_entropy_markov(adj);
    }
    throw config_error("unknown measure kind '" + kind + "'", node.line, node.col);
}

// Covering instances: either generator parameters or explicit sets.
//   kind = intervals | tower | explicit
inline TranslateArray load_translate_array(const ConfigNode& node, std::uint64_t seed) {
    const std::string kind = node.get_string("kind");
    if (kind == "intervals") {
        IntervalInstanceParams p;
        p.ambient_length = node.get_int_or("ambient_length", 10000);
        if (node.has("shape_lengths")) p.shape_lengths = node.get_int_list("shape_lengths");
        p.base_density = node.get_double_or("base_density", 1.0);
        p.delta = node.get_double_or("delta", 1e-5);
        p.singleton_level = node.get_int_or("singleton_level", 0) != 0;
        p.seed = seed;
        return make_interval_instance(p);
    }
    if (kind == "tower") {
        TowerInstanceParams p;
        p.ambient_length = node.get_int_or("ambient_length", 9000);
        p.top_length = node.get_int_or("top_length", 8000);
        p.delta = node.get_double_or("delta", 0.009);
        p.base_density = node.get_double_or("base_density", 0.7);
        p.seed = seed;
        return make_tower_instance(p);
    }
    if (kind == "explicit") {
        TranslateArray t;
        t.spec = node.has("group") ? load_group_spec(node.child("group"))
                                   : GroupSpec::integer_lattice(1);
        t.delta = node.get_double_or("delta", 0.005);
        t.big_c = node.get_double_or("C", 2.0);
        t.d_set = {identity_of(t.spec)};
        if (node.has("d_set"))
            for (auto& coords : node.get_vector_list("d_set")) t.d_set.emplace_back(std::move(coords));
        for (auto& coords : node.get_vector_list("ambient")) t.ambient.emplace_back(std::move(coords));
        for (const ConfigNode* level : node.children("level")) {
            std::vector<std::vector<GroupElement>> shapes, bases;
            for (const ConfigNode* sh : level->children("shape")) {
                std::vector<GroupElement> cells, base;
                for (auto& coords : sh->get_vector_list("cells")) cells.emplace_back(std::move(coords));
                for (auto& coords : sh->get_vector_list("base")) base.emplace_back(std::move(coords));
                shapes.push_back(std::move(cells));
                bases.push_back(std::move(base));
            }
            t.shapes.push_back(std::move(shapes));
            t.bases.push_back(std::move(bases));
        }
        if (t.shapes.empty()) throw config_error("explicit instance needs levels", node.line, node.col);
        return t;
    }
    throw config_error("unknown covering instance kind '" + kind + "'", node.line, node.col);
}

}  // namespace meandim
