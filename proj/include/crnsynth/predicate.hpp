#ifndef CRNSYNTH_PREDICATE_HPP
#define CRNSYNTH_PREDICATE_HPP

// State predicates over molecule counts and their text format.
//
//   pred  ::= true | false | cmp | ! pred | pred op pred   op in && || => <=>
//   cmp   ::= arith rel arith                              rel in < <= = > >=
//   arith ::= species | integer | arith op arith           op in + - *
//
// Precedence, loosest first: <=>, =>, ||, &&, !, comparisons, + -, *.
// `=>` associates to the right, every other binary operator to the left.

#include <cctype>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crnsynth/crn.hpp"
#include "crnsynth/error.hpp"

namespace crnsynth {

enum class PredOp {
    True, False, Not, And, Or, Implies, Iff,  // boolean
    Lt, Le, Eq, Gt, Ge,                       // comparisons
    Species, Const, Add, Sub, Mul             // arithmetic
};

namespace detail {

struct PredNode {
    PredOp op;
    std::int64_t value = 0; // Const
    std::string name;       // Species
    std::shared_ptr<const PredNode> lhs, rhs;
};

using NodePtr = std::shared_ptr<const PredNode>;

inline bool isBooleanOp(PredOp op) { return op <= PredOp::Ge; }

inline NodePtr makeNode(PredOp op, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_shared<PredNode>();
    n->op = op;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

} // namespace detail

/// Integer-valued expression over species counts.
class Expr {
public:
    static Expr species(std::string name) {
        auto n = std::make_shared<detail::PredNode>();
        n->op = PredOp::Species;
        n->name = std::move(name);
        return Expr(n);
    }
    static Expr constant(std::int64_t c) {
        auto n = std::make_shared<detail::PredNode>();
        n->op = PredOp::Const;
        n->value = c;
        return Expr(n);
    }

    explicit Expr(detail::NodePtr node) : node_(std::move(node)) {}
    const detail::NodePtr& node() const noexcept { return node_; }

    friend Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::makeNode(PredOp::Add, a.node_, b.node_)); }
    friend Expr operator-(const Expr& a, const Expr& b) { return Expr(detail::makeNode(PredOp::Sub, a.node_, b.node_)); }
    friend Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::makeNode(PredOp::Mul, a.node_, b.node_)); }

private:
    detail::NodePtr node_;
};

/// Boolean formula over species counts (one of phi_0 / phi_F).
class StatePredicate {
public:
    StatePredicate() : StatePredicate(truth(true)) {}
    explicit StatePredicate(detail::NodePtr node) : node_(std::move(node)) {
        if (!node_ || !detail::isBooleanOp(node_->op)) throw StructuralError("predicate root must be boolean");
    }

    static StatePredicate truth(bool v) { return StatePredicate(detail::makeNode(v ? PredOp::True : PredOp::False)); }

    const detail::NodePtr& node() const noexcept { return node_; }

    friend StatePredicate operator&&(const StatePredicate& a, const StatePredicate& b) {
        return StatePredicate(detail::makeNode(PredOp::And, a.node_, b.node_));
    }
    friend StatePredicate operator||(const StatePredicate& a, const StatePredicate& b) {
        return StatePredicate(detail::makeNode(PredOp::Or, a.node_, b.node_));
    }
    friend StatePredicate operator!(const StatePredicate& a) { return StatePredicate(detail::makeNode(PredOp::Not, a.node_)); }

private:
    detail::NodePtr node_;
};

inline StatePredicate implies(const StatePredicate& a, const StatePredicate& b) {
    return StatePredicate(detail::makeNode(PredOp::Implies, a.node(), b.node()));
}
inline StatePredicate iff(const StatePredicate& a, const StatePredicate& b) {
    return StatePredicate(detail::makeNode(PredOp::Iff, a.node(), b.node()));
}
inline StatePredicate compare(PredOp rel, const Expr& a, const Expr& b) {
    if (rel < PredOp::Lt || rel > PredOp::Ge) throw StructuralError("not a comparison operator");
    return StatePredicate(detail::makeNode(rel, a.node(), b.node()));
}
inline StatePredicate operator==(const Expr& a, const Expr& b) { return compare(PredOp::Eq, a, b); }
inline StatePredicate operator<(const Expr& a, const Expr& b) { return compare(PredOp::Lt, a, b); }
inline StatePredicate operator<=(const Expr& a, const Expr& b) { return compare(PredOp::Le, a, b); }
inline StatePredicate operator>(const Expr& a, const Expr& b) { return compare(PredOp::Gt, a, b); }
inline StatePredicate operator>=(const Expr& a, const Expr& b) { return compare(PredOp::Ge, a, b); }

/// Shorthand for `species == constant`.
inline StatePredicate countIs(const std::string& species, std::int64_t c) {
    return Expr::species(species) == Expr::constant(c);
}

/// Pair (phi_0, phi_F): a path must start in phi_0 and end terminal in phi_F.
struct PathPredicate {
    StatePredicate initial;
    StatePredicate final;
};

// ---------------------------------------------------------------------------
// Structural helpers

inline bool structurallyEqual(const detail::NodePtr& a, const detail::NodePtr& b) {
    if (!a || !b) return a == b;
    if (a->op != b->op) return false;
    if (a->op == PredOp::Const && a->value != b->value) return false;
    if (a->op == PredOp::Species && a->name != b->name) return false;
    return structurallyEqual(a->lhs, b->lhs) && structurallyEqual(a->rhs, b->rhs);
}

inline bool operator==(const StatePredicate& a, const StatePredicate& b) { return structurallyEqual(a.node(), b.node()); }

inline void collectSpecies(const detail::NodePtr& n, std::vector<std::string>& out) {
    if (!n) return;
    if (n->op == PredOp::Species) {
        for (const auto& s : out) {
            if (s == n->name) return;
        }
        out.push_back(n->name);
        return;
    }
    collectSpecies(n->lhs, out);
    collectSpecies(n->rhs, out);
}

/// True when no product of two non-constant terms occurs.
inline bool isLinear(const detail::NodePtr& n) {
    if (!n) return true;
    if (n->op == PredOp::Mul) {
        auto constantTree = [](const auto& self, const detail::NodePtr& m) -> bool {
            if (!m) return true;
            if (m->op == PredOp::Species) return false;
            return self(self, m->lhs) && self(self, m->rhs);
        };
        if (!constantTree(constantTree, n->lhs) && !constantTree(constantTree, n->rhs)) return false;
    }
    return isLinear(n->lhs) && isLinear(n->rhs);
}

// ---------------------------------------------------------------------------
// Evaluation

/// A predicate whose species references are resolved to state indices.
class BoundPredicate {
public:
    BoundPredicate(const StatePredicate& p, const std::vector<std::string>& speciesNames) : source_(p) {
        root_ = compile(p.node(), speciesNames);
    }

    bool operator()(const SysState& x) const { return evalBool(root_, x); }
    const StatePredicate& source() const noexcept { return source_; }

private:
    struct Node {
        PredOp op;
        std::int64_t value = 0; // Const value or species index
        int lhs = -1, rhs = -1;
    };

    int compile(const detail::NodePtr& n, const std::vector<std::string>& names) {
        Node node{n->op};
        if (n->op == PredOp::Species) {
            bool found = false;
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i] == n->name) {
                    node.value = static_cast<std::int64_t>(i);
                    found = true;
                    break;
                }
            }
            if (!found) throw StructuralError("predicate references unknown species '" + n->name + "'");
        } else if (n->op == PredOp::Const) {
            node.value = n->value;
        }
        if (n->lhs) node.lhs = compile(n->lhs, names);
        if (n->rhs) node.rhs = compile(n->rhs, names);
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size() - 1);
    }

    std::int64_t evalInt(int i, const SysState& x) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case PredOp::Species: return x[static_cast<std::size_t>(n.value)];
        case PredOp::Const: return n.value;
        case PredOp::Add: return evalInt(n.lhs, x) + evalInt(n.rhs, x);
        case PredOp::Sub: return evalInt(n.lhs, x) - evalInt(n.rhs, x);
        case PredOp::Mul: return evalInt(n.lhs, x) * evalInt(n.rhs, x);
        default: throw StructuralError("boolean node in arithmetic position");
        }
    }

    bool evalBool(int i, const SysState& x) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case PredOp::True: return true;
        case PredOp::False: return false;
        case PredOp::Not: return !evalBool(n.lhs, x);
        case PredOp::And: return evalBool(n.lhs, x) && evalBool(n.rhs, x);
        case PredOp::Or: return evalBool(n.lhs, x) || evalBool(n.rhs, x);
        case PredOp::Implies: return !evalBool(n.lhs, x) || evalBool(n.rhs, x);
        case PredOp::Iff: return evalBool(n.lhs, x) == evalBool(n.rhs, x);
        case PredOp::Lt: return evalInt(n.lhs, x) < evalInt(n.rhs, x);
        case PredOp::Le: return evalInt(n.lhs, x) <= evalInt(n.rhs, x);
        case PredOp::Eq: return evalInt(n.lhs, x) == evalInt(n.rhs, x);
        case PredOp::Gt: return evalInt(n.lhs, x) > evalInt(n.rhs, x);
        case PredOp::Ge: return evalInt(n.lhs, x) >= evalInt(n.rhs, x);
        default: throw StructuralError("arithmetic node in boolean position");
        }
    }

    StatePredicate source_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

inline bool evalPredicate(const BoundPredicate& p, const SysState& x) { return p(x); }

inline bool evalPredicate(const StatePredicate& p, const SysState& x, const std::vector<std::string>& speciesNames) {
    if (x.size() != speciesNames.size()) throw StructuralError("state dimension does not match species list");
    return BoundPredicate(p, speciesNames)(x);
}

// ---------------------------------------------------------------------------
// Upper bounds on species counts implied by a predicate

namespace detail {

using Bounds = std::vector<std::optional<std::int64_t>>;

inline std::optional<std::size_t> speciesIndex(const NodePtr& n, const std::vector<std::string>& names) {
    if (!n || n->op != PredOp::Species) return std::nullopt;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == n->name) return i;
    }
    return std::nullopt;
}

inline Bounds upperBounds(const NodePtr& n, const std::vector<std::string>& names) {
    Bounds b(names.size());
    switch (n->op) {
    case PredOp::False:
        // unsatisfiable: every count is vacuously bounded
        for (auto& e : b) e = 0;
        return b;
    case PredOp::And: {
        Bounds l = upperBounds(n->lhs, names), r = upperBounds(n->rhs, names);
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (l[i] && r[i]) b[i] = std::min(*l[i], *r[i]);
            else b[i] = l[i] ? l[i] : r[i];
        }
        return b;
    }
    case PredOp::Or: {
        Bounds l = upperBounds(n->lhs, names), r = upperBounds(n->rhs, names);
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (l[i] && r[i]) b[i] = std::max(*l[i], *r[i]);
        }
        return b;
    }
    case PredOp::Eq: case PredOp::Le: case PredOp::Lt: case PredOp::Ge: case PredOp::Gt: {
        // species REL const or const REL species
        NodePtr sp = n->lhs, c = n->rhs;
        PredOp rel = n->op;
        if (n->lhs->op == PredOp::Const && n->rhs->op == PredOp::Species) {
            sp = n->rhs;
            c = n->lhs;
            if (rel == PredOp::Ge) rel = PredOp::Le;
            else if (rel == PredOp::Gt) rel = PredOp::Lt;
            else if (rel == PredOp::Le) rel = PredOp::Ge;
            else if (rel == PredOp::Lt) rel = PredOp::Gt;
        }
        auto idx = speciesIndex(sp, names);
        if (!idx || c->op != PredOp::Const) return b;
        if (rel == PredOp::Eq || rel == PredOp::Le) b[*idx] = std::max<std::int64_t>(c->value, 0);
        else if (rel == PredOp::Lt) b[*idx] = std::max<std::int64_t>(c->value - 1, 0);
        return b;
    }
    default:
        return b;
    }
}

inline std::optional<Count> totalBound(const NodePtr& n, const std::vector<std::string>& names) {
    std::optional<Count> boxed = 0;
    for (const auto& b : upperBounds(n, names)) boxed = b && boxed ? std::optional<Count>(*boxed + *b) : std::nullopt;
    if (n->op == PredOp::Or) {
        auto l = totalBound(n->lhs, names), r = totalBound(n->rhs, names);
        if (l && r) return std::max(*l, *r);
    }
    if (n->op == PredOp::And) {
        // either side alone already bounds the conjunction
        for (auto side : {totalBound(n->lhs, names), totalBound(n->rhs, names)}) {
            if (side) boxed = boxed ? std::min(*boxed, *side) : *side;
        }
    }
    return boxed;
}

} // namespace detail

/// Largest total molecule count of any state satisfying `p`, derived from
/// per-species upper bounds in its conjunctive/disjunctive structure. Empty
/// when the predicate does not bound every species.
inline std::optional<Count> totalCountBound(const StatePredicate& p, const std::vector<std::string>& speciesNames) {
    return detail::totalBound(p.node(), speciesNames);
}

/// Every state with total at most `maxTotal` satisfying `p`, ordered by total
/// then lexicographically.
inline std::vector<SysState> satisfyingStates(const StatePredicate& p, const std::vector<std::string>& speciesNames,
                                              Count maxTotal) {
    BoundPredicate bp(p, speciesNames);
    std::vector<SysState> out;
    auto bounds = detail::upperBounds(p.node(), speciesNames);
    for (Count t = 0; t <= maxTotal; ++t) {
        for (auto& x : statesWithTotal(speciesNames.size(), t)) {
            bool inBox = true;
            for (std::size_t s = 0; s < bounds.size(); ++s) {
                if (bounds[s] && x[s] > *bounds[s]) {
                    inBox = false;
                    break;
                }
            }
            if (inBox && bp(x)) out.push_back(std::move(x));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Text format

namespace detail {

inline int precedence(PredOp op) {
    switch (op) {
    case PredOp::Iff: return 1;
    case PredOp::Implies: return 2;
    case PredOp::Or: return 3;
    case PredOp::And: return 4;
    case PredOp::Not: return 5;
    case PredOp::Lt: case PredOp::Le: case PredOp::Eq: case PredOp::Gt: case PredOp::Ge: return 6;
    case PredOp::Add: case PredOp::Sub: return 7;
    case PredOp::Mul: return 8;
    default: return 10;
    }
}

inline const char* symbol(PredOp op) {
    switch (op) {
    case PredOp::Iff: return "<=>";
    case PredOp::Implies: return "=>";
    case PredOp::Or: return "||";
    case PredOp::And: return "&&";
    case PredOp::Lt: return "<";
    case PredOp::Le: return "<=";
    case PredOp::Eq: return "=";
    case PredOp::Gt: return ">";
    case PredOp::Ge: return ">=";
    case PredOp::Add: return "+";
    case PredOp::Sub: return "-";
    case PredOp::Mul: return "*";
    default: return "?";
    }
}

inline void print(const NodePtr& n, std::string& out) {
    switch (n->op) {
    case PredOp::True: out += "true"; return;
    case PredOp::False: out += "false"; return;
    case PredOp::Species: out += n->name; return;
    case PredOp::Const: out += std::to_string(n->value); return;
    case PredOp::Not: {
        out += "!";
        const bool paren = precedence(n->lhs->op) < 10;
        if (paren) out += "(";
        print(n->lhs, out);
        if (paren) out += ")";
        return;
    }
    default: break;
    }
    const int p = precedence(n->op);
    const bool rightAssoc = n->op == PredOp::Implies;
    const int lp = precedence(n->lhs->op), rp = precedence(n->rhs->op);
    const bool parenL = rightAssoc ? lp <= p : lp < p;
    const bool parenR = rightAssoc ? rp < p : rp <= p;
    if (parenL) out += "(";
    print(n->lhs, out);
    if (parenL) out += ")";
    out += " ";
    out += symbol(n->op);
    out += " ";
    if (parenR) out += "(";
    print(n->rhs, out);
    if (parenR) out += ")";
}

class PredicateParser {
public:
    explicit PredicateParser(std::string_view text) : text_(text) {}

    NodePtr parseAll() {
        NodePtr n = parseBinary(1);
        skipSpace();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(text_.substr(pos_, 1)) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw StructuralError("predicate parse error at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skipSpace() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::optional<PredOp> peekBinary(int minPrec) {
        skipSpace();
        static const std::pair<std::string_view, PredOp> table[] = {
            {"<=>", PredOp::Iff}, {"=>", PredOp::Implies}, {"||", PredOp::Or}, {"&&", PredOp::And},
            {"<=", PredOp::Le},   {">=", PredOp::Ge},      {"<", PredOp::Lt},  {">", PredOp::Gt},
            {"=", PredOp::Eq},    {"+", PredOp::Add},      {"-", PredOp::Sub}, {"*", PredOp::Mul},
        };
        for (const auto& [tok, op] : table) {
            if (text_.substr(pos_, tok.size()) == tok) {
                if (precedence(op) < minPrec) return std::nullopt;
                opLength_ = tok.size();
                return op;
            }
        }
        return std::nullopt;
    }

    NodePtr parseBinary(int minPrec) {
        NodePtr lhs = parseUnary(minPrec);
        while (auto op = peekBinary(minPrec)) {
            const int p = precedence(*op);
            pos_ += opLength_;
            const bool isComparison = p == 6;
            NodePtr rhs = parseBinary(*op == PredOp::Implies ? p : p + 1);
            lhs = makeNode(*op, lhs, rhs);
            if (isComparison) {
                skipSpace();
                if (auto next = peekBinary(6); next && precedence(*next) == 6) fail("comparisons do not chain");
            }
        }
        return lhs;
    }

    NodePtr parseUnary(int minPrec) {
        skipSpace();
        if (pos_ < text_.size() && text_[pos_] == '!') {
            ++pos_;
            return makeNode(PredOp::Not, parseBinary(5));
        }
        (void)minPrec;
        return parsePrimary();
    }

    NodePtr parsePrimary() {
        skipSpace();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parseBinary(1);
            skipSpace();
            if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
            ++pos_;
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-') {
            std::size_t start = pos_;
            if (c == '-') ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) fail("expected digit");
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            auto n = std::make_shared<PredNode>();
            n->op = PredOp::Const;
            try {
                n->value = std::stoll(std::string(text_.substr(start, pos_ - start)));
            } catch (const std::out_of_range&) {
                fail("integer literal out of range");
            }
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            std::string word(text_.substr(start, pos_ - start));
            if (word == "true") return makeNode(PredOp::True);
            if (word == "false") return makeNode(PredOp::False);
            auto n = std::make_shared<PredNode>();
            n->op = PredOp::Species;
            n->name = std::move(word);
            return n;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t opLength_ = 0;
};

inline void typeCheck(const NodePtr& n, bool wantBool) {
    const bool isBool = isBooleanOp(n->op);
    if (isBool != wantBool) {
        throw StructuralError(std::string("predicate type error: expected ") + (wantBool ? "boolean" : "integer") +
                              " operand near '" + symbol(n->op) + "'");
    }
    switch (n->op) {
    case PredOp::Not: typeCheck(n->lhs, true); break;
    case PredOp::And: case PredOp::Or: case PredOp::Implies: case PredOp::Iff:
        typeCheck(n->lhs, true);
        typeCheck(n->rhs, true);
        break;
    case PredOp::Lt: case PredOp::Le: case PredOp::Eq: case PredOp::Gt: case PredOp::Ge:
    case PredOp::Add: case PredOp::Sub: case PredOp::Mul:
        typeCheck(n->lhs, false);
        typeCheck(n->rhs, false);
        break;
    default: break;
    }
}

} // namespace detail

inline std::string toString(const StatePredicate& p) {
    std::string out;
    detail::print(p.node(), out);
    return out;
}

inline StatePredicate parsePredicate(std::string_view text) {
    auto root = detail::PredicateParser(text).parseAll();
    detail::typeCheck(root, true);
    return StatePredicate(root);
}

} // namespace crnsynth

#endif
