#ifndef CRNSYNTH_CONSTRAINT_HPP
#define CRNSYNTH_CONSTRAINT_HPP

// A small term language over integer variables: enough to express the
// synthesis encoding, print it as SMT-LIB 2, and evaluate it on a concrete
// assignment. Terms are immutable and shared.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "crnsynth/error.hpp"

namespace crnsynth::smt {

enum class Kind {
    Var, IntConst, Add, Sub, Mul, Ite,       // integer
    BoolConst, Not, And, Or, Implies, Iff,   // boolean connectives
    Eq, Distinct, Lt, Le, Gt, Ge             // atoms
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    std::int64_t value = 0; ///< constant value, variable index, or boolean (0/1)
    std::vector<Term> args;
};

namespace detail {

inline Term make(Kind k, std::vector<Term> args, std::int64_t value = 0) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->value = value;
    n->args = std::move(args);
    return n;
}

} // namespace detail

inline Term var(std::size_t index) { return detail::make(Kind::Var, {}, static_cast<std::int64_t>(index)); }
inline Term lit(std::int64_t c) { return detail::make(Kind::IntConst, {}, c); }
inline Term boolean(bool b) { return detail::make(Kind::BoolConst, {}, b ? 1 : 0); }

inline Term add(std::vector<Term> xs) {
    if (xs.empty()) return lit(0);
    if (xs.size() == 1) return xs.front();
    return detail::make(Kind::Add, std::move(xs));
}
inline Term add(Term a, Term b) { return add(std::vector<Term>{std::move(a), std::move(b)}); }
inline Term sub(Term a, Term b) { return detail::make(Kind::Sub, {std::move(a), std::move(b)}); }
inline Term mul(Term a, Term b) { return detail::make(Kind::Mul, {std::move(a), std::move(b)}); }
inline Term ite(Term c, Term a, Term b) { return detail::make(Kind::Ite, {std::move(c), std::move(a), std::move(b)}); }

inline Term lnot(Term a) { return detail::make(Kind::Not, {std::move(a)}); }
inline Term land(std::vector<Term> xs) {
    if (xs.empty()) return boolean(true);
    if (xs.size() == 1) return xs.front();
    return detail::make(Kind::And, std::move(xs));
}
inline Term lor(std::vector<Term> xs) {
    if (xs.empty()) return boolean(false);
    if (xs.size() == 1) return xs.front();
    return detail::make(Kind::Or, std::move(xs));
}
inline Term implies(Term a, Term b) { return detail::make(Kind::Implies, {std::move(a), std::move(b)}); }
inline Term iff(Term a, Term b) { return detail::make(Kind::Iff, {std::move(a), std::move(b)}); }

inline Term eq(Term a, Term b) { return detail::make(Kind::Eq, {std::move(a), std::move(b)}); }
inline Term ne(Term a, Term b) { return detail::make(Kind::Distinct, {std::move(a), std::move(b)}); }
inline Term lt(Term a, Term b) { return detail::make(Kind::Lt, {std::move(a), std::move(b)}); }
inline Term le(Term a, Term b) { return detail::make(Kind::Le, {std::move(a), std::move(b)}); }
inline Term gt(Term a, Term b) { return detail::make(Kind::Gt, {std::move(a), std::move(b)}); }
inline Term ge(Term a, Term b) { return detail::make(Kind::Ge, {std::move(a), std::move(b)}); }

/// An assertion with a human-readable label (emitted as a comment).
struct Constraint {
    std::string label;
    Term formula;
};

/// True if some Mul node has no constant operand.
inline bool isNonlinear(const Term& t) {
    if (t->kind == Kind::Mul) {
        if (t->args[0]->kind != Kind::IntConst && t->args[1]->kind != Kind::IntConst) return true;
    }
    for (const auto& a : t->args) {
        if (isNonlinear(a)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// SMT-LIB 2 printing

namespace detail {

inline const char* smtOperator(Kind k) {
    switch (k) {
    case Kind::Add: return "+";
    case Kind::Sub: return "-";
    case Kind::Mul: return "*";
    case Kind::Ite: return "ite";
    case Kind::Not: return "not";
    case Kind::And: return "and";
    case Kind::Or: return "or";
    case Kind::Implies: return "=>";
    case Kind::Iff: return "=";
    case Kind::Eq: return "=";
    case Kind::Distinct: return "distinct";
    case Kind::Lt: return "<";
    case Kind::Le: return "<=";
    case Kind::Gt: return ">";
    case Kind::Ge: return ">=";
    default: return "?";
    }
}

} // namespace detail

inline void printSmt(const Term& t, const std::vector<std::string>& names, std::string& out) {
    switch (t->kind) {
    case Kind::Var: out += names.at(static_cast<std::size_t>(t->value)); return;
    case Kind::IntConst:
        if (t->value < 0) {
            out += "(- " + std::to_string(-t->value) + ")";
        } else {
            out += std::to_string(t->value);
        }
        return;
    case Kind::BoolConst: out += t->value ? "true" : "false"; return;
    default: break;
    }
    out += "(";
    out += detail::smtOperator(t->kind);
    for (const auto& a : t->args) {
        out += " ";
        printSmt(a, names, out);
    }
    out += ")";
}

inline std::string toSmt(const Term& t, const std::vector<std::string>& names) {
    std::string out;
    printSmt(t, names, out);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation on a full assignment (one value per variable index)

inline std::int64_t evalInt(const Term& t, const std::vector<std::int64_t>& v);

inline bool evalBool(const Term& t, const std::vector<std::int64_t>& v) {
    switch (t->kind) {
    case Kind::BoolConst: return t->value != 0;
    case Kind::Not: return !evalBool(t->args[0], v);
    case Kind::And:
        for (const auto& a : t->args) {
            if (!evalBool(a, v)) return false;
        }
        return true;
    case Kind::Or:
        for (const auto& a : t->args) {
            if (evalBool(a, v)) return true;
        }
        return false;
    case Kind::Implies: return !evalBool(t->args[0], v) || evalBool(t->args[1], v);
    case Kind::Iff: return evalBool(t->args[0], v) == evalBool(t->args[1], v);
    case Kind::Eq: return evalInt(t->args[0], v) == evalInt(t->args[1], v);
    case Kind::Distinct: return evalInt(t->args[0], v) != evalInt(t->args[1], v);
    case Kind::Lt: return evalInt(t->args[0], v) < evalInt(t->args[1], v);
    case Kind::Le: return evalInt(t->args[0], v) <= evalInt(t->args[1], v);
    case Kind::Gt: return evalInt(t->args[0], v) > evalInt(t->args[1], v);
    case Kind::Ge: return evalInt(t->args[0], v) >= evalInt(t->args[1], v);
    default: throw StructuralError("integer term used as a formula");
    }
}

inline std::int64_t evalInt(const Term& t, const std::vector<std::int64_t>& v) {
    switch (t->kind) {
    case Kind::Var: return v.at(static_cast<std::size_t>(t->value));
    case Kind::IntConst: return t->value;
    case Kind::Add: {
        std::int64_t s = 0;
        for (const auto& a : t->args) s += evalInt(a, v);
        return s;
    }
    case Kind::Sub: return evalInt(t->args[0], v) - evalInt(t->args[1], v);
    case Kind::Mul: return evalInt(t->args[0], v) * evalInt(t->args[1], v);
    case Kind::Ite: return evalBool(t->args[0], v) ? evalInt(t->args[1], v) : evalInt(t->args[2], v);
    default: throw StructuralError("formula used as an integer term");
    }
}

} // namespace crnsynth::smt

#endif
