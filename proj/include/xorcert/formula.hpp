// CNF formulas, DIMACS I/O and parity-constraint extraction.

#pragma once

#include <cstdint>
#include <cstdlib>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xorcert {

using Var = uint32_t;

// A literal in DIMACS form: +v for the variable, -v for its complement.
class Lit {
public:
    constexpr Lit() = default;
    constexpr Lit(Var var, bool phase) : code_(phase ? int64_t(var) : -int64_t(var)) {}

    static constexpr Lit from_dimacs(int64_t code) {
        Lit l;
        l.code_ = code;
        return l;
    }

    constexpr Var var() const { return Var(code_ < 0 ? -code_ : code_); }
    // 1 for a positive literal, 0 for a negated one
    constexpr bool phase() const { return code_ > 0; }
    constexpr int64_t dimacs() const { return code_; }
    constexpr Lit operator~() const { return from_dimacs(-code_); }

    friend constexpr bool operator==(Lit a, Lit b) = default;
    friend constexpr auto operator<=>(Lit a, Lit b) = default;

private:
    int64_t code_ = 0;
};

using Clause = std::vector<Lit>;

struct CnfFormula {
    Var num_vars = 0;
    // Clause i (0-based) has input index i + 1.
    std::vector<Clause> clauses;

    size_t num_clauses() const { return clauses.size(); }
    const Clause& clause_at(uint64_t index) const { return clauses.at(index - 1); }
};

// x_{v1} ^ ... ^ x_{vk} = phase
struct ParityConstraint {
    std::vector<Var> vars;  // sorted, no duplicates
    bool phase = false;
    // 1-based indices of the input clauses encoding this constraint;
    // empty for derived constraints
    std::vector<uint64_t> source_clauses;

    bool same_equation(const ParityConstraint& other) const {
        return vars == other.vars && phase == other.phase;
    }
};

// Sum over GF(2): symmetric difference of supports, xor of phases.
ParityConstraint xor_sum(const ParityConstraint& a, const ParityConstraint& b);

class ParseError : public std::runtime_error {
public:
    ParseError(size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs(std::string_view text);
CnfFormula read_dimacs_file(const std::string& path);

void write_dimacs(std::ostream& out, const CnfFormula& f);
std::string to_dimacs(const CnfFormula& f);

bool is_tautology(const Clause& c);

// Drops repeated literals, keeping first occurrences in order.
Clause normalize_clause(const Clause& c);

constexpr size_t kDefaultMaxXorArity = 6;
constexpr size_t kMaxEncodableArity = 30;

// Finds every parity constraint whose complete 2^(k-1)-clause encoding
// appears verbatim (up to literal order) among the input clauses.
// Each input clause is assigned to at most one constraint.
std::vector<ParityConstraint> extract_xors(const CnfFormula& f,
                                           size_t max_arity = kDefaultMaxXorArity);

// The 2^(k-1) clauses blocking every assignment of the wrong parity, in
// lexicographic order of sign pattern (first variable most significant,
// negation = 1).
std::vector<Clause> xor_encoding_clauses(const ParityConstraint& p);

bool evaluate(const Clause& c, const std::vector<bool>& assignment);
// assignment is indexed by variable; index 0 unused
bool evaluate(const CnfFormula& f, const std::vector<bool>& assignment);

}  // namespace xorcert
