#include "xorcert/formula.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace xorcert {

ParityConstraint xor_sum(const ParityConstraint& a, const ParityConstraint& b) {
    ParityConstraint c;
    std::set_symmetric_difference(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                                  std::back_inserter(c.vars));
    c.phase = a.phase != b.phase;
    return c;
}

namespace {

std::string_view trim_left(std::string_view s) {
    size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
        i++;
    return s.substr(i);
}

// Splits off the next blank-separated token; false at end of line.
bool next_token(std::string_view& rest, std::string_view& token) {
    rest = trim_left(rest);
    if (rest.empty())
        return false;
    size_t end = 0;
    while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t' && rest[end] != '\r')
        end++;
    token = rest.substr(0, end);
    rest = rest.substr(end);
    return true;
}

bool parse_int(std::string_view token, int64_t& value) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+')
        first++;
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

CnfFormula parse_dimacs(std::istream& in) {
    CnfFormula f;
    bool header_seen = false;
    uint64_t declared_clauses = 0;
    Clause current;
    size_t line_no = 0;
    std::string line;

    while (std::getline(in, line)) {
        line_no++;
        std::string_view rest = trim_left(line);
        if (rest.empty() || rest.front() == 'c')
            continue;
        if (rest.front() == 'p') {
            if (header_seen)
                throw ParseError(line_no, "duplicate problem line");
            std::string_view tok;
            int64_t vars = -1, clauses = -1;
            std::string_view fields[4];
            int n = 0;
            while (n < 4 && next_token(rest, tok))
                fields[n++] = tok;
            if (n != 4 || next_token(rest, tok) || fields[0] != "p" || fields[1] != "cnf" ||
                !parse_int(fields[2], vars) || !parse_int(fields[3], clauses) || vars < 0 ||
                clauses < 0 || vars > int64_t(UINT32_MAX) - 1)
                throw ParseError(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
            header_seen = true;
            f.num_vars = Var(vars);
            declared_clauses = uint64_t(clauses);
            f.clauses.reserve(std::min<uint64_t>(declared_clauses, 1u << 24));
            continue;
        }
        if (!header_seen)
            throw ParseError(line_no, "clause data before 'p cnf' header");

        std::string_view tok;
        while (next_token(rest, tok)) {
            int64_t value;
            if (!parse_int(tok, value))
                throw ParseError(line_no, "unexpected token '" + std::string(tok) + "'");
            if (f.clauses.size() == declared_clauses)
                throw ParseError(line_no, "trailing data after " + std::to_string(declared_clauses) +
                                              " declared clauses");
            if (value == 0) {
                f.clauses.push_back(std::move(current));
                current.clear();
                continue;
            }
            if (value > int64_t(f.num_vars) || -value > int64_t(f.num_vars))
                throw ParseError(line_no, "literal " + std::to_string(value) +
                                              " out of range (num_vars = " +
                                              std::to_string(f.num_vars) + ")");
            current.push_back(Lit::from_dimacs(value));
        }
    }
    if (!header_seen)
        throw ParseError(line_no, "missing 'p cnf' header");
    if (!current.empty())
        throw ParseError(line_no, "missing terminating 0 on last clause");
    if (f.clauses.size() != declared_clauses)
        throw ParseError(line_no, "expected " + std::to_string(declared_clauses) +
                                      " clauses, found " + std::to_string(f.clauses.size()));
    return f;
}

CnfFormula parse_dimacs(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_dimacs(in);
}

CnfFormula read_dimacs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return parse_dimacs(in);
}

void write_dimacs(std::ostream& out, const CnfFormula& f) {
    out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
    std::string buf;
    for (const Clause& c : f.clauses) {
        buf.clear();
        for (Lit l : c) {
            buf += std::to_string(l.dimacs());
            buf += ' ';
        }
        buf += "0\n";
        out << buf;
    }
}

std::string to_dimacs(const CnfFormula& f) {
    std::ostringstream out;
    write_dimacs(out, f);
    return out.str();
}

bool is_tautology(const Clause& c) {
    for (size_t i = 0; i < c.size(); i++)
        for (size_t j = i + 1; j < c.size(); j++)
            if (c[i] == ~c[j])
                return true;
    return false;
}

Clause normalize_clause(const Clause& c) {
    Clause out;
    out.reserve(c.size());
    for (Lit l : c)
        if (std::find(out.begin(), out.end(), l) == out.end())
            out.push_back(l);
    return out;
}

std::vector<Clause> xor_encoding_clauses(const ParityConstraint& p) {
    const size_t k = p.vars.size();
    if (k == 0)
        throw std::invalid_argument("parity constraint has empty support");
    if (k > kMaxEncodableArity)
        throw std::invalid_argument("parity constraint of arity " + std::to_string(k) +
                                    " too wide to encode");
    // A clause with pattern s (bit set = negated) blocks the assignment that
    // sets exactly the negated variables to 1; it belongs to the encoding when
    // that assignment has the wrong parity, i.e. popcount(s) % 2 != phase.
    std::vector<Clause> out;
    out.reserve(size_t(1) << (k - 1));
    for (uint64_t s = 0; s < (uint64_t(1) << k); s++) {
        bool odd = std::popcount(s) & 1;
        if (odd == p.phase)
            continue;
        Clause c;
        c.reserve(k);
        for (size_t i = 0; i < k; i++) {
            bool negated = (s >> (k - 1 - i)) & 1;
            c.emplace_back(p.vars[i], !negated);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ParityConstraint> extract_xors(const CnfFormula& f, size_t max_arity) {
    if (max_arity < 2)
        throw std::invalid_argument("max_arity must be at least 2");
    max_arity = std::min(max_arity, kMaxEncodableArity);

    // variable set -> (sign pattern -> first clause index with that pattern)
    std::map<std::vector<Var>, std::map<uint64_t, uint64_t>> groups;
    for (size_t ci = 0; ci < f.clauses.size(); ci++) {
        Clause c = normalize_clause(f.clauses[ci]);
        if (c.empty() || c.size() > max_arity || is_tautology(c))
            continue;
        std::sort(c.begin(), c.end(), [](Lit a, Lit b) { return a.var() < b.var(); });
        std::vector<Var> vars;
        uint64_t pattern = 0;
        for (Lit l : c) {
            vars.push_back(l.var());
            pattern = (pattern << 1) | (l.phase() ? 0 : 1);
        }
        groups[vars].try_emplace(pattern, ci + 1);
    }

    std::vector<ParityConstraint> found;
    for (const auto& [vars, patterns] : groups) {
        const size_t k = vars.size();
        const size_t needed = size_t(1) << (k - 1);
        for (int odd_negs = 0; odd_negs < 2; odd_negs++) {
            std::vector<uint64_t> sources;
            for (const auto& [pattern, index] : patterns)
                if ((std::popcount(pattern) & 1) == odd_negs)
                    sources.push_back(index);
            if (sources.size() != needed)
                continue;
            std::sort(sources.begin(), sources.end());
            ParityConstraint p;
            p.vars = vars;
            p.phase = odd_negs == 0;
            p.source_clauses = std::move(sources);
            found.push_back(std::move(p));
        }
    }
    std::sort(found.begin(), found.end(), [](const ParityConstraint& a, const ParityConstraint& b) {
        return a.source_clauses.front() < b.source_clauses.front();
    });
    return found;
}

bool evaluate(const Clause& c, const std::vector<bool>& assignment) {
    for (Lit l : c)
        if (assignment.at(l.var()) == l.phase())
            return true;
    return false;
}

bool evaluate(const CnfFormula& f, const std::vector<bool>& assignment) {
    return std::all_of(f.clauses.begin(), f.clauses.end(),
                       [&](const Clause& c) { return evaluate(c, assignment); });
}

}  // namespace xorcert
