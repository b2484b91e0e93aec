#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "xorcert/formula.hpp"

using namespace xorcert;

namespace {

Clause C(std::initializer_list<int64_t> lits) {
    Clause c;
    for (auto d : lits)
        c.push_back(Lit::from_dimacs(d));
    return c;
}

ParityConstraint random_constraint(std::mt19937_64& rng, size_t k, Var n) {
    std::vector<Var> all(n);
    for (Var v = 0; v < n; v++)
        all[v] = v + 1;
    std::shuffle(all.begin(), all.end(), rng);
    ParityConstraint p;
    p.vars.assign(all.begin(), all.begin() + long(k));
    std::sort(p.vars.begin(), p.vars.end());
    p.phase = rng() & 1;
    return p;
}

}  // namespace

TEST_CASE("literals") {
    Lit a(3, true);
    CHECK(a.dimacs() == 3);
    CHECK((~a).dimacs() == -3);
    CHECK((~a).var() == 3);
    CHECK_FALSE((~a).phase());
    CHECK(~~a == a);
}

TEST_CASE("parse_dimacs") {
    SUBCASE("single clause") {
        CnfFormula f = parse_dimacs("p cnf 2 1\n1 -2 0\n");
        CHECK(f.num_vars == 2);
        REQUIRE(f.num_clauses() == 1);
        CHECK(f.clause_at(1) == C({1, -2}));
    }
    SUBCASE("empty formula") {
        CnfFormula f = parse_dimacs("p cnf 0 0\n");
        CHECK(f.num_vars == 0);
        CHECK(f.num_clauses() == 0);
    }
    SUBCASE("comments and clauses spanning lines") {
        CnfFormula f = parse_dimacs("c hello\np cnf 3 2\n1 2\n3 0 -1\n0\n");
        REQUIRE(f.num_clauses() == 2);
        CHECK(f.clause_at(1) == C({1, 2, 3}));
        CHECK(f.clause_at(2) == C({-1}));
    }
    SUBCASE("errors carry line numbers") {
        auto line_of = [](const char* text) -> size_t {
            try {
                parse_dimacs(text);
            } catch (const ParseError& e) {
                return e.line();
            }
            return 0;
        };
        CHECK(line_of("p cnf x 1\n") == 1);
        CHECK(line_of("p cnf 2 1\n1 3 0\n") == 2);
        CHECK(line_of("p cnf 2 1\n1 2\n") > 0);
        CHECK(line_of("p cnf 2 1\n1 2 0\n\n2 0\n") == 4);
        CHECK(line_of("p cnf 2 1\n1 a 0\n") == 2);
        CHECK(line_of("1 2 0\n") == 1);
        CHECK(line_of("p cnf 2 2\n1 2 0\n") > 0);
    }
}

TEST_CASE("DIMACS round trip") {
    const char* text = "p cnf 4 3\n1 -2 0\n3 4 -1 0\n-4 0\n";
    CnfFormula f = parse_dimacs(text);
    CHECK(to_dimacs(f) == text);
    CHECK(to_dimacs(parse_dimacs(to_dimacs(f))) == text);
}

TEST_CASE("clause helpers") {
    CHECK(is_tautology(C({1, -2, -1})));
    CHECK_FALSE(is_tautology(C({1, 2})));
    CHECK(normalize_clause(C({2, 1, 2, -3, 1})) == C({2, 1, -3}));
}

TEST_CASE("xor encoding") {
    SUBCASE("unit") {
        auto cs = xor_encoding_clauses({{1}, true, {}});
        CHECK(cs == std::vector<Clause>{C({1})});
    }
    SUBCASE("three-way odd") {
        auto cs = xor_encoding_clauses({{1, 2, 3}, true, {}});
        CHECK(cs == std::vector<Clause>{C({1, 2, 3}), C({1, -2, -3}), C({-1, 2, -3}),
                                        C({-1, -2, 3})});
    }
    SUBCASE("five-way: one blocking clause per even assignment") {
        ParityConstraint p{{1, 2, 3, 4, 5}, true, {}};
        auto cs = xor_encoding_clauses(p);
        CHECK(cs.size() == 16);
        // Oracle: each even-parity assignment is blocked by exactly one clause.
        std::vector<bool> a(6);
        int blocked = 0;
        for (uint32_t bits = 0; bits < 32; bits++) {
            for (Var v = 1; v <= 5; v++)
                a[v] = (bits >> (v - 1)) & 1;
            int falsified = 0;
            for (const auto& c : cs) {
                CHECK(c.size() == 5);
                falsified += !evaluate(c, a);
            }
            if (std::popcount(bits) % 2 == 0) {
                CHECK(falsified == 1);
                blocked++;
            } else {
                CHECK(falsified == 0);
            }
        }
        CHECK(blocked == 16);
    }
    SUBCASE("size guard") {
        ParityConstraint p;
        for (Var v = 1; v <= 31; v++)
            p.vars.push_back(v);
        CHECK_THROWS(xor_encoding_clauses(p));
    }
}

TEST_CASE("xor extraction") {
    SUBCASE("three-way") {
        CnfFormula f;
        f.num_vars = 3;
        f.clauses = {C({1, 2, 3}), C({1, -2, -3}), C({-1, 2, -3}), C({-1, -2, 3})};
        auto xs = extract_xors(f);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0].vars == std::vector<Var>{1, 2, 3});
        CHECK(xs[0].phase);
        CHECK(xs[0].source_clauses == std::vector<uint64_t>{1, 2, 3, 4});
    }
    SUBCASE("two-way inequality") {
        CnfFormula f;
        f.num_vars = 2;
        f.clauses = {C({1, 2}), C({-1, -2})};
        auto xs = extract_xors(f);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0].vars == std::vector<Var>{1, 2});
        CHECK(xs[0].phase);
    }
    SUBCASE("incomplete encodings and interleaving") {
        CnfFormula f;
        f.num_vars = 4;
        f.clauses = {C({3, -2, -1}), C({1, 4}), C({1, 2, 3}), C({-3, 2, -1}),
                     C({-2, 1, -3}), C({2, 3, 4})};
        auto xs = extract_xors(f);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0].vars == std::vector<Var>{1, 2, 3});
        CHECK(xs[0].source_clauses == std::vector<uint64_t>{1, 3, 4, 5});
    }
    SUBCASE("respects max arity") {
        ParityConstraint p{{1, 2, 3, 4, 5, 6, 7}, false, {}};
        CnfFormula f;
        f.num_vars = 7;
        f.clauses = xor_encoding_clauses(p);
        CHECK(extract_xors(f).empty());
        CHECK(extract_xors(f, 7).size() == 1);
    }
    SUBCASE("duplicate clauses yield one constraint") {
        CnfFormula f;
        f.num_vars = 2;
        f.clauses = {C({1, 2}), C({-1, -2}), C({1, 2}), C({-1, -2})};
        CHECK(extract_xors(f).size() == 1);
    }
}

TEST_CASE("encoding/extraction round trip and semantics") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 300; i++) {
        size_t k = 1 + rng() % 8;
        ParityConstraint p = random_constraint(rng, k, 10);
        CnfFormula f;
        f.num_vars = 10;
        f.clauses = xor_encoding_clauses(p);
        CHECK(f.clauses.size() == size_t(1) << (k - 1));
        auto xs = extract_xors(f, 8);
        REQUIRE(xs.size() == 1);
        CHECK(xs[0].same_equation(p));
        if (k <= 6) {
            std::vector<bool> a(11);
            for (uint32_t bits = 0; bits < (1u << k); bits++) {
                bool sum = false;
                for (size_t j = 0; j < k; j++) {
                    a[p.vars[j]] = (bits >> j) & 1;
                    sum ^= a[p.vars[j]];
                }
                CHECK(evaluate(f, a) == (sum == p.phase));
            }
        }
    }
}

TEST_CASE("xor_sum") {
    ParityConstraint a{{1, 2}, true, {}};
    ParityConstraint b{{1, 3}, false, {}};
    ParityConstraint s = xor_sum(a, b);
    CHECK(s.vars == std::vector<Var>{2, 3});
    CHECK(s.phase);
    CHECK(s.source_clauses.empty());
    ParityConstraint z = xor_sum(a, a);
    CHECK(z.vars.empty());
    CHECK_FALSE(z.phase);
}
