#include "doctest.h"

#include <random>

#include "xorcert/lrat.hpp"
#include "xorcert/solver.hpp"

using namespace xorcert;

namespace {

Lit L(int64_t d) { return Lit::from_dimacs(d); }

Clause C(std::initializer_list<int64_t> lits) {
    Clause c;
    for (auto d : lits)
        c.push_back(L(d));
    return c;
}

CnfFormula formula(Var n, std::vector<Clause> clauses) {
    CnfFormula f;
    f.num_vars = n;
    f.clauses = std::move(clauses);
    return f;
}

void add_xor(CnfFormula& f, const ParityConstraint& p) {
    for (auto& c : xor_encoding_clauses(p))
        f.clauses.push_back(c);
}

// Brute-force satisfiability for small formulas.
bool brute_sat(const CnfFormula& f) {
    std::vector<bool> a(size_t(f.num_vars) + 1);
    for (uint64_t bits = 0; bits < (uint64_t(1) << f.num_vars); bits++) {
        for (Var v = 1; v <= f.num_vars; v++)
            a[v] = (bits >> (v - 1)) & 1;
        if (evaluate(f, a))
            return true;
    }
    return false;
}

CnfFormula pigeonhole(int holes) {
    int pigeons = holes + 1;
    auto var = [&](int p, int h) { return int64_t(p * holes + h + 1); };
    CnfFormula f;
    f.num_vars = Var(pigeons * holes);
    for (int p = 0; p < pigeons; p++) {
        Clause c;
        for (int h = 0; h < holes; h++)
            c.push_back(L(var(p, h)));
        f.clauses.push_back(c);
    }
    for (int h = 0; h < holes; h++)
        for (int p = 0; p < pigeons; p++)
            for (int q = p + 1; q < pigeons; q++)
                f.clauses.push_back({L(-var(p, h)), L(-var(q, h))});
    return f;
}

CnfFormula random_mixed(std::mt19937_64& rng, Var n, size_t xors, size_t clauses) {
    CnfFormula f;
    f.num_vars = n;
    for (size_t i = 0; i < xors; i++) {
        ParityConstraint p;
        size_t k = 2 + rng() % 4;
        while (p.vars.size() < k) {
            Var v = 1 + Var(rng() % n);
            if (std::find(p.vars.begin(), p.vars.end(), v) == p.vars.end())
                p.vars.push_back(v);
        }
        std::sort(p.vars.begin(), p.vars.end());
        p.phase = rng() & 1;
        add_xor(f, p);
    }
    for (size_t i = 0; i < clauses; i++) {
        Clause c;
        for (int j = 0; j < 3; j++)
            c.push_back(Lit(1 + Var(rng() % n), rng() & 1));
        f.clauses.push_back(c);
    }
    return f;
}

struct Run {
    SolveResult result;
    lrat::CheckResult check;
};

Run solve_and_check(const CnfFormula& f, SolverOptions opts = {}) {
    lrat::MemorySink sink;
    Run r;
    r.result = solve(f, opts, &sink);
    if (r.result.status == SolveStatus::Unsat)
        r.check = lrat::check(f, sink.steps, lrat::CheckMode::Refutation);
    return r;
}

}  // namespace

TEST_CASE("status names") {
    CHECK(to_string(SolveStatus::Sat) == "SAT");
    CHECK(to_string(SolveStatus::Unsat) == "UNSAT");
    CHECK(to_string(SolveStatus::Limit) == "LIMIT");
}

TEST_CASE("trivial formulas") {
    SUBCASE("no clauses") {
        auto r = solve(formula(3, {}));
        CHECK(r.status == SolveStatus::Sat);
        CHECK(r.model.size() == 4);
    }
    SUBCASE("empty input clause") {
        CnfFormula f = formula(2, {C({1}), C({})});
        Run r = solve_and_check(f);
        CHECK(r.result.status == SolveStatus::Unsat);
        CHECK(r.check.verified);
    }
    SUBCASE("contradictory units") {
        CnfFormula f = formula(1, {C({1}), C({-1})});
        Run r = solve_and_check(f);
        CHECK(r.result.status == SolveStatus::Unsat);
        CHECK(r.check.verified);
    }
    SUBCASE("tautologies and duplicate literals") {
        CnfFormula f = formula(2, {C({1, -1}), C({2, 2}), C({-2, -2, 1})});
        auto r = solve(f);
        REQUIRE(r.status == SolveStatus::Sat);
        CHECK(r.model[1]);
        CHECK(r.model[2]);
    }
}

TEST_CASE("pigeonhole formulas are refuted with checkable proofs") {
    for (int holes = 2; holes <= 5; holes++) {
        CAPTURE(holes);
        for (bool use_xor : {false, true}) {
            SolverOptions opts;
            opts.xor_reasoning = use_xor;
            Run r = solve_and_check(pigeonhole(holes), opts);
            CHECK(r.result.status == SolveStatus::Unsat);
            CHECK(r.check.verified);
            CHECK(r.result.stats.conflicts > 0);
        }
    }
}

TEST_CASE("random 3-CNF agrees with brute force") {
    std::mt19937_64 rng(31);
    int sat = 0, unsat = 0;
    for (int round = 0; round < 150; round++) {
        Var n = 8 + Var(rng() % 9);
        CnfFormula f = random_mixed(rng, n, 0, size_t(n * 43 / 10));
        SolverOptions opts;
        opts.seed = rng();
        Run r = solve_and_check(f, opts);
        bool expected = brute_sat(f);
        REQUIRE(r.result.status != SolveStatus::Limit);
        CHECK((r.result.status == SolveStatus::Sat) == expected);
        if (r.result.status == SolveStatus::Sat) {
            sat++;
            CHECK(evaluate(f, r.result.model));
        } else {
            unsat++;
            CHECK(r.check.verified);
        }
    }
    CHECK(sat > 10);
    CHECK(unsat > 10);
}

TEST_CASE("mixed parity and clause formulas agree with brute force in both modes") {
    std::mt19937_64 rng(77);
    int sat = 0, unsat = 0, parity_used = 0;
    for (int round = 0; round < 150; round++) {
        Var n = 6 + Var(rng() % 9);
        CnfFormula f = random_mixed(rng, n, 1 + rng() % (n - 1), rng() % (2 * n));
        bool expected = brute_sat(f);
        for (bool use_xor : {false, true}) {
            CAPTURE(round);
            CAPTURE(use_xor);
            SolverOptions opts;
            opts.xor_reasoning = use_xor;
            opts.seed = uint64_t(round);
            Run r = solve_and_check(f, opts);
            REQUIRE(r.result.status != SolveStatus::Limit);
            CHECK((r.result.status == SolveStatus::Sat) == expected);
            if (r.result.status == SolveStatus::Sat)
                CHECK(evaluate(f, r.result.model));
            else
                CHECK_MESSAGE(r.check.verified, r.check.reason);
            if (use_xor) {
                CHECK(r.result.stats.xors > 0);
                if (r.result.stats.parity_propagations + r.result.stats.parity_conflicts > 0)
                    parity_used++;
            }
        }
        (expected ? sat : unsat)++;
    }
    CHECK(sat > 10);
    CHECK(unsat > 10);
    CHECK(parity_used > 50);
}

TEST_CASE("odd parity cycles are refuted by elimination alone") {
    for (Var n : {3u, 7u, 25u, 61u}) {
        CAPTURE(n);
        CnfFormula f;
        f.num_vars = n;
        // x1+x2 = 1, ..., x(n-1)+xn = 1, xn+x1 = 1 with n odd has no solution
        for (Var v = 1; v <= n; v++)
            add_xor(f, {{std::min(v, v % n + 1), std::max(v, v % n + 1)}, true, {}});
        Run r = solve_and_check(f);
        CHECK(r.result.status == SolveStatus::Unsat);
        CHECK(r.check.verified);
        CHECK(r.result.stats.conflicts == 0);
        CHECK(r.result.stats.decisions == 0);
        CHECK(r.result.stats.extension_vars > 0);
    }
}

TEST_CASE("larger random parity systems") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 6; round++) {
        // an overdetermined system with a planted solution plus one flipped
        // equation, which is inconsistent with high probability
        Var n = 40;
        std::vector<bool> planted(n + 1);
        for (Var v = 1; v <= n; v++)
            planted[v] = rng() & 1;
        CnfFormula f;
        f.num_vars = n;
        for (int i = 0; i < 60; i++) {
            ParityConstraint p;
            while (p.vars.size() < 4) {
                Var v = 1 + Var(rng() % n);
                if (std::find(p.vars.begin(), p.vars.end(), v) == p.vars.end())
                    p.vars.push_back(v);
            }
            std::sort(p.vars.begin(), p.vars.end());
            bool s = false;
            for (Var v : p.vars)
                s ^= planted[v];
            p.phase = s ^ (i == 0 && round % 2 == 1);
            add_xor(f, p);
        }
        Run r = solve_and_check(f);
        REQUIRE(r.result.status != SolveStatus::Limit);
        if (round % 2 == 0) {
            CHECK(r.result.status == SolveStatus::Sat);
            CHECK(evaluate(f, r.result.model));
        } else if (r.result.status == SolveStatus::Unsat) {
            CHECK(r.check.verified);
        }
    }
}

TEST_CASE("limits") {
    SUBCASE("proof clause budget") {
        SolverOptions opts;
        opts.max_proof_clauses = 5;
        lrat::MemorySink sink;
        auto r = solve(pigeonhole(5), opts, &sink);
        CHECK(r.status == SolveStatus::Limit);
        CHECK(r.limit_reason.find("limit") != std::string::npos);
        // the partial proof is still a valid derivation
        CHECK(lrat::check(pigeonhole(5), sink.steps, lrat::CheckMode::Derivation).verified);
    }
    SUBCASE("conflict budget") {
        SolverOptions opts;
        opts.max_conflicts = 3;
        auto r = solve(pigeonhole(6), opts);
        CHECK(r.status == SolveStatus::Limit);
        CHECK(r.stats.conflicts == 3);
    }
    SUBCASE("time limit") {
        SolverOptions opts;
        opts.timeout_seconds = 0.2;
        auto r = solve(pigeonhole(11), opts);
        CHECK(r.status == SolveStatus::Limit);
        CHECK(r.stats.seconds < 5);
    }
}

TEST_CASE("the same seed gives the same run") {
    std::mt19937_64 rng(2);
    CnfFormula f = random_mixed(rng, 60, 20, 200);
    SolverOptions opts;
    opts.seed = 99;
    auto a = solve(f, opts);
    auto b = solve(f, opts);
    CHECK(a.status == b.status);
    CHECK(a.model == b.model);
    CHECK(a.stats.decisions == b.stats.decisions);
    CHECK(a.stats.conflicts == b.stats.conflicts);
}

TEST_CASE("repeated reasons from an unchanged row reuse the cached sum") {
    ParityConstraint p1{{1, 2, 3}, true, {}};
    ParityConstraint p2{{3, 4}, false, {}};
    CnfFormula f;
    f.num_vars = 4;
    add_xor(f, p1);
    add_xor(f, p2);
    auto xors = extract_xors(f);
    REQUIRE(xors.size() == 2);

    lrat::MemorySink sink;
    lrat::ProofWriter writer(sink, f.num_clauses());
    ParityProver prover(f, xors, writer, bdd::VarOrder(4));
    CHECK(prover.inputs().size() == 2);

    gj::ReasonRecord rec;
    rec.kind = gj::ReasonKind::Propagation;
    rec.row = 0;
    rec.row_version = 7;
    rec.origin = {0, 1};
    // x1+x2+x4 = 1: with x1 and x2 false, x4 is true
    rec.clause = C({4, 1, 2});

    uint64_t before = writer.counters().added;
    lrat::StepId first = prover.justify(rec);
    uint64_t after_first = writer.counters().added;
    CHECK(after_first > before + 1);
    lrat::StepId second = prover.justify(rec);
    CHECK(writer.counters().added == after_first + 1);
    CHECK(second == first + 1);
    CHECK(prover.cache_hits() == 1);

    rec.row_version = 8;
    prover.justify(rec);
    CHECK(prover.cache_hits() == 1);

    writer.flush();
    CHECK(lrat::check(f, sink.steps, lrat::CheckMode::Derivation).verified);
}
