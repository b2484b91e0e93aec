#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "xorcert/gauss.hpp"

using namespace xorcert;
using namespace xorcert::gj;

namespace {

std::vector<ParityConstraint> worked_example() {
    return {{{1, 2}, true, {}}, {{1, 3}, false, {}}, {{1, 2, 3}, true, {}}};
}

std::string row_text(const GaussJordan& g, size_t r) {
    return "(" + g.matrix().rows[r].to_string() + "|" + (g.matrix().phase[r] ? "1" : "0") + ")";
}

// Independent oracle: sums constraints as 64-bit masks.
std::pair<uint64_t, bool> sum_of(const std::vector<ParityConstraint>& cs,
                                 const std::vector<uint32_t>& which) {
    uint64_t bits = 0;
    bool phase = false;
    for (uint32_t i : which) {
        for (Var v : cs[i].vars)
            bits ^= uint64_t(1) << v;
        phase ^= cs[i].phase;
    }
    return {bits, phase};
}

std::pair<uint64_t, bool> row_mask(const GaussJordan& g, size_t r) {
    uint64_t bits = 0;
    for (Var v : g.matrix().row_constraint(r).vars)
        bits |= uint64_t(1) << v;
    return {bits, g.matrix().phase[r]};
}

std::vector<ParityConstraint> random_system(std::mt19937_64& rng, Var n, size_t m,
                                            size_t max_k) {
    std::vector<ParityConstraint> cs;
    for (size_t i = 0; i < m; i++) {
        ParityConstraint p;
        for (Var v = 1; v <= n; v++)
            if (rng() % n < max_k)
                p.vars.push_back(v);
        if (p.vars.empty())
            p.vars.push_back(1 + Var(rng() % n));
        p.phase = rng() & 1;
        cs.push_back(p);
    }
    return cs;
}

bool satisfies(const std::vector<ParityConstraint>& cs, uint32_t bits) {
    for (const auto& c : cs) {
        bool s = false;
        for (Var v : c.vars)
            s ^= (bits >> (v - 1)) & 1;
        if (s != c.phase)
            return false;
    }
    return true;
}

bool satisfies_rows(const GaussJordan& g, uint32_t bits) {
    for (size_t r = 0; r < g.num_rows(); r++) {
        ParityConstraint c = g.matrix().row_constraint(r);
        bool s = false;
        for (Var v : c.vars)
            s ^= (bits >> (v - 1)) & 1;
        if (s != c.phase)
            return false;
    }
    return true;
}

// Every row must be neither unit nor falsified at a propagation fixpoint.
void check_fixpoint(const GaussJordan& g, const Trail& t) {
    for (size_t r = 0; r < g.num_rows(); r++) {
        ParityConstraint c = g.matrix().row_constraint(r);
        size_t open = 0;
        bool s = false;
        for (Var v : c.vars) {
            if (t.value(v) == 0)
                open++;
            else
                s ^= t.value(v) > 0;
        }
        CHECK(open != 1);
        if (open == 0)
            CHECK(s == c.phase);
    }
}

}  // namespace

TEST_CASE("worked example: initial matrices") {
    GaussJordan g(worked_example());
    CHECK(row_text(g, 0) == "(110|1)");
    CHECK(row_text(g, 1) == "(101|0)");
    CHECK(row_text(g, 2) == "(111|1)");
    for (uint32_t r = 0; r < 3; r++)
        CHECK(g.origin_of(r) == std::vector<uint32_t>{r});
}

TEST_CASE("worked example: eliminating the first column") {
    GaussJordan g(worked_example());
    g.eliminate_column(0, *g.column_of(1));
    CHECK(row_text(g, 0) == "(110|1)");
    CHECK(row_text(g, 1) == "(011|1)");
    CHECK(row_text(g, 2) == "(001|0)");
    CHECK(g.shadow().rows[0].to_string() == "100");
    CHECK(g.shadow().rows[1].to_string() == "110");
    CHECK(g.shadow().rows[2].to_string() == "101");
    CHECK(g.origin_of(1) == std::vector<uint32_t>{0, 1});

    std::ostringstream out;
    g.dump(out);
    CHECK(out.str() == "(110|1) (100)\n(011|1) (110)\n(001|0) (101)\n");

    SUBCASE("the third row propagates -x3 from constraints one and three") {
        Trail t(3);
        auto recs = g.propagate(t);
        auto it = std::find_if(recs.begin(), recs.end(),
                               [](const ReasonRecord& r) { return r.clause.front().var() == 3; });
        REQUIRE(it != recs.end());
        CHECK(it->kind == ReasonKind::Propagation);
        CHECK(it->clause == Clause{Lit(3, false)});
        CHECK(it->origin == std::vector<uint32_t>{0, 2});
        // the system has the single solution x1=0, x2=1, x3=0
        CHECK(t.value(Var(1)) == -1);
        CHECK(t.value(Var(2)) == 1);
        CHECK(t.value(Var(3)) == -1);
    }
}

TEST_CASE("elimination edge cases") {
    SUBCASE("single constraint") {
        GaussJordan g({{{4, 7}, true, {}}});
        CHECK(g.shadow().rows[0].to_string() == "1");
        g.eliminate_column(0, 0);
        CHECK(row_text(g, 0) == "(11|1)");
    }
    SUBCASE("disjoint rows are already reduced") {
        GaussJordan g({{{1, 2}, true, {}}, {{3, 4}, false, {}}});
        g.eliminate_column(0, 0);
        g.eliminate_column(1, 2);
        CHECK(g.stats().row_sums == 0);
    }
    SUBCASE("zero pivot entry is rejected") {
        GaussJordan g(worked_example());
        CHECK_THROWS(g.eliminate_column(1, 1));
    }
    SUBCASE("summing twice cancels") {
        GaussJordan g({{{1, 2}, true, {}}, {{1}, false, {}}});
        g.eliminate_column(0, 0);  // row 1 = c0 + c1 = x2
        CHECK(g.origin_of(1) == std::vector<uint32_t>{0, 1});
        g.eliminate_column(1, 1);  // row 0 = c0 + (c0 + c1)
        CHECK(g.origin_of(0) == std::vector<uint32_t>{1});
        CHECK(row_text(g, 0) == "(10|0)");
    }
    SUBCASE("swaps are mirrored") {
        GaussJordan g(worked_example());
        g.swap_rows(0, 2);
        CHECK(row_text(g, 0) == "(111|1)");
        CHECK(g.origin_of(0) == std::vector<uint32_t>{2});
    }
}

TEST_CASE("direct propagation examples") {
    SUBCASE("conflict on a two-variable row") {
        GaussJordan g({{{2, 3}, true, {}}});
        Trail t(3);
        t.new_level();
        t.assign(Lit(2, true));
        t.assign(Lit(3, true));
        auto recs = g.propagate(t);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].kind == ReasonKind::Conflict);
        CHECK(recs[0].clause == Clause{Lit(2, false), Lit(3, false)});
    }
    SUBCASE("unit propagation") {
        GaussJordan g({{{1, 2}, true, {}}});
        Trail t(2);
        t.new_level();
        t.assign(Lit(1, false));
        auto recs = g.propagate(t);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].kind == ReasonKind::Propagation);
        CHECK(recs[0].clause == Clause{Lit(2, true), Lit(1, true)});
        CHECK(recs[0].origin == std::vector<uint32_t>{0});
    }
    SUBCASE("inconsistent system conflicts with an empty clause") {
        GaussJordan g({{{1, 2}, true, {}}, {{1, 2}, false, {}}});
        Trail t(2);
        auto recs = g.propagate(t);
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].kind == ReasonKind::Conflict);
        CHECK(recs[0].clause.empty());
        CHECK(recs[0].origin == std::vector<uint32_t>{0, 1});
    }
}

TEST_CASE("shadow invariant under random elimination sequences") {
    std::mt19937_64 rng(21);
    for (int round = 0; round < 200; round++) {
        size_t m = 1 + rng() % 64;
        auto cs = random_system(rng, 63, m, 6);
        GaussJordan g(cs);
        for (int step = 0; step < 40; step++) {
            uint32_t r = uint32_t(rng() % m);
            if (rng() % 5 == 0) {
                g.swap_rows(r, uint32_t(rng() % m));
            } else {
                auto ones = g.matrix().rows[r].ones();
                if (!ones.empty())
                    g.eliminate_column(r, ones[rng() % ones.size()]);
            }
        }
        for (size_t r = 0; r < m; r++)
            REQUIRE(sum_of(cs, g.origin_of(uint32_t(r))) == row_mask(g, r));
    }
}

TEST_CASE("elimination preserves the solution set") {
    std::mt19937_64 rng(4);
    for (int round = 0; round < 50; round++) {
        const Var n = 10;
        auto cs = random_system(rng, n, 2 + rng() % 8, 4);
        GaussJordan g(cs);
        for (uint32_t r = 0; r < g.num_rows(); r++) {
            auto ones = g.matrix().rows[r].ones();
            if (!ones.empty())
                g.eliminate_column(r, ones[0]);
        }
        for (uint32_t bits = 0; bits < (1u << n); bits++)
            REQUIRE(satisfies(cs, bits) == satisfies_rows(g, bits));
    }
}

TEST_CASE("reason records are implied by their origin sums") {
    std::mt19937_64 rng(8);
    int conflicts = 0, propagations = 0;
    for (int round = 0; round < 300; round++) {
        const Var n = 12;
        auto cs = random_system(rng, n, 1 + rng() % 10, 4);
        GaussJordan g(cs);
        Trail t(n);
        for (int depth = 0; depth < 8; depth++) {
            std::optional<ReasonRecord> conflict =
                g.propagate(t, [&](ReasonRecord&& rec) {
                    // exactly one literal is unassigned: the implied one
                    CHECK(t.value(rec.clause.front()) == 0);
                    for (size_t i = 1; i < rec.clause.size(); i++)
                        CHECK(t.value(rec.clause[i]) < 0);
                    auto [bits, phase] = sum_of(cs, rec.origin);
                    // brute force over the sum's support: every solution
                    // of the sum satisfies the clause
                    std::vector<Var> sup;
                    for (Var v = 1; v <= n; v++)
                        if ((bits >> v) & 1)
                            sup.push_back(v);
                    for (uint32_t a = 0; a < (1u << sup.size()); a++) {
                        bool s = std::popcount(a) & 1;
                        if (s != phase)
                            continue;
                        bool sat = false;
                        for (Lit l : rec.clause) {
                            auto pos = std::find(sup.begin(), sup.end(), l.var());
                            if (pos == sup.end())
                                continue;
                            bool val = (a >> (pos - sup.begin())) & 1;
                            if (val == l.phase())
                                sat = true;
                        }
                        CHECK(sat);
                    }
                    propagations++;
                    t.assign(rec.clause.front());
                });
            if (conflict) {
                conflicts++;
                for (Lit l : conflict->clause)
                    CHECK(t.value(l) < 0);
                auto [bits, phase] = sum_of(cs, conflict->origin);
                // the sum restricted to the clause's variables is violated
                // whenever the clause is false
                uint64_t clause_bits = 0;
                bool val = false;
                for (Lit l : conflict->clause) {
                    clause_bits |= uint64_t(1) << l.var();
                    val ^= !l.phase();
                }
                CHECK(clause_bits == bits);
                CHECK(val != phase);
                break;
            }
            check_fixpoint(g, t);
            std::vector<Var> open;
            for (Var v = 1; v <= n; v++)
                if (t.value(v) == 0)
                    open.push_back(v);
            if (open.empty())
                break;
            t.new_level();
            t.assign(Lit(open[rng() % open.size()], rng() & 1));
            if (rng() % 4 == 0 && t.decision_level() > 1) {
                t.backtrack(uint32_t(rng() % t.decision_level()));
                g.backtrack();
            }
        }
    }
    CHECK(conflicts > 5);
    CHECK(propagations > 100);
}
