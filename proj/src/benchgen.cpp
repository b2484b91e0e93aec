#include "xorcert/benchgen.hpp"

#include <algorithm>
#include <boost/dynamic_bitset.hpp>
#include <random>
#include <sstream>
#include <stdexcept>

namespace xorcert::gen {

namespace {

// Hand-rolled mappings keep output identical across standard libraries.
uint64_t below(std::mt19937_64& rng, uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

bool bernoulli(std::mt19937_64& rng, double p) {
    return double(rng() >> 11) * 0x1.0p-53 < p;
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; i--)
        std::swap(v[i - 1], v[below(rng, i)]);
}

void emit_parity(CnfFormula& f, Manifest& man, std::vector<Var> vars, bool phase) {
    std::sort(vars.begin(), vars.end());
    ParityConstraint p{vars, phase, {}};
    ManifestEntry e{vars, phase, f.num_clauses() + 1, 0};
    for (auto& c : xor_encoding_clauses(p))
        f.clauses.push_back(std::move(c));
    e.last_clause = f.num_clauses();
    man.constraints.push_back(std::move(e));
}

}  // namespace

std::vector<ParityConstraint> Manifest::parity_constraints() const {
    std::vector<ParityConstraint> out;
    for (const auto& e : constraints)
        out.push_back({e.vars, e.phase, {}});
    return out;
}

void write_manifest(std::ostream& out, const Manifest& m) {
    out << "p xorcert-manifest " << m.family << ' ' << m.constraints.size() << '\n';
    if (m.family == "lpn")
        out << "n " << m.solution_vars << "\nb " << m.bound << '\n';
    for (const auto& e : m.constraints) {
        out << "x " << (e.phase ? 1 : 0) << ' ' << e.first_clause << ' ' << e.last_clause;
        for (Var v : e.vars)
            out << ' ' << v;
        out << " 0\n";
    }
}

std::string to_string(const Manifest& m) {
    std::ostringstream out;
    write_manifest(out, m);
    return out.str();
}

Manifest parse_manifest(std::istream& in) {
    Manifest m;
    std::string line;
    size_t lineno = 0;
    size_t expected = 0;
    bool header = false;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        auto fail = [&](const std::string& why) {
            throw ParseError(lineno, "manifest: " + why);
        };
        if (tag == "p") {
            std::string magic;
            if (!(ls >> magic >> m.family >> expected) || magic != "xorcert-manifest")
                fail("bad header");
            header = true;
        } else if (!header) {
            fail("missing header");
        } else if (tag == "n") {
            if (!(ls >> m.solution_vars))
                fail("bad solution variable count");
        } else if (tag == "b") {
            if (!(ls >> m.bound))
                fail("bad bound");
        } else if (tag == "x") {
            ManifestEntry e;
            int phase;
            if (!(ls >> phase >> e.first_clause >> e.last_clause) || (phase != 0 && phase != 1))
                fail("bad constraint line");
            e.phase = phase == 1;
            int64_t v;
            bool closed = false;
            while (ls >> v) {
                if (v == 0) {
                    closed = true;
                    break;
                }
                if (v < 0)
                    fail("negative variable");
                e.vars.push_back(Var(v));
            }
            if (!closed)
                fail("constraint not terminated by 0");
            m.constraints.push_back(std::move(e));
        } else {
            fail("unknown line tag '" + tag + "'");
        }
    }
    if (!header)
        throw ParseError(lineno, "manifest: missing header");
    if (m.constraints.size() != expected)
        throw ParseError(lineno, "manifest: constraint count does not match header");
    return m;
}

Manifest parse_manifest(const std::string& text) {
    std::istringstream in(text);
    return parse_manifest(in);
}

// ---------------------------------------------------------------------------

size_t urquhart_nodes(unsigned m) { return 14 * size_t(m) * m - 8 * size_t(m); }

UrquhartInstance gen_urquhart(const UrquhartConfig& cfg) {
    if (cfg.p < 25 || cfg.p > 75)
        throw std::invalid_argument("odd-node percentage must be within 25..75");
    if (cfg.nodes == 0 && cfg.m < 3)
        throw std::invalid_argument("size parameter m must be at least 3");
    const size_t n = cfg.nodes ? cfg.nodes : urquhart_nodes(cfg.m);
    if (n < 6 || n % 2)
        throw std::invalid_argument("node count must be even and at least 6");

    std::mt19937_64 rng(cfg.seed);
    UrquhartInstance inst;

    // Even Hamiltonian cycle plus a perfect matching between even and odd
    // nodes: a connected bipartite cubic graph.
    for (size_t i = 0; i < n; i++)
        inst.edges.push_back({uint32_t(i), uint32_t((i + 1) % n)});
    const size_t half = n / 2;
    std::vector<uint32_t> partner(half);  // left node 2i -> right node
    for (size_t i = 0; i < half; i++)
        partner[i] = uint32_t(2 * i + 1);
    shuffle(partner, rng);
    auto adjacent = [&](size_t i) {
        size_t left = 2 * i, right = partner[i];
        return right == (left + 1) % n || right == (left + n - 1) % n;
    };
    for (size_t round = 0;; round++) {
        bool clean = true;
        for (size_t i = 0; i < half; i++) {
            if (adjacent(i)) {
                clean = false;
                std::swap(partner[i], partner[below(rng, half)]);
            }
        }
        if (clean)
            break;
        if (round > 100000)
            throw std::runtime_error("could not build a simple cubic graph");
    }
    for (size_t i = 0; i < half; i++)
        inst.edges.push_back({uint32_t(2 * i), partner[i]});

    std::vector<std::vector<Var>> incident(n);
    for (size_t e = 0; e < inst.edges.size(); e++)
        for (uint32_t v : inst.edges[e])
            incident[v].push_back(Var(e + 1));

    size_t odd = (n * cfg.p + 50) / 100;
    if (cfg.force_odd && odd % 2 == 0)
        odd = odd + 1 <= n ? odd + 1 : odd - 1;
    std::vector<uint32_t> nodes(n);
    for (size_t i = 0; i < n; i++)
        nodes[i] = uint32_t(i);
    shuffle(nodes, rng);
    std::vector<bool> is_odd(n, false);
    for (size_t i = 0; i < odd; i++)
        is_odd[nodes[i]] = true;
    inst.odd_nodes = odd;

    inst.formula.num_vars = Var(inst.edges.size());
    inst.manifest.family = "urquhart";
    for (size_t v = 0; v < n; v++)
        emit_parity(inst.formula, inst.manifest, incident[v], is_odd[v]);
    return inst;
}

// ---------------------------------------------------------------------------

LpnInstance gen_lpn(const LpnConfig& cfg) {
    if (cfg.n < 4)
        throw std::invalid_argument("lpn needs at least 4 solution variables");
    if (cfg.corrupt_prob < 0 || cfg.corrupt_prob > 1)
        throw std::invalid_argument("corruption probability must be within 0..1");
    const unsigned n = cfg.n;
    const unsigned m = cfg.m ? cfg.m : 2 * n;
    std::mt19937_64 rng(cfg.seed);
    LpnInstance inst;

    inst.target.assign(n + 1, false);
    for (unsigned v = 1; v <= n; v++)
        inst.target[v] = rng() & 1;

    struct Row {
        std::vector<Var> subset;
        bool phase;
        bool corrupted;
    };
    std::vector<Row> rows(m);
    for (auto& row : rows) {
        for (unsigned v = 1; v <= n; v++)
            if (rng() & 1)
                row.subset.push_back(Var(v));
        if (row.subset.empty())
            row.subset.push_back(Var(1 + below(rng, n)));
        bool s = false;
        for (Var v : row.subset)
            s ^= inst.target[v];
        row.corrupted = bernoulli(rng, cfg.corrupt_prob);
        row.phase = s ^ row.corrupted;
    }
    unsigned k = 0;
    for (const auto& row : rows)
        k += row.corrupted;
    if (cfg.unsat && k == 0) {
        // at most -1 set bits is unsatisfiable outright; flip one row and
        // forbid every corruption bit instead
        Row& row = rows[below(rng, m)];
        row.corrupted = true;
        row.phase = !row.phase;
        k = 1;
        inst.forced_corruption = true;
    }
    inst.corrupted = k;
    inst.bound = cfg.unsat ? int64_t(k) - 1 : int64_t(k);

    // Variables: solution 1..n, corruption n+1..n+m, then XOR auxiliaries,
    // then counter auxiliaries.
    CnfFormula& f = inst.formula;
    Var next = Var(n + m);
    auto corruption = [&](unsigned i) { return Var(n + 1 + i); };
    inst.manifest.family = "lpn";
    inst.manifest.solution_vars = Var(n);
    inst.manifest.bound = inst.bound;

    std::vector<Var> xor_aux;
    Manifest pieces;  // encoding pieces, not recorded in the manifest
    for (unsigned i = 0; i < m; i++) {
        std::vector<Var> vars = rows[i].subset;
        vars.push_back(corruption(i));
        ManifestEntry e{vars, rows[i].phase, f.num_clauses() + 1, 0};
        // chain into pieces of arity at most 4 through fresh variables
        std::vector<Var> rest = vars;
        while (rest.size() > 4) {
            Var y = ++next;
            xor_aux.push_back(y);
            std::vector<Var> piece(rest.begin(), rest.begin() + 3);
            piece.push_back(y);
            emit_parity(f, pieces, piece, false);
            std::vector<Var> tail{y};
            tail.insert(tail.end(), rest.begin() + 3, rest.end());
            rest = std::move(tail);
        }
        emit_parity(f, pieces, rest, rows[i].phase);
        e.last_clause = f.num_clauses();
        inst.manifest.constraints.push_back(std::move(e));
    }

    // at most `bound` of the corruption bits, as a sequential counter
    std::vector<Var> counter_aux;
    const int64_t bound = inst.bound;
    auto L = [](Var v, bool phase) { return Lit(v, phase); };
    if (bound == 0) {
        for (unsigned i = 0; i < m; i++)
            f.clauses.push_back({L(corruption(i), false)});
    } else if (bound > 0 && bound < int64_t(m)) {
        const size_t K = size_t(bound);
        std::vector<std::vector<Var>> s(m - 1, std::vector<Var>(K));
        for (auto& row : s)
            for (auto& v : row) {
                v = ++next;
                counter_aux.push_back(v);
            }
        f.clauses.push_back({L(corruption(0), false), L(s[0][0], true)});
        for (size_t j = 1; j < K; j++)
            f.clauses.push_back({L(s[0][j], false)});
        for (unsigned i = 1; i + 1 < m; i++) {
            Var x = corruption(i);
            f.clauses.push_back({L(x, false), L(s[i][0], true)});
            f.clauses.push_back({L(s[i - 1][0], false), L(s[i][0], true)});
            for (size_t j = 1; j < K; j++) {
                f.clauses.push_back({L(x, false), L(s[i - 1][j - 1], false), L(s[i][j], true)});
                f.clauses.push_back({L(s[i - 1][j], false), L(s[i][j], true)});
            }
            f.clauses.push_back({L(x, false), L(s[i - 1][K - 1], false)});
        }
        f.clauses.push_back({L(corruption(m - 1), false), L(s[m - 2][K - 1], false)});
    }
    f.num_vars = next;

    inst.var_order = counter_aux;
    for (unsigned i = 0; i < m; i++)
        inst.var_order.push_back(corruption(i));
    inst.var_order.insert(inst.var_order.end(), xor_aux.begin(), xor_aux.end());
    for (unsigned v = 1; v <= n; v++)
        inst.var_order.push_back(Var(v));
    return inst;
}

SolveStatus lpn_oracle(const Manifest& man) {
    const Var n = man.solution_vars;
    if (man.family != "lpn")
        throw std::invalid_argument("lpn_oracle needs an lpn manifest");
    if (n > 20)
        throw std::invalid_argument("lpn_oracle enumerates at most 20 solution variables");
    if (man.bound < 0)
        return SolveStatus::Unsat;
    struct Row {
        uint32_t mask = 0;
        bool phase = false;
    };
    std::vector<Row> rows;
    for (const auto& e : man.constraints) {
        Row r;
        r.phase = e.phase;
        size_t corruption_vars = 0;
        for (Var v : e.vars) {
            if (v <= n)
                r.mask |= uint32_t(1) << (v - 1);
            else
                corruption_vars++;
        }
        if (corruption_vars != 1)
            throw std::invalid_argument("lpn constraint without exactly one corruption variable");
        rows.push_back(r);
    }
    for (uint32_t a = 0; a < (uint32_t(1) << n); a++) {
        int64_t needed = 0;
        for (const Row& r : rows)
            needed += (std::popcount(a & r.mask) & 1) != r.phase;
        if (needed <= man.bound)
            return SolveStatus::Sat;
    }
    return SolveStatus::Unsat;
}

bool parity_consistent(const std::vector<ParityConstraint>& cs) {
    Var max_var = 0;
    for (const auto& c : cs)
        for (Var v : c.vars)
            max_var = std::max(max_var, v);
    // column max_var + 1 holds the phase
    const size_t width = size_t(max_var) + 2;
    std::vector<boost::dynamic_bitset<>> rows;
    for (const auto& c : cs) {
        boost::dynamic_bitset<> r(width);
        for (Var v : c.vars)
            r.flip(v);
        if (c.phase)
            r.set(width - 1);
        rows.push_back(std::move(r));
    }
    size_t rank = 0;
    for (size_t col = 1; col + 1 < width && rank < rows.size(); col++) {
        size_t pivot = rank;
        while (pivot < rows.size() && !rows[pivot].test(col))
            pivot++;
        if (pivot == rows.size())
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (size_t r = 0; r < rows.size(); r++)
            if (r != rank && rows[r].test(col))
                rows[r] ^= rows[rank];
        rank++;
    }
    for (size_t r = rank; r < rows.size(); r++)
        if (rows[r].test(width - 1))
            return false;
    return true;
}

}  // namespace xorcert::gen
