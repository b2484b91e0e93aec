// Benchmark generators: parity formulas over cubic graphs and learning
// parity with noise, with manifests and brute-force status oracles.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xorcert/formula.hpp"
#include "xorcert/solver.hpp"

namespace xorcert::gen {

// One parity constraint and the 1-based range of clauses encoding it.
struct ManifestEntry {
    std::vector<Var> vars;
    bool phase = false;
    uint64_t first_clause = 0;
    uint64_t last_clause = 0;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
    std::string family;      // "urquhart" or "lpn"
    Var solution_vars = 0;   // lpn: variables 1..n are the solution
    int64_t bound = -1;      // lpn: at most this many corruption bits set
    std::vector<ManifestEntry> constraints;

    std::vector<ParityConstraint> parity_constraints() const;
    friend bool operator==(const Manifest&, const Manifest&) = default;
};

void write_manifest(std::ostream& out, const Manifest& m);
std::string to_string(const Manifest& m);
Manifest parse_manifest(std::istream& in);
Manifest parse_manifest(const std::string& text);

struct UrquhartConfig {
    unsigned m = 3;
    unsigned p = 50;  // percent of nodes with odd parity, 25..75
    uint64_t seed = 1;
    bool force_odd = true;  // make the number of odd nodes odd
    size_t nodes = 0;       // overrides the node count derived from m
};

// Node count for size parameter m; 102 at m=3 and 22080 at m=40.
size_t urquhart_nodes(unsigned m);

struct UrquhartInstance {
    CnfFormula formula;
    Manifest manifest;
    std::vector<std::array<uint32_t, 2>> edges;  // edge e is variable e+1
    size_t odd_nodes = 0;
};

UrquhartInstance gen_urquhart(const UrquhartConfig& cfg);

struct LpnConfig {
    unsigned n = 8;
    unsigned m = 0;  // 0 selects 2n
    double corrupt_prob = 0.125;
    bool unsat = false;  // bound the corruption count by k-1 instead of k
    uint64_t seed = 1;
};

struct LpnInstance {
    CnfFormula formula;
    Manifest manifest;
    std::vector<bool> target;    // indexed 1..n
    unsigned corrupted = 0;      // realized k
    int64_t bound = 0;
    bool forced_corruption = false;  // k was 0 under the k-1 bound
    std::vector<Var> var_order;  // suggested BDD order
};

LpnInstance gen_lpn(const LpnConfig& cfg);

// Enumerates solution assignments; the formula is satisfiable iff one of
// them needs at most `bound` corruption bits. Requires n <= 20.
SolveStatus lpn_oracle(const Manifest& m);

// GF(2) elimination oracle: true iff the system has a solution.
bool parity_consistent(const std::vector<ParityConstraint>& cs);

}  // namespace xorcert::gen
