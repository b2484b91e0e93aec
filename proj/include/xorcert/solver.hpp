// CDCL search with an optional Gauss-Jordan parity propagator. With a proof
// sink attached, every learned clause and every parity-derived reason is
// emitted as a hinted LRAT step.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xorcert/bdd.hpp"
#include "xorcert/formula.hpp"
#include "xorcert/gauss.hpp"
#include "xorcert/limits.hpp"
#include "xorcert/lrat.hpp"
#include "xorcert/tbdd.hpp"

namespace xorcert {

enum class SolveStatus { Sat, Unsat, Limit };
std::string to_string(SolveStatus s);

struct SolverOptions {
    bool xor_reasoning = true;
    uint64_t seed = 0;
    uint64_t max_proof_clauses = lrat::kDefaultMaxProofClauses;
    double timeout_seconds = 0;  // 0: unlimited
    uint64_t max_conflicts = 0;  // 0: unlimited
    // variables placed first in the BDD order; the rest follow by index
    std::vector<Var> var_order;
    size_t max_xor_arity = kDefaultMaxXorArity;
    size_t max_bdd_nodes = size_t(1) << 26;
};

struct SolveStats {
    uint64_t decisions = 0;
    uint64_t conflicts = 0;
    uint64_t propagations = 0;
    uint64_t parity_propagations = 0;
    uint64_t parity_conflicts = 0;
    uint64_t learned = 0;
    uint64_t restarts = 0;
    uint64_t reductions = 0;
    uint64_t xors = 0;
    uint64_t justified_reasons = 0;
    uint64_t reason_cache_hits = 0;
    uint64_t proof_added = 0;
    uint64_t proof_deleted = 0;
    uint64_t extension_vars = 0;
    uint64_t peak_bdd_nodes = 0;
    double seconds = 0;
};

struct SolveResult {
    SolveStatus status = SolveStatus::Limit;
    std::vector<bool> model;  // indexed by variable when SAT
    SolveStats stats;
    std::string limit_reason;
};

SolveResult solve(const CnfFormula& f, const SolverOptions& opts = {},
                  lrat::ProofSink* proof = nullptr);

// Builds trusted BDDs for the extracted parity constraints and justifies
// reason clauses of the parity matrix from them.
class ParityProver {
public:
    ParityProver(const CnfFormula& f, std::vector<ParityConstraint> xors,
                 lrat::ProofWriter& writer, bdd::VarOrder order,
                 size_t max_bdd_nodes = size_t(1) << 26, Deadline deadline = {});

    // Trusted BDDs of the input constraints, from their encoding clauses.
    const std::vector<tbdd::ParityTbdd>& inputs() const { return inputs_; }

    // Emits rec.clause and returns its step id. The sum for a row is kept
    // until the row changes.
    lrat::StepId justify(const gj::ReasonRecord& rec);

    uint64_t cache_hits() const { return cache_hits_; }
    uint64_t justified() const { return justified_; }
    const bdd::Engine& engine() const { return engine_; }

private:
    struct CacheEntry {
        uint64_t version = 0;
        tbdd::ParityTbdd sum;
    };

    void prepare(const CnfFormula& f);

    std::vector<ParityConstraint> xors_;
    bdd::Engine engine_;
    tbdd::Manager manager_;
    std::vector<tbdd::ParityTbdd> inputs_;
    std::unordered_map<uint32_t, CacheEntry> cache_;
    uint64_t cache_hits_ = 0;
    uint64_t justified_ = 0;
};

}  // namespace xorcert
