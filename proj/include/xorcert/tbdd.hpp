// Trusted BDDs: BDD roots whose extension variable carries a proved unit
// clause. Every operation emits the LRAT steps that justify its result.
//
// Node u = ITE(x, h, l) is named by extension variable u with defining
// clauses
//   HD: -u -x h    LD: -u x l    HU: u -x -h    LU: u x -l
// where clauses containing a true terminal are omitted and false terminals
// are dropped.

#pragma once

#include <cstdint>
#include <climits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "xorcert/bdd.hpp"
#include "xorcert/formula.hpp"
#include "xorcert/limits.hpp"
#include "xorcert/lrat.hpp"

namespace xorcert::tbdd {

using bdd::NodeRef;
using lrat::StepId;

struct NodeDefinition {
    Var evar = 0;
    // 0 when the clause is trivially true and was not emitted
    StepId hd = 0, ld = 0, hu = 0, lu = 0;

    size_t clause_count() const { return (hd != 0) + (ld != 0) + (hu != 0) + (lu != 0); }
};

// The proof layer cannot derive a requested implication; always a bug in
// the caller.
class ImplicationFailure : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class Manager;

// Shared handle: copies refer to the same root reference and unit clause,
// which are released when the last copy goes away. The Manager must outlive
// every Tbdd it created.
class Tbdd {
public:
    Tbdd() = default;

    bool valid() const { return state_ != nullptr; }
    NodeRef root() const { return state_->root; }
    // proof step holding [root]; 0 for the constant-true root
    StepId unit_id() const { return state_->unit; }
    bool is_false() const { return root() == NodeRef::zero(); }
    bool is_true() const { return root() == NodeRef::one(); }

private:
    friend class Manager;
    struct State {
        Manager* manager;
        NodeRef root;
        StepId unit;
        ~State();
    };
    explicit Tbdd(std::shared_ptr<State> s) : state_(std::move(s)) {}
    std::shared_ptr<State> state_;
};

struct ManagerStats {
    uint64_t and_steps = 0;         // memoized conjunction recursions
    uint64_t implication_steps = 0; // memoized implication recursions
    uint64_t justified_clauses = 0;
    uint64_t collections = 0;
};

class Manager : private bdd::NodeListener {
public:
    // Extension variables are numbered from first_extension_var upward.
    Manager(bdd::Engine& engine, lrat::ProofWriter& proof, Var first_extension_var);
    ~Manager() override;

    Manager(const Manager&) = delete;
    Manager& operator=(const Manager&) = delete;

    bdd::Engine& engine() { return engine_; }
    lrat::ProofWriter& proof() { return proof_; }

    // Idempotent; emits the defining clauses on first registration.
    const NodeDefinition& register_node(NodeRef node);
    const NodeDefinition* find_definition(NodeRef node) const;

    Tbdd trusted_true();
    // BDD of an input (or previously proved) clause with id clause_id.
    Tbdd from_clause(const Clause& c, StepId clause_id);
    Tbdd conjoin(const Tbdd& a, const Tbdd& b);
    // Requires a.root -> v.
    Tbdd upgrade(const Tbdd& a, NodeRef v);
    // Requires a.root -> c; returns the id of the step holding c.
    StepId justify_clause(const Tbdd& a, const Clause& c);

    // Purges the operation caches (deleting their proof clauses) and
    // reclaims unreferenced nodes (deleting their definitions).
    size_t collect();
    // collect() once enough nodes were allocated since the last collection
    size_t maybe_collect(size_t min_allocated = 1u << 16);

    void set_deadline(Deadline d) { deadline_ = d; }
    Var next_extension_var() const { return next_evar_; }
    const ManagerStats& stats() const { return stats_; }

private:
    friend struct Tbdd::State;

    // Literal over input and extension variables, or a constant.
    using Term = int64_t;
    static constexpr Term kTrue = INT64_MAX;
    static constexpr Term kFalse = -INT64_MAX;

    struct Candidate {
        StepId id;
        Clause lits;
    };

    struct AndEntry {
        NodeRef result;
        StepId step;
    };

    void on_created(NodeRef node) override;
    void on_reclaimed(NodeRef node) override;

    Tbdd make(NodeRef root, StepId unit);
    void release(NodeRef root, StepId unit);
    void purge_caches();
    void tick();

    Term node_term(NodeRef n);
    Term var_term(NodeRef n) { return Term(engine_.var(n)); }
    static std::optional<Clause> build_clause(std::initializer_list<Term> terms);
    static std::optional<Clause> build_clause(std::span<const Term> terms);

    void add_definition_candidates(NodeRef n, bool hd, bool ld, bool hu, bool lu,
                                   std::vector<Candidate>& out);
    void add_candidate(StepId id, std::initializer_list<Term> terms, std::vector<Candidate>& out);
    // Emits target as one RUP step, choosing hints among the candidates.
    StepId prove(const Clause& target, std::span<const Candidate> candidates);

    AndEntry and_rec(NodeRef u, NodeRef v);
    StepId imply_rec(NodeRef u, NodeRef v);
    // State of one justify_clause call: the assignment falsifying the
    // clause, memoized per-node lemmas and lemmas to delete afterwards.
    struct Justification {
        const Clause& clause;
        std::unordered_map<Var, bool> falsifying;
        std::unordered_map<uint32_t, StepId> memo;
        std::vector<StepId> scratch;
    };
    StepId justify_node(NodeRef n, Justification& j);
    void path_candidates(NodeRef n, Justification& j, std::vector<Candidate>& out);

    bdd::Engine& engine_;
    lrat::ProofWriter& proof_;
    Var next_evar_;
    std::vector<NodeDefinition> defs_;  // indexed by node index
    std::unordered_map<uint64_t, AndEntry> and_cache_;
    std::unordered_map<uint64_t, StepId> imply_cache_;
    Deadline deadline_;
    uint64_t ticks_ = 0;
    ManagerStats stats_;
};

// A trusted BDD of a parity constraint together with its equation.
struct ParityTbdd {
    Tbdd tbdd;
    ParityConstraint constraint;
};

// Conjoins, then upgrades to the two-chain BDD of the sum; the intermediate
// conjunction is released afterwards.
ParityTbdd xor_sum(Manager& m, const ParityTbdd& a, const ParityTbdd& b);

// Sums all items pairwise, always taking the pair whose supports have the
// smallest symmetric difference; ties go to the lowest pair of item ids
// (inputs are numbered by position, sums get fresh increasing ids).
ParityTbdd greedy_sum(Manager& m, std::vector<ParityTbdd> items);

}  // namespace xorcert::tbdd
