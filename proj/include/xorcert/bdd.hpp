// Reduced ordered BDDs without complement edges.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "xorcert/formula.hpp"

namespace xorcert::bdd {

using Level = uint32_t;
constexpr Level kTerminalLevel = std::numeric_limits<Level>::max();

class NodeRef {
public:
    constexpr NodeRef() = default;
    constexpr explicit NodeRef(uint32_t index) : index_(index) {}

    static constexpr NodeRef zero() { return NodeRef(0); }
    static constexpr NodeRef one() { return NodeRef(1); }

    constexpr uint32_t index() const { return index_; }
    constexpr bool is_terminal() const { return index_ < 2; }

    friend constexpr bool operator==(NodeRef, NodeRef) = default;
    friend constexpr auto operator<=>(NodeRef, NodeRef) = default;

private:
    uint32_t index_ = 0;
};

// Static variable order: level 0 is the top of every BDD.
class VarOrder {
public:
    VarOrder() = default;
    // identity order over variables 1..num_vars
    explicit VarOrder(Var num_vars);
    // listed variables first, then the remaining ones in increasing order
    VarOrder(Var num_vars, std::span<const Var> prefix);

    Level level_of(Var v) const { return level_.at(v); }
    Var var_at(Level l) const { return var_.at(l); }
    Var num_vars() const { return Var(var_.size()); }

private:
    std::vector<Level> level_;  // indexed by variable; [0] unused
    std::vector<Var> var_;      // indexed by level
};

class CapacityExceeded : public std::runtime_error {
public:
    explicit CapacityExceeded(size_t limit)
        : std::runtime_error("BDD node store limit of " + std::to_string(limit) + " exceeded") {}
};

// Observer for node lifetime, used by the proof layer to attach extension
// variables. on_created fires after the node is fully linked.
class NodeListener {
public:
    virtual ~NodeListener() = default;
    virtual void on_created(NodeRef node) = 0;
    virtual void on_reclaimed(NodeRef node) = 0;
};

struct EngineStats {
    size_t live_nodes = 0;   // nonterminal nodes currently allocated
    size_t peak_nodes = 0;
    size_t created = 0;
    size_t reclaimed = 0;
    size_t collections = 0;
};

using BigCount = boost::multiprecision::cpp_int;

class Engine {
public:
    explicit Engine(VarOrder order, size_t max_nodes = size_t(1) << 27);

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const VarOrder& order() const { return order_; }

    NodeRef make_node(Level level, NodeRef hi, NodeRef lo);
    NodeRef literal(Lit l);
    NodeRef conjoin(NodeRef u, NodeRef v);
    // Two-chain parity BDD: 2k-1 nonterminal nodes for k >= 1 variables.
    NodeRef parity(std::span<const Var> vars, bool phase);
    NodeRef parity(const ParityConstraint& c) { return parity(c.vars, c.phase); }
    // Disjunction chain; T1 for tautologies, T0 for the empty clause.
    NodeRef clause(std::span<const Lit> lits);

    // Satisfying assignments over the variables at levels [0, nvars).
    BigCount sat_count(NodeRef u, Var nvars) const;
    // assignment indexed by variable, [0] unused
    bool evaluate(NodeRef u, const std::vector<bool>& assignment) const;
    // Nonterminal nodes reachable from u.
    size_t node_count(NodeRef u) const;

    Level level(NodeRef u) const { return nodes_[u.index()].level; }
    Var var(NodeRef u) const { return order_.var_at(level(u)); }
    NodeRef hi(NodeRef u) const { return NodeRef(nodes_[u.index()].hi); }
    NodeRef lo(NodeRef u) const { return NodeRef(nodes_[u.index()].lo); }
    // Cofactors of u with respect to the variable at level l (l <= level(u)).
    NodeRef high_cofactor(NodeRef u, Level l) const { return level(u) == l ? hi(u) : u; }
    NodeRef low_cofactor(NodeRef u, Level l) const { return level(u) == l ? lo(u) : u; }
    bool is_live(NodeRef u) const {
        return u.index() < nodes_.size() && nodes_[u.index()].level != kFreeLevel;
    }

    void ref(NodeRef u);
    void deref(NodeRef u);
    uint32_t refcount(NodeRef u) const { return nodes_[u.index()].refcount; }

    // Reclaims every node not reachable from a referenced root; purges the
    // operation cache. Must not be called while unreferenced intermediate
    // results are still needed.
    size_t collect();
    size_t allocated_since_collect() const { return allocated_since_collect_; }

    void set_listener(NodeListener* listener) { listener_ = listener; }
    const EngineStats& stats() const { return stats_; }

    void write_dot(std::ostream& out, NodeRef root) const;

private:
    static constexpr Level kFreeLevel = kTerminalLevel - 1;
    static constexpr uint32_t kNil = std::numeric_limits<uint32_t>::max();

    struct Node {
        Level level;
        uint32_t hi;
        uint32_t lo;
        uint32_t next;  // unique-table chain or free list
        uint32_t refcount;
    };

    size_t bucket_of(Level level, uint32_t hi, uint32_t lo) const;
    void grow_table();
    void rebuild_table();

    VarOrder order_;
    size_t max_nodes_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> buckets_;
    uint32_t free_list_ = kNil;
    std::unordered_map<uint64_t, uint32_t> and_cache_;
    NodeListener* listener_ = nullptr;
    size_t allocated_since_collect_ = 0;
    EngineStats stats_;
};

}  // namespace xorcert::bdd
