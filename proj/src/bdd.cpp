#include "xorcert/bdd.hpp"

#include <algorithm>
#include <functional>
#include <ostream>

namespace xorcert::bdd {

VarOrder::VarOrder(Var num_vars) : VarOrder(num_vars, {}) {}

VarOrder::VarOrder(Var num_vars, std::span<const Var> prefix)
    : level_(size_t(num_vars) + 1, kTerminalLevel) {
    var_.reserve(num_vars);
    for (Var v : prefix) {
        if (v == 0 || v > num_vars)
            throw std::invalid_argument("variable " + std::to_string(v) + " out of range in order");
        if (level_[v] != kTerminalLevel)
            throw std::invalid_argument("variable " + std::to_string(v) + " repeated in order");
        level_[v] = Level(var_.size());
        var_.push_back(v);
    }
    for (Var v = 1; v <= num_vars; v++) {
        if (level_[v] == kTerminalLevel) {
            level_[v] = Level(var_.size());
            var_.push_back(v);
        }
    }
}

Engine::Engine(VarOrder order, size_t max_nodes)
    : order_(std::move(order)), max_nodes_(max_nodes) {
    nodes_.push_back({kTerminalLevel, 0, 0, kNil, 1});
    nodes_.push_back({kTerminalLevel, 1, 1, kNil, 1});
    buckets_.assign(1024, kNil);
}

size_t Engine::bucket_of(Level level, uint32_t hi, uint32_t lo) const {
    uint64_t h = level;
    h = h * 0x9E3779B97F4A7C15ull + hi;
    h = h * 0x9E3779B97F4A7C15ull + lo;
    h ^= h >> 29;
    return size_t(h) & (buckets_.size() - 1);
}

void Engine::rebuild_table() {
    std::fill(buckets_.begin(), buckets_.end(), kNil);
    for (uint32_t i = 2; i < nodes_.size(); i++) {
        Node& n = nodes_[i];
        if (n.level == kFreeLevel)
            continue;
        size_t b = bucket_of(n.level, n.hi, n.lo);
        n.next = buckets_[b];
        buckets_[b] = i;
    }
}

void Engine::grow_table() {
    buckets_.assign(buckets_.size() * 2, kNil);
    rebuild_table();
}

NodeRef Engine::make_node(Level level, NodeRef hi, NodeRef lo) {
    if (hi == lo)
        return hi;
    if (level >= this->level(hi) || level >= this->level(lo))
        throw std::logic_error("make_node: children must lie strictly below the node");
    size_t b = bucket_of(level, hi.index(), lo.index());
    for (uint32_t i = buckets_[b]; i != kNil; i = nodes_[i].next) {
        const Node& n = nodes_[i];
        if (n.level == level && n.hi == hi.index() && n.lo == lo.index())
            return NodeRef(i);
    }
    uint32_t index;
    if (free_list_ != kNil) {
        index = free_list_;
        free_list_ = nodes_[index].next;
    } else {
        if (nodes_.size() >= max_nodes_)
            throw CapacityExceeded(max_nodes_);
        index = uint32_t(nodes_.size());
        nodes_.push_back({});
    }
    nodes_[index] = {level, hi.index(), lo.index(), buckets_[b], 0};
    buckets_[b] = index;
    stats_.created++;
    stats_.live_nodes++;
    stats_.peak_nodes = std::max(stats_.peak_nodes, stats_.live_nodes);
    allocated_since_collect_++;
    if (stats_.live_nodes > buckets_.size())
        grow_table();
    NodeRef result(index);
    if (listener_)
        listener_->on_created(result);
    return result;
}

NodeRef Engine::literal(Lit l) {
    Level lv = order_.level_of(l.var());
    return l.phase() ? make_node(lv, NodeRef::one(), NodeRef::zero())
                     : make_node(lv, NodeRef::zero(), NodeRef::one());
}

NodeRef Engine::conjoin(NodeRef u, NodeRef v) {
    if (u == NodeRef::zero() || v == NodeRef::zero())
        return NodeRef::zero();
    if (u == NodeRef::one() || u == v)
        return v;
    if (v == NodeRef::one())
        return u;
    if (v < u)
        std::swap(u, v);
    uint64_t key = (uint64_t(u.index()) << 32) | v.index();
    if (auto it = and_cache_.find(key); it != and_cache_.end())
        return NodeRef(it->second);
    Level top = std::min(level(u), level(v));
    NodeRef h = conjoin(high_cofactor(u, top), high_cofactor(v, top));
    NodeRef l = conjoin(low_cofactor(u, top), low_cofactor(v, top));
    NodeRef result = make_node(top, h, l);
    and_cache_[key] = result.index();
    return result;
}

NodeRef Engine::parity(std::span<const Var> vars, bool phase) {
    std::vector<Level> levels;
    levels.reserve(vars.size());
    for (Var v : vars)
        levels.push_back(order_.level_of(v));
    std::sort(levels.begin(), levels.end());
    if (std::adjacent_find(levels.begin(), levels.end()) != levels.end())
        throw std::invalid_argument("parity: repeated variable");
    // below[p]: the variables below the current level must sum to p
    NodeRef below[2] = {NodeRef::one(), NodeRef::zero()};
    for (size_t i = levels.size(); i-- > 0;) {
        NodeRef next[2];
        for (int p = 0; p < 2; p++) {
            if (i == 0 && p != int(phase))
                continue;
            next[p] = make_node(levels[i], below[p ^ 1], below[p]);
        }
        below[0] = next[0];
        below[1] = next[1];
    }
    return below[phase ? 1 : 0];
}

NodeRef Engine::clause(std::span<const Lit> lits) {
    std::vector<Lit> sorted(lits.begin(), lits.end());
    std::sort(sorted.begin(), sorted.end(), [&](Lit a, Lit b) {
        return order_.level_of(a.var()) < order_.level_of(b.var());
    });
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (size_t i = 1; i < sorted.size(); i++)
        if (sorted[i].var() == sorted[i - 1].var())
            return NodeRef::one();
    NodeRef below = NodeRef::zero();
    for (size_t i = sorted.size(); i-- > 0;) {
        Level lv = order_.level_of(sorted[i].var());
        below = sorted[i].phase() ? make_node(lv, NodeRef::one(), below)
                                  : make_node(lv, below, NodeRef::one());
    }
    return below;
}

BigCount Engine::sat_count(NodeRef u, Var nvars) const {
    std::unordered_map<uint32_t, BigCount> memo;
    auto lvl = [&](NodeRef n) -> Level { return n.is_terminal() ? Level(nvars) : level(n); };
    std::function<BigCount(NodeRef)> count = [&](NodeRef n) -> BigCount {
        if (n == NodeRef::zero())
            return 0;
        if (n == NodeRef::one())
            return 1;
        if (auto it = memo.find(n.index()); it != memo.end())
            return it->second;
        if (level(n) >= nvars)
            throw std::invalid_argument("sat_count: BDD depends on variables beyond nvars");
        BigCount h = count(hi(n)) << (lvl(hi(n)) - level(n) - 1);
        BigCount l = count(lo(n)) << (lvl(lo(n)) - level(n) - 1);
        BigCount total = h + l;
        memo.emplace(n.index(), total);
        return total;
    };
    return count(u) << lvl(u);
}

bool Engine::evaluate(NodeRef u, const std::vector<bool>& assignment) const {
    while (!u.is_terminal())
        u = assignment.at(var(u)) ? hi(u) : lo(u);
    return u == NodeRef::one();
}

size_t Engine::node_count(NodeRef u) const {
    std::vector<uint32_t> stack{u.index()};
    std::unordered_map<uint32_t, bool> seen;
    size_t count = 0;
    while (!stack.empty()) {
        uint32_t i = stack.back();
        stack.pop_back();
        if (i < 2 || !seen.emplace(i, true).second)
            continue;
        count++;
        stack.push_back(nodes_[i].hi);
        stack.push_back(nodes_[i].lo);
    }
    return count;
}

void Engine::ref(NodeRef u) {
    if (!u.is_terminal())
        nodes_[u.index()].refcount++;
}

void Engine::deref(NodeRef u) {
    if (u.is_terminal())
        return;
    Node& n = nodes_[u.index()];
    if (n.refcount == 0)
        throw std::logic_error("BDD refcount underflow");
    n.refcount--;
}

size_t Engine::collect() {
    std::vector<uint8_t> mark(nodes_.size(), 0);
    std::vector<uint32_t> stack;
    for (uint32_t i = 2; i < nodes_.size(); i++)
        if (nodes_[i].level != kFreeLevel && nodes_[i].refcount > 0)
            stack.push_back(i);
    while (!stack.empty()) {
        uint32_t i = stack.back();
        stack.pop_back();
        if (i < 2 || mark[i])
            continue;
        mark[i] = 1;
        stack.push_back(nodes_[i].hi);
        stack.push_back(nodes_[i].lo);
    }
    and_cache_.clear();
    size_t reclaimed = 0;
    for (uint32_t i = 2; i < nodes_.size(); i++) {
        if (nodes_[i].level == kFreeLevel || mark[i])
            continue;
        if (listener_)
            listener_->on_reclaimed(NodeRef(i));
        nodes_[i].level = kFreeLevel;
        nodes_[i].next = free_list_;
        free_list_ = i;
        reclaimed++;
    }
    rebuild_table();
    stats_.live_nodes -= reclaimed;
    stats_.reclaimed += reclaimed;
    stats_.collections++;
    allocated_since_collect_ = 0;
    return reclaimed;
}

void Engine::write_dot(std::ostream& out, NodeRef root) const {
    out << "digraph bdd {\n";
    out << "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
    std::vector<uint32_t> stack{root.index()};
    std::unordered_map<uint32_t, bool> seen;
    while (!stack.empty()) {
        uint32_t i = stack.back();
        stack.pop_back();
        if (i < 2 || !seen.emplace(i, true).second)
            continue;
        const Node& n = nodes_[i];
        out << "  n" << i << " [label=\"x" << order_.var_at(n.level) << "\"];\n";
        out << "  n" << i << " -> n" << n.hi << ";\n";
        out << "  n" << i << " -> n" << n.lo << " [style=dashed];\n";
        stack.push_back(n.hi);
        stack.push_back(n.lo);
    }
    out << "}\n";
}

}  // namespace xorcert::bdd
