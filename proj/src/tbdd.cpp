#include "xorcert/tbdd.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace xorcert::tbdd {

Tbdd::State::~State() {
    manager->release(root, unit);
}

Manager::Manager(bdd::Engine& engine, lrat::ProofWriter& proof, Var first_extension_var)
    : engine_(engine), proof_(proof), next_evar_(first_extension_var) {
    engine_.set_listener(this);
}

Manager::~Manager() {
    engine_.set_listener(nullptr);
}

Tbdd Manager::make(NodeRef root, StepId unit) {
    engine_.ref(root);
    return Tbdd(std::shared_ptr<Tbdd::State>(new Tbdd::State{this, root, unit}));
}

void Manager::release(NodeRef root, StepId unit) {
    engine_.deref(root);
    if (unit != 0 && unit != proof_.empty_clause_id())
        proof_.remove(unit);
}

void Manager::tick() {
    if ((++ticks_ & 1023) == 0)
        deadline_.check();
}

std::optional<Clause> Manager::build_clause(std::span<const Term> terms) {
    Clause out;
    out.reserve(terms.size());
    for (Term t : terms) {
        if (t == kTrue)
            return std::nullopt;
        if (t == kFalse)
            continue;
        Lit l = Lit::from_dimacs(t);
        if (std::find(out.begin(), out.end(), ~l) != out.end())
            return std::nullopt;
        if (std::find(out.begin(), out.end(), l) == out.end())
            out.push_back(l);
    }
    return out;
}

std::optional<Clause> Manager::build_clause(std::initializer_list<Term> terms) {
    return build_clause(std::span<const Term>(terms.begin(), terms.size()));
}

Manager::Term Manager::node_term(NodeRef n) {
    if (n == NodeRef::zero())
        return kFalse;
    if (n == NodeRef::one())
        return kTrue;
    return Term(register_node(n).evar);
}

const NodeDefinition* Manager::find_definition(NodeRef node) const {
    if (node.index() >= defs_.size() || defs_[node.index()].evar == 0)
        return nullptr;
    return &defs_[node.index()];
}

const NodeDefinition& Manager::register_node(NodeRef n) {
    if (n.is_terminal())
        throw std::invalid_argument("terminal nodes have no extension variable");
    if (n.index() >= defs_.size())
        defs_.resize(std::max<size_t>(n.index() + 1, defs_.size() * 2));
    if (defs_[n.index()].evar != 0)
        return defs_[n.index()];
    // children first: their variables appear in our clauses
    Term h = node_term(engine_.hi(n));
    Term l = node_term(engine_.lo(n));
    Term x = var_term(n);
    NodeDefinition def;
    def.evar = next_evar_++;
    Term u = Term(def.evar);
    // clauses with -u first, then u: each resolvent on u is a tautology
    if (auto c = build_clause({-u, -x, h}))
        def.hd = proof_.add_extension(*c);
    if (auto c = build_clause({-u, x, l}))
        def.ld = proof_.add_extension(*c);
    if (auto c = build_clause({u, -x, -h}))
        def.hu = proof_.add_extension(*c);
    if (auto c = build_clause({u, x, -l}))
        def.lu = proof_.add_extension(*c);
    defs_[n.index()] = def;
    return defs_[n.index()];
}

void Manager::on_created(NodeRef node) {
    register_node(node);
}

void Manager::on_reclaimed(NodeRef node) {
    if (!and_cache_.empty() || !imply_cache_.empty())
        purge_caches();
    if (node.index() >= defs_.size())
        return;
    NodeDefinition& def = defs_[node.index()];
    for (StepId id : {def.hd, def.ld, def.hu, def.lu})
        if (id != 0)
            proof_.remove(id);
    def = NodeDefinition{};
}

void Manager::purge_caches() {
    for (const auto& [key, entry] : and_cache_)
        if (entry.step != 0)
            proof_.remove(entry.step);
    for (const auto& [key, step] : imply_cache_)
        if (step != 0)
            proof_.remove(step);
    and_cache_.clear();
    imply_cache_.clear();
}

size_t Manager::collect() {
    purge_caches();
    stats_.collections++;
    return engine_.collect();
}

size_t Manager::maybe_collect(size_t min_allocated) {
    if (engine_.allocated_since_collect() < min_allocated)
        return 0;
    return collect();
}

void Manager::add_candidate(StepId id, std::initializer_list<Term> terms,
                            std::vector<Candidate>& out) {
    if (id == 0)
        return;
    if (auto c = build_clause(terms))
        out.push_back({id, std::move(*c)});
}

void Manager::add_definition_candidates(NodeRef n, bool hd, bool ld, bool hu, bool lu,
                                        std::vector<Candidate>& out) {
    if (n.is_terminal())
        return;
    const NodeDefinition def = register_node(n);
    Term u = Term(def.evar);
    Term x = var_term(n);
    Term h = node_term(engine_.hi(n));
    Term l = node_term(engine_.lo(n));
    if (hd)
        add_candidate(def.hd, {-u, -x, h}, out);
    if (ld)
        add_candidate(def.ld, {-u, x, l}, out);
    if (hu)
        add_candidate(def.hu, {u, -x, -h}, out);
    if (lu)
        add_candidate(def.lu, {u, x, -l}, out);
}

StepId Manager::prove(const Clause& target, std::span<const Candidate> candidates) {
    // Simulate the checker: falsify the target, then unit propagate over the
    // candidates in order, repeating passes until a conflict.
    std::unordered_map<Var, bool> values;
    auto value_of = [&](Lit l) -> int {
        auto it = values.find(l.var());
        if (it == values.end())
            return 0;
        return it->second == l.phase() ? 1 : -1;
    };
    for (Lit l : target) {
        if (value_of(l) > 0)
            throw std::invalid_argument("prove: tautological target clause");
        values[l.var()] = !l.phase();
    }
    std::vector<StepId> hints;
    std::vector<bool> done(candidates.size(), false);
    bool conflict = false;
    bool progress = true;
    while (!conflict && progress) {
        progress = false;
        for (size_t i = 0; i < candidates.size() && !conflict; i++) {
            if (done[i])
                continue;
            int unassigned = 0;
            Lit unit;
            bool satisfied = false;
            for (Lit l : candidates[i].lits) {
                int v = value_of(l);
                if (v > 0) {
                    satisfied = true;
                    break;
                }
                if (v == 0) {
                    unassigned++;
                    unit = l;
                }
            }
            if (satisfied) {
                done[i] = true;
                continue;
            }
            if (unassigned == 0) {
                hints.push_back(candidates[i].id);
                conflict = true;
            } else if (unassigned == 1) {
                hints.push_back(candidates[i].id);
                values[unit.var()] = unit.phase();
                done[i] = true;
                progress = true;
            }
        }
    }
    if (!conflict) {
        std::string text;
        for (Lit l : target)
            text += std::to_string(l.dimacs()) + " ";
        throw ImplicationFailure("cannot justify clause [ " + text + "] from " +
                                 std::to_string(candidates.size()) + " candidate clauses");
    }
    return proof_.add_rup(target, hints);
}

Tbdd Manager::trusted_true() {
    return make(NodeRef::one(), 0);
}

Tbdd Manager::from_clause(const Clause& c, StepId clause_id) {
    if (c.empty())
        throw std::invalid_argument("from_clause: empty clause");
    NodeRef root = engine_.clause(c);
    if (root == NodeRef::one())
        return trusted_true();
    std::vector<Candidate> candidates;
    for (NodeRef n = root; !n.is_terminal();) {
        add_definition_candidates(n, false, false, true, true, candidates);
        n = engine_.hi(n) == NodeRef::one() ? engine_.lo(n) : engine_.hi(n);
    }
    candidates.push_back({clause_id, c});
    StepId unit = prove(*build_clause({node_term(root)}), candidates);
    return make(root, unit);
}

Manager::AndEntry Manager::and_rec(NodeRef u, NodeRef v) {
    if (u == NodeRef::zero() || v == NodeRef::zero())
        return {NodeRef::zero(), 0};
    if (u == NodeRef::one() || u == v)
        return {v, 0};
    if (v == NodeRef::one())
        return {u, 0};
    if (v < u)
        std::swap(u, v);
    uint64_t key = (uint64_t(u.index()) << 32) | v.index();
    if (auto it = and_cache_.find(key); it != and_cache_.end())
        return it->second;
    tick();
    stats_.and_steps++;

    const bdd::Level top = std::min(engine_.level(u), engine_.level(v));
    NodeRef u1 = engine_.high_cofactor(u, top), u0 = engine_.low_cofactor(u, top);
    NodeRef v1 = engine_.high_cofactor(v, top), v0 = engine_.low_cofactor(v, top);
    AndEntry hi = and_rec(u1, v1);
    AndEntry lo = and_rec(u0, v0);
    NodeRef w = engine_.make_node(top, hi.result, lo.result);

    const Term U = node_term(u), V = node_term(v), W = node_term(w);
    const Term X = Term(engine_.order().var_at(top));
    const bool u_top = engine_.level(u) == top;
    const bool v_top = engine_.level(v) == top;
    const bool w_top = !w.is_terminal() && engine_.level(w) == top;

    StepId case_hi = 0;
    std::optional<Clause> target_hi = build_clause({-U, -V, -X, W});
    std::vector<Candidate> cands;
    if (target_hi) {
        if (u_top)
            add_definition_candidates(u, true, false, false, false, cands);
        if (v_top)
            add_definition_candidates(v, true, false, false, false, cands);
        add_candidate(hi.step, {-node_term(u1), -node_term(v1), node_term(hi.result)}, cands);
        if (w_top)
            add_definition_candidates(w, false, false, true, false, cands);
        case_hi = prove(*target_hi, cands);
    }

    StepId step = 0;
    if (auto target = build_clause({-U, -V, W})) {
        cands.clear();
        if (case_hi != 0)
            cands.push_back({case_hi, *target_hi});
        if (u_top)
            add_definition_candidates(u, false, true, false, false, cands);
        if (v_top)
            add_definition_candidates(v, false, true, false, false, cands);
        add_candidate(lo.step, {-node_term(u0), -node_term(v0), node_term(lo.result)}, cands);
        if (w_top)
            add_definition_candidates(w, false, false, false, true, cands);
        step = prove(*target, cands);
    }
    if (case_hi != 0)
        proof_.remove(case_hi);

    AndEntry entry{w, step};
    and_cache_.emplace(key, entry);
    return entry;
}

Tbdd Manager::conjoin(const Tbdd& a, const Tbdd& b) {
    AndEntry e = and_rec(a.root(), b.root());
    if (e.result == NodeRef::one())
        return trusted_true();
    const Term A = node_term(a.root()), B = node_term(b.root()), W = node_term(e.result);
    std::vector<Candidate> cands;
    add_candidate(a.unit_id(), {A}, cands);
    add_candidate(b.unit_id(), {B}, cands);
    add_candidate(e.step, {-A, -B, W}, cands);
    StepId unit = prove(*build_clause({W}), cands);
    return make(e.result, unit);
}

StepId Manager::imply_rec(NodeRef u, NodeRef v) {
    if (u == NodeRef::zero() || v == NodeRef::one() || u == v)
        return 0;
    if (u == NodeRef::one() || v == NodeRef::zero())
        throw ImplicationFailure("upgrade: implication does not hold");
    uint64_t key = (uint64_t(u.index()) << 32) | v.index();
    if (auto it = imply_cache_.find(key); it != imply_cache_.end())
        return it->second;
    tick();
    stats_.implication_steps++;

    const bdd::Level top = std::min(engine_.level(u), engine_.level(v));
    NodeRef u1 = engine_.high_cofactor(u, top), u0 = engine_.low_cofactor(u, top);
    NodeRef v1 = engine_.high_cofactor(v, top), v0 = engine_.low_cofactor(v, top);
    StepId hi = imply_rec(u1, v1);
    StepId lo = imply_rec(u0, v0);

    const Term U = node_term(u), V = node_term(v);
    const Term X = Term(engine_.order().var_at(top));
    const bool u_top = engine_.level(u) == top;
    const bool v_top = engine_.level(v) == top;

    std::vector<Candidate> cands;
    Clause target_hi = *build_clause({-U, -X, V});
    if (u_top)
        add_definition_candidates(u, true, false, false, false, cands);
    add_candidate(hi, {-node_term(u1), node_term(v1)}, cands);
    if (v_top)
        add_definition_candidates(v, false, false, true, false, cands);
    StepId case_hi = prove(target_hi, cands);

    cands.clear();
    cands.push_back({case_hi, target_hi});
    if (u_top)
        add_definition_candidates(u, false, true, false, false, cands);
    add_candidate(lo, {-node_term(u0), node_term(v0)}, cands);
    if (v_top)
        add_definition_candidates(v, false, false, false, true, cands);
    StepId step = prove(*build_clause({-U, V}), cands);
    proof_.remove(case_hi);

    imply_cache_.emplace(key, step);
    return step;
}

Tbdd Manager::upgrade(const Tbdd& a, NodeRef v) {
    if (v == NodeRef::one())
        return trusted_true();
    if (a.is_false() && v == NodeRef::zero())
        return a;
    StepId imp = imply_rec(a.root(), v);
    const Term A = node_term(a.root()), V = node_term(v);
    std::vector<Candidate> cands;
    add_candidate(a.unit_id(), {A}, cands);
    add_candidate(imp, {-A, V}, cands);
    StepId unit = prove(*build_clause({V}), cands);
    return make(v, unit);
}

void Manager::path_candidates(NodeRef n, Justification& j, std::vector<Candidate>& out) {
    while (!n.is_terminal()) {
        auto it = j.falsifying.find(engine_.var(n));
        if (it == j.falsifying.end()) {
            StepId id = justify_node(n, j);
            Clause lits = j.clause;
            lits.insert(lits.begin(), ~Lit::from_dimacs(node_term(n)));
            out.push_back({id, std::move(lits)});
            return;
        }
        if (it->second) {
            add_definition_candidates(n, true, false, false, false, out);
            n = engine_.hi(n);
        } else {
            add_definition_candidates(n, false, true, false, false, out);
            n = engine_.lo(n);
        }
    }
    if (n == NodeRef::one())
        throw ImplicationFailure("justify_clause: BDD does not imply the clause");
}

// Proves [-n] + clause for a node whose variable the clause leaves open.
StepId Manager::justify_node(NodeRef n, Justification& j) {
    if (auto it = j.memo.find(n.index()); it != j.memo.end())
        return it->second;
    tick();
    const Term N = node_term(n);
    const Lit x(engine_.var(n), true);

    Clause target_hi = j.clause;
    target_hi.insert(target_hi.begin(), {Lit::from_dimacs(-N), ~x});
    std::vector<Candidate> cands;
    add_definition_candidates(n, true, false, false, false, cands);
    path_candidates(engine_.hi(n), j, cands);
    StepId case_hi = prove(target_hi, cands);
    j.scratch.push_back(case_hi);

    Clause target = j.clause;
    target.insert(target.begin(), Lit::from_dimacs(-N));
    cands.clear();
    cands.push_back({case_hi, target_hi});
    add_definition_candidates(n, false, true, false, false, cands);
    path_candidates(engine_.lo(n), j, cands);
    StepId step = prove(target, cands);
    j.scratch.push_back(step);
    j.memo.emplace(n.index(), step);
    return step;
}

StepId Manager::justify_clause(const Tbdd& a, const Clause& c) {
    if (is_tautology(c))
        throw std::invalid_argument("justify_clause: tautological clause");
    stats_.justified_clauses++;
    if (a.is_false()) {
        if (c.empty())
            return a.unit_id();
        StepId hint = a.unit_id();
        return proof_.add_rup(c, std::span<const StepId>(&hint, 1));
    }
    Justification j{c, {}, {}, {}};
    for (Lit l : c)
        j.falsifying[l.var()] = !l.phase();
    std::vector<Candidate> cands;
    add_candidate(a.unit_id(), {node_term(a.root())}, cands);
    path_candidates(a.root(), j, cands);
    StepId id = prove(c, cands);
    for (StepId s : j.scratch)
        proof_.remove(s);
    return id;
}

// ---------------------------------------------------------------------------

ParityTbdd xor_sum(Manager& m, const ParityTbdd& a, const ParityTbdd& b) {
    ParityTbdd result;
    result.constraint = xor_sum(a.constraint, b.constraint);
    Tbdd conjunction = m.conjoin(a.tbdd, b.tbdd);
    NodeRef target = m.engine().parity(result.constraint.vars, result.constraint.phase);
    result.tbdd = m.upgrade(conjunction, target);
    return result;
}

namespace {

size_t symmetric_difference_size(const std::vector<Var>& a, const std::vector<Var>& b) {
    size_t i = 0, j = 0, common = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j])
            i++;
        else if (b[j] < a[i])
            j++;
        else {
            common++;
            i++;
            j++;
        }
    }
    return a.size() + b.size() - 2 * common;
}

}  // namespace

ParityTbdd greedy_sum(Manager& m, std::vector<ParityTbdd> items) {
    if (items.empty())
        throw std::invalid_argument("greedy_sum: no constraints");
    using Entry = std::tuple<size_t, uint32_t, uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<bool> alive(items.size(), true);
    size_t live = items.size();
    for (uint32_t i = 0; i < items.size(); i++)
        for (uint32_t j = i + 1; j < items.size(); j++)
            queue.emplace(symmetric_difference_size(items[i].constraint.vars,
                                                    items[j].constraint.vars),
                          i, j);
    while (live > 1) {
        auto [size, a, b] = queue.top();
        queue.pop();
        if (!alive[a] || !alive[b])
            continue;
        ParityTbdd sum = xor_sum(m, items[a], items[b]);
        alive[a] = alive[b] = false;
        items[a] = ParityTbdd{};
        items[b] = ParityTbdd{};
        uint32_t id = uint32_t(items.size());
        for (uint32_t j = 0; j < id; j++)
            if (alive[j])
                queue.emplace(symmetric_difference_size(items[j].constraint.vars,
                                                        sum.constraint.vars),
                              j, id);
        items.push_back(std::move(sum));
        alive.push_back(true);
        live--;
        m.maybe_collect();
    }
    for (size_t i = 0; i < items.size(); i++)
        if (alive[i])
            return std::move(items[i]);
    throw std::logic_error("greedy_sum: lost the final sum");
}

}  // namespace xorcert::tbdd
