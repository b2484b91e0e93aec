#include "xorcert/solver.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "xorcert/trail.hpp"

namespace xorcert {

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Sat:
        return "SAT";
    case SolveStatus::Unsat:
        return "UNSAT";
    case SolveStatus::Limit:
        return "LIMIT";
    }
    return "?";
}

// ---------------------------------------------------------------------------

ParityProver::ParityProver(const CnfFormula& f, std::vector<ParityConstraint> xors,
                           lrat::ProofWriter& writer, bdd::VarOrder order,
                           size_t max_bdd_nodes, Deadline deadline)
    : xors_(std::move(xors)),
      engine_(std::move(order), max_bdd_nodes),
      manager_(engine_, writer, f.num_vars + 1) {
    manager_.set_deadline(deadline);
    prepare(f);
}

void ParityProver::prepare(const CnfFormula& f) {
    inputs_.reserve(xors_.size());
    for (const auto& p : xors_) {
        tbdd::Tbdd acc;
        for (uint64_t id : p.source_clauses) {
            tbdd::Tbdd c = manager_.from_clause(f.clause_at(id), id);
            acc = acc.valid() ? manager_.conjoin(acc, c) : c;
        }
        bdd::NodeRef target = engine_.parity(p.vars, p.phase);
        inputs_.push_back({manager_.upgrade(acc, target), p});
        acc = {};
        manager_.maybe_collect();
    }
}

lrat::StepId ParityProver::justify(const gj::ReasonRecord& rec) {
    justified_++;
    CacheEntry& e = cache_[rec.row];
    if (e.sum.tbdd.valid() && e.version == rec.row_version) {
        cache_hits_++;
    } else {
        // the previous sum of this row is released before building the new one
        e.sum = {};
        std::vector<tbdd::ParityTbdd> items;
        items.reserve(rec.origin.size());
        for (uint32_t j : rec.origin)
            items.push_back(inputs_.at(j));
        e.sum = tbdd::greedy_sum(manager_, std::move(items));
        e.version = rec.row_version;
    }
    lrat::StepId id = manager_.justify_clause(e.sum.tbdd, rec.clause);
    manager_.maybe_collect();
    return id;
}

// ---------------------------------------------------------------------------

namespace {

constexpr uint32_t kNoReason = UINT32_MAX;

inline size_t lit_index(Lit l) { return 2 * size_t(l.var()) + (l.phase() ? 0 : 1); }

struct ClauseRec {
    Clause lits;
    lrat::StepId id = 0;
    uint32_t lbd = 0;
    bool learnt = false;
    bool removed = false;
    bool temporary = false;  // parity reason or conflict; never watched
};

struct Watch {
    uint32_t cref;
    Lit blocker;
};

class VarHeap {
public:
    explicit VarHeap(const std::vector<double>& activity) : act_(activity) {}

    void reserve(Var n) { pos_.assign(size_t(n) + 1, -1); }
    bool empty() const { return heap_.empty(); }
    bool contains(Var v) const { return pos_[v] >= 0; }

    void insert(Var v) {
        if (contains(v))
            return;
        pos_[v] = int(heap_.size());
        heap_.push_back(v);
        up(heap_.size() - 1);
    }
    Var pop() {
        Var top = heap_[0];
        pos_[top] = -1;
        Var last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            pos_[last] = 0;
            down(0);
        }
        return top;
    }
    void increased(Var v) {
        if (contains(v))
            up(size_t(pos_[v]));
    }

private:
    bool before(Var a, Var b) const {
        return act_[a] > act_[b] || (act_[a] == act_[b] && a < b);
    }
    void up(size_t i) {
        Var v = heap_[i];
        while (i > 0) {
            size_t parent = (i - 1) / 2;
            if (!before(v, heap_[parent]))
                break;
            heap_[i] = heap_[parent];
            pos_[heap_[i]] = int(i);
            i = parent;
        }
        heap_[i] = v;
        pos_[v] = int(i);
    }
    void down(size_t i) {
        Var v = heap_[i];
        while (true) {
            size_t child = 2 * i + 1;
            if (child >= heap_.size())
                break;
            if (child + 1 < heap_.size() && before(heap_[child + 1], heap_[child]))
                child++;
            if (!before(heap_[child], v))
                break;
            heap_[i] = heap_[child];
            pos_[heap_[i]] = int(i);
            i = child;
        }
        heap_[i] = v;
        pos_[v] = int(i);
    }

    const std::vector<double>& act_;
    std::vector<Var> heap_;
    std::vector<int> pos_;
};

double luby(double y, uint64_t x) {
    uint64_t size = 1;
    int seq = 0;
    while (size < x + 1) {
        seq++;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        seq--;
        x = x % size;
    }
    double r = 1;
    for (int i = 0; i < seq; i++)
        r *= y;
    return r;
}

// Thrown when a proof step derived the empty clause.
struct Refuted {};

class Solver {
public:
    Solver(const CnfFormula& f, const SolverOptions& opts, lrat::ProofSink* sink)
        : f_(f), opts_(opts), trail_(f.num_vars), heap_(activity_) {
        if (sink)
            writer_.emplace(*sink, f.num_clauses(), opts.max_proof_clauses);
        if (opts.timeout_seconds > 0)
            deadline_ = Deadline(opts.timeout_seconds);
    }

    SolveResult run();

private:
    bool proving() const { return writer_.has_value(); }
    int8_t value(Lit l) const { return trail_.value(l); }
    uint32_t level(Var v) const { return trail_.level(v); }

    void setup();
    uint32_t add_clause(Clause lits, lrat::StepId id, bool learnt, bool temporary);
    void release_temp(uint32_t cref);
    void assign(Lit l, uint32_t reason);
    uint32_t propagate_clauses();
    uint32_t propagate();
    bool handle_conflict(uint32_t confl);
    void derive_empty(uint32_t confl);
    void backtrack(uint32_t level);
    bool decide();
    void bump(Var v);
    void reduce_db();
    void check_limits();

    const CnfFormula& f_;
    SolverOptions opts_;
    std::optional<lrat::ProofWriter> writer_;
    std::unique_ptr<gj::GaussJordan> gauss_;
    std::unique_ptr<ParityProver> prover_;
    Deadline deadline_;

    Trail trail_;
    std::vector<ClauseRec> clauses_;
    std::vector<uint32_t> free_temp_;
    std::vector<std::vector<Watch>> watches_;
    std::vector<uint32_t> reason_;
    std::vector<lrat::StepId> unit_id_;
    std::vector<bool> saved_phase_;
    std::vector<double> activity_;
    double var_inc_ = 1;
    VarHeap heap_;
    std::vector<uint8_t> seen_;
    size_t qhead_ = 0;
    bool unsat_ = false;

    uint64_t conflicts_since_restart_ = 0;
    uint64_t restart_count_ = 0;
    uint64_t next_reduce_ = 2000;
    uint64_t reduce_increment_ = 300;
    size_t num_learnts_ = 0;

    SolveStats stats_;
};

void Solver::setup() {
    const Var n = f_.num_vars;
    watches_.resize(2 * (size_t(n) + 1));
    reason_.assign(size_t(n) + 1, kNoReason);
    unit_id_.assign(size_t(n) + 1, 0);
    saved_phase_.assign(size_t(n) + 1, false);
    seen_.assign(size_t(n) + 1, 0);
    activity_.assign(size_t(n) + 1, 0);
    std::mt19937_64 rng(opts_.seed);
    for (Var v = 1; v <= n; v++)
        activity_[v] = double(rng() >> 11) * 0x1.0p-53 * 1e-5;
    heap_.reserve(n);
    for (Var v = 1; v <= n; v++)
        heap_.insert(v);

    for (size_t i = 0; i < f_.num_clauses() && !unsat_; i++) {
        const Clause& c = f_.clauses[i];
        if (is_tautology(c))
            continue;
        Clause lits = normalize_clause(c);
        uint32_t cref = add_clause(std::move(lits), i + 1, false, false);
        const Clause& stored = clauses_[cref].lits;
        if (stored.empty()) {
            derive_empty(cref);
        } else if (stored.size() == 1) {
            if (value(stored[0]) < 0)
                derive_empty(cref);
            else if (value(stored[0]) == 0)
                assign(stored[0], cref);
        }
    }
    if (unsat_)
        return;

    if (opts_.xor_reasoning) {
        auto xors = extract_xors(f_, opts_.max_xor_arity);
        stats_.xors = xors.size();
        if (!xors.empty()) {
            gauss_ = std::make_unique<gj::GaussJordan>(xors);
            if (proving()) {
                bdd::VarOrder order(n, opts_.var_order);
                prover_ = std::make_unique<ParityProver>(f_, std::move(xors), *writer_,
                                                         std::move(order), opts_.max_bdd_nodes,
                                                         deadline_);
                if (writer_->refuted())
                    throw Refuted{};
            }
        }
    }
}

uint32_t Solver::add_clause(Clause lits, lrat::StepId id, bool learnt, bool temporary) {
    uint32_t cref;
    if (temporary && !free_temp_.empty()) {
        cref = free_temp_.back();
        free_temp_.pop_back();
    } else {
        cref = uint32_t(clauses_.size());
        clauses_.emplace_back();
    }
    ClauseRec& c = clauses_[cref];
    c.lits = std::move(lits);
    c.id = id;
    c.learnt = learnt;
    c.temporary = temporary;
    c.removed = false;
    c.lbd = 0;
    if (!temporary && c.lits.size() >= 2) {
        watches_[lit_index(c.lits[0])].push_back({cref, c.lits[1]});
        watches_[lit_index(c.lits[1])].push_back({cref, c.lits[0]});
    }
    return cref;
}

void Solver::release_temp(uint32_t cref) {
    ClauseRec& c = clauses_[cref];
    if (proving() && c.id != 0)
        writer_->remove(c.id);
    c.lits.clear();
    c.removed = true;
    free_temp_.push_back(cref);
}

void Solver::assign(Lit l, uint32_t reason) {
    trail_.assign(l);
    reason_[l.var()] = reason;
    stats_.propagations++;
    if (trail_.decision_level() == 0 && proving()) {
        const ClauseRec& c = clauses_[reason];
        if (c.lits.size() == 1) {
            unit_id_[l.var()] = c.id;
        } else {
            std::vector<lrat::StepId> hints;
            for (Lit q : c.lits)
                if (q.var() != l.var())
                    hints.push_back(unit_id_[q.var()]);
            hints.push_back(c.id);
            unit_id_[l.var()] = writer_->add_rup({l}, hints);
        }
    }
}

uint32_t Solver::propagate_clauses() {
    while (qhead_ < trail_.size()) {
        Lit p = trail_[qhead_++];
        Lit false_lit = ~p;
        auto& ws = watches_[lit_index(false_lit)];
        size_t i = 0, j = 0;
        uint32_t conflict = kNoReason;
        while (i < ws.size()) {
            Watch w = ws[i++];
            if (value(w.blocker) > 0) {
                ws[j++] = w;
                continue;
            }
            ClauseRec& c = clauses_[w.cref];
            if (c.removed)
                continue;
            Clause& lits = c.lits;
            if (lits[0] == false_lit)
                std::swap(lits[0], lits[1]);
            Lit first = lits[0];
            if (first != w.blocker && value(first) > 0) {
                ws[j++] = {w.cref, first};
                continue;
            }
            bool moved = false;
            for (size_t k = 2; k < lits.size(); k++) {
                if (value(lits[k]) >= 0) {
                    std::swap(lits[1], lits[k]);
                    watches_[lit_index(lits[1])].push_back({w.cref, first});
                    moved = true;
                    break;
                }
            }
            if (moved)
                continue;
            ws[j++] = {w.cref, first};
            if (value(first) < 0) {
                conflict = w.cref;
                while (i < ws.size())
                    ws[j++] = ws[i++];
            } else {
                assign(first, w.cref);
            }
        }
        ws.resize(j);
        if (conflict != kNoReason)
            return conflict;
    }
    return kNoReason;
}

uint32_t Solver::propagate() {
    while (true) {
        uint32_t confl = propagate_clauses();
        if (confl != kNoReason || !gauss_)
            return confl;
        size_t before = trail_.size();
        auto rec = gauss_->propagate(trail_, [&](gj::ReasonRecord&& r) {
            stats_.parity_propagations++;
            lrat::StepId id = 0;
            if (proving()) {
                id = prover_->justify(r);
                if (writer_->refuted())
                    throw Refuted{};
            }
            Lit implied = r.clause.front();
            uint32_t cref = add_clause(std::move(r.clause), id, false, true);
            assign(implied, cref);
        });
        if (rec) {
            stats_.parity_conflicts++;
            lrat::StepId id = 0;
            if (proving()) {
                id = prover_->justify(*rec);
                if (writer_->refuted())
                    throw Refuted{};
            }
            if (rec->clause.empty())
                throw Refuted{};
            return add_clause(std::move(rec->clause), id, false, true);
        }
        if (trail_.size() == before)
            return kNoReason;
    }
}

void Solver::derive_empty(uint32_t confl) {
    unsat_ = true;
    if (!proving() || writer_->refuted())
        return;
    const ClauseRec& c = clauses_[confl];
    std::vector<lrat::StepId> hints;
    for (Lit q : c.lits)
        hints.push_back(unit_id_[q.var()]);
    hints.push_back(c.id);
    writer_->add_rup({}, hints);
}

void Solver::bump(Var v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
        for (double& a : activity_)
            a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    heap_.increased(v);
}

bool Solver::handle_conflict(uint32_t confl) {
    stats_.conflicts++;
    conflicts_since_restart_++;
    const Clause conflict_lits = clauses_[confl].lits;
    uint32_t top = 0;
    for (Lit q : conflict_lits)
        top = std::max(top, level(q.var()));
    if (top == 0) {
        derive_empty(confl);
        return false;
    }
    if (top < trail_.decision_level())
        backtrack(top);

    size_t at_top = 0;
    uint32_t second = 0;
    Lit asserting;
    for (Lit q : conflict_lits) {
        if (level(q.var()) == top) {
            at_top++;
            asserting = q;
        } else {
            second = std::max(second, level(q.var()));
        }
    }
    if (at_top == 1) {
        // The conflict clause itself asserts its only top-level literal.
        backtrack(second);
        assign(asserting, confl);
        return true;
    }

    // First-UIP analysis.
    Clause learnt{Lit()};
    std::vector<Var> used;       // variables whose reasons are resolved on
    std::vector<Var> zero_vars;  // level-0 variables needing unit hints
    std::vector<Var> to_clear;
    auto note_zero = [&](Var v) {
        if (seen_[v] == 0) {
            seen_[v] = 2;
            zero_vars.push_back(v);
            to_clear.push_back(v);
        }
    };
    int counter = 0;
    Lit p;
    bool have_p = false;
    size_t index = trail_.size();
    uint32_t cref = confl;
    do {
        for (Lit q : clauses_[cref].lits) {
            Var v = q.var();
            if (have_p && v == p.var())
                continue;
            if (level(v) == 0) {
                note_zero(v);
                continue;
            }
            if (seen_[v])
                continue;
            seen_[v] = 1;
            to_clear.push_back(v);
            bump(v);
            if (level(v) >= top)
                counter++;
            else
                learnt.push_back(q);
        }
        while (seen_[trail_[--index].var()] != 1)
            ;
        p = trail_[index];
        have_p = true;
        cref = reason_[p.var()];
        counter--;
        if (counter > 0)
            used.push_back(p.var());
    } while (counter > 0);
    learnt[0] = ~p;

    // Drop literals whose reasons are covered by the rest of the clause.
    size_t keep = 1;
    for (size_t i = 1; i < learnt.size(); i++) {
        Var v = learnt[i].var();
        uint32_t r = reason_[v];
        bool removable = r != kNoReason;
        if (removable) {
            for (Lit q : clauses_[r].lits) {
                Var u = q.var();
                if (u != v && seen_[u] != 1 && level(u) != 0) {
                    removable = false;
                    break;
                }
            }
        }
        if (removable) {
            used.push_back(v);
            for (Lit q : clauses_[r].lits)
                if (level(q.var()) == 0)
                    note_zero(q.var());
        } else {
            learnt[keep++] = learnt[i];
        }
    }
    learnt.resize(keep);
    for (Var v : to_clear)
        seen_[v] = 0;

    uint32_t backjump = 0;
    if (learnt.size() > 1) {
        size_t best = 1;
        for (size_t i = 2; i < learnt.size(); i++)
            if (level(learnt[i].var()) > level(learnt[best].var()))
                best = i;
        std::swap(learnt[1], learnt[best]);
        backjump = level(learnt[1].var());
    }

    lrat::StepId id = 0;
    if (proving()) {
        std::vector<lrat::StepId> hints;
        for (Var v : zero_vars)
            hints.push_back(unit_id_[v]);
        std::sort(used.begin(), used.end(),
                  [&](Var a, Var b) { return trail_.position(a) < trail_.position(b); });
        for (Var v : used)
            hints.push_back(clauses_[reason_[v]].id);
        hints.push_back(clauses_[confl].id);
        id = writer_->add_rup(learnt, hints);
    }

    uint32_t lbd = 0;
    {
        std::vector<uint32_t> levels;
        for (Lit q : learnt)
            levels.push_back(level(q.var()));
        std::sort(levels.begin(), levels.end());
        lbd = uint32_t(std::unique(levels.begin(), levels.end()) - levels.begin());
    }

    backtrack(backjump);
    if (clauses_[confl].temporary && !clauses_[confl].removed)
        release_temp(confl);

    stats_.learned++;
    Lit first = learnt[0];
    uint32_t lref = add_clause(std::move(learnt), id, true, false);
    clauses_[lref].lbd = lbd;
    num_learnts_++;
    assign(first, lref);
    var_inc_ /= 0.95;
    return true;
}

void Solver::backtrack(uint32_t lvl) {
    if (lvl >= trail_.decision_level())
        return;
    trail_.backtrack(lvl, [&](Lit l) {
        Var v = l.var();
        saved_phase_[v] = l.phase();
        heap_.insert(v);
        uint32_t r = reason_[v];
        if (r != kNoReason && clauses_[r].temporary)
            release_temp(r);
        reason_[v] = kNoReason;
    });
    qhead_ = std::min(qhead_, trail_.size());
    if (gauss_)
        gauss_->backtrack();
}

bool Solver::decide() {
    while (!heap_.empty()) {
        Var v = heap_.pop();
        if (trail_.assigned(v))
            continue;
        stats_.decisions++;
        trail_.new_level();
        assign(Lit(v, saved_phase_[v]), kNoReason);
        return true;
    }
    return false;
}

void Solver::reduce_db() {
    stats_.reductions++;
    std::vector<uint32_t> candidates;
    for (uint32_t cref = 0; cref < clauses_.size(); cref++) {
        const ClauseRec& c = clauses_[cref];
        if (!c.learnt || c.removed || c.lits.size() <= 2 || c.lbd <= 2)
            continue;
        Lit first = c.lits[0];
        if (value(first) > 0 && reason_[first.var()] == cref)
            continue;
        candidates.push_back(cref);
    }
    std::sort(candidates.begin(), candidates.end(), [&](uint32_t a, uint32_t b) {
        if (clauses_[a].lbd != clauses_[b].lbd)
            return clauses_[a].lbd > clauses_[b].lbd;
        return a < b;
    });
    candidates.resize(candidates.size() / 2);
    for (uint32_t cref : candidates) {
        ClauseRec& c = clauses_[cref];
        c.removed = true;
        if (proving())
            writer_->remove(c.id);
        c.lits.clear();
        c.lits.shrink_to_fit();
        num_learnts_--;
    }
}

void Solver::check_limits() {
    deadline_.check();
}

SolveResult Solver::run() {
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    auto finish = [&](SolveStatus s) {
        result.status = s;
        stats_.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (proving()) {
            writer_->flush();
            stats_.proof_added = writer_->counters().added;
            stats_.proof_deleted = writer_->counters().deleted;
            stats_.extension_vars = writer_->counters().extension;
        }
        if (prover_) {
            stats_.justified_reasons = prover_->justified();
            stats_.reason_cache_hits = prover_->cache_hits();
            stats_.peak_bdd_nodes = prover_->engine().stats().peak_nodes;
        }
        result.stats = stats_;
        return result;
    };

    try {
        setup();
        if (unsat_)
            return finish(SolveStatus::Unsat);
        uint64_t ticks = 0;
        while (true) {
            if ((++ticks & 255) == 0)
                check_limits();
            uint32_t confl = propagate();
            if (confl != kNoReason) {
                if (!handle_conflict(confl))
                    return finish(SolveStatus::Unsat);
                if (opts_.max_conflicts && stats_.conflicts >= opts_.max_conflicts) {
                    result.limit_reason = "conflict limit reached";
                    return finish(SolveStatus::Limit);
                }
                continue;
            }
            if (conflicts_since_restart_ >= uint64_t(luby(2, restart_count_) * 100)) {
                conflicts_since_restart_ = 0;
                restart_count_++;
                stats_.restarts++;
                backtrack(0);
                continue;
            }
            if (stats_.conflicts >= next_reduce_) {
                next_reduce_ = stats_.conflicts + 2000 + reduce_increment_ * stats_.reductions;
                reduce_db();
            }
            if (!decide()) {
                result.model.assign(size_t(f_.num_vars) + 1, false);
                for (Var v = 1; v <= f_.num_vars; v++)
                    result.model[v] = trail_.value(v) > 0;
                if (!evaluate(f_, result.model))
                    throw std::logic_error("internal error: model does not satisfy the formula");
                return finish(SolveStatus::Sat);
            }
        }
    } catch (const Refuted&) {
        return finish(SolveStatus::Unsat);
    } catch (const TimeLimitExceeded&) {
        result.limit_reason = "time limit exceeded";
    } catch (const lrat::ProofLimitExceeded& e) {
        result.limit_reason = e.what();
    } catch (const bdd::CapacityExceeded& e) {
        result.limit_reason = e.what();
    }
    return finish(SolveStatus::Limit);
}

}  // namespace

SolveResult solve(const CnfFormula& f, const SolverOptions& opts, lrat::ProofSink* proof) {
    Solver s(f, opts, proof);
    return s.run();
}

}  // namespace xorcert
