// Hinted clausal proofs: LRAT text writer, reader and checker.
//
// Add line:    <id> <lit>* 0 <hint>* 0
// Delete line: <id> d <id>* 0
//
// Input clauses are implicitly numbered 1..C. A negative hint -j opens the
// RAT hint group for live clause j. An add step with no hints at all is an
// extension step: its first literal is the pivot, which must be a fresh
// variable (see Checker).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "xorcert/formula.hpp"

namespace xorcert::lrat {

using StepId = uint64_t;

struct AddStep {
    StepId id = 0;
    Clause clause;
    std::vector<int64_t> hints;
};

struct DeleteStep {
    StepId id = 0;
    std::vector<StepId> ids;
};

using ProofStep = std::variant<AddStep, DeleteStep>;

void write_step(std::ostream& out, const ProofStep& step);
std::string format_step(const ProofStep& step);

class ProofSink {
public:
    virtual ~ProofSink() = default;
    virtual void emit(const ProofStep& step) = 0;
    virtual void flush() {}
};

class TextSink : public ProofSink {
public:
    explicit TextSink(std::ostream& out) : out_(out) {}
    void emit(const ProofStep& step) override;
    void flush() override;

private:
    std::ostream& out_;
    std::string buffer_;
};

class MemorySink : public ProofSink {
public:
    void emit(const ProofStep& step) override { steps.push_back(step); }
    std::vector<ProofStep> steps;
};

class NullSink : public ProofSink {
public:
    void emit(const ProofStep&) override {}
};

class ProofLimitExceeded : public std::runtime_error {
public:
    explicit ProofLimitExceeded(uint64_t limit)
        : std::runtime_error("proof size limit of " + std::to_string(limit) + " clauses exceeded") {}
};

constexpr uint64_t kDefaultMaxProofClauses = uint64_t(1) << 30;

struct ProofCounters {
    uint64_t added = 0;
    uint64_t extension = 0;  // subset of added
    uint64_t deleted = 0;
};

// Assigns step ids, enforces the clause budget and batches deletions.
// Nothing is emitted after the empty clause.
class ProofWriter {
public:
    ProofWriter(ProofSink& sink, uint64_t num_input_clauses,
                uint64_t max_added = kDefaultMaxProofClauses);
    ~ProofWriter();

    ProofWriter(const ProofWriter&) = delete;
    ProofWriter& operator=(const ProofWriter&) = delete;

    StepId add_rup(const Clause& clause, std::span<const StepId> hints);
    // Definition clause whose first literal is a fresh pivot.
    StepId add_extension(const Clause& clause);
    void remove(StepId id);
    void flush();

    StepId last_id() const { return next_id_ - 1; }
    bool refuted() const { return empty_clause_id_ != 0; }
    StepId empty_clause_id() const { return empty_clause_id_; }
    const ProofCounters& counters() const { return counters_; }
    uint64_t max_added() const { return max_added_; }

private:
    StepId emit_add(const Clause& clause, std::span<const StepId> hints);
    void flush_deletions();

    ProofSink& sink_;
    StepId next_id_;
    uint64_t max_added_;
    StepId empty_clause_id_ = 0;
    std::vector<StepId> pending_deletions_;
    ProofCounters counters_;
};

// Streaming parser; throws ParseError with the offending line.
class LratReader {
public:
    explicit LratReader(std::istream& in) : in_(in) {}
    std::optional<ProofStep> next();
    size_t line() const { return line_; }

private:
    std::istream& in_;
    size_t line_ = 0;
    std::string buf_;
};

std::vector<ProofStep> parse_lrat(std::istream& in);
std::vector<ProofStep> parse_lrat(const std::string& text);

enum class CheckMode {
    Refutation,  // the proof must end in a verified empty clause
    Derivation,  // every step must verify; no empty clause required
};

struct CheckStats {
    uint64_t steps = 0;
    uint64_t rup_steps = 0;
    uint64_t extension_steps = 0;
    uint64_t rat_steps = 0;
    uint64_t deletions = 0;
    // literal visits while checking hinted steps; linear in hint size
    uint64_t hint_literal_visits = 0;
    uint64_t total_hints = 0;
};

struct CheckResult {
    bool verified = false;
    StepId failed_step = 0;
    std::string reason;
    CheckStats stats;

    explicit operator bool() const { return verified; }
};

// Incremental LRAT checker over a fixed input formula.
class Checker {
public:
    explicit Checker(const CnfFormula& input);

    // Returns an error message when the step is rejected.
    std::optional<std::string> step(const ProofStep& s);
    bool refuted() const { return refuted_; }
    const CheckStats& stats() const { return stats_; }

private:
    using Internal = int32_t;  // 2 * dense var index + sign

    struct Stored {
        uint32_t offset = 0;
        uint32_t size = 0;
    };

    enum class VarState : uint8_t { Unused, Defining, Closed };

    uint32_t dense_var(Var v);
    Internal encode(Lit l);
    std::optional<std::string> add(const AddStep& s);
    std::optional<std::string> remove(const DeleteStep& s);
    std::optional<std::string> check_rup_chain(std::span<const int64_t> hints, bool& conflict);
    std::optional<std::string> check_extension(std::span<const Internal> lits);
    std::optional<std::string> check_rat(const AddStep& s, std::span<const Internal> lits);
    std::span<const Internal> clause(const Stored& st) const {
        return {arena_.data() + st.offset, st.size};
    }
    void assign(Internal lit);
    void reset_assignment();
    int8_t value(Internal lit) const;
    void store(StepId id, std::span<const Internal> lits);

    std::unordered_map<Var, uint32_t> var_index_;
    std::vector<VarState> var_state_;
    std::vector<int8_t> values_;  // per internal literal: 1 true, 0 unassigned
    std::vector<Internal> assigned_;
    std::vector<std::vector<StepId>> definitions_;  // per dense var, while Defining
    std::vector<Internal> arena_;
    std::unordered_map<StepId, Stored> live_;
    Var input_vars_;
    StepId last_add_ = 0;
    bool refuted_ = false;
    CheckStats stats_;
};

CheckResult check(const CnfFormula& input, std::istream& proof, CheckMode mode);
CheckResult check(const CnfFormula& input, std::span<const ProofStep> proof, CheckMode mode);

}  // namespace xorcert::lrat
