#include "xorcert/lrat.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace xorcert::lrat {

namespace {

void append_int(std::string& out, int64_t v) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

void append_step(std::string& out, const ProofStep& step) {
    if (const auto* add = std::get_if<AddStep>(&step)) {
        append_int(out, int64_t(add->id));
        out += ' ';
        for (Lit l : add->clause) {
            append_int(out, l.dimacs());
            out += ' ';
        }
        out += '0';
        for (int64_t h : add->hints) {
            out += ' ';
            append_int(out, h);
        }
        out += " 0\n";
    } else {
        const auto& del = std::get<DeleteStep>(step);
        append_int(out, int64_t(del.id));
        out += " d";
        for (StepId id : del.ids) {
            out += ' ';
            append_int(out, int64_t(id));
        }
        out += " 0\n";
    }
}

}  // namespace

std::string format_step(const ProofStep& step) {
    std::string out;
    append_step(out, step);
    return out;
}

void write_step(std::ostream& out, const ProofStep& step) {
    out << format_step(step);
}

void TextSink::emit(const ProofStep& step) {
    append_step(buffer_, step);
    if (buffer_.size() > (1u << 16)) {
        out_.write(buffer_.data(), std::streamsize(buffer_.size()));
        buffer_.clear();
    }
}

void TextSink::flush() {
    out_.write(buffer_.data(), std::streamsize(buffer_.size()));
    buffer_.clear();
    out_.flush();
}

// ---------------------------------------------------------------------------

ProofWriter::ProofWriter(ProofSink& sink, uint64_t num_input_clauses, uint64_t max_added)
    : sink_(sink), next_id_(num_input_clauses + 1), max_added_(max_added) {}

ProofWriter::~ProofWriter() {
    try {
        flush();
    } catch (...) {
    }
}

StepId ProofWriter::emit_add(const Clause& clause, std::span<const StepId> hints) {
    if (refuted())
        return empty_clause_id_;
    if (counters_.added >= max_added_) {
        flush();
        throw ProofLimitExceeded(max_added_);
    }
    if (clause.empty())
        flush_deletions();
    AddStep step;
    step.id = next_id_++;
    step.clause = clause;
    step.hints.assign(hints.begin(), hints.end());
    sink_.emit(step);
    counters_.added++;
    if (clause.empty())
        empty_clause_id_ = step.id;
    return step.id;
}

StepId ProofWriter::add_rup(const Clause& clause, std::span<const StepId> hints) {
    return emit_add(clause, hints);
}

StepId ProofWriter::add_extension(const Clause& clause) {
    StepId id = emit_add(clause, {});
    if (!refuted())
        counters_.extension++;
    return id;
}

void ProofWriter::remove(StepId id) {
    if (refuted())
        return;
    pending_deletions_.push_back(id);
    if (pending_deletions_.size() >= 4096)
        flush_deletions();
}

void ProofWriter::flush_deletions() {
    if (pending_deletions_.empty())
        return;
    DeleteStep del;
    del.id = last_id();
    del.ids = std::move(pending_deletions_);
    pending_deletions_.clear();
    counters_.deleted += del.ids.size();
    sink_.emit(del);
}

void ProofWriter::flush() {
    flush_deletions();
    sink_.flush();
}

// ---------------------------------------------------------------------------

namespace {

bool read_int(std::string_view& rest, int64_t& value) {
    size_t i = 0;
    while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t' || rest[i] == '\r'))
        i++;
    rest = rest.substr(i);
    if (rest.empty())
        return false;
    const char* first = rest.data();
    const char* last = rest.data() + rest.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first)
        return false;
    if (ptr != last && *ptr != ' ' && *ptr != '\t' && *ptr != '\r')
        return false;
    rest = rest.substr(size_t(ptr - first));
    return true;
}

bool at_end(std::string_view rest) {
    return rest.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

std::optional<ProofStep> LratReader::next() {
    while (std::getline(in_, buf_)) {
        line_++;
        std::string_view rest = buf_;
        size_t first = rest.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || rest[first] == 'c')
            continue;
        int64_t id;
        if (!read_int(rest, id) || id <= 0)
            throw ParseError(line_, "expected positive step id");
        size_t pos = rest.find_first_not_of(" \t\r");
        if (pos != std::string_view::npos && rest[pos] == 'd') {
            rest = rest.substr(pos + 1);
            DeleteStep del;
            del.id = StepId(id);
            int64_t v;
            while (true) {
                if (!read_int(rest, v) || v < 0)
                    throw ParseError(line_, "malformed deletion list");
                if (v == 0)
                    break;
                del.ids.push_back(StepId(v));
            }
            if (!at_end(rest))
                throw ParseError(line_, "trailing data after deletion");
            return del;
        }
        AddStep add;
        add.id = StepId(id);
        int64_t v;
        while (true) {
            if (!read_int(rest, v))
                throw ParseError(line_, "malformed clause literals");
            if (v == 0)
                break;
            add.clause.push_back(Lit::from_dimacs(v));
        }
        while (true) {
            if (!read_int(rest, v))
                throw ParseError(line_, "malformed hint list");
            if (v == 0)
                break;
            add.hints.push_back(v);
        }
        if (!at_end(rest))
            throw ParseError(line_, "trailing data after hints");
        return add;
    }
    return std::nullopt;
}

std::vector<ProofStep> parse_lrat(std::istream& in) {
    LratReader reader(in);
    std::vector<ProofStep> steps;
    while (auto s = reader.next())
        steps.push_back(std::move(*s));
    return steps;
}

std::vector<ProofStep> parse_lrat(const std::string& text) {
    std::istringstream in(text);
    return parse_lrat(in);
}

// ---------------------------------------------------------------------------
// Checker

Checker::Checker(const CnfFormula& input) : input_vars_(input.num_vars) {
    for (size_t i = 0; i < input.clauses.size(); i++) {
        std::vector<Internal> lits;
        for (Lit l : input.clauses[i]) {
            lits.push_back(encode(l));
            var_state_[size_t(lits.back() >> 1)] = VarState::Closed;
        }
        store(StepId(i + 1), lits);
    }
    last_add_ = input.clauses.size();
}

uint32_t Checker::dense_var(Var v) {
    auto [it, inserted] = var_index_.try_emplace(v, uint32_t(var_state_.size()));
    if (inserted) {
        // variables declared by the input are never fresh
        var_state_.push_back(v <= input_vars_ ? VarState::Closed : VarState::Unused);
        definitions_.emplace_back();
        values_.push_back(0);
        values_.push_back(0);
    }
    return it->second;
}

Checker::Internal Checker::encode(Lit l) {
    return Internal(dense_var(l.var()) * 2 + (l.phase() ? 0 : 1));
}

int8_t Checker::value(Internal lit) const {
    if (values_[size_t(lit)])
        return 1;
    if (values_[size_t(lit ^ 1)])
        return -1;
    return 0;
}

void Checker::assign(Internal lit) {
    values_[size_t(lit)] = 1;
    assigned_.push_back(lit);
}

void Checker::reset_assignment() {
    for (Internal l : assigned_)
        values_[size_t(l)] = 0;
    assigned_.clear();
}

void Checker::store(StepId id, std::span<const Internal> lits) {
    Stored st{uint32_t(arena_.size()), uint32_t(lits.size())};
    arena_.insert(arena_.end(), lits.begin(), lits.end());
    live_[id] = st;
}

std::optional<std::string> Checker::step(const ProofStep& s) {
    stats_.steps++;
    if (const auto* add_step = std::get_if<AddStep>(&s))
        return add(*add_step);
    return remove(std::get<DeleteStep>(s));
}

std::optional<std::string> Checker::remove(const DeleteStep& s) {
    for (StepId id : s.ids) {
        auto it = live_.find(id);
        if (it == live_.end())
            return "deletion of clause " + std::to_string(id) + " which is not live";
        live_.erase(it);
        stats_.deletions++;
    }
    // Reclaim arena space once dead literals dominate.
    if (arena_.size() > (1u << 20)) {
        size_t live_size = 0;
        for (const auto& [id, st] : live_)
            live_size += st.size;
        if (live_size * 2 < arena_.size()) {
            std::vector<Internal> compacted;
            compacted.reserve(live_size);
            for (auto& [id, st] : live_) {
                uint32_t off = uint32_t(compacted.size());
                compacted.insert(compacted.end(), arena_.begin() + st.offset,
                                 arena_.begin() + st.offset + st.size);
                st.offset = off;
            }
            arena_ = std::move(compacted);
        }
    }
    return std::nullopt;
}

std::optional<std::string> Checker::check_rup_chain(std::span<const int64_t> hints,
                                                    bool& conflict) {
    conflict = false;
    for (int64_t h : hints) {
        auto it = live_.find(StepId(h));
        if (it == live_.end())
            return "hint " + std::to_string(h) + " is not a live clause";
        stats_.total_hints++;
        Internal unit = -1;
        int unassigned = 0;
        for (Internal l : clause(it->second)) {
            stats_.hint_literal_visits++;
            int8_t v = value(l);
            if (v > 0)
                return "hint " + std::to_string(h) + " is satisfied, not unit";
            if (v == 0 && l != unit) {
                unit = l;
                unassigned++;
            }
        }
        if (unassigned == 0) {
            conflict = true;
            return std::nullopt;
        }
        if (unassigned > 1)
            return "hint " + std::to_string(h) + " is not unit";
        assign(unit);
    }
    return std::nullopt;
}

std::optional<std::string> Checker::check_extension(std::span<const Internal> lits) {
    const Internal pivot = lits[0];
    const uint32_t pv = uint32_t(pivot >> 1);
    if (var_state_[pv] == VarState::Closed)
        return "extension pivot is not a fresh variable";
    if (var_state_[pv] == VarState::Unused)
        return std::nullopt;
    // The pivot so far occurs only in its own definition clauses; every
    // resolvent against a clause containing the negated pivot must be a
    // tautology.
    for (StepId id : definitions_[pv]) {
        auto it = live_.find(id);
        if (it == live_.end())
            continue;
        auto other = clause(it->second);
        if (std::find(other.begin(), other.end(), pivot ^ 1) == other.end())
            continue;
        bool tautology = false;
        for (size_t i = 1; i < lits.size() && !tautology; i++)
            for (Internal o : other)
                if (o == (lits[i] ^ 1) && o != (pivot ^ 1)) {
                    tautology = true;
                    break;
                }
        if (!tautology)
            return "resolvent with definition clause " + std::to_string(id) +
                   " on fresh pivot is not a tautology";
    }
    return std::nullopt;
}

std::optional<std::string> Checker::check_rat(const AddStep& s, std::span<const Internal> lits) {
    if (lits.empty())
        return "RAT step without pivot literal";
    const Internal pivot = lits[0];
    size_t i = 0;
    std::vector<int64_t> prefix;
    while (i < s.hints.size() && s.hints[i] > 0)
        prefix.push_back(s.hints[i++]);
    std::unordered_map<StepId, std::vector<int64_t>> groups;
    while (i < s.hints.size()) {
        StepId target = StepId(-s.hints[i++]);
        auto& group = groups[target];
        while (i < s.hints.size() && s.hints[i] > 0)
            group.push_back(s.hints[i++]);
    }
    bool conflict = false;
    if (auto err = check_rup_chain(prefix, conflict))
        return err;
    if (conflict)
        return std::nullopt;
    const size_t saved = assigned_.size();
    for (const auto& [id, st] : live_) {
        auto other = clause(st);
        if (std::find(other.begin(), other.end(), pivot ^ 1) == other.end())
            continue;
        bool blocked = false;
        for (Internal o : other)
            if (o != (pivot ^ 1) && value(o) > 0)
                blocked = true;
        if (blocked)
            continue;
        auto g = groups.find(id);
        if (g == groups.end())
            return "missing RAT hint group for clause " + std::to_string(id);
        for (Internal o : other)
            if (o != (pivot ^ 1) && value(o) == 0)
                assign(o ^ 1);
        bool group_conflict = false;
        if (auto err = check_rup_chain(g->second, group_conflict))
            return err;
        if (!group_conflict)
            return "RAT hint group for clause " + std::to_string(id) + " yields no conflict";
        while (assigned_.size() > saved) {
            values_[size_t(assigned_.back())] = 0;
            assigned_.pop_back();
        }
    }
    return std::nullopt;
}

std::optional<std::string> Checker::add(const AddStep& s) {
    if (refuted_)
        return "clause added after the empty clause";
    if (s.id <= last_add_)
        return "step id " + std::to_string(s.id) + " is not increasing";
    if (live_.contains(s.id))
        return "step id " + std::to_string(s.id) + " reuses a live id";

    std::vector<Internal> lits;
    lits.reserve(s.clause.size());
    for (Lit l : s.clause) {
        if (l.dimacs() == 0)
            return "zero literal in clause";
        lits.push_back(encode(l));
    }

    bool extension = s.hints.empty() && !lits.empty();
    std::optional<std::string> err;
    if (extension) {
        err = check_extension(lits);
        if (!err)
            stats_.extension_steps++;
    } else {
        bool tautology = false;
        for (Internal l : lits) {
            if (value(l) > 0) {
                tautology = true;
                break;
            }
            if (value(l) == 0)
                assign(l ^ 1);
        }
        bool rat = std::any_of(s.hints.begin(), s.hints.end(), [](int64_t h) { return h < 0; });
        if (!tautology) {
            if (rat) {
                err = check_rat(s, lits);
                if (!err)
                    stats_.rat_steps++;
            } else {
                bool conflict = false;
                err = check_rup_chain(s.hints, conflict);
                if (!err && !conflict)
                    err = "hints do not yield a conflict";
                if (!err)
                    stats_.rup_steps++;
            }
        }
        reset_assignment();
    }
    if (err)
        return err;

    if (extension) {
        uint32_t pv = uint32_t(lits[0] >> 1);
        var_state_[pv] = VarState::Defining;
        definitions_[pv].push_back(s.id);
        for (size_t i = 1; i < lits.size(); i++) {
            uint32_t v = uint32_t(lits[i] >> 1);
            if (v != pv) {
                var_state_[v] = VarState::Closed;
                definitions_[v].clear();
            }
        }
    } else {
        for (Internal l : lits) {
            var_state_[size_t(l >> 1)] = VarState::Closed;
            definitions_[size_t(l >> 1)].clear();
        }
    }
    store(s.id, lits);
    last_add_ = s.id;
    if (lits.empty())
        refuted_ = true;
    return std::nullopt;
}

namespace {

template <typename Next>
CheckResult run_checker(const CnfFormula& input, Next&& next, CheckMode mode) {
    CheckResult result;
    Checker checker(input);
    StepId last = 0;
    try {
        while (auto s = next()) {
            last = std::visit([](const auto& st) { return st.id; }, *s);
            if (auto err = checker.step(*s)) {
                result.failed_step = last;
                result.reason = *err;
                result.stats = checker.stats();
                return result;
            }
        }
    } catch (const ParseError& e) {
        result.failed_step = last;
        result.reason = std::string("parse error: ") + e.what();
        result.stats = checker.stats();
        return result;
    }
    result.stats = checker.stats();
    if (mode == CheckMode::Refutation && !checker.refuted()) {
        result.failed_step = last;
        result.reason = "proof does not derive the empty clause";
        return result;
    }
    result.verified = true;
    return result;
}

}  // namespace

CheckResult check(const CnfFormula& input, std::istream& proof, CheckMode mode) {
    LratReader reader(proof);
    return run_checker(input, [&] { return reader.next(); }, mode);
}

CheckResult check(const CnfFormula& input, std::span<const ProofStep> proof, CheckMode mode) {
    size_t i = 0;
    return run_checker(
        input,
        [&]() -> std::optional<ProofStep> {
            if (i == proof.size())
                return std::nullopt;
            return proof[i++];
        },
        mode);
}

}  // namespace xorcert::lrat
