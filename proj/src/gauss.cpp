#include "xorcert/gauss.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace xorcert::gj {

size_t BitVector::find_outside(const BitVector& mask, size_t from) const {
    for (size_t w = from >> 6; w < words_.size(); w++) {
        uint64_t bits = words_[w] & ~mask.words_[w];
        if (w == (from >> 6))
            bits &= ~uint64_t(0) << (from & 63);
        if (bits)
            return std::min(bits_, w * 64 + size_t(std::countr_zero(bits)));
    }
    return bits_;
}

std::vector<uint32_t> BitVector::ones() const {
    std::vector<uint32_t> out;
    for (size_t w = 0; w < words_.size(); w++) {
        uint64_t bits = words_[w];
        while (bits) {
            out.push_back(uint32_t(w * 64 + size_t(std::countr_zero(bits))));
            bits &= bits - 1;
        }
    }
    return out;
}

std::string BitVector::to_string() const {
    std::string s(bits_, '0');
    for (size_t i = 0; i < bits_; i++)
        if (get(i))
            s[i] = '1';
    return s;
}

ParityConstraint ParityMatrix::row_constraint(size_t r) const {
    ParityConstraint c;
    for (uint32_t col : rows[r].ones())
        c.vars.push_back(column_var[col]);
    c.phase = phase[r];
    return c;
}

GaussJordan::GaussJordan(const std::vector<ParityConstraint>& constraints)
    : initial_(constraints) {
    for (const auto& c : constraints)
        m_.column_var.insert(m_.column_var.end(), c.vars.begin(), c.vars.end());
    std::sort(m_.column_var.begin(), m_.column_var.end());
    m_.column_var.erase(std::unique(m_.column_var.begin(), m_.column_var.end()),
                        m_.column_var.end());
    for (uint32_t col = 0; col < m_.column_var.size(); col++)
        m_.var_column.emplace(m_.column_var[col], col);

    const size_t n = m_.num_columns();
    const size_t m = constraints.size();
    for (size_t i = 0; i < m; i++) {
        BitVector row(n);
        for (Var v : constraints[i].vars)
            row.flip(m_.var_column.at(v));
        m_.rows.push_back(std::move(row));
        m_.phase.push_back(constraints[i].phase);
        BitVector shadow(m);
        shadow.set(i);
        s_.rows.push_back(std::move(shadow));
    }
    version_.assign(m, 0);
    basic_.assign(m, kNone);
    basic_row_.assign(n, kNone);
    watch_.assign(m, kNone);
    watchers_.resize(n);
    assigned_ = BitVector(n);
    is_pending_.assign(m, 0);
}

std::optional<uint32_t> GaussJordan::column_of(Var v) const {
    auto it = m_.var_column.find(v);
    if (it == m_.var_column.end())
        return std::nullopt;
    return it->second;
}

void GaussJordan::sum_rows(uint32_t dst, uint32_t src) {
    if (dst == src)
        throw std::logic_error("a row is never summed into itself");
    m_.rows[dst] ^= m_.rows[src];
    m_.phase[dst] = m_.phase[dst] != m_.phase[src];
    s_.rows[dst] ^= s_.rows[src];
    version_[dst]++;
    stats_.row_sums++;
    if (!is_pending_[dst]) {
        is_pending_[dst] = 1;
        pending_.push_back(dst);
    }
}

void GaussJordan::make_basic(uint32_t row, uint32_t col) {
    if (basic_[row] != kNone)
        basic_row_[basic_[row]] = kNone;
    if (basic_row_[col] != kNone)
        basic_[basic_row_[col]] = kNone;
    basic_[row] = col;
    basic_row_[col] = row;
    if (watch_[row] == col)
        watch_[row] = kNone;
}

void GaussJordan::eliminate_column(uint32_t pivot_row, uint32_t col) {
    if (!m_.rows[pivot_row].get(col))
        throw std::invalid_argument("eliminate_column: pivot entry is zero");
    for (uint32_t r = 0; r < m_.num_rows(); r++)
        if (r != pivot_row && m_.rows[r].get(col))
            sum_rows(r, pivot_row);
    make_basic(pivot_row, col);
    stats_.pivots++;
}

void GaussJordan::swap_rows(uint32_t a, uint32_t b) {
    if (a == b)
        return;
    std::swap(m_.rows[a], m_.rows[b]);
    bool pa = m_.phase[a];
    m_.phase[a] = m_.phase[b];
    m_.phase[b] = pa;
    std::swap(s_.rows[a], s_.rows[b]);
    std::swap(basic_[a], basic_[b]);
    if (basic_[a] != kNone)
        basic_row_[basic_[a]] = a;
    if (basic_[b] != kNone)
        basic_row_[basic_[b]] = b;
    version_[a]++;
    version_[b]++;
    needs_repair_ = true;
}

void GaussJordan::on_assigned(uint32_t col) {
    assigned_.set(col);
    auto mark = [&](uint32_t r) {
        if (!is_pending_[r]) {
            is_pending_[r] = 1;
            pending_.push_back(r);
        }
    };
    if (uint32_t r = basic_row_[col]; r != kNone) {
        size_t c = m_.rows[r].find_outside(assigned_);
        if (c < m_.num_columns())
            eliminate_column(r, uint32_t(c));
        mark(r);
    }
    for (uint32_t r : watchers_[col])
        if (watch_[r] == col)
            mark(r);
    watchers_[col].clear();
}

void GaussJordan::repair() {
    stats_.repairs++;
    pending_.clear();
    std::fill(is_pending_.begin(), is_pending_.end(), 0);
    std::fill(watch_.begin(), watch_.end(), kNone);
    for (auto& w : watchers_)
        w.clear();
    for (uint32_t r = 0; r < m_.num_rows(); r++) {
        uint32_t b = basic_[r];
        if (b != kNone && !col_assigned(b))
            continue;
        size_t c = m_.rows[r].find_outside(assigned_);
        if (c < m_.num_columns())
            eliminate_column(r, uint32_t(c));
    }
    pending_.clear();
    for (uint32_t r = 0; r < m_.num_rows(); r++) {
        is_pending_[r] = 1;
        pending_.push_back(r);
    }
    // check rows in increasing order
    std::reverse(pending_.begin(), pending_.end());
    needs_repair_ = false;
}

ReasonRecord GaussJordan::make_record(uint32_t row, const Trail& trail, ReasonKind kind,
                                      Lit implied) const {
    ReasonRecord rec;
    rec.kind = kind;
    rec.row = row;
    rec.row_version = version_[row];
    rec.origin = s_.rows[row].ones();
    if (kind == ReasonKind::Propagation)
        rec.clause.push_back(implied);
    for (uint32_t col : m_.rows[row].ones()) {
        Var v = m_.column_var[col];
        if (trail.value(v) != 0)
            rec.clause.push_back(Lit(v, trail.value(v) < 0));
    }
    return rec;
}

bool GaussJordan::check_row(uint32_t r, const Trail& trail,
                            const std::function<void(ReasonRecord&&)>& on_imply,
                            std::optional<ReasonRecord>& conflict) {
    const BitVector& row = m_.rows[r];
    size_t open = row.count_outside(assigned_);
    if (open == 0) {
        watch_[r] = kNone;
        bool sum = false;
        for (uint32_t col : row.ones())
            sum ^= trail.value(m_.column_var[col]) > 0;
        if (sum != m_.phase[r]) {
            stats_.conflicts++;
            conflict = make_record(r, trail, ReasonKind::Conflict, Lit());
            return false;
        }
        return true;
    }
    if (basic_[r] == kNone || col_assigned(basic_[r]))
        eliminate_column(r, uint32_t(row.find_outside(assigned_)));
    const uint32_t b = basic_[r];
    if (open == 1) {
        watch_[r] = kNone;
        bool need = m_.phase[r];
        for (uint32_t col : row.ones())
            if (col != b)
                need ^= trail.value(m_.column_var[col]) > 0;
        stats_.propagations++;
        on_imply(make_record(r, trail, ReasonKind::Propagation, Lit(m_.column_var[b], need)));
        return true;
    }
    uint32_t w = watch_[r];
    if (w == kNone || w == b || col_assigned(w) || !row.get(w)) {
        size_t c = row.find_outside(assigned_);
        if (c == b)
            c = row.find_outside(assigned_, c + 1);
        w = uint32_t(c);
        watch_[r] = w;
        watchers_[w].push_back(r);
    }
    return true;
}

std::optional<ReasonRecord> GaussJordan::propagate(
    const Trail& trail, const std::function<void(ReasonRecord&&)>& on_imply) {
    if (needs_repair_) {
        assigned_ = BitVector(m_.num_columns());
        for (uint32_t col = 0; col < m_.num_columns(); col++)
            if (trail.assigned(m_.column_var[col]))
                assigned_.set(col);
        qhead_ = trail.size();
        repair();
    }
    std::optional<ReasonRecord> conflict;
    while (true) {
        while (qhead_ < trail.size()) {
            if (auto col = column_of(trail[qhead_].var()))
                on_assigned(*col);
            qhead_++;
        }
        if (pending_.empty())
            return std::nullopt;
        uint32_t r = pending_.back();
        pending_.pop_back();
        is_pending_[r] = 0;
        if (!check_row(r, trail, on_imply, conflict))
            return conflict;
    }
}

std::vector<ReasonRecord> GaussJordan::propagate(Trail& trail) {
    std::vector<ReasonRecord> out;
    auto conflict = propagate(trail, [&](ReasonRecord&& rec) {
        trail.assign(rec.clause.front());
        out.push_back(std::move(rec));
    });
    if (conflict)
        out.push_back(std::move(*conflict));
    return out;
}

void GaussJordan::dump(std::ostream& out) const {
    for (size_t r = 0; r < m_.num_rows(); r++) {
        out << '(' << m_.rows[r].to_string() << '|' << (m_.phase[r] ? 1 : 0) << ") ("
            << s_.rows[r].to_string() << ")\n";
    }
}

}  // namespace xorcert::gj
