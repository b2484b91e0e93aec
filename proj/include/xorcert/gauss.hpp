// Incremental Gauss-Jordan elimination over GF(2) with origin tracking.
//
// Row i of the parity matrix always equals the sum of the initial
// constraints selected by row i of the shadow matrix. Every row with an
// unassigned variable keeps one unassigned basic column, present in no
// other row, so a row with one unassigned column is unit and a row with
// none is either satisfied or in conflict.

#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xorcert/formula.hpp"
#include "xorcert/trail.hpp"

namespace xorcert::gj {

class BitVector {
public:
    BitVector() = default;
    explicit BitVector(size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    size_t size() const { return bits_; }
    bool get(size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
    void set(size_t i) { words_[i >> 6] |= uint64_t(1) << (i & 63); }
    void reset(size_t i) { words_[i >> 6] &= ~(uint64_t(1) << (i & 63)); }
    void flip(size_t i) { words_[i >> 6] ^= uint64_t(1) << (i & 63); }

    BitVector& operator^=(const BitVector& o) {
        for (size_t w = 0; w < words_.size(); w++)
            words_[w] ^= o.words_[w];
        return *this;
    }
    friend bool operator==(const BitVector&, const BitVector&) = default;

    size_t count() const {
        size_t n = 0;
        for (uint64_t w : words_)
            n += size_t(std::popcount(w));
        return n;
    }
    bool none() const {
        for (uint64_t w : words_)
            if (w)
                return false;
        return true;
    }
    // Set bits of this & ~mask.
    size_t count_outside(const BitVector& mask) const {
        size_t n = 0;
        for (size_t w = 0; w < words_.size(); w++)
            n += size_t(std::popcount(words_[w] & ~mask.words_[w]));
        return n;
    }
    // First set bit of this & ~mask at or after from, or size().
    size_t find_outside(const BitVector& mask, size_t from = 0) const;
    std::vector<uint32_t> ones() const;
    // "110" style, bit 0 first
    std::string to_string() const;

    const std::vector<uint64_t>& words() const { return words_; }

private:
    size_t bits_ = 0;
    std::vector<uint64_t> words_;
};

// Rows over the constraint variables with one phase bit each.
struct ParityMatrix {
    std::vector<Var> column_var;                 // column -> variable, increasing
    std::unordered_map<Var, uint32_t> var_column;
    std::vector<BitVector> rows;
    std::vector<bool> phase;

    size_t num_rows() const { return rows.size(); }
    size_t num_columns() const { return column_var.size(); }
    ParityConstraint row_constraint(size_t r) const;
};

// Row i selects the initial constraints summed into parity row i.
struct ShadowMatrix {
    std::vector<BitVector> rows;
};

enum class ReasonKind { Conflict, Propagation };

struct ReasonRecord {
    // propagation: the implied literal first, then complements of trail
    // literals; conflict: complements of trail literals only
    Clause clause;
    std::vector<uint32_t> origin;  // 0-based indices of initial constraints
    ReasonKind kind = ReasonKind::Propagation;
    uint32_t row = 0;
    uint64_t row_version = 0;  // changes whenever the row is modified
};

struct GaussStats {
    uint64_t row_sums = 0;
    uint64_t pivots = 0;
    uint64_t propagations = 0;
    uint64_t conflicts = 0;
    uint64_t repairs = 0;
};

class GaussJordan {
public:
    // Rows mirror the constraints in order; the shadow matrix is the identity.
    explicit GaussJordan(const std::vector<ParityConstraint>& constraints);

    const ParityMatrix& matrix() const { return m_; }
    const ShadowMatrix& shadow() const { return s_; }
    const std::vector<ParityConstraint>& initial() const { return initial_; }
    size_t num_rows() const { return m_.num_rows(); }
    std::optional<uint32_t> column_of(Var v) const;

    // Sums pivot_row into every other row having a 1 in col and makes col
    // the basic column of pivot_row.
    void eliminate_column(uint32_t pivot_row, uint32_t col);
    void swap_rows(uint32_t a, uint32_t b);
    std::vector<uint32_t> origin_of(uint32_t row) const { return s_.rows[row].ones(); }
    uint64_t row_version(uint32_t row) const { return version_[row]; }

    // Processes trail literals not yet seen. Each implied literal is handed
    // to on_imply, which must assign it on the trail before returning.
    // Returns the first conflict found.
    std::optional<ReasonRecord> propagate(const Trail& trail,
                                          const std::function<void(ReasonRecord&&)>& on_imply);
    // Convenience form: assigns implied literals itself and returns every
    // record, a conflict last.
    std::vector<ReasonRecord> propagate(Trail& trail);

    // Call after the trail shrank; rows are repaired on the next propagate.
    void backtrack() { needs_repair_ = true; }

    const GaussStats& stats() const { return stats_; }
    // Matrix and shadow rows side by side, one row per line.
    void dump(std::ostream& out) const;

private:
    static constexpr uint32_t kNone = UINT32_MAX;

    void sum_rows(uint32_t dst, uint32_t src);
    void make_basic(uint32_t row, uint32_t col);
    bool col_assigned(uint32_t col) const { return assigned_.get(col); }
    void on_assigned(uint32_t col);
    void repair();
    // Returns false when the row produced a conflict.
    bool check_row(uint32_t row, const Trail& trail,
                   const std::function<void(ReasonRecord&&)>& on_imply,
                   std::optional<ReasonRecord>& conflict);
    ReasonRecord make_record(uint32_t row, const Trail& trail, ReasonKind kind, Lit implied) const;

    std::vector<ParityConstraint> initial_;
    ParityMatrix m_;
    ShadowMatrix s_;
    std::vector<uint64_t> version_;
    std::vector<uint32_t> basic_;     // row -> basic column or kNone
    std::vector<uint32_t> basic_row_; // column -> row or kNone
    std::vector<uint32_t> watch_;     // row -> watched non-basic column or kNone
    std::vector<std::vector<uint32_t>> watchers_;  // column -> rows (lazy)
    BitVector assigned_;              // per column
    std::vector<uint32_t> pending_;   // rows to check
    std::vector<uint8_t> is_pending_;
    size_t qhead_ = 0;
    bool needs_repair_ = true;
    GaussStats stats_;
};

}  // namespace xorcert::gj
