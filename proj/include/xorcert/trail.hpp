// Assignment trail shared by the clausal and parity propagators.

#pragma once

#include <cstdint>
#include <vector>

#include "xorcert/formula.hpp"

namespace xorcert {

class Trail {
public:
    explicit Trail(Var num_vars)
        : value_(size_t(num_vars) + 1, 0), level_(size_t(num_vars) + 1, 0),
          position_(size_t(num_vars) + 1, 0) {}

    Var num_vars() const { return Var(value_.size() - 1); }

    // 1 true, -1 false, 0 unassigned
    int8_t value(Var v) const { return value_[v]; }
    int8_t value(Lit l) const {
        int8_t v = value_[l.var()];
        return l.phase() ? v : int8_t(-v);
    }
    bool assigned(Var v) const { return value_[v] != 0; }
    uint32_t level(Var v) const { return level_[v]; }
    // index of v's assignment in the trail
    size_t position(Var v) const { return position_[v]; }

    uint32_t decision_level() const { return uint32_t(level_start_.size()); }
    void new_level() { level_start_.push_back(lits_.size()); }

    void assign(Lit l) {
        value_[l.var()] = l.phase() ? 1 : -1;
        level_[l.var()] = decision_level();
        position_[l.var()] = lits_.size();
        lits_.push_back(l);
    }

    // Unassigns every literal above the given level, newest first.
    template <typename OnUnassign>
    void backtrack(uint32_t level, OnUnassign&& on_unassign) {
        if (level >= decision_level())
            return;
        size_t keep = level_start_[level];
        while (lits_.size() > keep) {
            Lit l = lits_.back();
            lits_.pop_back();
            value_[l.var()] = 0;
            on_unassign(l);
        }
        level_start_.resize(level);
    }
    void backtrack(uint32_t level) {
        backtrack(level, [](Lit) {});
    }

    size_t size() const { return lits_.size(); }
    Lit operator[](size_t i) const { return lits_[i]; }
    const std::vector<Lit>& lits() const { return lits_; }

private:
    std::vector<int8_t> value_;
    std::vector<uint32_t> level_;
    std::vector<size_t> position_;
    std::vector<Lit> lits_;
    std::vector<size_t> level_start_;
};

}  // namespace xorcert
