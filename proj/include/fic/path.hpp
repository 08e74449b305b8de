#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fic/grid.hpp"

namespace fic {

// A cadlag path sampled on a uniform grid.  values[k] is the post-jump state
// at t_k; the jump ledger says whether the path jumped at t_k, in which case
// the left limit at t_k is values[k-1].  Between grid points the path is read
// as constant, so the ledger is exactly the extra information that
// distinguishes X_{t-} from X_t at a grid time.
class GridPath {
  public:
    GridPath(TimeGrid grid, std::size_t dim, std::vector<double> values,
             std::vector<unsigned char> jump_flags)
        : grid_(grid), dim_(dim), values_(std::move(values)), jumps_(std::move(jump_flags)) {
        if (dim_ == 0) throw std::invalid_argument("GridPath: dim must be positive");
        const std::size_t n = grid_.n_steps + 1;
        if (values_.size() != n * dim_) throw std::invalid_argument("GridPath: bad values size");
        if (jumps_.size() != n) throw std::invalid_argument("GridPath: bad jump ledger size");
        if (jumps_[0]) throw std::invalid_argument("GridPath: no jump at time zero");
    }

    static GridPath constant(TimeGrid grid, std::size_t dim, const std::vector<double>& x0) {
        std::vector<double> v((grid.n_steps + 1) * dim);
        for (std::size_t k = 0; k <= grid.n_steps; ++k)
            for (std::size_t i = 0; i < dim; ++i) v[k * dim + i] = x0[i];
        return GridPath(grid, dim, std::move(v), std::vector<unsigned char>(grid.n_steps + 1, 0));
    }

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }
    std::size_t n_steps() const { return grid_.n_steps; }

    double value(std::size_t k, std::size_t i) const { return values_[k * dim_ + i]; }
    double value1(std::size_t k) const { return values_[k]; }
    bool has_jump(std::size_t k) const { return jumps_[k] != 0; }

    double left_limit(std::size_t k, std::size_t i) const {
        return (jumps_[k] && k > 0) ? values_[(k - 1) * dim_ + i] : values_[k * dim_ + i];
    }
    double left_limit1(std::size_t k) const { return left_limit(k, 0); }

    const std::vector<double>& values() const { return values_; }
    const std::vector<unsigned char>& jump_ledger() const { return jumps_; }

    bool operator==(const GridPath& o) const {
        return grid_ == o.grid_ && dim_ == o.dim_ && values_ == o.values_ && jumps_ == o.jumps_;
    }

  private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> values_;
    std::vector<unsigned char> jumps_;
};

// Equivalence class (t, omega^t): a path frozen from its stop time on.  The
// canonical representative stores the history up to the stop index, the left
// limit at the stop, and the accumulated vertical bump as a separate offset.
// Keeping the offset unmaterialised makes bump composition exact:
// bump(bump(sp,x),y) and bump(sp,x+y) hold the identical IEEE sum, and a
// round trip by -x restores the original values bit for bit.
class StoppedPath {
  public:
    StoppedPath(TimeGrid grid, std::size_t dim, std::size_t stop_index,
                std::vector<double> history, std::vector<unsigned char> jumps,
                std::vector<double> left_limit)
        : grid_(grid),
          dim_(dim),
          stop_(stop_index),
          history_(std::move(history)),
          jumps_(std::move(jumps)),
          left_limit_(std::move(left_limit)),
          offset_(dim, 0.0) {
        if (stop_ > grid_.n_steps) throw std::out_of_range("StoppedPath: stop index beyond grid");
        if (history_.size() != (stop_ + 1) * dim_)
            throw std::invalid_argument("StoppedPath: bad history size");
        if (jumps_.size() != stop_ + 1) throw std::invalid_argument("StoppedPath: bad ledger size");
        if (left_limit_.size() != dim_) throw std::invalid_argument("StoppedPath: bad left limit");
    }

    const TimeGrid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }
    std::size_t stop_index() const { return stop_; }
    double stop_time() const { return grid_.time(stop_); }

    // state frozen from the stop index on (vertical offset applied)
    double frozen(std::size_t i) const { return history_[stop_ * dim_ + i] + offset_[i]; }
    double frozen1() const { return frozen(0); }

    // path value at any grid index of the canonical representative
    double value(std::size_t k, std::size_t i) const {
        return k < stop_ ? history_[k * dim_ + i] : frozen(i);
    }
    double value1(std::size_t k) const { return value(k, 0); }

    double left_limit_at(std::size_t k, std::size_t i) const {
        if (k < stop_) return (jumps_[k] && k > 0) ? history_[(k - 1) * dim_ + i] : history_[k * dim_ + i];
        if (k == stop_) return left_limit_[i];
        return frozen(i);  // constant after the stop
    }
    double left_limit_at1(std::size_t k) const { return left_limit_at(k, 0); }

    bool has_jump(std::size_t k) const {
        if (k < stop_) return jumps_[k] != 0;
        if (k == stop_) return frozen(0) != left_limit_[0] || jump_differs_tail();
        return false;
    }

    double jump_at_stop(std::size_t i) const { return frozen(i) - left_limit_[i]; }

    // sup norm of the representative, used to scale difference steps
    double sup_norm() const {
        double m = 0.0;
        for (std::size_t k = 0; k <= stop_; ++k)
            for (std::size_t i = 0; i < dim_; ++i) m = std::max(m, std::abs(value(k, i)));
        return m;
    }

    bool operator==(const StoppedPath& o) const {
        if (!(grid_ == o.grid_) || dim_ != o.dim_ || stop_ != o.stop_) return false;
        for (std::size_t k = 0; k <= stop_; ++k)
            for (std::size_t i = 0; i < dim_; ++i)
                if (value(k, i) != o.value(k, i)) return false;
        for (std::size_t i = 0; i < dim_; ++i)
            if (left_limit_[i] != o.left_limit_[i]) return false;
        for (std::size_t k = 0; k <= stop_; ++k)
            if ((k < stop_ ? jumps_[k] != 0 : has_jump(k)) !=
                (k < o.stop_ ? o.jumps_[k] != 0 : o.has_jump(k)))
                return false;
        return true;
    }

    friend StoppedPath stop(const GridPath& p, std::size_t k);
    friend StoppedPath stop_pre(const GridPath& p, std::size_t k);
    friend StoppedPath vertical_bump(const StoppedPath& sp, const std::vector<double>& x);
    friend StoppedPath horizontal_extend(const StoppedPath& sp, std::size_t m);

  private:
    bool jump_differs_tail() const {
        for (std::size_t i = 1; i < dim_; ++i)
            if (frozen(i) != left_limit_[i]) return true;
        return false;
    }

    TimeGrid grid_;
    std::size_t dim_;
    std::size_t stop_;
    std::vector<double> history_;       // post-jump values up to the stop, bump not applied
    std::vector<unsigned char> jumps_;  // ledger up to the stop
    std::vector<double> left_limit_;    // left limit at the stop index, bump never applies
    std::vector<double> offset_;        // accumulated vertical bump on [stop, T]
};

// omega -> omega^{t_k}: freeze at the post-jump state.  A jump at the stop
// time stays visible through the left limit.
inline StoppedPath stop(const GridPath& p, std::size_t k) {
    if (k > p.n_steps()) throw std::out_of_range("stop: index beyond grid");
    const std::size_t d = p.dim();
    std::vector<double> hist(p.values().begin(), p.values().begin() + (k + 1) * d);
    std::vector<unsigned char> jm(p.jump_ledger().begin(), p.jump_ledger().begin() + k + 1);
    std::vector<double> ll(d);
    for (std::size_t i = 0; i < d; ++i) ll[i] = p.left_limit(k, i);
    return StoppedPath(p.grid(), d, k, std::move(hist), std::move(jm), std::move(ll));
}

// omega -> omega^{t_k -}: freeze at the left limit, discarding a jump at t_k.
inline StoppedPath stop_pre(const GridPath& p, std::size_t k) {
    if (k > p.n_steps()) throw std::out_of_range("stop_pre: index beyond grid");
    const std::size_t d = p.dim();
    std::vector<double> hist(p.values().begin(), p.values().begin() + (k + 1) * d);
    std::vector<unsigned char> jm(p.jump_ledger().begin(), p.jump_ledger().begin() + k + 1);
    std::vector<double> ll(d);
    for (std::size_t i = 0; i < d; ++i) {
        ll[i] = p.left_limit(k, i);
        hist[k * d + i] = ll[i];
    }
    jm[k] = 0;
    return StoppedPath(p.grid(), d, k, std::move(hist), std::move(jm), std::move(ll));
}

// restrict a stopped path to an earlier stop; at the same or a later index
// this is the identity
inline StoppedPath stop(const StoppedPath& sp, std::size_t k) {
    if (k >= sp.stop_index()) return sp;
    const std::size_t d = sp.dim();
    std::vector<double> hist((k + 1) * d);
    std::vector<unsigned char> jm(k + 1);
    std::vector<double> ll(d);
    for (std::size_t j = 0; j <= k; ++j)
        for (std::size_t i = 0; i < d; ++i) hist[j * d + i] = sp.value(j, i);
    for (std::size_t j = 0; j <= k; ++j) jm[j] = sp.has_jump(j) ? 1 : 0;
    for (std::size_t i = 0; i < d; ++i) ll[i] = sp.left_limit_at(k, i);
    return StoppedPath(sp.grid(), d, k, std::move(hist), std::move(jm), std::move(ll));
}

// omega^t -> omega^t + x 1_[t, T]: the bump lands on [t, T] only, so it reads
// as a jump at the stop time; the history and the left limit never move.
inline StoppedPath vertical_bump(const StoppedPath& sp, const std::vector<double>& x) {
    if (x.size() != sp.dim()) throw std::invalid_argument("vertical_bump: bad direction size");
    StoppedPath out = sp;
    for (std::size_t i = 0; i < out.dim_; ++i) out.offset_[i] += x[i];
    return out;
}

inline StoppedPath vertical_bump(const StoppedPath& sp, double x) {
    return vertical_bump(sp, std::vector<double>{x});
}

// (t, omega^t) -> (t + m dt, omega^t): the frozen value propagates, no new
// jumps are introduced, and any pending bump is materialised into history.
inline StoppedPath horizontal_extend(const StoppedPath& sp, std::size_t m) {
    if (sp.stop_index() + m > sp.grid().n_steps)
        throw std::out_of_range("horizontal_extend: beyond horizon");
    if (m == 0) return sp;
    const std::size_t d = sp.dim();
    const std::size_t k2 = sp.stop_index() + m;
    std::vector<double> hist((k2 + 1) * d);
    std::vector<unsigned char> jm(k2 + 1, 0);
    std::vector<double> ll(d);
    for (std::size_t j = 0; j <= k2; ++j)
        for (std::size_t i = 0; i < d; ++i) hist[j * d + i] = sp.value(j, i);
    for (std::size_t j = 0; j <= sp.stop_index(); ++j) jm[j] = sp.has_jump(j) ? 1 : 0;
    for (std::size_t i = 0; i < d; ++i) ll[i] = sp.frozen(i);
    return StoppedPath(sp.grid(), d, k2, std::move(hist), std::move(jm), std::move(ll));
}

// canonical full-grid representative (frozen tail written out)
inline GridPath to_grid_path(const StoppedPath& sp) {
    const std::size_t d = sp.dim();
    const std::size_t n = sp.grid().n_steps;
    std::vector<double> v((n + 1) * d);
    std::vector<unsigned char> jm(n + 1, 0);
    for (std::size_t k = 0; k <= n; ++k)
        for (std::size_t i = 0; i < d; ++i) v[k * d + i] = sp.value(k, i);
    for (std::size_t k = 0; k <= n; ++k) jm[k] = sp.has_jump(k) ? 1 : 0;
    return GridPath(sp.grid(), d, std::move(v), std::move(jm));
}

// omega (+)_t omega': follow omega up to the stop, then attach the increments
// of the continuation after its own value at the stop index.  The shift is
// computed once, which keeps concat(stop(p, k), p) == p bit for bit.
inline GridPath concat(const StoppedPath& sp, const GridPath& continuation) {
    if (!(sp.grid() == continuation.grid()) || sp.dim() != continuation.dim())
        throw std::invalid_argument("concat: grid or dimension mismatch");
    const std::size_t d = sp.dim();
    const std::size_t n = sp.grid().n_steps;
    const std::size_t k = sp.stop_index();
    std::vector<double> v((n + 1) * d);
    std::vector<unsigned char> jm(n + 1, 0);
    std::vector<double> shift(d);
    for (std::size_t i = 0; i < d; ++i) shift[i] = sp.frozen(i) - continuation.value(k, i);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < d; ++i) v[j * d + i] = sp.value(j, i);
        jm[j] = sp.has_jump(j) ? 1 : 0;
    }
    for (std::size_t i = 0; i < d; ++i) v[k * d + i] = sp.frozen(i);
    jm[k] = sp.has_jump(k) ? 1 : 0;
    for (std::size_t j = k + 1; j <= n; ++j) {
        for (std::size_t i = 0; i < d; ++i) v[j * d + i] = continuation.value(j, i) + shift[i];
        jm[j] = continuation.has_jump(j) ? 1 : 0;
    }
    return GridPath(sp.grid(), d, std::move(v), std::move(jm));
}

// d((t, omega^t), (s, omega'^s)) = sup_k |omega^t_k - omega'^s_k| + |t - s|,
// the sup over the whole grid of the canonical representatives
inline double d_infty(const StoppedPath& a, const StoppedPath& b) {
    if (!(a.grid() == b.grid()) || a.dim() != b.dim())
        throw std::invalid_argument("d_infty: grid or dimension mismatch");
    const std::size_t d = a.dim();
    double sup = 0.0;
    for (std::size_t k = 0; k <= a.grid().n_steps; ++k) {
        double s2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = a.value(k, i) - b.value(k, i);
            s2 += diff * diff;
        }
        sup = std::max(sup, std::sqrt(s2));
    }
    return sup + std::abs(a.stop_time() - b.stop_time());
}

}  // namespace fic
