#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace fic {

// Uniform time grid on [0, T].  Index k corresponds to time k * dt, index
// n_steps to the horizon itself.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t n) : horizon(T), n_steps(n) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (n == 0) throw std::invalid_argument("TimeGrid: need at least one step");
    }

    double dt() const { return horizon / static_cast<double>(n_steps); }
    double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

    // maps a real time to its grid index; rejects off-grid times
    std::size_t index_of(double t) const {
        const double x = t / dt();
        const double r = std::round(x);
        if (std::abs(x - r) > 1e-9 * static_cast<double>(n_steps))
            throw std::invalid_argument("TimeGrid: time not on grid");
        if (r < -0.5 || r > static_cast<double>(n_steps) + 0.5)
            throw std::out_of_range("TimeGrid: time outside [0, T]");
        return static_cast<std::size_t>(r);
    }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && n_steps == o.n_steps;
    }
};

}  // namespace fic
