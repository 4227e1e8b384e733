#pragma once

#include <cmath>
#include <random>

namespace testutil {

// |a - b| measured relative to |b| (the reference), with an absolute floor so
// exact-zero references do not blow up the quotient.
inline double rel_err(double a, double b, double floor = 1e-300) {
    return std::abs(a - b) / std::max(std::abs(b), floor);
}

struct Rng {
    explicit Rng(unsigned seed) : eng(seed) {}
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
    // uniform over (lo, hi]: rejects the open endpoint
    double uniform_open_low(double lo, double hi) {
        double v;
        do {
            v = uniform(lo, hi);
        } while (v <= lo);
        return v;
    }
    std::mt19937 eng;
};

}  // namespace testutil
