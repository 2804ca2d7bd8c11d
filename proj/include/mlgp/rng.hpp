#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "mlgp/matrix.hpp"

namespace mlgp {

/// Seeded RNG with a stdlib-independent normal sampler so that runs are
/// reproducible and engine state can be checkpointed as text.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    double uniform() {
        // (0, 1]
        return (double(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    Matrix normal_matrix(int rows, int cols) {
        Matrix m(rows, cols);
        for (size_t i = 0; i < m.size(); ++i) m.at(i) = normal();
        return m;
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void deserialize(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace mlgp
