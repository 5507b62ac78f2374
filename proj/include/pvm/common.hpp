#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pvm {

using Vec = Eigen::VectorXf;
using Mat = Eigen::MatrixXf;
using VecD = Eigen::VectorXd;
using MatD = Eigen::MatrixXd;

// Exit codes 2 and 3 of the CLI map to these two families.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyStreamError : DataError {
    using DataError::DataError;
};
struct VersionError : DataError {
    using DataError::DataError;
};

class Rng {
public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }
    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }
    // uniform integer in [0, n)
    int64_t index(int64_t n) {
        return std::uniform_int_distribution<int64_t>(0, n - 1)(gen_);
    }
    uint64_t raw() { return gen_(); }

    std::mt19937_64 &engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// that need determinism across thread counts must not reduce inside fn.
inline void parallel_for(int n, int threads, const std::function<void(int)> &fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; i++)
            fn(i);
        return;
    }
    int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; w++) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += workers)
                fn(i);
        });
    }
    for (auto &t : pool)
        t.join();
}

} // namespace pvm
