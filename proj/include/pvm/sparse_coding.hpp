#pragma once

#include "pvm/common.hpp"

#include <cmath>
#include <cstdint>

namespace pvm {

struct SimpleParams {
    int K = 400; // dictionary size
    int N = 70;  // target active cells
    int T = 25;  // max sweeps
};

struct SparseCode {
    Vec a;                  // nonnegative, length K
    float lambda_final = 0; // lambda at loop exit
    int iterations_used = 0;
    bool degenerate = false; // max(z) <= 1e-12 path
};

// Adaptive sparse coding inner loop. The l0 exit test runs after every
// coordinate update; the multiplicative lambda rescale runs once per sweep.
// `observer(i, a, z, lambda)` is called after each accepted coordinate update
// (tests use it to check descent and z-consistency); NullAscObserver costs
// nothing.
struct NullAscObserver {
    template <typename S, typename V>
    void operator()(int, const V &, const V &, S) const {}
};

template <typename S, typename MatT, typename VecT, typename Obs = NullAscObserver>
struct AscResult {
    VecT a;
    S lambda_final;
    int sweeps;
    bool degenerate;
    S init_z_max;
};

template <typename S, typename MatT, typename VecT, typename Obs = NullAscObserver>
AscResult<S, MatT, VecT, Obs> asc_sweep(const VecT &x, const MatT &D, const MatT &E_gram,
                                        S s_scale, int N, int T, Obs observer = {}) {
    const int K = int(D.cols());
    VecT a = VecT::Zero(K);
    VecT z = D.transpose() * x;
    const S zmax0 = z.maxCoeff();
    AscResult<S, MatT, VecT, Obs> res{VecT::Zero(K), S(0), 0, false, zmax0};
    if (!(zmax0 > S(1e-12))) {
        res.lambda_final = s_scale * S(1e-12);
        res.degenerate = true;
        return res;
    }
    S lambda = zmax0 * s_scale;
    int nnz = 0;
    int t = 1;
    bool done = false;
    while (!done && t <= T) {
        for (int i = 0; i < K; i++) {
            S cur = a[i];
            S next = cur + z[i] - lambda;
            if (next < S(0))
                next = S(0);
            S d = next - cur;
            if (d != S(0)) {
                z -= d * E_gram.col(i);
                if (cur > S(0) && next == S(0))
                    nnz--;
                else if (cur == S(0) && next > S(0))
                    nnz++;
                a[i] = next;
                observer(i, a, z, lambda);
                if (nnz == N) {
                    done = true;
                    break;
                }
            }
        }
        if (!done)
            lambda *= (nnz > N) ? (S(1) + S(2) / S(t)) : (S(1) - S(0.75) / S(t));
        t++;
    }
    res.a = std::move(a);
    res.lambda_final = lambda;
    res.sweeps = t - 1;
    return res;
}

// Shared per-level dictionary plus its learning statistics. D, B, E follow
// the update rule exactly; act_var is the homeostatic activation variance
// behind normalize_simple (EMA of a0^2, warmup rate 1/(n+1)).
struct Dictionary {
    int m = 0, K = 0;
    Mat D;      // m x K, unit-norm columns
    Mat B;      // m x K input-activation correlation (halved raw sums)
    Mat E;      // K x K activation autocorrelation (halved raw sums)
    Mat E_gram; // K x K cached DᵀD for inference
    Vec act_var;
    float s = 0.5f;

    uint64_t next_update_interval = 1000;
    uint64_t frames_since_update = 0;
    uint64_t update_events = 0;

    // pending batch as sufficient statistics (double accumulators)
    MatD pending_xa; // m x K, sum of x aᵀ
    MatD pending_aa; // K x K, sum of a aᵀ
    uint64_t pending_samples = 0;
    uint64_t samples_total = 0;

    static constexpr float kActVarRate = 1.0f / 5000.0f;

    static Dictionary random_init(int m, int K, Rng &rng);

    void accumulate(const Vec &x, const Vec &a0);
    // One frame elapsed; runs the block-coordinate-descent update when the
    // schedule fires. Returns true on an update event.
    bool advance_frame();
    void refresh_gram() { E_gram = D.transpose() * D; }

    size_t encode_count = 0; // instrumentation
};

SparseCode asc_encode(const Vec &x, Dictionary &dict, const SimpleParams &params, bool learn);

Vec reconstruct(const SparseCode &code, const Dictionary &dict);

// accumulate + advance one frame (the single-stream form of the update rule)
bool accumulate_and_maybe_update(Dictionary &dict, const Vec &x, const SparseCode &code);

// a0 / (sqrt(act_var) + 1e-7) with a constant 1 appended; length K+1.
Vec normalize_simple(const SparseCode &code, const Dictionary &dict);

} // namespace pvm
