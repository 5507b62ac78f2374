#pragma once

#include "pvm/common.hpp"

#include <array>
#include <cstdint>

namespace pvm {

// Context block order within p0: [a | c_prev | lat N | lat E | lat S | lat W | feedback]
enum ContextBlock {
    kBlockSimple = 0,
    kBlockSelf = 1,
    kBlockLateralN = 2,
    kBlockLateralE = 3,
    kBlockLateralS = 4,
    kBlockLateralW = 5,
    kBlockFeedback = 6,
    kNumBlocks = 7,
};

struct ComplexParams {
    float gate_threshold = 0.0f;   // learning gate fires where c_pred > this
    bool average_gradients = true; // mean (vs sum) of per-tile shared gradients
};

// Shared per-level prediction weights, (7J) x J.
struct ComplexWeights {
    int J = 0;
    Mat C; // row k = context input k, column j = complex cell j
    uint64_t t = 0;

    static ComplexWeights zeros(int J) {
        ComplexWeights w;
        w.J = J;
        w.C = Mat::Zero(7 * J, J);
        return w;
    }
};

// Per-tile recurrent state for the complex layer.
struct ComplexState {
    Vec c_prev; // previous normalized response
    Vec v;      // running variance

    static ComplexState init(int J) { return {Vec::Zero(J), Vec::Ones(J)}; }
};

inline float learning_rate(uint64_t t) { return float(1.0 / (10000.0 + double(t) / 10.0)); }

// Absent laterals/feedback stay zero so C is shareable across all tiles.
Vec assemble_context(const Vec &a, const Vec &c_prev, const std::array<const Vec *, 4> &laterals,
                     const Vec *feedback);

// c = rect(p0 C)
Vec complex_activate(const Vec &p0, const ComplexWeights &weights);

// Alg.-5 single-tile learning step: decay, gated error, clipped outer-product
// gradient, t+1. Returns false (state untouched) on non-finite inputs.
bool complex_learn(ComplexWeights &weights, const Vec &p0, const Vec &c_pred, const Vec &a_next,
                   const ComplexParams &params = {});

// Per-tile gradient contribution for shared weights; clip scale is
// max(1, max|p0|*max|d| + 1e-7) since max|outer(p0,d)| = max|p0|*max|d|.
// Accumulates into G (7J x J).
void accumulate_complex_gradient(Mat &G, const Vec &p0, const Vec &c_pred, const Vec &a_next,
                                 const ComplexParams &params);

// One shared-weight update per step per level: decay once, add r * Gmean.
void apply_complex_update(ComplexWeights &weights, const Mat &G_accum, int n_tiles,
                          const ComplexParams &params);

// v <- (1-rho) v + rho c0^2 with rho = max(r(t), 1/(t+1)) during learning;
// returns c0 / (sqrt(v) + 1e-7). Frozen inference leaves v untouched.
Vec normalize_complex(const Vec &c0, ComplexState &state, uint64_t t, bool learn);

} // namespace pvm
