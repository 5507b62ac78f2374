#include "pvm/predictive_layer.hpp"

namespace pvm {

Vec assemble_context(const Vec &a, const Vec &c_prev, const std::array<const Vec *, 4> &laterals,
                     const Vec *feedback) {
    const int J = int(a.size());
    if (c_prev.size() != J)
        throw DataError("assemble_context: c_prev length mismatch");
    Vec p0 = Vec::Zero(7 * J);
    p0.segment(kBlockSimple * J, J) = a;
    p0.segment(kBlockSelf * J, J) = c_prev;
    for (int d = 0; d < 4; d++) {
        if (laterals[d]) {
            if (laterals[d]->size() != J)
                throw DataError("assemble_context: lateral length mismatch");
            p0.segment((kBlockLateralN + d) * J, J) = *laterals[d];
        }
    }
    if (feedback) {
        if (feedback->size() != J)
            throw DataError("assemble_context: feedback length mismatch");
        p0.segment(kBlockFeedback * J, J) = *feedback;
    }
    return p0;
}

Vec complex_activate(const Vec &p0, const ComplexWeights &weights) {
    if (p0.size() != 7 * weights.J)
        throw DataError("complex_activate: context length mismatch");
    return (weights.C.transpose() * p0).cwiseMax(0.0f);
}

static void decay_weights(ComplexWeights &w, float r) {
    w.C *= (1.0f - 1e-5f * r);
    // self connections: simple cell i -> complex cell i, block 1 diagonal
    float extra = (1.0f - 0.9f * r) / (1.0f - 1e-5f * r);
    for (int i = 0; i < w.J; i++)
        w.C(i, i) *= extra;
}

void accumulate_complex_gradient(Mat &G, const Vec &p0, const Vec &c_pred, const Vec &a_next,
                                 const ComplexParams &params) {
    const int J = int(a_next.size());
    Vec d(J);
    for (int i = 0; i < J; i++) {
        float gate = (c_pred[i] > params.gate_threshold) ? 1.0f : 0.0f;
        d[i] = (a_next[i] - c_pred[i]) * (gate + 0.01f);
    }
    float gmax = p0.cwiseAbs().maxCoeff() * d.cwiseAbs().maxCoeff();
    float scale = 1.0f / std::max(1.0f, gmax + 1e-7f);
    G.noalias() += (p0 * scale) * d.transpose();
}

void apply_complex_update(ComplexWeights &weights, const Mat &G_accum, int n_tiles,
                          const ComplexParams &params) {
    float r = learning_rate(weights.t);
    decay_weights(weights, r);
    float norm = params.average_gradients ? 1.0f / float(n_tiles) : 1.0f;
    weights.C.noalias() += (r * norm) * G_accum;
    weights.t++;
}

bool complex_learn(ComplexWeights &weights, const Vec &p0, const Vec &c_pred, const Vec &a_next,
                   const ComplexParams &params) {
    if (!p0.allFinite() || !c_pred.allFinite() || !a_next.allFinite())
        return false;
    Mat G = Mat::Zero(7 * weights.J, weights.J);
    accumulate_complex_gradient(G, p0, c_pred, a_next, params);
    apply_complex_update(weights, G, 1, params);
    return true;
}

Vec normalize_complex(const Vec &c0, ComplexState &state, uint64_t t, bool learn) {
    if (learn) {
        float rho = std::max(learning_rate(t), float(1.0 / double(t + 1)));
        state.v = (1.0f - rho) * state.v + rho * c0.cwiseProduct(c0);
    }
    return c0.array() / (state.v.array().sqrt() + 1e-7f);
}

} // namespace pvm
