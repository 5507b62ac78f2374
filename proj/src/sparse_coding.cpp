#include "pvm/sparse_coding.hpp"

namespace pvm {

Dictionary Dictionary::random_init(int m, int K, Rng &rng) {
    Dictionary d;
    d.m = m;
    d.K = K;
    d.D.resize(m, K);
    for (int j = 0; j < K; j++) {
        for (int i = 0; i < m; i++)
            d.D(i, j) = float(rng.normal());
        d.D.col(j) /= d.D.col(j).norm();
    }
    d.B = Mat::Zero(m, K);
    d.E = Mat::Zero(K, K);
    d.act_var = Vec::Ones(K);
    d.pending_xa = MatD::Zero(m, K);
    d.pending_aa = MatD::Zero(K, K);
    d.refresh_gram();
    return d;
}

void Dictionary::accumulate(const Vec &x, const Vec &a0) {
    pending_xa.noalias() += x.cast<double>() * a0.transpose().cast<double>();
    pending_aa.noalias() += a0.cast<double>() * a0.transpose().cast<double>();
    pending_samples++;
    // homeostatic variance: EMA with running-mean warmup
    float rate = std::max(kActVarRate, 1.0f / float(samples_total + 1));
    act_var = (1.0f - rate) * act_var + rate * a0.cwiseProduct(a0);
    samples_total++;
}

bool Dictionary::advance_frame() {
    frames_since_update++;
    if (frames_since_update < next_update_interval)
        return false;

    if (pending_samples > 0) {
        MatD Bd = (B.cast<double>() + pending_xa) / 2.0;
        MatD Ed = (E.cast<double>() + pending_aa) / 2.0;
        MatD Dd = D.cast<double>();
        for (int i = 0; i < K; i++) {
            VecD u = Dd.col(i) + (Bd.col(i) - Dd * Ed.col(i)) / (Ed(i, i) + 1e-7);
            Dd.col(i) = u / (u.norm() + 1e-7);
        }
        D = Dd.cast<float>();
        B = Bd.cast<float>();
        E = Ed.cast<float>();
        refresh_gram();
    }
    pending_xa.setZero();
    pending_aa.setZero();
    pending_samples = 0;
    frames_since_update = 0;
    next_update_interval = uint64_t(std::llround(1.1 * double(next_update_interval)));
    update_events++;
    return true;
}

SparseCode asc_encode(const Vec &x, Dictionary &dict, const SimpleParams &params, bool learn) {
    if (!x.allFinite())
        throw NumericError("asc_encode: non-finite input");
    if (x.size() != dict.m)
        throw DataError("asc_encode: input length mismatch");
    dict.encode_count++;
    auto res = asc_sweep<float, Mat, Vec>(x, dict.D, dict.E_gram, dict.s, params.N, params.T);
    SparseCode code;
    code.a = std::move(res.a);
    code.lambda_final = res.lambda_final;
    code.iterations_used = res.sweeps;
    code.degenerate = res.degenerate;
    if (learn && !res.degenerate)
        dict.s = 0.999f * dict.s + 0.001f * res.lambda_final / res.init_z_max;
    return code;
}

Vec reconstruct(const SparseCode &code, const Dictionary &dict) {
    if (code.a.size() != dict.K)
        throw DataError("reconstruct: code length mismatch");
    return dict.D * code.a;
}

bool accumulate_and_maybe_update(Dictionary &dict, const Vec &x, const SparseCode &code) {
    dict.accumulate(x, code.a);
    return dict.advance_frame();
}

Vec normalize_simple(const SparseCode &code, const Dictionary &dict) {
    Vec out(dict.K + 1);
    out.head(dict.K) =
        code.a.array() / (dict.act_var.array().sqrt() + 1e-7f);
    out[dict.K] = 1.0f;
    return out;
}

} // namespace pvm
