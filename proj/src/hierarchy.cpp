#include "pvm/hierarchy.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace pvm {

HierarchySpec HierarchySpec::standard(int field_size, int tile_size, int K, int N, int T,
                                      int frames_per_input) {
    HierarchySpec spec;
    spec.field_size = field_size;
    spec.tile_size = tile_size;
    spec.frames_per_input = frames_per_input;
    if (field_size % tile_size != 0)
        throw DataError("field_size not divisible by tile_size");
    int grid = field_size / tile_size;
    int level = 1;
    int prev_J = 0;
    while (true) {
        LevelSpec ls;
        ls.level_index = level;
        ls.tiles_x = ls.tiles_y = grid;
        ls.K = K;
        ls.N = N;
        ls.T = T;
        ls.input_dim = (level == 1) ? tile_size * tile_size * 3 * frames_per_input : 4 * prev_J;
        spec.levels.push_back(ls);
        prev_J = ls.J();
        if (grid == 1)
            break;
        if (grid % 2 != 0)
            throw DataError("grid does not halve cleanly");
        grid /= 2;
        level++;
    }
    spec.validate();
    return spec;
}

void HierarchySpec::validate() const {
    if (levels.empty())
        throw DataError("empty hierarchy spec");
    if (field_size % tile_size != 0)
        throw DataError("field_size not divisible by tile_size");
    if (frames_per_input < 1 || frames_per_input > 5)
        throw DataError("frames_per_input out of [1,5]");
    if (levels.front().tiles_x != field_size / tile_size)
        throw DataError("level-1 grid inconsistent with field/tile");
    for (size_t i = 0; i < levels.size(); i++) {
        const auto &ls = levels[i];
        if (ls.N <= 0 || ls.N >= ls.K)
            throw DataError("requires 0 < N < K");
        if (ls.N > ls.K / 4)
            std::cerr << "warning: level " << ls.level_index << " N=" << ls.N << " exceeds K/4="
                      << ls.K / 4 << "; receptive fields may degrade\n";
        if (i > 0) {
            if (levels[i - 1].tiles_x != 2 * ls.tiles_x || levels[i - 1].tiles_y != 2 * ls.tiles_y)
                throw DataError("tile grids must shrink 4x per level");
            if (ls.input_dim != 4 * levels[i - 1].J())
                throw DataError("input_dim must be 4*J of the child level");
        }
    }
    if (levels.back().tiles_x != 1 || levels.back().tiles_y != 1)
        throw DataError("top level must be 1x1");
}

int HierarchySpec::total_tiles() const {
    int n = 0;
    for (const auto &ls : levels)
        n += ls.n_tiles();
    return n;
}

Model Model::build(const HierarchySpec &spec, uint64_t seed, ContextMode context) {
    spec.validate();
    Model model;
    model.spec_ = spec;
    model.context_mode_ = context;
    model.seed_ = seed;
    Rng rng(seed);
    for (const auto &ls : spec.levels) {
        model.dicts_.push_back(Dictionary::random_init(ls.input_dim, ls.K, rng));
        model.cweights_.push_back(ComplexWeights::zeros(ls.J()));
        model.cstates_.emplace_back(ls.n_tiles(), ComplexState::init(ls.J()));
    }
    model.init_transients();
    return model;
}

void Model::init_transients() {
    bank0_.clear();
    bank1_.clear();
    simple_now_.clear();
    complex_now_.clear();
    held_p0_.clear();
    held_c_.clear();
    have_held_.assign(spec_.levels.size(), false);
    for (const auto &ls : spec_.levels) {
        bank0_.push_back(Mat::Zero(ls.J(), ls.n_tiles()));
        bank1_.push_back(Mat::Zero(ls.J(), ls.n_tiles()));
        simple_now_.push_back(Mat::Zero(ls.J(), ls.n_tiles()));
        complex_now_.push_back(Mat::Zero(ls.J(), ls.n_tiles()));
        held_p0_.push_back(Mat::Zero(7 * ls.J(), ls.n_tiles()));
        held_c_.push_back(Mat::Zero(ls.J(), ls.n_tiles()));
    }
    bank_ = 0;
}

void Model::reset_state() {
    for (size_t l = 0; l < spec_.levels.size(); l++) {
        bank0_[l].setZero();
        bank1_[l].setZero();
        held_p0_[l].setZero();
        held_c_[l].setZero();
        have_held_[l] = false;
    }
    bank_ = 0;
}

StepMetrics Model::step(const std::vector<Vec> &level1_inputs, bool learn) {
    const int L = n_levels();
    StepMetrics metrics;
    metrics.recon_mse.assign(L, 0.0f);
    metrics.pred_mse.assign(L, 0.0f);

    if (int(level1_inputs.size()) != spec_.levels[0].n_tiles())
        throw DataError("step: wrong number of level-1 inputs");

    for (int li = 0; li < L; li++) {
        const LevelSpec &ls = spec_.levels[li];
        Dictionary &dict = dicts_[li];
        ComplexWeights &cw = cweights_[li];
        const int J = ls.J();
        const int nt = ls.n_tiles();
        const int gx = ls.tiles_x, gy = ls.tiles_y;
        SimpleParams sp{ls.K, ls.N, ls.T};

        // gather inputs
        std::vector<Vec> xs(nt);
        if (li == 0) {
            for (int t = 0; t < nt; t++)
                xs[t] = level1_inputs[t];
        } else {
            const Mat &child = complex_now_[li - 1];
            int cgx = spec_.levels[li - 1].tiles_x;
            int cJ = spec_.levels[li - 1].J();
            for (int ty = 0; ty < gy; ty++) {
                for (int tx = 0; tx < gx; tx++) {
                    Vec x(4 * cJ);
                    int k = 0;
                    for (int dy = 0; dy < 2; dy++)
                        for (int dx = 0; dx < 2; dx++)
                            x.segment(cJ * k++, cJ) = child.col((2 * ty + dy) * cgx + (2 * tx + dx));
                    xs[ty * gx + tx] = std::move(x);
                }
            }
        }

        // encode (parallel over tiles; s update and batch accumulation are
        // serialized afterwards to keep the result thread-count invariant)
        std::vector<SparseCode> codes(nt);
        std::vector<float> zmax(nt);
        parallel_for(nt, threads, [&](int t) {
            try {
                auto res = asc_sweep<float, Mat, Vec>(xs[t], dict.D, dict.E_gram, dict.s, sp.N,
                                                      sp.T);
                codes[t].a = std::move(res.a);
                codes[t].lambda_final = res.lambda_final;
                codes[t].iterations_used = res.sweeps;
                codes[t].degenerate = res.degenerate;
                zmax[t] = res.init_z_max;
            } catch (const std::exception &e) {
                throw NumericError("level " + std::to_string(ls.level_index) + " tile " +
                                   std::to_string(t) + ": " + e.what());
            }
        });
        encode_calls += size_t(nt);
        dict.encode_count += size_t(nt);
        if (learn) {
            for (int t = 0; t < nt; t++) {
                if (!codes[t].degenerate)
                    dict.s = 0.999f * dict.s + 0.001f * codes[t].lambda_final / zmax[t];
                dict.accumulate(xs[t], codes[t].a);
            }
        }

        Mat &a_now = simple_now_[li];
        for (int t = 0; t < nt; t++)
            a_now.col(t) = normalize_simple(codes[t], dict);

        if (learn) {
            float recon = 0.0f;
            for (int t = 0; t < nt; t++)
                recon += (xs[t] - dict.D * codes[t].a).squaredNorm() / float(ls.input_dim);
            metrics.recon_mse[li] = recon / float(nt);
        }

        // complex learning for the previous transition, now that a_t exists
        if (learn && have_held_[li]) {
            Mat G = Mat::Zero(7 * J, J);
            float perr = 0.0f;
            for (int t = 0; t < nt; t++) {
                accumulate_complex_gradient(G, held_p0_[li].col(t), held_c_[li].col(t),
                                            a_now.col(t), complex_params);
                perr += (a_now.col(t) - held_c_[li].col(t)).squaredNorm() / float(J);
            }
            apply_complex_update(cw, G, nt, complex_params);
            metrics.pred_mse[li] = perr / float(nt);
            metrics.has_pred = true;
        }

        // assemble contexts from the previous step's banks
        Mat &p0_all = held_p0_[li];
        const Mat &self_prev = bank_prev(li);
        const Mat *parent_prev =
            (li + 1 < L) ? &(bank_ == 0 ? bank1_[li + 1] : bank0_[li + 1]) : nullptr;
        const bool ctx = (context_mode_ == ContextMode::full);
        parallel_for(nt, threads, [&](int t) {
            int tx = t % gx, ty = t / gx;
            Vec p0 = Vec::Zero(7 * J);
            p0.segment(kBlockSimple * J, J) = a_now.col(t);
            p0.segment(kBlockSelf * J, J) = self_prev.col(t);
            if (ctx) {
                static const int ddx[4] = {0, 1, 0, -1}; // N E S W
                static const int ddy[4] = {-1, 0, 1, 0};
                for (int d = 0; d < 4; d++) {
                    int nx = tx + ddx[d], ny = ty + ddy[d];
                    if (nx >= 0 && nx < gx && ny >= 0 && ny < gy)
                        p0.segment((kBlockLateralN + d) * J, J) = self_prev.col(ny * gx + nx);
                }
                if (parent_prev) {
                    int pgx = spec_.levels[li + 1].tiles_x;
                    p0.segment(kBlockFeedback * J, J) = parent_prev->col((ty / 2) * pgx + tx / 2);
                }
            }
            p0_all.col(t) = p0;
        });

        // batched activation + per-tile normalization
        Mat c0_all = (cw.C.transpose() * p0_all).cwiseMax(0.0f);
        activate_calls += size_t(nt);
        Mat &c_now = complex_now_[li];
        for (int t = 0; t < nt; t++) {
            c_now.col(t) = normalize_complex(c0_all.col(t), cstates_[li][t], step_, learn);
            cstates_[li][t].c_prev = c_now.col(t);
        }
        held_c_[li] = c_now;
        have_held_[li] = true;
        bank_cur(li) = c_now;

        if (learn)
            dict.advance_frame();
    }

    bank_ = 1 - bank_;
    step_++;
    return metrics;
}

StepMetrics Model::step_frame(const RawFrame &frame, bool learn) {
    StreamConfig cfg;
    cfg.field_size = spec_.field_size;
    cfg.tile_size = spec_.tile_size;
    cfg.frames_per_input = 1;
    return step(tile_and_center({frame}, cfg), learn);
}

void Model::train_on_stream(const FrameStream &stream, const TrainOptions &opts) {
    if (stream.size() == 0)
        throw EmptyStreamError("train_on_stream: empty stream");
    StreamConfig cfg;
    cfg.field_size = spec_.field_size;
    cfg.tile_size = spec_.tile_size;
    cfg.frames_per_input = spec_.frames_per_input;

    std::ofstream csv;
    if (!opts.metrics_csv.empty()) {
        csv.open(opts.metrics_csv);
        csv << "step,level,recon_mse,pred_mse\n";
    }
    const int L = n_levels();
    std::vector<double> recon_acc(L, 0.0), pred_acc(L, 0.0);
    uint64_t window = 0;

    try {
        for (int pass = 0; pass < opts.passes; pass++) {
            std::deque<RawFrame> win;
            for (size_t i = 0; i < stream.size(); i++) {
                win.push_back(stream.frame(i));
                if (int(win.size()) > spec_.frames_per_input)
                    win.pop_front();
                if (int(win.size()) < spec_.frames_per_input)
                    continue;
                auto metrics =
                    step(tile_and_center({win.begin(), win.end()}, cfg), opts.learn);
                for (int l = 0; l < L; l++) {
                    recon_acc[l] += metrics.recon_mse[l];
                    pred_acc[l] += metrics.pred_mse[l];
                }
                window++;
                if (csv.is_open() && window % uint64_t(opts.log_every) == 0) {
                    for (int l = 0; l < L; l++) {
                        csv << step_ << "," << (l + 1) << "," << recon_acc[l] / double(window)
                            << "," << pred_acc[l] / double(window) << "\n";
                        recon_acc[l] = pred_acc[l] = 0.0;
                    }
                    window = 0;
                    csv.flush();
                }
            }
        }
    } catch (...) {
        if (!opts.checkpoint_on_abort.empty())
            save_checkpoint(*this, opts.checkpoint_on_abort);
        throw;
    }
}

} // namespace pvm
