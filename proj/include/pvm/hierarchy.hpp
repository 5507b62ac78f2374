#pragma once

#include "pvm/common.hpp"
#include "pvm/ingest.hpp"
#include "pvm/predictive_layer.hpp"
#include "pvm/sparse_coding.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace pvm {

struct LevelSpec {
    int level_index = 1; // 1-based, level 1 = pixels
    int tiles_x = 8, tiles_y = 8;
    int input_dim = 300;
    int K = 400, N = 70, T = 25;

    int J() const { return K + 1; }
    int n_tiles() const { return tiles_x * tiles_y; }
};

enum class ContextMode { full, none }; // none zeroes lateral + feedback blocks

struct HierarchySpec {
    std::vector<LevelSpec> levels;
    int field_size = 80;
    int tile_size = 10;
    int frames_per_input = 1;

    // Standard pyramid: level-1 grid = field/tile, halved per level to 1x1.
    static HierarchySpec standard(int field_size = 80, int tile_size = 10, int K = 400,
                                  int N = 70, int T = 25, int frames_per_input = 1);
    void validate() const;
    int total_tiles() const;
};

struct StepMetrics {
    std::vector<float> recon_mse; // per level, ||x - D a0||^2 / m, mean over tiles
    std::vector<float> pred_mse;  // per level, ||a_t - c_pred_{t-1}||^2 / J, mean over tiles
    bool has_pred = false;        // false on the first learning step
};

struct TrainOptions {
    int passes = 1;
    bool learn = true;
    std::string metrics_csv;      // per-1000-step means: step,level,recon_mse,pred_mse
    int log_every = 1000;
    std::string checkpoint_on_abort; // written if the stream throws mid-run
    bool verbose = false;
};

class Model {
public:
    Model() = default;

    static Model build(const HierarchySpec &spec, uint64_t seed,
                       ContextMode context = ContextMode::full);

    // One model step on pre-tiled, centered level-1 inputs (row-major tile
    // order). Bottom-up sweep; laterals/feedback read the previous step's
    // banks; banks swap at the end.
    StepMetrics step(const std::vector<Vec> &level1_inputs, bool learn);

    // Convenience: tile_and_center + step for a single-frame window.
    StepMetrics step_frame(const RawFrame &frame, bool learn);

    void train_on_stream(const FrameStream &stream, const TrainOptions &opts);

    // Zeroes context banks and held prediction pairs; weights untouched.
    void reset_state();

    const HierarchySpec &spec() const { return spec_; }
    int n_levels() const { return int(spec_.levels.size()); }
    uint64_t step_count() const { return step_; }
    ContextMode context_mode() const { return context_mode_; }
    uint64_t seed() const { return seed_; }

    Dictionary &dictionary(int level) { return dicts_[level]; }
    const Dictionary &dictionary(int level) const { return dicts_[level]; }
    ComplexWeights &complex_weights(int level) { return cweights_[level]; }
    const ComplexWeights &complex_weights(int level) const { return cweights_[level]; }
    const ComplexState &complex_state(int level, int tile) const {
        return cstates_[level][tile];
    }
    ComplexState &complex_state(int level, int tile) { return cstates_[level][tile]; }

    // Outputs of the last completed step (column per tile).
    const Mat &simple_outputs(int level) const { return simple_now_[level]; }
    const Mat &complex_outputs(int level) const { return complex_now_[level]; }

    int threads = 1;
    ComplexParams complex_params;

    // serialization hooks (checkpoint.cpp)
    void set_step_count(uint64_t s) { step_ = s; }
    void set_seed(uint64_t s) { seed_ = s; }
    void set_context_mode(ContextMode m) { context_mode_ = m; }
    void set_spec(const HierarchySpec &s) { spec_ = s; }
    std::vector<Dictionary> &dictionaries() { return dicts_; }
    std::vector<ComplexWeights> &all_complex_weights() { return cweights_; }
    std::vector<std::vector<ComplexState>> &all_complex_states() { return cstates_; }
    void init_transients();

    size_t encode_calls = 0, activate_calls = 0; // instrumentation

private:
    HierarchySpec spec_;
    ContextMode context_mode_ = ContextMode::full;
    uint64_t seed_ = 0;
    uint64_t step_ = 0;
    int bank_ = 0;

    std::vector<Dictionary> dicts_;
    std::vector<ComplexWeights> cweights_;
    std::vector<std::vector<ComplexState>> cstates_;

    // per level: J x n_tiles
    std::vector<Mat> bank0_, bank1_;
    std::vector<Mat> simple_now_, complex_now_;
    std::vector<Mat> held_p0_; // 7J x n_tiles
    std::vector<Mat> held_c_;  // J x n_tiles
    std::vector<bool> have_held_;

    Mat &bank_cur(int level) { return bank_ == 0 ? bank0_[level] : bank1_[level]; }
    Mat &bank_prev(int level) { return bank_ == 0 ? bank1_[level] : bank0_[level]; }
};

void save_checkpoint(const Model &model, const std::string &path);
Model load_checkpoint(const std::string &path);

} // namespace pvm
