#pragma once

#include "pvm/box.hpp"
#include "pvm/common.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pvm {

// Row-major interleaved RGB, values 0..255.
struct RawFrame {
    int width = 0, height = 0;
    std::vector<uint8_t> data;

    RawFrame() = default;
    RawFrame(int w, int h) : width(w), height(h), data(size_t(w) * h * 3, 0) {}

    uint8_t &at(int x, int y, int ch) { return data[(size_t(y) * width + x) * 3 + ch]; }
    uint8_t at(int x, int y, int ch) const { return data[(size_t(y) * width + x) * 3 + ch]; }
};

struct StreamConfig {
    int field_size = 80;
    int tile_size = 10;
    int frames_per_input = 1; // 1..5, concatenated oldest-first
    int repeat_count = 1;     // consecutive presentations of each frame
    int stride = 1;           // temporal decimation of the source
};

// Random-access frame source. Indexing is deterministic so multi-pass
// training replays the identical byte stream.
class FrameStream {
public:
    virtual ~FrameStream() = default;
    virtual size_t size() const = 0;
    virtual RawFrame frame(size_t index) const = 0;
};

// Directory of numbered image files (PNG/PPM/...), filename-sorted, each
// resized (bilinear) to field_size x field_size. Throws EmptyStreamError on
// zero frames, DataError on unreadable files.
std::unique_ptr<FrameStream> open_directory_stream(const std::string &dir,
                                                   const StreamConfig &cfg);

// Raw planar-RGB blob (per frame: R plane, G plane, B plane) with a JSON
// sidecar `<path>.json` holding {"width":W,"height":H,"frames":N}.
std::unique_ptr<FrameStream> open_raw_blob_stream(const std::string &path,
                                                  const StreamConfig &cfg);

// Dispatches on whether `path` is a directory or a blob file.
std::unique_ptr<FrameStream> open_stream(const std::string &path, const StreamConfig &cfg);

RawFrame resize_bilinear(const RawFrame &src, int out_w, int out_h);

// One centered input vector per level-1 tile, row-major tile order. Window
// length must equal cfg.frames_per_input; multi-frame windows concatenate
// oldest-first. Pixels map v -> v - 127.5.
std::vector<Vec> tile_and_center(const std::vector<RawFrame> &frame_window,
                                 const StreamConfig &cfg);

// OTB-style groundtruth.txt: one "x,y,w,h" line per frame, NaN quadruple for
// target-absent frames.
std::vector<BoundingBox> load_groundtruth(const std::string &path);

RawFrame load_image(const std::string &path);
void save_image(const RawFrame &img, const std::string &path);

} // namespace pvm
