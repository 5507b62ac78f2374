#include "pvm/ingest.hpp"

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace pvm {

namespace {

RawFrame from_cv(const cv::Mat &bgr) {
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    RawFrame f(rgb.cols, rgb.rows);
    for (int y = 0; y < rgb.rows; y++)
        std::copy_n(rgb.ptr<uint8_t>(y), size_t(rgb.cols) * 3, &f.data[size_t(y) * rgb.cols * 3]);
    return f;
}

cv::Mat to_cv_rgb(const RawFrame &f) {
    cv::Mat m(f.height, f.width, CV_8UC3);
    for (int y = 0; y < f.height; y++)
        std::copy_n(&f.data[size_t(y) * f.width * 3], size_t(f.width) * 3, m.ptr<uint8_t>(y));
    return m;
}

class DirectoryStream : public FrameStream {
public:
    DirectoryStream(const std::string &dir, const StreamConfig &cfg) : cfg_(cfg) {
        if (!fs::is_directory(dir))
            throw DataError("not a directory: " + dir);
        for (const auto &e : fs::directory_iterator(dir)) {
            if (!e.is_regular_file())
                continue;
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
            if (ext == ".png" || ext == ".ppm" || ext == ".jpg" || ext == ".jpeg" ||
                ext == ".bmp" || ext == ".pgm")
                files_.push_back(e.path().string());
        }
        std::sort(files_.begin(), files_.end());
        if (cfg_.stride > 1) {
            std::vector<std::string> kept;
            for (size_t i = 0; i < files_.size(); i += cfg_.stride)
                kept.push_back(files_[i]);
            files_.swap(kept);
        }
        if (files_.empty())
            throw EmptyStreamError("no frames in " + dir);
    }

    size_t size() const override { return files_.size() * cfg_.repeat_count; }

    RawFrame frame(size_t index) const override {
        const auto &path = files_[index / cfg_.repeat_count];
        RawFrame f = load_image(path);
        if (f.width != cfg_.field_size || f.height != cfg_.field_size)
            f = resize_bilinear(f, cfg_.field_size, cfg_.field_size);
        return f;
    }

private:
    StreamConfig cfg_;
    std::vector<std::string> files_;
};

class RawBlobStream : public FrameStream {
public:
    RawBlobStream(const std::string &path, const StreamConfig &cfg) : cfg_(cfg) {
        std::ifstream side(path + ".json");
        if (!side)
            throw DataError("missing sidecar: " + path + ".json");
        nlohmann::json j;
        side >> j;
        width_ = j.at("width").get<int>();
        height_ = j.at("height").get<int>();
        frames_ = j.at("frames").get<size_t>();
        if (frames_ == 0)
            throw EmptyStreamError("zero frames in blob: " + path);
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw DataError("unreadable blob: " + path);
        size_t expect = frames_ * size_t(width_) * height_ * 3;
        blob_.resize(expect);
        in.read(reinterpret_cast<char *>(blob_.data()), std::streamsize(expect));
        if (size_t(in.gcount()) != expect)
            throw DataError("truncated blob: " + path);
    }

    size_t size() const override { return frames_ * cfg_.repeat_count; }

    RawFrame frame(size_t index) const override {
        size_t i = index / cfg_.repeat_count;
        size_t plane = size_t(width_) * height_;
        const uint8_t *base = blob_.data() + i * plane * 3;
        RawFrame f(width_, height_);
        for (int y = 0; y < height_; y++)
            for (int x = 0; x < width_; x++)
                for (int ch = 0; ch < 3; ch++)
                    f.at(x, y, ch) = base[ch * plane + size_t(y) * width_ + x];
        if (f.width != cfg_.field_size || f.height != cfg_.field_size)
            f = resize_bilinear(f, cfg_.field_size, cfg_.field_size);
        return f;
    }

private:
    StreamConfig cfg_;
    int width_ = 0, height_ = 0;
    size_t frames_ = 0;
    std::vector<uint8_t> blob_;
};

} // namespace

RawFrame load_image(const std::string &path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty())
        throw DataError("unreadable image: " + path);
    return from_cv(m);
}

void save_image(const RawFrame &img, const std::string &path) {
    cv::Mat rgb = to_cv_rgb(img), bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path, bgr))
        throw DataError("cannot write image: " + path);
}

RawFrame resize_bilinear(const RawFrame &src, int out_w, int out_h) {
    if (src.width == out_w && src.height == out_h)
        return src;
    cv::Mat in = to_cv_rgb(src), out;
    cv::resize(in, out, cv::Size(out_w, out_h), 0, 0, cv::INTER_LINEAR);
    RawFrame f(out_w, out_h);
    for (int y = 0; y < out_h; y++)
        std::copy_n(out.ptr<uint8_t>(y), size_t(out_w) * 3, &f.data[size_t(y) * out_w * 3]);
    return f;
}

std::unique_ptr<FrameStream> open_directory_stream(const std::string &dir,
                                                   const StreamConfig &cfg) {
    return std::make_unique<DirectoryStream>(dir, cfg);
}

std::unique_ptr<FrameStream> open_raw_blob_stream(const std::string &path,
                                                  const StreamConfig &cfg) {
    return std::make_unique<RawBlobStream>(path, cfg);
}

std::unique_ptr<FrameStream> open_stream(const std::string &path, const StreamConfig &cfg) {
    if (fs::is_directory(path))
        return open_directory_stream(path, cfg);
    if (fs::is_regular_file(path))
        return open_raw_blob_stream(path, cfg);
    throw DataError("no such path: " + path);
}

std::vector<Vec> tile_and_center(const std::vector<RawFrame> &frame_window,
                                 const StreamConfig &cfg) {
    if (int(frame_window.size()) != cfg.frames_per_input)
        throw DataError("window length != frames_per_input");
    const int ts = cfg.tile_size;
    const int grid = cfg.field_size / ts;
    const int per_frame = ts * ts * 3;
    std::vector<Vec> out;
    out.reserve(size_t(grid) * grid);
    for (int ty = 0; ty < grid; ty++) {
        for (int tx = 0; tx < grid; tx++) {
            Vec v(per_frame * cfg.frames_per_input);
            int off = 0;
            for (const auto &f : frame_window) {
                if (f.width != cfg.field_size || f.height != cfg.field_size)
                    throw DataError("frame not resized to field");
                for (int y = 0; y < ts; y++)
                    for (int x = 0; x < ts; x++)
                        for (int ch = 0; ch < 3; ch++)
                            v[off++] = float(f.at(tx * ts + x, ty * ts + y, ch)) - 127.5f;
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<BoundingBox> load_groundtruth(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open groundtruth: " + path);
    std::vector<BoundingBox> boxes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        for (auto &c : line)
            if (c == ',' || c == '\t')
                c = ' ';
        if (line.find("NaN") != std::string::npos || line.find("nan") != std::string::npos) {
            boxes.push_back(BoundingBox::absent());
            continue;
        }
        BoundingBox b;
        if (sscanf(line.c_str(), "%lf %lf %lf %lf", &b.x, &b.y, &b.w, &b.h) != 4)
            throw DataError("bad groundtruth line: " + line);
        boxes.push_back(b);
    }
    return boxes;
}

} // namespace pvm
