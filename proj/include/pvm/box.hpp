#pragma once

#include <algorithm>

namespace pvm {

// Axis-aligned box in source-image pixel coordinates. present=false encodes
// target absence (a value, not an error).
struct BoundingBox {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
    bool present = true;

    static BoundingBox absent() { return {0, 0, 0, 0, false}; }

    double area() const { return w * h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }

    // boundary-inclusive
    bool contains(double px, double py) const {
        return present && px >= x && px <= x + w && py >= y && py <= y + h;
    }

    BoundingBox scaled_about_center(double f) const {
        BoundingBox b = *this;
        b.w = w * f;
        b.h = h * f;
        b.x = cx() - b.w / 2.0;
        b.y = cy() - b.h / 2.0;
        return b;
    }
};

inline double iou(const BoundingBox &a, const BoundingBox &b) {
    if (!a.present || !b.present)
        return 0.0;
    double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    double inter = ix * iy;
    double uni = a.area() + b.area() - inter;
    if (uni <= 0.0)
        return 0.0;
    return inter / uni;
}

} // namespace pvm
