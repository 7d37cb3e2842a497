// Test-only oracles, independent of the library's arithmetic paths:
// IoU by rasterizing boxes onto the 1000x1000 boolean grid and counting
// cells, recall/precision by exhaustive pairing over the rasterized values.
#pragma once

#include <bitset>
#include <random>
#include <vector>

#include "docex/geometry.hpp"

namespace docex::test {

using CellMask = std::bitset<1000>;

inline CellMask column_mask(const NormBox& box) {
    CellMask mask;
    for (int x = box.x_min; x < box.x_max; ++x) mask.set(static_cast<std::size_t>(x));
    return mask;
}

struct RasterCounts {
    long long intersection = 0;
    long long union_ = 0;
    long long area_a = 0;
    long long area_b = 0;
};

inline RasterCounts raster_counts(const NormBox& a, const NormBox& b) {
    const CellMask ma = column_mask(a);
    const CellMask mb = column_mask(b);
    RasterCounts c;
    for (int y = 0; y < 1000; ++y) {
        const bool in_a = y >= a.y_min && y < a.y_max;
        const bool in_b = y >= b.y_min && y < b.y_max;
        if (in_a) c.area_a += static_cast<long long>(ma.count());
        if (in_b) c.area_b += static_cast<long long>(mb.count());
        if (in_a && in_b) c.intersection += static_cast<long long>((ma & mb).count());
        if (in_a && in_b)
            c.union_ += static_cast<long long>((ma | mb).count());
        else if (in_a)
            c.union_ += static_cast<long long>(ma.count());
        else if (in_b)
            c.union_ += static_cast<long long>(mb.count());
    }
    return c;
}

inline double oracle_iou_em(const NormBox& a, const NormBox& b) {
    const RasterCounts c = raster_counts(a, b);
    return c.union_ == 0 ? 0.0
                         : static_cast<double>(c.intersection) /
                               static_cast<double>(c.union_);
}

inline double oracle_iou_min(const NormBox& a, const NormBox& b) {
    const RasterCounts c = raster_counts(a, b);
    const long long denom = std::min(c.area_a, c.area_b);
    return denom == 0 ? 0.0
                      : static_cast<double>(c.intersection) /
                            static_cast<double>(denom);
}

inline double oracle_recall(const std::vector<NormBox>& gt,
                            const std::vector<NormBox>& pred, bool use_min,
                            double thres) {
    if (gt.empty()) return 0.0;
    int hit = 0;
    for (const NormBox& g : gt) {
        double best = 0.0;
        for (const NormBox& p : pred) {
            const double v = use_min ? oracle_iou_min(g, p) : oracle_iou_em(g, p);
            if (v > best) best = v;
        }
        if (best >= thres) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(gt.size());
}

inline double oracle_precision_min(const std::vector<NormBox>& gt,
                                   const std::vector<NormBox>& pred, double thres) {
    if (pred.empty()) return 0.0;
    int hit = 0;
    for (const NormBox& p : pred) {
        double best = 0.0;
        for (const NormBox& g : gt) {
            const double v = oracle_iou_min(g, p);
            if (v > best) best = v;
        }
        if (best >= thres) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

inline NormBox random_box(std::mt19937& rng) {
    std::uniform_int_distribution<int> coord(0, 1000);
    while (true) {
        int x0 = coord(rng), x1 = coord(rng), y0 = coord(rng), y1 = coord(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        const NormBox box{x0, y0, x1, y1};
        if (box.valid()) return box;
    }
}

inline std::vector<NormBox> random_box_set(std::mt19937& rng, int max_count,
                                           int min_count = 0) {
    std::uniform_int_distribution<int> count(min_count, max_count);
    std::vector<NormBox> boxes;
    const int n = count(rng);
    boxes.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) boxes.push_back(random_box(rng));
    return boxes;
}

}  // namespace docex::test
