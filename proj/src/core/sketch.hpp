#pragma once

#include "core/rng.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace pyramid {

enum class SketchKind : uint8_t {
    CountMin = 0,
    CountMedian = 1,
};

// Count-min / count-median sketch over 64-bit real cells. Cells start at an
// independent Laplace(0, noise_scale) draw per cell; noise_scale 0 means an
// all-zero grid. Counts may be negative after noise; callers clamp on read.
class Sketch {
public:
    Sketch(SketchKind kind, uint32_t depth, uint32_t width, uint64_t seed,
           double noise_scale, Rng& noise_rng);

    // Rebuilds a sketch from serialized parts; cells are adopted as-is.
    Sketch(SketchKind kind, uint32_t depth, uint32_t width, double noise_scale,
           std::vector<uint64_t> row_seeds, std::vector<uint64_t> sign_seeds,
           std::vector<double> cells);

    void update(std::string_view key, double delta);
    double estimate(std::string_view key) const;

    // Fresh Laplace draw into every cell; used when a dyadic tree node is
    // assembled from its children.
    void add_noise(double scale, Rng& noise_rng);

    bool compatible_with(const Sketch& other) const;
    void merge_from(const Sketch& other);
    static Sketch merged(const Sketch& a, const Sketch& b);

    SketchKind kind() const { return kind_; }
    uint32_t depth() const { return depth_; }
    uint32_t width() const { return width_; }
    double noise_scale() const { return noise_scale_; }
    const std::vector<uint64_t>& row_seeds() const { return row_seeds_; }
    const std::vector<uint64_t>& sign_seeds() const { return sign_seeds_; }
    const std::vector<double>& cells() const { return cells_; }

    uint32_t column(uint32_t row, std::string_view key) const;
    int sign(uint32_t row, std::string_view key) const;

private:
    SketchKind kind_;
    uint32_t depth_;
    uint32_t width_;
    double noise_scale_;
    std::vector<uint64_t> row_seeds_;
    std::vector<uint64_t> sign_seeds_;  // empty for CountMin
    std::vector<double> cells_;         // row-major depth x width
};

}  // namespace pyramid
