#include "core/sketch.hpp"

#include "core/distributions.hpp"
#include "core/errors.hpp"
#include "core/hash.hpp"

#include <algorithm>
#include <cmath>

namespace pyramid {

namespace {

bool is_power_of_two(uint32_t w) { return w != 0 && (w & (w - 1)) == 0; }

void check_dimensions(SketchKind kind, uint32_t depth, uint32_t width) {
    if (depth < 1) throw DimensionError("sketch depth must be >= 1");
    if (width < 2 || !is_power_of_two(width))
        throw DimensionError("sketch width must be a power of two >= 2");
    if (kind == SketchKind::CountMedian && depth % 2 == 0)
        throw ConfigError("count-median sketch requires an odd depth");
}

}  // namespace

Sketch::Sketch(SketchKind kind, uint32_t depth, uint32_t width, uint64_t seed,
               double noise_scale, Rng& noise_rng)
    : kind_(kind), depth_(depth), width_(width), noise_scale_(noise_scale) {
    check_dimensions(kind, depth, width);
    if (noise_scale < 0.0) throw ValueError("noise scale must be >= 0");

    row_seeds_.reserve(depth);
    for (uint32_t i = 0; i < depth; ++i) row_seeds_.push_back(derive_seed(seed, 2 * i));
    if (kind == SketchKind::CountMedian) {
        sign_seeds_.reserve(depth);
        for (uint32_t i = 0; i < depth; ++i)
            sign_seeds_.push_back(derive_seed(seed, 2 * i + 1));
    }

    cells_.assign(static_cast<size_t>(depth) * width, 0.0);
    if (noise_scale > 0.0) {
        for (double& c : cells_) c = sample_laplace(noise_scale, noise_rng);
    }
}

Sketch::Sketch(SketchKind kind, uint32_t depth, uint32_t width, double noise_scale,
               std::vector<uint64_t> row_seeds, std::vector<uint64_t> sign_seeds,
               std::vector<double> cells)
    : kind_(kind),
      depth_(depth),
      width_(width),
      noise_scale_(noise_scale),
      row_seeds_(std::move(row_seeds)),
      sign_seeds_(std::move(sign_seeds)),
      cells_(std::move(cells)) {
    check_dimensions(kind, depth, width);
    if (row_seeds_.size() != depth) throw DimensionError("row seed count != depth");
    if (kind == SketchKind::CountMedian && sign_seeds_.size() != depth)
        throw DimensionError("sign seed count != depth");
    if (cells_.size() != static_cast<size_t>(depth) * width)
        throw DimensionError("cell grid size != depth*width");
}

uint32_t Sketch::column(uint32_t row, std::string_view key) const {
    // High half of the hash, reduced by the power-of-two width.
    uint64_t h = hash_key(row_seeds_[row], key);
    return static_cast<uint32_t>((h >> 32) & (width_ - 1));
}

int Sketch::sign(uint32_t row, std::string_view key) const {
    if (kind_ != SketchKind::CountMedian) return 1;
    return (hash_key(sign_seeds_[row], key) & 1u) ? 1 : -1;
}

void Sketch::add_noise(double scale, Rng& noise_rng) {
    if (scale < 0.0) throw ValueError("noise scale must be >= 0");
    if (scale == 0.0) return;
    for (double& c : cells_) c += sample_laplace(scale, noise_rng);
    noise_scale_ = std::max(noise_scale_, scale);
}

void Sketch::update(std::string_view key, double delta) {
    if (!std::isfinite(delta)) throw ValueError("update delta must be finite");
    for (uint32_t i = 0; i < depth_; ++i) {
        size_t idx = static_cast<size_t>(i) * width_ + column(i, key);
        cells_[idx] += sign(i, key) * delta;
    }
}

double Sketch::estimate(std::string_view key) const {
    if (kind_ == SketchKind::CountMin) {
        double best = cells_[column(0, key)];
        for (uint32_t i = 1; i < depth_; ++i) {
            double v = cells_[static_cast<size_t>(i) * width_ + column(i, key)];
            best = std::min(best, v);
        }
        return best;
    }
    // Median of sign-corrected row values; depth is odd so the middle
    // element is exact.
    std::vector<double> vals(depth_);
    for (uint32_t i = 0; i < depth_; ++i) {
        double v = cells_[static_cast<size_t>(i) * width_ + column(i, key)];
        vals[i] = sign(i, key) * v;
    }
    auto mid = vals.begin() + depth_ / 2;
    std::nth_element(vals.begin(), mid, vals.end());
    return *mid;
}

bool Sketch::compatible_with(const Sketch& other) const {
    return kind_ == other.kind_ && depth_ == other.depth_ && width_ == other.width_ &&
           row_seeds_ == other.row_seeds_ && sign_seeds_ == other.sign_seeds_;
}

void Sketch::merge_from(const Sketch& other) {
    if (!compatible_with(other))
        throw CompatibilityError("sketches are not merge-compatible");
    for (size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    noise_scale_ = std::max(noise_scale_, other.noise_scale_);
}

Sketch Sketch::merged(const Sketch& a, const Sketch& b) {
    Sketch out = a;
    out.merge_from(b);
    return out;
}

}  // namespace pyramid
