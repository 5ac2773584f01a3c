#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jano/errors.hpp"

namespace jano {

/// Denoising state: (channels, frames, height, width) of row-major float32.
struct LatentTensor {
    uint32_t channels = 0;
    uint32_t frames = 0;
    uint32_t height = 0;
    uint32_t width = 0;
    std::vector<float> data;

    LatentTensor() = default;
    LatentTensor(uint32_t c, uint32_t f, uint32_t h, uint32_t w)
        : channels(c), frames(f), height(h), width(w),
          data(static_cast<size_t>(c) * f * h * w, 0.0f) {
        if (c == 0 || f == 0 || h == 0 || w == 0)
            throw InvalidInputError("latent tensor dimensions must be positive");
    }

    static LatentTensor from_data(uint32_t c, uint32_t f, uint32_t h, uint32_t w,
                                  std::vector<float> values);

    size_t cell_count() const { return static_cast<size_t>(channels) * frames * height * width; }

    size_t index(uint32_t c, uint32_t f, uint32_t h, uint32_t w) const {
        return ((static_cast<size_t>(c) * frames + f) * height + h) * width + w;
    }

    float at(uint32_t c, uint32_t f, uint32_t h, uint32_t w) const { return data[index(c, f, h, w)]; }
    float& at(uint32_t c, uint32_t f, uint32_t h, uint32_t w) { return data[index(c, f, h, w)]; }

    bool same_shape(const LatentTensor& o) const {
        return channels == o.channels && frames == o.frames && height == o.height && width == o.width;
    }

    /// Throws InvalidInputError on empty shape, length mismatch, or non-finite values.
    void validate() const;
};

/// Channel-averaged view: (frames, height, width) of float32.
struct Tensor3 {
    uint32_t frames = 0;
    uint32_t height = 0;
    uint32_t width = 0;
    std::vector<float> data;

    Tensor3() = default;
    Tensor3(uint32_t f, uint32_t h, uint32_t w)
        : frames(f), height(h), width(w), data(static_cast<size_t>(f) * h * w, 0.0f) {}

    size_t index(uint32_t f, uint32_t h, uint32_t w) const {
        return (static_cast<size_t>(f) * height + h) * width + w;
    }
    float at(uint32_t f, uint32_t h, uint32_t w) const { return data[index(f, h, w)]; }
    float& at(uint32_t f, uint32_t h, uint32_t w) { return data[index(f, h, w)]; }
};

/// Per-cell mean over channels.
Tensor3 channel_average(const LatentTensor& x);

}  // namespace jano
