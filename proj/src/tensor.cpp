#include "jano/tensor.hpp"

#include <cmath>

namespace jano {

LatentTensor LatentTensor::from_data(uint32_t c, uint32_t f, uint32_t h, uint32_t w,
                                     std::vector<float> values) {
    LatentTensor t;
    t.channels = c;
    t.frames = f;
    t.height = h;
    t.width = w;
    t.data = std::move(values);
    t.validate();
    return t;
}

void LatentTensor::validate() const {
    if (channels == 0 || frames == 0 || height == 0 || width == 0)
        throw InvalidInputError("latent tensor dimensions must be positive");
    if (data.size() != cell_count())
        throw InvalidInputError("latent tensor data length " + std::to_string(data.size()) +
                                " does not match dims product " + std::to_string(cell_count()));
    for (size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            throw InvalidInputError("latent tensor has non-finite value at flat index " +
                                    std::to_string(i));
    }
}

Tensor3 channel_average(const LatentTensor& x) {
    if (x.channels == 0 || x.data.empty())
        throw InvalidInputError("channel_average: empty tensor");
    if (x.data.size() != x.cell_count())
        throw InvalidInputError("channel_average: inconsistent tensor");
    Tensor3 out(x.frames, x.height, x.width);
    const size_t plane = out.data.size();
    const double inv_c = 1.0 / static_cast<double>(x.channels);
    for (size_t i = 0; i < plane; ++i) {
        double acc = 0.0;
        for (uint32_t c = 0; c < x.channels; ++c)
            acc += x.data[static_cast<size_t>(c) * plane + i];
        out.data[i] = static_cast<float>(acc * inv_c);
    }
    return out;
}

}  // namespace jano
