#pragma once

#include <cstdint>
#include <vector>

#include "jano/tensor.hpp"

namespace jano {

struct BlockSize {
    uint32_t f = 1;
    uint32_t h = 1;
    uint32_t w = 1;
    bool operator==(const BlockSize&) const = default;
};

struct BlockCoord {
    uint32_t fi = 0;
    uint32_t hi = 0;
    uint32_t wi = 0;
};

/// 3-D block partition of a (frames, height, width) token volume. Blocks tile
/// the volume with ceil division; trailing partial blocks are completed by
/// edge replication where a full-shape view is needed.
struct BlockGrid {
    uint32_t frames = 0;
    uint32_t height = 0;
    uint32_t width = 0;
    BlockSize block;
    uint32_t nf = 0;
    uint32_t nh = 0;
    uint32_t nw = 0;

    static BlockGrid make(uint32_t frames, uint32_t height, uint32_t width, BlockSize block);

    uint32_t block_count() const { return nf * nh * nw; }
    size_t token_count() const { return static_cast<size_t>(frames) * height * width; }

    BlockCoord coord(uint32_t block_id) const {
        BlockCoord c;
        c.wi = block_id % nw;
        c.hi = (block_id / nw) % nh;
        c.fi = block_id / (nw * nh);
        return c;
    }
    uint32_t id(BlockCoord c) const { return (c.fi * nh + c.hi) * nw + c.wi; }

    /// Unpadded extent of a block, clamped to the volume (half-open ranges).
    struct Extent {
        uint32_t f0, f1, h0, h1, w0, w1;
    };
    Extent extent(uint32_t block_id) const;

    /// Flat token ids (f*H + h)*W + w owned by a block; unpadded cells only.
    std::vector<uint32_t> token_ids(uint32_t block_id) const;

    /// block id -> token ids for the whole grid. Every token appears exactly once.
    std::vector<std::vector<uint32_t>> token_index_map() const;

    bool operator==(const BlockGrid&) const = default;
};

/// Channel-averaged block content: (f x s) matrix with s = h*w, frames over rows.
struct BlockFeatureMatrix {
    uint32_t block_id = 0;
    uint32_t bf = 0;
    uint32_t bh = 0;
    uint32_t bw = 0;
    std::vector<float> values;  // row-major [frame][h*w]

    uint32_t spatial() const { return bh * bw; }
    float at(uint32_t f, uint32_t s) const { return values[static_cast<size_t>(f) * spatial() + s]; }
};

/// Partition into full-shape blocks; out-of-range cells replicate the nearest
/// edge cell so every block has identical (f, h, w) shape.
std::vector<BlockFeatureMatrix> partition_blocks(const Tensor3& tensor, BlockSize block);

/// Inverse placement of unpadded regions; exact round trip with partition_blocks.
Tensor3 assemble_blocks(const std::vector<BlockFeatureMatrix>& blocks, const BlockGrid& grid);

}  // namespace jano
