#include "jano/block_grid.hpp"

#include <algorithm>

namespace jano {

static uint32_t ceil_div(uint32_t a, uint32_t b) { return (a + b - 1) / b; }

BlockGrid BlockGrid::make(uint32_t frames, uint32_t height, uint32_t width, BlockSize block) {
    if (frames == 0 || height == 0 || width == 0)
        throw InvalidInputError("block grid: tensor dimensions must be positive");
    if (block.f == 0 || block.h == 0 || block.w == 0)
        throw InvalidInputError("block grid: block dimensions must be positive");
    BlockGrid g;
    g.frames = frames;
    g.height = height;
    g.width = width;
    g.block = block;
    g.nf = ceil_div(frames, block.f);
    g.nh = ceil_div(height, block.h);
    g.nw = ceil_div(width, block.w);
    return g;
}

BlockGrid::Extent BlockGrid::extent(uint32_t block_id) const {
    const BlockCoord c = coord(block_id);
    Extent e;
    e.f0 = c.fi * block.f;
    e.h0 = c.hi * block.h;
    e.w0 = c.wi * block.w;
    e.f1 = std::min(e.f0 + block.f, frames);
    e.h1 = std::min(e.h0 + block.h, height);
    e.w1 = std::min(e.w0 + block.w, width);
    return e;
}

std::vector<uint32_t> BlockGrid::token_ids(uint32_t block_id) const {
    const Extent e = extent(block_id);
    std::vector<uint32_t> ids;
    ids.reserve(static_cast<size_t>(e.f1 - e.f0) * (e.h1 - e.h0) * (e.w1 - e.w0));
    for (uint32_t f = e.f0; f < e.f1; ++f)
        for (uint32_t h = e.h0; h < e.h1; ++h)
            for (uint32_t w = e.w0; w < e.w1; ++w)
                ids.push_back((f * height + h) * width + w);
    return ids;
}

std::vector<std::vector<uint32_t>> BlockGrid::token_index_map() const {
    std::vector<std::vector<uint32_t>> map(block_count());
    for (uint32_t b = 0; b < block_count(); ++b) map[b] = token_ids(b);
    return map;
}

std::vector<BlockFeatureMatrix> partition_blocks(const Tensor3& tensor, BlockSize block) {
    if (tensor.frames == 0 || tensor.height == 0 || tensor.width == 0 || tensor.data.empty())
        throw InvalidInputError("partition_blocks: empty tensor");
    const BlockGrid grid = BlockGrid::make(tensor.frames, tensor.height, tensor.width, block);

    std::vector<BlockFeatureMatrix> out(grid.block_count());
    for (uint32_t b = 0; b < grid.block_count(); ++b) {
        BlockFeatureMatrix& m = out[b];
        m.block_id = b;
        m.bf = block.f;
        m.bh = block.h;
        m.bw = block.w;
        m.values.resize(static_cast<size_t>(block.f) * block.h * block.w);
        const BlockCoord c = grid.coord(b);
        size_t idx = 0;
        for (uint32_t df = 0; df < block.f; ++df) {
            const uint32_t f = std::min(c.fi * block.f + df, tensor.frames - 1);
            for (uint32_t dh = 0; dh < block.h; ++dh) {
                const uint32_t h = std::min(c.hi * block.h + dh, tensor.height - 1);
                for (uint32_t dw = 0; dw < block.w; ++dw) {
                    const uint32_t w = std::min(c.wi * block.w + dw, tensor.width - 1);
                    m.values[idx++] = tensor.at(f, h, w);
                }
            }
        }
    }
    return out;
}

Tensor3 assemble_blocks(const std::vector<BlockFeatureMatrix>& blocks, const BlockGrid& grid) {
    if (blocks.size() != grid.block_count())
        throw InvalidInputError("assemble_blocks: block count does not match grid");
    Tensor3 out(grid.frames, grid.height, grid.width);
    for (const BlockFeatureMatrix& m : blocks) {
        const BlockCoord c = grid.coord(m.block_id);
        const BlockGrid::Extent e = grid.extent(m.block_id);
        for (uint32_t f = e.f0; f < e.f1; ++f)
            for (uint32_t h = e.h0; h < e.h1; ++h)
                for (uint32_t w = e.w0; w < e.w1; ++w) {
                    const uint32_t df = f - c.fi * grid.block.f;
                    const uint32_t dh = h - c.hi * grid.block.h;
                    const uint32_t dw = w - c.wi * grid.block.w;
                    out.at(f, h, w) = m.values[(static_cast<size_t>(df) * m.bh + dh) * m.bw + dw];
                }
    }
    return out;
}

}  // namespace jano
