#include "jano/suite.hpp"

#include <algorithm>

#include "jano/rng.hpp"

namespace jano {

namespace {

constexpr uint32_t kChannels = 16;
constexpr uint32_t kFrames = 8;
constexpr uint32_t kHeight = 48;
constexpr uint32_t kWidth = 48;
constexpr uint32_t kTile = 16;

Region tile_region(uint32_t ti, uint32_t tj) {
    Region r;
    r.f0 = 0;
    r.f1 = kFrames;
    r.h0 = ti * kTile;
    r.h1 = (ti + 1) * kTile;
    r.w0 = tj * kTile;
    r.w1 = (tj + 1) * kTile;
    return r;
}

Region tier2_pattern(Region r, Rng& rng) {
    r.kind = PatternKind::Checkerboard;
    r.period = 8;
    r.amplitude = rng.uniform(4.4, 5.6);
    return r;
}

// High tier. Checkerboards repeat across channels, so they survive channel
// averaging at full strength; the moving tone gets a larger amplitude to
// compensate for the attenuation its per-channel random phases cause in the
// channel mean.
Region tier3_pattern(Region r, Rng& rng) {
    switch (rng.below(3)) {
        case 0:
            r.kind = PatternKind::Checkerboard;
            r.period = 2;
            r.amplitude = rng.uniform(8.4, 10.0);
            break;
        case 1:
            r.kind = PatternKind::Checkerboard;
            r.period = 4;
            r.amplitude = rng.uniform(8.4, 10.0);
            break;
        default:
            r.kind = PatternKind::MovingSinusoid;
            r.freq = 0.375;
            r.velocity = rng.below(2) ? 2.0 : 1.0;
            r.amplitude = rng.uniform(20.0, 24.0);
            break;
    }
    return r;
}

SceneSpec make_scene(uint64_t seed, uint32_t tier2_tiles, uint32_t tier3_tiles) {
    SceneSpec spec;
    spec.channels = kChannels;
    spec.frames = kFrames;
    spec.height = kHeight;
    spec.width = kWidth;
    spec.seed = seed;

    Region bg;
    bg.f1 = kFrames;
    bg.h1 = kHeight;
    bg.w1 = kWidth;
    bg.kind = PatternKind::Constant;
    bg.amplitude = 0.3;
    spec.regions.push_back(bg);

    Rng rng = Rng::stream(seed, 0x7363656eULL);
    std::vector<uint32_t> tiles(9);
    for (uint32_t i = 0; i < 9; ++i) tiles[i] = i;
    for (size_t i = tiles.size() - 1; i > 0; --i)
        std::swap(tiles[i], tiles[rng.below(i + 1)]);

    uint32_t at = 0;
    for (uint32_t i = 0; i < tier2_tiles; ++i, ++at)
        spec.regions.push_back(tier2_pattern(tile_region(tiles[at] / 3, tiles[at] % 3), rng));
    for (uint32_t i = 0; i < tier3_tiles; ++i, ++at)
        spec.regions.push_back(tier3_pattern(tile_region(tiles[at] / 3, tiles[at] % 3), rng));
    return spec;
}

}  // namespace

BlockSize suite_block() { return BlockSize{2, 16, 16}; }

std::vector<SceneSpec> standard_suite(uint32_t count, uint64_t seed) {
    std::vector<SceneSpec> scenes;
    scenes.reserve(count);
    for (uint32_t i = 0; i < count; ++i)
        scenes.push_back(make_scene(splitmix64(seed ^ (0x5354444eULL + i)), 3, 3));
    return scenes;
}

std::vector<SceneSpec> rollout_suite(uint32_t count, uint64_t seed) {
    std::vector<SceneSpec> scenes;
    scenes.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint64_t s = splitmix64(seed ^ (0x524f4c4cULL + i));
        // 5 or 6 background tiles out of 9.
        const uint32_t textured = 3 + (i % 2);
        const uint32_t tier3 = textured / 2 + 1;
        scenes.push_back(make_scene(s, textured - tier3, tier3));
    }
    return scenes;
}

}  // namespace jano
