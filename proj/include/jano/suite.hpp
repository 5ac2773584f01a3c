#pragma once

#include <cstdint>
#include <vector>

#include "jano/block_grid.hpp"
#include "jano/scenes.hpp"

namespace jano {

/// Block size matching the suite canvases: (2, 16, 16) over (F 8, H 48, W 48),
/// a 4 x 3 x 3 grid of 36 blocks.
BlockSize suite_block();

/// Standard synthetic scene suite: 16-channel canvases with a 3 x 3 spatial
/// tile layout split evenly into three complexity tiers (constant background,
/// mid-frequency checkerboards, high-frequency static and moving patterns).
/// Tile placement and pattern parameters vary per scene, seeded.
std::vector<SceneSpec> standard_suite(uint32_t count, uint64_t seed);

/// Static-heavy variant for end-to-end freezing runs: most tiles are constant
/// background so level-1 blocks dominate under Appendix-style thresholds.
std::vector<SceneSpec> rollout_suite(uint32_t count, uint64_t seed);

}  // namespace jano
