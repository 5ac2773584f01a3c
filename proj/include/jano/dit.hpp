#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "jano/block_grid.hpp"
#include "jano/scheduler.hpp"

namespace jano {

struct DiTConfig {
    uint32_t layers = 4;
    uint32_t d_model = 64;
    uint32_t heads = 4;
    uint32_t ff_dim = 256;
    uint32_t token_dim = 4;
    uint64_t seed = 0;

    void validate() const;
};

struct DiTLayer {
    std::vector<float> w_qkv;   // [d][3d]
    std::vector<float> w_out;   // [d][d]
    std::vector<float> w_ff1;   // [d][ff]
    std::vector<float> w_ff2;   // [ff][d]
    std::vector<float> norm1;   // [d]
    std::vector<float> norm2;   // [d]
};

/// Untrained pre-norm transformer with full softmax attention, no token
/// positional encoding (conditioning enters through an additive sinusoidal
/// timestep embedding only), so attention is exactly permutation-invariant
/// in its key/value set.
struct ToyDiT {
    DiTConfig cfg;
    std::vector<float> w_in;        // [token_dim][d]
    std::vector<float> w_proj_out;  // [d][token_dim]
    std::vector<DiTLayer> layers;

    static ToyDiT make(const DiTConfig& cfg);
};

/// Per-layer K and V of every token at one step (rows = token id).
struct KVCapture {
    uint32_t tokens = 0;
    uint32_t d_model = 0;
    std::vector<std::vector<float>> keys;    // per layer: tokens x d
    std::vector<std::vector<float>> values;  // per layer: tokens x d
};

/// Key/value rows of frozen tokens, stored per layer and per convergence
/// level (Static and Moderate; Active tokens are never cached).
struct KVCacheStore {
    uint32_t num_layers = 0;
    uint32_t d_model = 0;
    uint32_t total_tokens = 0;
    std::array<std::vector<uint32_t>, 2> ids;  // [0]=Static rows, [1]=Moderate rows (sorted)
    std::array<int64_t, 2> last_refresh = {-1, -1};
    std::vector<int32_t> row_of_token;   // -1 when the token owns no cache row
    std::vector<int8_t> slot_of_token;   // -1 none, 0 Static, 1 Moderate
    std::vector<std::array<std::vector<float>, 2>> keys;    // [layer][slot]: rows x d
    std::vector<std::array<std::vector<float>, 2>> values;  // [layer][slot]: rows x d

    /// Cache with no owned rows (everything Active).
    static KVCacheStore empty(uint32_t layers, uint32_t d_model, uint32_t total_tokens);

    /// Rows for Static and Moderate tokens of the level map (block levels
    /// expanded through the grid's token map).
    static KVCacheStore for_levels(uint32_t layers, uint32_t d_model, const LevelMap& levels,
                                   const BlockGrid& grid);

    /// Copy all owned rows out of a full-forward capture.
    void fill_from_capture(const KVCapture& capture, int64_t step);

    uint64_t cached_rows() const { return ids[0].size() + ids[1].size(); }
};

struct CacheMemoryReport {
    struct Entry {
        uint32_t layer;
        int level;  // 1 = Static, 2 = Moderate
        uint64_t bytes;
    };
    std::vector<Entry> entries;
    uint64_t total_bytes = 0;     // closed form: rows * d_model * 2 * 4 per layer, summed
    uint64_t measured_bytes = 0;  // actual container allocation
    double fraction_of_full = 0;  // vs caching every token's K,V at every layer
};

CacheMemoryReport cache_memory_report(const KVCacheStore& cache);

/// Velocities for all tokens; optionally captures per-layer K,V.
void full_forward(const ToyDiT& model, const float* tokens, uint32_t n, double t, float* out,
                  KVCapture* capture = nullptr);

/// Dense reference with per-layer K,V rows of `stale_ids` replaced by rows
/// from `stale` (the stale-substitution oracle for masked_forward).
void dense_forward_with_stale_kv(const ToyDiT& model, const float* tokens, uint32_t n, double t,
                                 std::span<const uint32_t> stale_ids, const KVCapture& stale,
                                 float* out);

/// Queries from active tokens only; keys/values are the concatenation
/// [active | Moderate cache | Static cache] with no positional reordering.
/// Cache rows owned by active tokens are refreshed as a side effect. Throws
/// InvalidStateError when some token is neither active nor cached.
void masked_forward(const ToyDiT& model, const float* active_tokens,
                    std::span<const uint32_t> active_ids, double t, KVCacheStore& cache,
                    float* out_active, int64_t step = -1);

}  // namespace jano
