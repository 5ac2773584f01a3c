#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "jano/dit.hpp"
#include "jano/rng.hpp"

using namespace jano;

namespace {

DiTConfig small_config() {
    DiTConfig cfg;
    cfg.layers = 2;
    cfg.d_model = 32;
    cfg.heads = 4;
    cfg.ff_dim = 64;
    cfg.token_dim = 4;
    cfg.seed = 7;
    return cfg;
}

std::vector<float> random_tokens(uint32_t n, uint32_t dim, uint64_t seed) {
    std::vector<float> t(static_cast<size_t>(n) * dim);
    Rng rng(seed);
    for (float& v : t) v = rng.normal_f();
    return t;
}

float max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    float worst = 0.0f;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

LevelMap split_levels(uint32_t blocks, uint32_t n_static, uint32_t n_moderate) {
    LevelMap levels;
    levels.levels.assign(blocks, Level::Active);
    for (uint32_t b = 0; b < n_static; ++b) levels.levels[b] = Level::Static;
    for (uint32_t b = n_static; b < n_static + n_moderate; ++b) levels.levels[b] = Level::Moderate;
    return levels;
}

}  // namespace

TEST_CASE("full forward is deterministic and shape preserving") {
    const ToyDiT model = ToyDiT::make(small_config());
    const auto tokens = random_tokens(16, 4, 1);
    std::vector<float> out1(tokens.size()), out2(tokens.size());
    full_forward(model, tokens.data(), 16, 0.3, out1.data());
    full_forward(model, tokens.data(), 16, 0.3, out2.data());
    CHECK(out1 == out2);
    for (float v : out1) CHECK(std::isfinite(v));
}

TEST_CASE("duplicated single token matches the solo forward") {
    // Softmax over identical keys averages identical values, so a duplicated
    // token behaves like attention with a single key.
    const ToyDiT model = ToyDiT::make(small_config());
    const auto tok = random_tokens(1, 4, 2);
    std::vector<float> solo(4);
    full_forward(model, tok.data(), 1, 0.5, solo.data());

    std::vector<float> dup(8);
    std::copy(tok.begin(), tok.end(), dup.begin());
    std::copy(tok.begin(), tok.end(), dup.begin() + 4);
    std::vector<float> out(8);
    full_forward(model, dup.data(), 2, 0.5, out.data());
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(out[i] - solo[i]) <= 1e-6f);
        CHECK(std::abs(out[4 + i] - solo[i]) <= 1e-6f);
    }
}

TEST_CASE("token permutation equivariance") {
    const ToyDiT model = ToyDiT::make(small_config());
    const uint32_t n = 24;
    const auto tokens = random_tokens(n, 4, 3);
    std::vector<float> out(tokens.size());
    full_forward(model, tokens.data(), n, 0.2, out.data());

    std::vector<uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(5);
    for (size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);

    std::vector<float> permuted(tokens.size());
    for (uint32_t i = 0; i < n; ++i)
        std::copy_n(&tokens[perm[i] * 4], 4, &permuted[i * 4]);
    std::vector<float> out_perm(tokens.size());
    full_forward(model, permuted.data(), n, 0.2, out_perm.data());
    for (uint32_t i = 0; i < n; ++i)
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(out_perm[i * 4 + c] - out[perm[i] * 4 + c]) <= 1e-6f);
}

TEST_CASE("non-finite inputs raise a numeric error") {
    const ToyDiT model = ToyDiT::make(small_config());
    auto tokens = random_tokens(4, 4, 6);
    tokens[5] = std::numeric_limits<float>::quiet_NaN();
    std::vector<float> out(tokens.size());
    CHECK_THROWS_AS(full_forward(model, tokens.data(), 4, 0.1, out.data()), NumericError);
}

TEST_CASE("masked forward with everything active equals the dense forward") {
    const ToyDiT model = ToyDiT::make(small_config());
    const uint32_t n = 20;
    const auto tokens = random_tokens(n, 4, 8);
    std::vector<float> dense(tokens.size()), masked(tokens.size());
    full_forward(model, tokens.data(), n, 0.4, dense.data());

    KVCacheStore cache = KVCacheStore::empty(model.cfg.layers, model.cfg.d_model, n);
    std::vector<uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    masked_forward(model, tokens.data(), ids, 0.4, cache, masked.data());
    CHECK(max_abs_diff(dense, masked) <= 1e-5f);
}

TEST_CASE("masked forward equals dense with fresh caches from the same step") {
    const ToyDiT model = ToyDiT::make(small_config());
    const uint32_t n = 24;
    const BlockGrid grid = BlockGrid::make(1, 4, 6, {1, 2, 2});  // 6 blocks of 4 tokens
    const auto tokens = random_tokens(n, 4, 9);

    KVCapture capture;
    std::vector<float> dense(tokens.size());
    full_forward(model, tokens.data(), n, 0.6, dense.data(), &capture);

    KVCacheStore cache =
        KVCacheStore::for_levels(model.cfg.layers, model.cfg.d_model, split_levels(6, 2, 1), grid);
    cache.fill_from_capture(capture, 3);

    std::vector<uint32_t> active;
    for (uint32_t tok = 0; tok < n; ++tok)
        if (cache.row_of_token[tok] < 0) active.push_back(tok);
    REQUIRE(active.size() == 12);

    std::vector<float> active_tokens(active.size() * 4);
    for (size_t a = 0; a < active.size(); ++a)
        std::copy_n(&tokens[active[a] * 4], 4, &active_tokens[a * 4]);
    std::vector<float> out(active.size() * 4);
    masked_forward(model, active_tokens.data(), active, 0.6, cache, out.data());

    for (size_t a = 0; a < active.size(); ++a)
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(out[a * 4 + c] - dense[active[a] * 4 + c]) <= 1e-5f);
}

TEST_CASE("masked forward equals the stale-substitution oracle") {
    const ToyDiT model = ToyDiT::make(small_config());
    const uint32_t n = 32;
    const BlockGrid grid = BlockGrid::make(1, 4, 8, {1, 2, 2});  // 8 blocks of 4 tokens
    Rng rng(10);

    // Capture K,V at an earlier state, then let the latents drift.
    const auto stale_tokens = random_tokens(n, 4, 11);
    KVCapture capture;
    std::vector<float> scratch(stale_tokens.size());
    full_forward(model, stale_tokens.data(), n, 0.30, scratch.data(), &capture);

    auto current = stale_tokens;
    for (float& v : current) v += 0.1f * rng.normal_f();

    for (int rep = 0; rep < 5; ++rep) {
        const uint32_t n_static = 1 + static_cast<uint32_t>(rng.below(3));
        const uint32_t n_moderate = 1 + static_cast<uint32_t>(rng.below(3));
        KVCacheStore cache = KVCacheStore::for_levels(model.cfg.layers, model.cfg.d_model,
                                                      split_levels(8, n_static, n_moderate), grid);
        cache.fill_from_capture(capture, 5);

        std::vector<uint32_t> active, frozen;
        for (uint32_t tok = 0; tok < n; ++tok)
            (cache.row_of_token[tok] < 0 ? active : frozen).push_back(tok);

        std::vector<float> active_tokens(active.size() * 4);
        for (size_t a = 0; a < active.size(); ++a)
            std::copy_n(&current[active[a] * 4], 4, &active_tokens[a * 4]);
        std::vector<float> masked(active.size() * 4);
        masked_forward(model, active_tokens.data(), active, 0.45, cache, masked.data());

        std::vector<float> oracle(current.size());
        dense_forward_with_stale_kv(model, current.data(), n, 0.45, frozen, capture,
                                    oracle.data());
        for (size_t a = 0; a < active.size(); ++a)
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs(masked[a * 4 + c] - oracle[active[a] * 4 + c]) <= 1e-5f);
    }
}

TEST_CASE("cached-KV concatenation order does not change outputs") {
    const ToyDiT model = ToyDiT::make(small_config());
    const uint32_t n = 16;
    const BlockGrid grid = BlockGrid::make(1, 4, 4, {1, 2, 2});  // 4 blocks of 4 tokens
    const auto tokens = random_tokens(n, 4, 13);
    KVCapture capture;
    std::vector<float> scratch(tokens.size());
    full_forward(model, tokens.data(), n, 0.2, scratch.data(), &capture);

    // Same frozen set, once as Static rows and once as Moderate rows: the
    // concatenation segments swap order.
    std::vector<float> out_a, out_b;
    for (const LevelMap levels : {split_levels(4, 2, 0), split_levels(4, 0, 2)}) {
        KVCacheStore cache =
            KVCacheStore::for_levels(model.cfg.layers, model.cfg.d_model, levels, grid);
        cache.fill_from_capture(capture, 1);
        std::vector<uint32_t> active;
        for (uint32_t tok = 8; tok < 16; ++tok) active.push_back(tok);
        std::vector<float> active_tokens(active.size() * 4);
        for (size_t a = 0; a < active.size(); ++a)
            std::copy_n(&tokens[active[a] * 4], 4, &active_tokens[a * 4]);
        std::vector<float> out(active.size() * 4);
        masked_forward(model, active_tokens.data(), active, 0.2, cache, out.data());
        (out_a.empty() ? out_a : out_b) = out;
    }
    CHECK(max_abs_diff(out_a, out_b) <= 1e-6f);
}

TEST_CASE("coverage violations are invalid state") {
    const ToyDiT model = ToyDiT::make(small_config());
    KVCacheStore cache = KVCacheStore::empty(model.cfg.layers, model.cfg.d_model, 8);
    const auto tokens = random_tokens(4, 4, 14);
    std::vector<uint32_t> active{0, 1, 2, 3};  // tokens 4..7 neither active nor cached
    std::vector<float> out(tokens.size());
    CHECK_THROWS_AS(masked_forward(model, tokens.data(), active, 0.1, cache, out.data()),
                    InvalidStateError);
}

TEST_CASE("cache memory report follows the closed form") {
    KVCacheStore empty = KVCacheStore::empty(4, 64, 2000);
    CHECK(cache_memory_report(empty).total_bytes == 0);

    // 1000 frozen tokens, d_model 64, 4 layers: 4*1000*64*2*4 bytes.
    BlockGrid grid = BlockGrid::make(1, 40, 50, {1, 1, 1});
    LevelMap levels;
    levels.levels.assign(2000, Level::Active);
    for (uint32_t b = 0; b < 600; ++b) levels.levels[b] = Level::Static;
    for (uint32_t b = 600; b < 1000; ++b) levels.levels[b] = Level::Moderate;
    KVCacheStore cache = KVCacheStore::for_levels(4, 64, levels, grid);
    const CacheMemoryReport rep = cache_memory_report(cache);
    CHECK(rep.total_bytes == 2048000);
    CHECK(rep.entries.size() == 8);
    // Allocator-backed measurement within 10 percent of the formula.
    CHECK(std::abs(static_cast<double>(rep.measured_bytes) - 2048000.0) <= 0.1 * 2048000.0);
    CHECK(rep.fraction_of_full == doctest::Approx(0.5));
}

TEST_CASE("dit config validation") {
    DiTConfig cfg = small_config();
    cfg.heads = 5;
    CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
    cfg = small_config();
    cfg.d_model = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
}
