#include "jano/dit.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "jano/parallel.hpp"
#include "jano/rng.hpp"

namespace jano {

namespace {

void fill_normal(std::vector<float>& w, Rng& rng, double std_dev) {
    for (float& v : w) v = static_cast<float>(rng.normal() * std_dev);
}

/// C (n x m) = A (n x k) @ B (k x m). Row-local work: both the masked path
/// and its dense oracle feed identical rows through this, so float
/// accumulation diverges nowhere between them.
void matmul(const float* A, size_t n, size_t k, const float* B, size_t m, float* C) {
    parallel_for(n, [&](size_t begin, size_t end, uint32_t) {
        std::vector<float> acc(m);
        for (size_t i = begin; i < end; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0f);
            const float* arow = A + i * k;
            for (size_t kk = 0; kk < k; ++kk) {
                const float a = arow[kk];
                const float* brow = B + kk * m;
                for (size_t j = 0; j < m; ++j) acc[j] += a * brow[j];
            }
            float* crow = C + i * m;
            for (size_t j = 0; j < m; ++j) crow[j] = acc[j];
        }
    });
}

void layernorm_scale(const float* in, size_t n, size_t d, const float* scale, float* out) {
    constexpr double eps = 1e-5;
    for (size_t i = 0; i < n; ++i) {
        const float* row = in + i * d;
        double mean = 0.0;
        for (size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (size_t j = 0; j < d; ++j) {
            const double c = row[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        float* orow = out + i * d;
        for (size_t j = 0; j < d; ++j)
            orow[j] = static_cast<float>((row[j] - mean) * inv * scale[j]);
    }
}

std::vector<float> timestep_embedding(double t, uint32_t d) {
    std::vector<float> emb(d);
    const uint32_t half = d / 2;
    const double s = 1000.0 * t;
    for (uint32_t i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        emb[i] = static_cast<float>(std::sin(s * freq));
        emb[half + i] = static_cast<float>(std::cos(s * freq));
    }
    return emb;
}

float gelu(float x) {
    return static_cast<float>(0.5 * static_cast<double>(x) *
                              (1.0 + std::erf(static_cast<double>(x) * 0.7071067811865475)));
}

/// Softmax attention of queries (with row stride q_stride, head layout along
/// columns) over contiguous K/V (len x d). Query rows are blocked in fours to
/// amortize the K/V streams. Score dots and softmax weights are row-local
/// float work (identical between the masked path and its dense oracle); only
/// the reductions over the key axis are order-sensitive, and those run in a
/// fixed ascending key order with double accumulators, so results do not
/// depend on the worker count or the key ordering beyond float casts.
void attention(const float* q, size_t q_stride, size_t nq, const float* K, const float* V,
               size_t len, uint32_t d, uint32_t heads, float* out) {
    const uint32_t dh = d / heads;
    const float inv_sqrt = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dh)));
    constexpr size_t kQBlock = 4;
    parallel_for(nq, [&](size_t begin, size_t end, uint32_t) {
        std::vector<float> w(kQBlock * heads * len);
        std::vector<double> acc(kQBlock * d);
        std::vector<double> z(kQBlock * heads);
        for (size_t i0 = begin; i0 < end; i0 += kQBlock) {
            const size_t nb = std::min(kQBlock, end - i0);
            // Scores for every head of every blocked query, one pass over K.
            for (size_t j = 0; j < len; ++j) {
                const float* krow = K + j * d;
                for (size_t b = 0; b < nb; ++b) {
                    const float* qrow = q + (i0 + b) * q_stride;
                    float* wb = &w[b * heads * len];
                    for (uint32_t hh = 0; hh < heads; ++hh) {
                        const uint32_t off = hh * dh;
                        float dot = 0.0f;
                        for (uint32_t c = 0; c < dh; ++c) dot += qrow[off + c] * krow[off + c];
                        wb[hh * len + j] = dot * inv_sqrt;
                    }
                }
            }
            // Max-subtracted softmax weights; Z sums in key order.
            for (size_t b = 0; b < nb; ++b)
                for (uint32_t hh = 0; hh < heads; ++hh) {
                    float* wrow = &w[(b * heads + hh) * len];
                    float mx = -1e30f;
                    for (size_t j = 0; j < len; ++j) mx = std::max(mx, wrow[j]);
                    double zh = 0.0;
                    for (size_t j = 0; j < len; ++j) {
                        wrow[j] = std::exp(wrow[j] - mx);
                        zh += wrow[j];
                    }
                    z[b * heads + hh] = zh;
                }
            // Weighted value sums, one pass over V.
            std::fill(acc.begin(), acc.begin() + nb * d, 0.0);
            for (size_t j = 0; j < len; ++j) {
                const float* vrow = V + j * d;
                for (size_t b = 0; b < nb; ++b) {
                    const float* wb = &w[b * heads * len];
                    double* ab = &acc[b * d];
                    for (uint32_t hh = 0; hh < heads; ++hh) {
                        const double wj = wb[hh * len + j];
                        const uint32_t off = hh * dh;
                        for (uint32_t c = 0; c < dh; ++c) ab[off + c] += wj * vrow[off + c];
                    }
                }
            }
            for (size_t b = 0; b < nb; ++b) {
                float* orow = out + (i0 + b) * d;
                for (uint32_t hh = 0; hh < heads; ++hh)
                    for (uint32_t c = 0; c < dh; ++c)
                        orow[hh * dh + c] =
                            static_cast<float>(acc[b * d + hh * dh + c] / z[b * heads + hh]);
            }
        }
    });
}

struct LayerBuffers {
    std::vector<float> x, qkv, k, v, attn, proj, ff, ff2;
    std::vector<float> kcat, vcat;

    void resize(size_t n, uint32_t d, uint32_t ff_dim) {
        x.resize(n * d);
        qkv.resize(n * 3 * d);
        k.resize(n * d);
        v.resize(n * d);
        attn.resize(n * d);
        proj.resize(n * d);
        ff.resize(n * ff_dim);
        ff2.resize(n * d);
    }
};

void embed_tokens(const ToyDiT& model, const float* tokens, size_t n, double t,
                  std::vector<float>& h) {
    const uint32_t d = model.cfg.d_model;
    h.resize(n * d);
    matmul(tokens, n, model.cfg.token_dim, model.w_in.data(), d, h.data());
    const std::vector<float> temb = timestep_embedding(t, d);
    for (size_t i = 0; i < n; ++i)
        for (uint32_t j = 0; j < d; ++j) h[i * d + j] += temb[j];
}

void check_finite_inputs(const float* tokens, size_t count) {
    for (size_t i = 0; i < count; ++i)
        if (!std::isfinite(tokens[i]))
            throw NumericError("dit forward: non-finite input token value at index " +
                               std::to_string(i));
}

void split_kv(const std::vector<float>& qkv, size_t n, uint32_t d, std::vector<float>& k,
              std::vector<float>& v) {
    for (size_t i = 0; i < n; ++i) {
        std::memcpy(&k[i * d], &qkv[i * 3 * d + d], d * sizeof(float));
        std::memcpy(&v[i * d], &qkv[i * 3 * d + 2 * d], d * sizeof(float));
    }
}

void finish_layer(const ToyDiT& model, const DiTLayer& layer, LayerBuffers& buf,
                  std::vector<float>& h, size_t n) {
    const uint32_t d = model.cfg.d_model;
    const uint32_t ffd = model.cfg.ff_dim;
    matmul(buf.attn.data(), n, d, layer.w_out.data(), d, buf.proj.data());
    for (size_t i = 0; i < n * d; ++i) h[i] += buf.proj[i];
    layernorm_scale(h.data(), n, d, layer.norm2.data(), buf.x.data());
    matmul(buf.x.data(), n, d, layer.w_ff1.data(), ffd, buf.ff.data());
    for (float& f : buf.ff) f = gelu(f);
    matmul(buf.ff.data(), n, ffd, layer.w_ff2.data(), d, buf.ff2.data());
    for (size_t i = 0; i < n * d; ++i) h[i] += buf.ff2[i];
}

}  // namespace

void DiTConfig::validate() const {
    if (layers == 0 || d_model == 0 || heads == 0 || ff_dim == 0 || token_dim == 0)
        throw InvalidInputError("dit config: all dimensions must be positive");
    if (d_model % heads != 0) throw InvalidInputError("dit config: d_model must divide by heads");
    if (d_model % 2 != 0) throw InvalidInputError("dit config: d_model must be even");
}

ToyDiT ToyDiT::make(const DiTConfig& cfg) {
    cfg.validate();
    ToyDiT m;
    m.cfg = cfg;
    Rng rng = Rng::stream(cfg.seed, 0x646974ULL);
    m.w_in.resize(static_cast<size_t>(cfg.token_dim) * cfg.d_model);
    fill_normal(m.w_in, rng, 1.0 / std::sqrt(static_cast<double>(cfg.token_dim)));
    m.w_proj_out.resize(static_cast<size_t>(cfg.d_model) * cfg.token_dim);
    fill_normal(m.w_proj_out, rng, 1.0 / std::sqrt(static_cast<double>(cfg.d_model)));
    const double ds = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
    m.layers.resize(cfg.layers);
    for (DiTLayer& l : m.layers) {
        l.w_qkv.resize(static_cast<size_t>(cfg.d_model) * 3 * cfg.d_model);
        fill_normal(l.w_qkv, rng, ds);
        l.w_out.resize(static_cast<size_t>(cfg.d_model) * cfg.d_model);
        fill_normal(l.w_out, rng, ds);
        l.w_ff1.resize(static_cast<size_t>(cfg.d_model) * cfg.ff_dim);
        fill_normal(l.w_ff1, rng, ds);
        l.w_ff2.resize(static_cast<size_t>(cfg.ff_dim) * cfg.d_model);
        fill_normal(l.w_ff2, rng, 1.0 / std::sqrt(static_cast<double>(cfg.ff_dim)));
        l.norm1.assign(cfg.d_model, 1.0f);
        l.norm2.assign(cfg.d_model, 1.0f);
    }
    return m;
}

void full_forward(const ToyDiT& model, const float* tokens, uint32_t n, double t, float* out,
                  KVCapture* capture) {
    if (n == 0) throw InvalidInputError("full_forward: needs at least one token");
    const uint32_t d = model.cfg.d_model;
    check_finite_inputs(tokens, static_cast<size_t>(n) * model.cfg.token_dim);
    if (capture) {
        capture->tokens = n;
        capture->d_model = d;
        capture->keys.assign(model.cfg.layers, {});
        capture->values.assign(model.cfg.layers, {});
    }

    std::vector<float> h;
    embed_tokens(model, tokens, n, t, h);
    LayerBuffers buf;
    buf.resize(n, d, model.cfg.ff_dim);

    for (uint32_t li = 0; li < model.cfg.layers; ++li) {
        const DiTLayer& layer = model.layers[li];
        layernorm_scale(h.data(), n, d, layer.norm1.data(), buf.x.data());
        matmul(buf.x.data(), n, d, layer.w_qkv.data(), 3 * d, buf.qkv.data());
        split_kv(buf.qkv, n, d, buf.k, buf.v);
        if (capture) {
            capture->keys[li] = buf.k;
            capture->values[li] = buf.v;
        }
        attention(buf.qkv.data(), 3 * d, n, buf.k.data(), buf.v.data(), n, d, model.cfg.heads,
                  buf.attn.data());
        finish_layer(model, layer, buf, h, n);
    }
    matmul(h.data(), n, d, model.w_proj_out.data(), model.cfg.token_dim, out);
}

void dense_forward_with_stale_kv(const ToyDiT& model, const float* tokens, uint32_t n, double t,
                                 std::span<const uint32_t> stale_ids, const KVCapture& stale,
                                 float* out) {
    if (stale.tokens != n || stale.d_model != model.cfg.d_model ||
        stale.keys.size() != model.cfg.layers)
        throw InvalidInputError("dense_forward_with_stale_kv: capture shape mismatch");
    const uint32_t d = model.cfg.d_model;
    check_finite_inputs(tokens, static_cast<size_t>(n) * model.cfg.token_dim);

    std::vector<float> h;
    embed_tokens(model, tokens, n, t, h);
    LayerBuffers buf;
    buf.resize(n, d, model.cfg.ff_dim);

    for (uint32_t li = 0; li < model.cfg.layers; ++li) {
        const DiTLayer& layer = model.layers[li];
        layernorm_scale(h.data(), n, d, layer.norm1.data(), buf.x.data());
        matmul(buf.x.data(), n, d, layer.w_qkv.data(), 3 * d, buf.qkv.data());
        split_kv(buf.qkv, n, d, buf.k, buf.v);
        for (uint32_t id : stale_ids) {
            std::memcpy(&buf.k[static_cast<size_t>(id) * d], &stale.keys[li][static_cast<size_t>(id) * d],
                        d * sizeof(float));
            std::memcpy(&buf.v[static_cast<size_t>(id) * d],
                        &stale.values[li][static_cast<size_t>(id) * d], d * sizeof(float));
        }
        attention(buf.qkv.data(), 3 * d, n, buf.k.data(), buf.v.data(), n, d, model.cfg.heads,
                  buf.attn.data());
        finish_layer(model, layer, buf, h, n);
    }
    matmul(h.data(), n, d, model.w_proj_out.data(), model.cfg.token_dim, out);
}

KVCacheStore KVCacheStore::empty(uint32_t layers, uint32_t d_model, uint32_t total_tokens) {
    KVCacheStore c;
    c.num_layers = layers;
    c.d_model = d_model;
    c.total_tokens = total_tokens;
    c.row_of_token.assign(total_tokens, -1);
    c.slot_of_token.assign(total_tokens, -1);
    c.keys.resize(layers);
    c.values.resize(layers);
    return c;
}

KVCacheStore KVCacheStore::for_levels(uint32_t layers, uint32_t d_model, const LevelMap& levels,
                                      const BlockGrid& grid) {
    if (levels.levels.size() != grid.block_count())
        throw InvalidInputError("kv cache: level map does not match grid");
    KVCacheStore c = empty(layers, d_model, static_cast<uint32_t>(grid.token_count()));
    for (uint32_t b = 0; b < grid.block_count(); ++b) {
        const Level lv = levels.levels[b];
        if (lv == Level::Active) continue;
        const int slot = lv == Level::Static ? 0 : 1;
        for (uint32_t tok : grid.token_ids(b)) c.slot_of_token[tok] = static_cast<int8_t>(slot);
    }
    for (uint32_t tok = 0; tok < c.total_tokens; ++tok) {
        const int8_t slot = c.slot_of_token[tok];
        if (slot < 0) continue;
        c.row_of_token[tok] = static_cast<int32_t>(c.ids[slot].size());
        c.ids[slot].push_back(tok);
    }
    for (uint32_t li = 0; li < layers; ++li)
        for (int slot = 0; slot < 2; ++slot) {
            c.keys[li][slot].resize(c.ids[slot].size() * static_cast<size_t>(d_model));
            c.values[li][slot].resize(c.ids[slot].size() * static_cast<size_t>(d_model));
        }
    return c;
}

void KVCacheStore::fill_from_capture(const KVCapture& capture, int64_t step) {
    if (capture.tokens != total_tokens || capture.d_model != d_model ||
        capture.keys.size() != num_layers)
        throw InvalidInputError("kv cache: capture shape mismatch");
    for (uint32_t li = 0; li < num_layers; ++li)
        for (int slot = 0; slot < 2; ++slot)
            for (size_t r = 0; r < ids[slot].size(); ++r) {
                const size_t tok = ids[slot][r];
                std::memcpy(&keys[li][slot][r * d_model], &capture.keys[li][tok * d_model],
                            d_model * sizeof(float));
                std::memcpy(&values[li][slot][r * d_model], &capture.values[li][tok * d_model],
                            d_model * sizeof(float));
            }
    last_refresh[0] = last_refresh[1] = step;
}

CacheMemoryReport cache_memory_report(const KVCacheStore& cache) {
    CacheMemoryReport rep;
    for (uint32_t li = 0; li < cache.num_layers; ++li)
        for (int slot = 0; slot < 2; ++slot) {
            const uint64_t bytes =
                static_cast<uint64_t>(cache.ids[slot].size()) * cache.d_model * 2 * sizeof(float);
            rep.entries.push_back({li, slot + 1, bytes});
            rep.total_bytes += bytes;
        }
    for (uint32_t li = 0; li < cache.num_layers; ++li)
        for (int slot = 0; slot < 2; ++slot)
            rep.measured_bytes += (cache.keys[li][slot].capacity() +
                                   cache.values[li][slot].capacity()) *
                                  sizeof(float);
    const uint64_t full = static_cast<uint64_t>(cache.total_tokens) * cache.d_model * 2 *
                          sizeof(float) * std::max<uint32_t>(cache.num_layers, 1);
    rep.fraction_of_full = full ? static_cast<double>(rep.total_bytes) / full : 0.0;
    return rep;
}

void masked_forward(const ToyDiT& model, const float* active_tokens,
                    std::span<const uint32_t> active_ids, double t, KVCacheStore& cache,
                    float* out_active, int64_t step) {
    const uint32_t d = model.cfg.d_model;
    const size_t na = active_ids.size();
    if (na == 0) throw InvalidInputError("masked_forward: empty active set");
    if (cache.num_layers != model.cfg.layers || cache.d_model != d)
        throw InvalidInputError("masked_forward: cache does not match model");
    check_finite_inputs(active_tokens, na * model.cfg.token_dim);

    // Coverage: every token either active now or holding a cache row.
    std::vector<uint8_t> is_active(cache.total_tokens, 0);
    for (uint32_t id : active_ids) {
        if (id >= cache.total_tokens)
            throw InvalidInputError("masked_forward: active id out of range");
        is_active[id] = 1;
    }
    for (uint32_t tok = 0; tok < cache.total_tokens; ++tok)
        if (!is_active[tok] && cache.row_of_token[tok] < 0)
            throw InvalidStateError("masked_forward: token " + std::to_string(tok) +
                                    " is neither active nor cached");

    // Frozen rows per slot, concatenated after the active block: [active | Moderate | Static].
    std::array<std::vector<uint32_t>, 2> frozen_rows;
    for (int slot = 0; slot < 2; ++slot)
        for (size_t r = 0; r < cache.ids[slot].size(); ++r)
            if (!is_active[cache.ids[slot][r]]) frozen_rows[slot].push_back(static_cast<uint32_t>(r));
    const size_t len = na + frozen_rows[0].size() + frozen_rows[1].size();

    std::vector<float> h;
    embed_tokens(model, active_tokens, na, t, h);
    LayerBuffers buf;
    buf.resize(na, d, model.cfg.ff_dim);
    buf.kcat.resize(len * d);
    buf.vcat.resize(len * d);

    bool refreshed[2] = {false, false};
    for (uint32_t li = 0; li < model.cfg.layers; ++li) {
        const DiTLayer& layer = model.layers[li];
        layernorm_scale(h.data(), na, d, layer.norm1.data(), buf.x.data());
        matmul(buf.x.data(), na, d, layer.w_qkv.data(), 3 * d, buf.qkv.data());
        split_kv(buf.qkv, na, d, buf.k, buf.v);

        // Reactivated tokens refresh their rows before anything reads them.
        for (size_t i = 0; i < na; ++i) {
            const uint32_t id = active_ids[i];
            const int8_t slot = cache.slot_of_token[id];
            if (slot < 0) continue;
            const size_t row = static_cast<size_t>(cache.row_of_token[id]);
            std::memcpy(&cache.keys[li][slot][row * d], &buf.k[i * d], d * sizeof(float));
            std::memcpy(&cache.values[li][slot][row * d], &buf.v[i * d], d * sizeof(float));
            refreshed[slot] = true;
        }

        std::memcpy(buf.kcat.data(), buf.k.data(), na * d * sizeof(float));
        std::memcpy(buf.vcat.data(), buf.v.data(), na * d * sizeof(float));
        size_t at = na;
        for (int slot : {1, 0}) {
            for (uint32_t row : frozen_rows[slot]) {
                std::memcpy(&buf.kcat[at * d], &cache.keys[li][slot][static_cast<size_t>(row) * d],
                            d * sizeof(float));
                std::memcpy(&buf.vcat[at * d], &cache.values[li][slot][static_cast<size_t>(row) * d],
                            d * sizeof(float));
                ++at;
            }
        }

        attention(buf.qkv.data(), 3 * d, na, buf.kcat.data(), buf.vcat.data(), len, d,
                  model.cfg.heads, buf.attn.data());
        finish_layer(model, layer, buf, h, na);
    }
    matmul(h.data(), na, d, model.w_proj_out.data(), model.cfg.token_dim, out_active);

    for (int slot = 0; slot < 2; ++slot)
        if (refreshed[slot] && step >= 0) cache.last_refresh[slot] = step;
}

}  // namespace jano
