#include "jano/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "jano/rng.hpp"

namespace jano {

AnalyzerConfig AnalyzerConfig::defaults(uint32_t total_steps, uint32_t frames, BlockSize block) {
    AnalyzerConfig cfg;
    cfg.warmup_steps = std::max<uint32_t>(2, (total_steps + 9) / 10);
    cfg.block = block;
    if (frames == 1) {
        cfg.temporal_weight = 0.0;
        cfg.spatial_weight = 1.0;
    }
    return cfg;
}

void AnalyzerConfig::validate(uint32_t frames) const {
    if (warmup_steps < 2) throw InvalidInputError("analyzer: warm-up needs K >= 2");
    if (temporal_weight < 0.0 || spatial_weight < 0.0)
        throw InvalidInputError("analyzer: weights must be non-negative");
    if (std::abs(temporal_weight + spatial_weight - 1.0) > 1e-9)
        throw InvalidInputError("analyzer: weights must sum to 1");
    if (frames == 1 && temporal_weight != 0.0)
        throw InvalidInputError("analyzer: temporal weight must be 0 for single-frame latents");
    if (frames > 1 && temporal_weight <= spatial_weight)
        throw InvalidInputError("analyzer: temporal weight must exceed spatial weight for video");
    if (block.f == 0 || block.h == 0 || block.w == 0)
        throw InvalidInputError("analyzer: block dimensions must be positive");
}

double temporal_gradient(const BlockFeatureMatrix& block) {
    if (block.bf < 2) return 0.0;
    const uint32_t s = block.spatial();
    double acc = 0.0;
    for (uint32_t j = 0; j < s; ++j) {
        double sq = 0.0;
        for (uint32_t i = 0; i + 1 < block.bf; ++i) {
            const double d = static_cast<double>(block.at(i + 1, j)) - block.at(i, j);
            sq += d * d;
        }
        acc += std::sqrt(sq);
    }
    return acc / s;
}

double spatial_gradient(const BlockFeatureMatrix& block) {
    if (block.spatial() < 2) return 0.0;
    double acc = 0.0;
    for (uint32_t f = 0; f < block.bf; ++f) {
        double sq = 0.0;
        for (uint32_t h = 0; h < block.bh; ++h) {
            for (uint32_t w = 0; w < block.bw; ++w) {
                const double v = block.at(f, h * block.bw + w);
                if (w + 1 < block.bw) {
                    const double d = static_cast<double>(block.at(f, h * block.bw + w + 1)) - v;
                    sq += d * d;
                }
                if (h + 1 < block.bh) {
                    const double d = static_cast<double>(block.at(f, (h + 1) * block.bw + w)) - v;
                    sq += d * d;
                }
            }
        }
        acc += std::sqrt(sq);
    }
    return acc / block.bf;
}

double second_order_diffs(std::span<const double> g) {
    const size_t K = g.size();
    if (K < 2) throw InvalidInputError("second_order_diffs: needs K >= 2 gradients");
    const size_t dk = K / 2;
    double acc = 0.0;
    for (size_t k = 0; k < dk; ++k) acc += std::abs(g[k + dk] - g[k]);
    return acc;
}

ComplexityMap complexity_map(const DenoisingRun& run, const AnalyzerConfig& cfg) {
    return complexity_map(std::span<const LatentTensor>(run.steps), cfg);
}

ComplexityMap complexity_map(std::span<const LatentTensor> steps, const AnalyzerConfig& cfg) {
    if (steps.empty()) throw InvalidInputError("complexity_map: empty run");
    const LatentTensor& first = steps.front();
    cfg.validate(first.frames);
    const uint32_t K = cfg.warmup_steps;
    if (steps.size() < K)
        throw InvalidInputError("complexity_map: run has " + std::to_string(steps.size()) +
                                " steps, needs K = " + std::to_string(K));

    const BlockGrid grid = BlockGrid::make(first.frames, first.height, first.width, cfg.block);
    const uint32_t nb = grid.block_count();

    // Per-step gradients over the warm-up window.
    std::vector<double> tg(static_cast<size_t>(nb) * K);
    std::vector<double> sg(static_cast<size_t>(nb) * K);
    for (uint32_t k = 0; k < K; ++k) {
        const Tensor3 avg = channel_average(steps[k]);
        const std::vector<BlockFeatureMatrix> blocks = partition_blocks(avg, cfg.block);
        for (uint32_t b = 0; b < nb; ++b) {
            tg[static_cast<size_t>(b) * K + k] = temporal_gradient(blocks[b]);
            sg[static_cast<size_t>(b) * K + k] = spatial_gradient(blocks[b]);
        }
    }

    const double wt = first.frames == 1 ? 0.0 : cfg.temporal_weight;
    const double ws = first.frames == 1 ? 1.0 : cfg.spatial_weight;

    ComplexityMap map;
    map.grid = grid;
    map.raw.resize(nb);
    for (uint32_t b = 0; b < nb; ++b) {
        const std::span<const double> trow(&tg[static_cast<size_t>(b) * K], K);
        const std::span<const double> srow(&sg[static_cast<size_t>(b) * K], K);
        map.raw[b] = wt * second_order_diffs(trow) + ws * second_order_diffs(srow);
    }

    const auto [mn, mx] = std::minmax_element(map.raw.begin(), map.raw.end());
    map.normalized.resize(nb, 0.0);
    if (*mx > *mn) {
        const double span = *mx - *mn;
        for (uint32_t b = 0; b < nb; ++b) map.normalized[b] = (map.raw[b] - *mn) / span;
    }
    return map;
}

namespace detail {

// Row-column 2-D DFT; patches are small so naive per-line transforms suffice.
double highfreq_energy_ratio(const float* patch, uint32_t rows, uint32_t cols) {
    using cd = std::complex<double>;
    const size_t n = static_cast<size_t>(rows) * cols;
    std::vector<cd> tmp(n), spec(n);

    std::vector<cd> row_tw(static_cast<size_t>(cols) * cols);
    for (uint32_t k = 0; k < cols; ++k)
        for (uint32_t x = 0; x < cols; ++x)
            row_tw[static_cast<size_t>(k) * cols + x] =
                std::polar(1.0, -2.0 * 3.14159265358979323846 * k * x / cols);
    std::vector<cd> col_tw(static_cast<size_t>(rows) * rows);
    for (uint32_t k = 0; k < rows; ++k)
        for (uint32_t y = 0; y < rows; ++y)
            col_tw[static_cast<size_t>(k) * rows + y] =
                std::polar(1.0, -2.0 * 3.14159265358979323846 * k * y / rows);

    for (uint32_t y = 0; y < rows; ++y)
        for (uint32_t k = 0; k < cols; ++k) {
            cd acc = 0.0;
            for (uint32_t x = 0; x < cols; ++x)
                acc += static_cast<double>(patch[static_cast<size_t>(y) * cols + x]) *
                       row_tw[static_cast<size_t>(k) * cols + x];
            tmp[static_cast<size_t>(y) * cols + k] = acc;
        }
    for (uint32_t k = 0; k < cols; ++k)
        for (uint32_t m = 0; m < rows; ++m) {
            cd acc = 0.0;
            for (uint32_t y = 0; y < rows; ++y)
                acc += tmp[static_cast<size_t>(y) * cols + k] *
                       col_tw[static_cast<size_t>(m) * rows + y];
            spec[static_cast<size_t>(m) * cols + k] = acc;
        }

    // Signed bin frequencies give the centered-spectrum radius directly.
    const double radius = std::min(rows, cols) / 4.0;
    const double r2 = radius * radius;
    double total = 0.0, outside = 0.0, dc = 0.0;
    for (uint32_t m = 0; m < rows; ++m) {
        const double fy = m <= rows / 2 ? m : static_cast<double>(m) - rows;
        for (uint32_t k = 0; k < cols; ++k) {
            const double e = std::norm(spec[static_cast<size_t>(m) * cols + k]);
            if (m == 0 && k == 0) {
                dc = e;  // excluded from the ratio
                continue;
            }
            const double fx = k <= cols / 2 ? k : static_cast<double>(k) - cols;
            total += e;
            if (fy * fy + fx * fx > r2) outside += e;
        }
    }
    // Constant-dominated slices leave only DFT roundoff outside DC.
    if (total <= 1e-20 * std::max(dc, 1.0)) return 0.0;
    return std::min(1.0, outside / total);
}

}  // namespace detail

std::vector<double> fft_ground_truth(const LatentTensor& clean, const BlockGrid& grid) {
    if (grid.frames != clean.frames || grid.height != clean.height || grid.width != clean.width)
        throw InvalidInputError("fft_ground_truth: grid does not match tensor");
    if (grid.block.h < 4 || grid.block.w < 4)
        throw InvalidInputError("fft_ground_truth: block spatial dims must be >= 4");

    const uint32_t bh = grid.block.h, bw = grid.block.w;
    std::vector<float> patch(static_cast<size_t>(bh) * bw);
    std::vector<double> scores(grid.block_count(), 0.0);

    for (uint32_t b = 0; b < grid.block_count(); ++b) {
        const BlockCoord c = grid.coord(b);
        const BlockGrid::Extent e = grid.extent(b);
        double acc = 0.0;
        uint32_t slices = 0;
        for (uint32_t ch = 0; ch < clean.channels; ++ch) {
            for (uint32_t f = e.f0; f < e.f1; ++f) {
                // Edge-replicated patch, same convention as partition_blocks.
                for (uint32_t dh = 0; dh < bh; ++dh) {
                    const uint32_t h = std::min(c.hi * bh + dh, clean.height - 1);
                    for (uint32_t dw = 0; dw < bw; ++dw) {
                        const uint32_t w = std::min(c.wi * bw + dw, clean.width - 1);
                        patch[static_cast<size_t>(dh) * bw + dw] = clean.at(ch, f, h, w);
                    }
                }
                acc += detail::highfreq_energy_ratio(patch.data(), bh, bw);
                ++slices;
            }
        }
        scores[b] = slices ? acc / slices : 0.0;
    }
    return scores;
}

std::vector<double> convergence_ground_truth(const DenoisingRun& run, const BlockGrid& grid) {
    const uint32_t T = run.step_count();
    if (T < 15) throw InvalidInputError("convergence_ground_truth: needs at least 15 steps");
    const LatentTensor& first = run.steps.front();
    if (grid.frames != first.frames || grid.height != first.height || grid.width != first.width)
        throw InvalidInputError("convergence_ground_truth: grid does not match run");

    const auto token_map = grid.token_index_map();
    const size_t plane = grid.token_count();
    std::vector<double> scores(grid.block_count(), 0.0);

    for (uint32_t k = 10; k + 5 <= T; k += 5) {
        const LatentTensor& a = run.step(k);
        const LatentTensor& b = run.step(k + 5);
        for (uint32_t blk = 0; blk < grid.block_count(); ++blk) {
            double acc = 0.0;
            for (uint32_t tok : token_map[blk])
                for (uint32_t ch = 0; ch < a.channels; ++ch) {
                    const size_t i = static_cast<size_t>(ch) * plane + tok;
                    acc += std::abs(static_cast<double>(b.data[i]) - a.data[i]);
                }
            scores[blk] += acc / (static_cast<double>(token_map[blk].size()) * a.channels);
        }
    }

    const double mx = *std::max_element(scores.begin(), scores.end());
    if (mx > 0.0)
        for (double& s : scores) s /= mx;
    return scores;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    const size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw CorrelationUndefinedError("correlation undefined: constant input");
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

Correlation rank_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInputError("rank_correlation: size mismatch");
    if (a.size() < 3) throw InvalidInputError("rank_correlation: needs at least 3 points");
    Correlation c;
    c.pearson = pearson(a, b);
    const std::vector<double> ra = average_ranks(a);
    const std::vector<double> rb = average_ranks(b);
    c.spearman = pearson(ra, rb);
    return c;
}

double spearman_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                                   uint32_t shuffles, uint64_t seed) {
    const double observed = std::abs(rank_correlation(a, b).spearman);
    std::vector<double> perm(b.begin(), b.end());
    Rng rng = Rng::stream(seed, 0x7065726dULL);
    uint32_t exceed = 0;
    for (uint32_t s = 0; s < shuffles; ++s) {
        for (size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.below(i + 1)]);
        if (std::abs(rank_correlation(a, perm).spearman) >= observed) ++exceed;
    }
    return (1.0 + exceed) / (1.0 + shuffles);
}

std::vector<int> quantile_levels(std::span<const double> scores,
                                 const std::array<double, 3>& fractions) {
    const double fsum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(fsum - 1.0) > 1e-9)
        throw InvalidInputError("quantile_levels: fractions must sum to 1");
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t i, size_t j) { return scores[i] < scores[j]; });
    const size_t n1 = static_cast<size_t>(std::llround(fractions[0] * n));
    const size_t n2 = static_cast<size_t>(std::llround((fractions[0] + fractions[1]) * n));
    std::vector<int> levels(n, 3);
    for (size_t r = 0; r < n; ++r) {
        if (r < n1)
            levels[order[r]] = 1;
        else if (r < n2)
            levels[order[r]] = 2;
    }
    return levels;
}

double recognition_accuracy(std::span<const double> predicted, std::span<const double> reference,
                            const std::array<double, 3>& fractions) {
    if (predicted.size() != reference.size())
        throw InvalidInputError("recognition_accuracy: mismatched block grids");
    if (predicted.empty()) throw InvalidInputError("recognition_accuracy: empty maps");
    const std::vector<int> lp = quantile_levels(predicted, fractions);
    const std::vector<int> lr = quantile_levels(reference, fractions);
    size_t same = 0;
    for (size_t i = 0; i < lp.size(); ++i) same += lp[i] == lr[i];
    return static_cast<double>(same) / lp.size();
}

}  // namespace jano
