#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "jano/block_grid.hpp"
#include "jano/scenes.hpp"

namespace jano {

struct AnalyzerConfig {
    uint32_t warmup_steps = 2;     // K, number of early steps consumed
    double temporal_weight = 0.7;  // omega_t
    double spatial_weight = 0.3;   // omega_s
    BlockSize block;

    /// K = ceil(0.10 * total_steps), clamped to >= 2; weights (0.7, 0.3) for
    /// video and (0, 1) for single-frame latents.
    static AnalyzerConfig defaults(uint32_t total_steps, uint32_t frames, BlockSize block);

    void validate(uint32_t frames) const;
};

struct ComplexityMap {
    BlockGrid grid;
    std::vector<double> raw;         // C_b = w_t dT_b + w_s dS_b
    std::vector<double> normalized;  // min-max per map; constant map -> all zeros
};

/// Mean over spatial positions of the L2 magnitude of adjacent-frame
/// differences. Zero when the block has a single frame.
double temporal_gradient(const BlockFeatureMatrix& block);

/// Mean over frames of the L2 magnitude of adjacent horizontal and vertical
/// neighbor differences. Zero when the block has a single spatial cell.
double spatial_gradient(const BlockFeatureMatrix& block);

/// sum_{k=1}^{floor(K/2)} |g(k + floor(K/2)) - g(k)| for a 1-based sequence
/// of K per-step gradients. K < 2 throws InvalidInputError.
double second_order_diffs(std::span<const double> per_step_gradients);

/// Early-stage block complexity over the first K steps of a run.
ComplexityMap complexity_map(const DenoisingRun& run, const AnalyzerConfig& cfg);
ComplexityMap complexity_map(std::span<const LatentTensor> steps, const AnalyzerConfig& cfg);

/// Ground-truth complexity: per block, mean over channels and block frames of
/// the spectral energy ratio outside the quarter-radius circle of the block's
/// centered 2-D DFT (patch-sized radius, DC excluded). All-zero slices give 0.
std::vector<double> fft_ground_truth(const LatentTensor& clean, const BlockGrid& grid);

/// Ground-truth convergence: accumulated per-block mean |x_{k+5} - x_k| over
/// k in {10, 15, ...}, max-normalized to [0, 1]. Needs at least 15 steps.
std::vector<double> convergence_ground_truth(const DenoisingRun& run, const BlockGrid& grid);

struct Correlation {
    double pearson = 0.0;
    double spearman = 0.0;
};

/// Pearson r and Spearman rho (average ranks on ties). Throws
/// InvalidInputError below 3 points and CorrelationUndefinedError on
/// zero-variance input.
Correlation rank_correlation(std::span<const double> a, std::span<const double> b);

/// Two-sided permutation p-value for Spearman rho (add-one estimator).
double spearman_permutation_pvalue(std::span<const double> a, std::span<const double> b,
                                   uint32_t shuffles, uint64_t seed);

inline constexpr std::array<double, 3> kEqualLevelFractions = {1.0 / 3, 1.0 / 3, 1.0 / 3};

/// Quantile bucketing into levels 1..3 by ascending score; ties broken by index.
std::vector<int> quantile_levels(std::span<const double> scores,
                                 const std::array<double, 3>& fractions);

/// Fraction of blocks assigned the same quantile level by both maps.
double recognition_accuracy(std::span<const double> predicted, std::span<const double> reference,
                            const std::array<double, 3>& fractions = kEqualLevelFractions);

namespace detail {
/// Energy fraction outside the quarter-radius circle of the centered 2-D DFT
/// of a rows x cols patch (row-major), DC bin excluded from the total.
double highfreq_energy_ratio(const float* patch, uint32_t rows, uint32_t cols);
}  // namespace detail

}  // namespace jano
