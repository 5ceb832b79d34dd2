#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hiforead/bo_ensemble.hpp"
#include "hiforead/forecast_set.hpp"
#include "hiforead/hierarchy.hpp"
#include "hiforead/series.hpp"
#include "hiforead/spectral.hpp"

namespace hiforead {

/// Average historical share of each node relative to the root, indexed by
/// node; the root's entry is 1.
struct ProportionTable {
    std::vector<double> p;
};

/// Mean of value[node][t] / value[root][t] over the last `window` steps
/// before `history_end`, skipping steps where the root is zero. Throws when
/// every step in the window has a zero root.
ProportionTable topdown_proportions(const SeriesFrame& frame, std::size_t window,
                                    std::size_t history_end);

/// Distributes the root forecast to every node by its proportion; the root
/// forecast passes through unchanged (bit-identical).
ForecastSet topdown_forecast(const std::vector<double>& root_forecast,
                             const ProportionTable& proportions,
                             const Hierarchy& h);

/// Blends the top-down and base forecasts per node with the Jaccard
/// similarity of that node's seasonality set against the reference node's:
/// out = J * td + (1 - J) * base. The reference node keeps its base forecast.
ForecastSet hhafa_adjust(const ForecastSet& bo, const ForecastSet& td,
                         const std::vector<SeasonalitySet>& seasets,
                         std::size_t reference, const Hierarchy& h);

/// Trace-minimizing reconciliation with a diagonal weight matrix:
/// P = (S^T W^-1 S)^-1 S^T W^-1 and reconciled = S P base. `h` is the
/// (sub)hierarchy being reconciled; `base` must cover all of its nodes and
/// `w_diag` holds one positive variance per node.
ForecastSet mintrace_wls_weighted(const Hierarchy& h, const ForecastSet& base,
                                  std::span<const double> w_diag);

/// MinTrace-WLS with W estimated as the per-node mean squared residual,
/// floored at 1e-12 * max(1, mean |base forecast|)^2.
ForecastSet mintrace_wls(const Hierarchy& h, const ForecastSet& base,
                         const std::vector<std::vector<double>>& residuals);

/// Per-subtree top-down forecasts for the bottom level: each level-K node
/// gets its parent's forecast scaled by the mean historical share of the
/// child within the subtree (parent-zero steps skipped; a parent with no
/// nonzero step in the window splits equally).
ForecastSet subtree_topdown_bottom(const SeriesFrame& frame, const Hierarchy& h,
                                   const ForecastSet& parent_forecasts,
                                   std::size_t window, std::size_t history_end);

struct SswFsResult {
    ForecastSet set; // covers the bottom level
    std::size_t equal_split_steps = 0;
};

/// Stratified scale-weighted synchronization of the bottom level. Within
/// each level-(K-1) subtree the children are blended (Jaccard of child vs
/// parent seasonality, top-down vs base) and then rescaled so they sum to the
/// parent forecast exactly at every step; a step whose blended sum is zero
/// falls back to an equal split.
SswFsResult ssw_fs(const Hierarchy& h, const ForecastSet& parent_final,
                   const ForecastSet& bottom, const ForecastSet& td_bottom,
                   const std::vector<SeasonalitySet>& seasets);

struct MultistageConfig {
    std::size_t td_window = 0; // 0: use the forecast horizon
    int max_peaks = 5;
    int tau = 0; // 0: floor(history length / 2)
    bool nonnegative = false;
    BoConfig bo;
};

/// Per-node inputs to the multistage run: h-step forecasts from the three
/// base models at the forecast origin, their in-sample residuals, and the
/// per-fold validation data driving the weight optimization.
struct NodeBaseForecasts {
    std::array<std::vector<double>, 3> target;
    std::array<std::vector<double>, 3> residuals;
    std::vector<FoldObjectiveData> folds;
};

struct StageOutputs {
    ForecastSet bo, td, hhafa, mint, sswfs, final_set;
    std::vector<EnsembleWeights> weights;          // per node
    std::vector<std::uint8_t> weights_fallback;    // BO failed, equal weights used
    std::vector<SeasonalitySet> seasets;           // per node
    std::size_t equal_split_steps = 0;
    /// Wall-clock seconds for stages BO, TD, HHAFA, MINT, SSWFS.
    std::array<double, 5> stage_seconds{};
};

/// Runs the full multistage pipeline at one forecast origin:
/// BO ensemble per node, top-down over all levels, HHAFA over levels 2..K
/// with the root as reference, MinTrace-WLS over levels 1..K-1, SSW-FS over
/// the bottom level. The final set is MINT for levels 1..K-1 plus SSWFS for
/// level K and is coherent across the whole hierarchy.
StageOutputs run_multistage(const SeriesFrame& frame, const Hierarchy& h,
                            const std::vector<NodeBaseForecasts>& base,
                            std::size_t history_end, std::size_t horizon,
                            const MultistageConfig& config, int workers);

/// Weighted sum of per-model residual vectors, aligned on their common
/// suffix; empty when any model has no residuals.
std::vector<double> ensemble_residuals(
    const std::array<std::vector<double>, 3>& residuals,
    const EnsembleWeights& weights);

} // namespace hiforead
