#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hiforead/hierarchy.hpp"
#include "hiforead/series.hpp"

namespace hiforead::testsup {

/// Total -> {X, Y}; X -> {XA, XB, XC}; Y -> {YA, YB}.
std::vector<std::pair<NodeId, NodeId>> fig5_edges();

/// Balanced random tree: `level_sizes[k]` nodes at level k+1; children are
/// attached to parents round-robin with a random extra shuffle.
std::vector<std::pair<NodeId, NodeId>> random_tree_edges(
    std::mt19937_64& rng, const std::vector<int>& level_sizes);

struct SeriesSpec {
    double base = 100.0;
    double trend = 0.0; // per step
    std::vector<int> periods;
    std::vector<double> amplitudes;
    std::vector<double> phases; // in steps
    double noise_sd = 0.0;
};

std::vector<double> seasonal_series(std::mt19937_64& rng, std::size_t length,
                                    const SeriesSpec& spec);

/// Builds a frame directly from leaf vectors (no CSV round trip).
SeriesFrame frame_from_leaves(const Hierarchy& h,
                              const std::vector<std::vector<double>>& leaves,
                              Frequency frequency = Frequency::daily,
                              std::int64_t start_key = 0);

struct Dataset {
    std::unique_ptr<Hierarchy> hierarchy;
    SeriesFrame frame;
    Frequency frequency = Frequency::daily;
};

/// 8-node, 3-level tree with heterogeneous weekly seasonality, length T.
Dataset fig5_seasonal_dataset(std::uint64_t seed, std::size_t length);

/// Quarterly 4-level tree with level sizes 1/4/32/304 and 80 observations
/// per series; per-leaf quarterly seasonality with varied phase.
Dataset tourism_shaped_dataset(std::uint64_t seed);

/// Daily 4-level tree with level sizes 1/2/4/963 and 440 observations;
/// occupancy-like values with weekly seasonality.
Dataset traffic_shaped_dataset(std::uint64_t seed);

/// Writes `observations.csv` and `hierarchy.csv` for a dataset into `dir`.
void write_dataset_csv(const std::string& dir, const Dataset& dataset);

/// A small 4-level dataset (1/2/4/12 leaves) for fast pipeline tests.
Dataset small_4level_dataset(std::uint64_t seed, std::size_t length,
                             Frequency frequency = Frequency::daily);

} // namespace hiforead::testsup
