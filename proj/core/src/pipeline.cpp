#include "hiforead/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "hiforead/errors.hpp"
#include "hiforead/log.hpp"
#include "hiforead/metrics.hpp"
#include "hiforead/parallel.hpp"

namespace hiforead {

namespace {

constexpr std::array<ModelKind, 3> ensemble_kinds{
    ModelKind::lag_regression, ModelKind::harmonic_regression,
    ModelKind::ets_additive};

std::vector<int> model_periods(const SeasonalitySet& seaset,
                               std::size_t shortest_train) {
    std::vector<int> periods;
    for (int p : seaset) {
        if (2 * static_cast<std::size_t>(p) <= shortest_train) periods.push_back(p);
    }
    return periods;
}

std::vector<double> last_value_forecast(std::span<const double> history,
                                        std::size_t steps) {
    return std::vector<double>(steps, history.empty() ? 0.0 : history.back());
}

} // namespace

MultistageConfig multistage_config(const PipelineConfig& config,
                                   std::uint64_t bo_seed) {
    MultistageConfig ms;
    ms.td_window = config.td_window;
    ms.max_peaks = config.max_peaks;
    ms.tau = config.tau;
    ms.nonnegative = config.nonnegative;
    ms.bo = config.bo;
    ms.bo.seed = bo_seed;
    return ms;
}

PreparedData load_inputs(const PipelineConfig& config) {
    PreparedData data;
    data.hierarchy = std::make_unique<Hierarchy>(
        load_hierarchy_csv(config.hierarchy_path));
    const auto records =
        load_long_csv(config.observations_path, "series_id", "timestamp", "value",
                      config.frequency);
    data.frame = build_series_frame(records, *data.hierarchy, config.fill_policy);
    data.folds = make_folds(data.frame.length(), config.horizon, config.folds,
                            config.effective_min_train());
    return data;
}

std::vector<NodeBaseForecasts> prepare_base_forecasts(
    const SeriesFrame& frame, const Hierarchy& h, const PipelineConfig& config,
    const OriginPlan& plan, std::vector<std::string>* notes) {
    const std::size_t n = h.node_count();
    if (plan.history_end < 4 || plan.history_end > frame.length()) {
        throw Error("prepare_base_forecasts: history_end out of range");
    }
    if (plan.selection_folds.empty()) {
        throw Error("prepare_base_forecasts: no selection folds");
    }

    // Shortest training window any fit will see, for seasonal-period safety.
    std::size_t shortest_train = plan.history_end;
    for (const auto& fold : plan.selection_folds) {
        shortest_train = std::min(shortest_train, fold.train_end - fold.train_begin);
    }
    for (const auto& fold : plan.bo_folds) {
        shortest_train = std::min(shortest_train, fold.train_end - fold.train_begin);
    }

    const int tau =
        config.tau > 0 ? config.tau : static_cast<int>(plan.history_end / 2);

    std::array<std::vector<ForecasterSpec>, 3> grids;
    for (std::size_t m = 0; m < ensemble_kinds.size(); ++m) {
        auto it = config.model_grids.find(ensemble_kinds[m]);
        grids[m] = expand_grid(ensemble_kinds[m],
                               it == config.model_grids.end() ? HyperGrid{}
                                                              : it->second);
    }

    std::vector<NodeBaseForecasts> base(n);
    std::mutex notes_mutex;
    auto note = [&](const std::string& message) {
        log::warn(message);
        if (notes != nullptr) {
            std::lock_guard<std::mutex> lock(notes_mutex);
            notes->push_back(message);
        }
    };

    parallel_for(n, config.workers, [&](std::size_t node) {
        const std::span<const double> series(frame.values[node]);
        const std::span<const double> history =
            series.subspan(0, plan.history_end);

        const SeasonalitySet seaset =
            dominant_periods(periodogram(history), config.max_peaks, tau);
        const std::vector<int> periods = model_periods(seaset, shortest_train);

        NodeBaseForecasts& out = base[node];
        for (std::size_t m = 0; m < ensemble_kinds.size(); ++m) {
            std::vector<ForecasterSpec> grid = grids[m];
            for (auto& spec : grid) spec.seasonal_periods = periods;

            ForecasterSpec selected = grid.front();
            try {
                selected = select_hyperparams(ensemble_kinds[m], grid,
                                              plan.selection_folds, series);
            } catch (const Error& e) {
                note("node '" + h.id_of(node) + "' " +
                     model_kind_name(ensemble_kinds[m]) +
                     ": hyper selection failed, using first candidate (" +
                     e.what() + ")");
            }

            // One fit on the visible history provides the target block and
            // the residuals for the MinT weights.
            std::vector<double> target_prediction;
            try {
                const FitState state = fit(selected, history, {0});
                target_prediction =
                    predict(state, plan.target_offset + plan.horizon);
                out.residuals[m] = state.residuals;
            } catch (const Error& e) {
                note("node '" + h.id_of(node) + "' " +
                     model_kind_name(ensemble_kinds[m]) +
                     ": fit failed, using last-value forecast (" + e.what() + ")");
                target_prediction = last_value_forecast(
                    history, plan.target_offset + plan.horizon);
                out.residuals[m] = {0.0};
            }
            out.target[m].assign(
                target_prediction.begin() +
                    static_cast<std::ptrdiff_t>(plan.target_offset),
                target_prediction.end());

            // Per-fold validation forecasts for the weight optimization.
            for (std::size_t f = 0; f < plan.bo_folds.size(); ++f) {
                const auto& fold = plan.bo_folds[f];
                if (m == 0) {
                    out.folds.emplace_back();
                    out.folds.back().truth.assign(
                        series.begin() + static_cast<std::ptrdiff_t>(fold.val_begin),
                        series.begin() + static_cast<std::ptrdiff_t>(fold.val_end));
                }
                const std::size_t val_len = fold.val_end - fold.val_begin;
                if (fold.train_end == plan.history_end) {
                    // Same origin as the target fit; reuse its prediction.
                    out.folds[f].model_forecasts[m].assign(
                        target_prediction.begin(),
                        target_prediction.begin() +
                            static_cast<std::ptrdiff_t>(val_len));
                    continue;
                }
                try {
                    const FitState state =
                        fit(selected,
                            series.subspan(fold.train_begin,
                                           fold.train_end - fold.train_begin),
                            {static_cast<std::int64_t>(fold.train_begin)});
                    out.folds[f].model_forecasts[m] = predict(state, val_len);
                } catch (const Error& e) {
                    note("node '" + h.id_of(node) + "' " +
                         model_kind_name(ensemble_kinds[m]) + " fold " +
                         std::to_string(fold.fold_id) +
                         ": fit failed, using last-value forecast (" + e.what() +
                         ")");
                    out.folds[f].model_forecasts[m] = last_value_forecast(
                        series.subspan(0, fold.train_end), val_len);
                }
            }
        }
    });
    return base;
}

ForecastRun run_forecast(const PipelineConfig& config) {
    ForecastRun run;
    run.data = load_inputs(config);
    const Hierarchy& h = *run.data.hierarchy;
    const SeriesFrame& frame = run.data.frame;

    OriginPlan plan;
    plan.history_end = frame.length();
    plan.horizon = config.horizon;
    plan.target_offset = 0;
    plan.selection_folds = run.data.folds;
    plan.bo_folds = run.data.folds;

    const auto base =
        prepare_base_forecasts(frame, h, config, plan, &run.notes);
    run.stages = run_multistage(frame, h, base, plan.history_end, plan.horizon,
                                multistage_config(config, mix_seed(config.seed, 0xFC)),
                                config.workers);
    return run;
}

namespace {

const ForecastSet& stage_set(const StageOutputs& stages, Stage stage) {
    switch (stage) {
        case Stage::BO: return stages.bo;
        case Stage::TD: return stages.td;
        case Stage::HHAFA: return stages.hhafa;
        case Stage::MINT: return stages.mint;
        case Stage::SSWFS: return stages.sswfs;
        case Stage::FINAL: return stages.final_set;
    }
    throw Error("unknown stage");
}

std::string lowercase(const char* text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(c));
    return out;
}

void write_stage_csv(const std::string& path, const Hierarchy& h,
                     const ForecastSet& set) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "node_id,level,step,stage,value\n";
    char buffer[64];
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        if (!set.covers(node)) continue;
        const auto& v = set.at(node);
        for (std::size_t t = 0; t < v.size(); ++t) {
            std::snprintf(buffer, sizeof(buffer), "%.12g", v[t]);
            out << h.id_of(node) << ',' << h.level_of(node) << ',' << t << ','
                << stage_name(set.stage) << ',' << buffer << '\n';
        }
    }
}

nlohmann::json coherence_json(const CoherenceReport& report) {
    return {{"coherent", report.coherent},
            {"max_abs_violation", report.max_abs_violation},
            {"max_rel_violation", report.max_rel_violation},
            {"tolerance", report.tolerance},
            {"violation_count", report.violation_count}};
}

} // namespace

bool write_forecast_outputs(const ForecastRun& run, const std::string& outdir,
                            std::vector<Stage> stages) {
    const Hierarchy& h = *run.data.hierarchy;
    if (stages.empty()) {
        stages = {Stage::BO, Stage::TD, Stage::HHAFA, Stage::MINT, Stage::SSWFS,
                  Stage::FINAL};
    }
    std::filesystem::create_directories(outdir);

    for (Stage stage : stages) {
        const auto path = std::filesystem::path(outdir) /
                          ("stage_" + lowercase(stage_name(stage)) + ".csv");
        write_stage_csv(path.string(), h, stage_set(run.stages, stage));
    }

    const bool want_final =
        std::find(stages.begin(), stages.end(), Stage::FINAL) != stages.end();
    bool final_coherent = true;
    if (want_final) {
        nlohmann::json doc;
        doc["stages"] = nlohmann::json::object();
        for (Stage stage : {Stage::BO, Stage::TD, Stage::HHAFA, Stage::FINAL}) {
            doc["stages"][stage_name(stage)] =
                coherence_json(check_coherence(h, stage_set(run.stages, stage)));
        }
        if (h.levels() > 2) {
            const Hierarchy sub = restrict_to_levels(h, h.levels() - 1);
            ForecastSet sub_set;
            sub_set.stage = Stage::MINT;
            sub_set.values.resize(sub.node_count());
            for (std::size_t s = 0; s < sub.node_count(); ++s) {
                sub_set.values[s] = run.stages.mint.at(h.index_of(sub.id_of(s)));
            }
            doc["stages"][stage_name(Stage::MINT)] =
                coherence_json(check_coherence(sub, sub_set));
        }
        const CoherenceReport final_report =
            check_coherence(h, run.stages.final_set);
        final_coherent = final_report.coherent;
        doc["final_coherent"] = final_coherent;

        std::ofstream out(std::filesystem::path(outdir) / "coherence.json");
        if (!out) throw Error("cannot write coherence.json");
        out << doc.dump(2) << '\n';
    }
    return final_coherent;
}

} // namespace hiforead
