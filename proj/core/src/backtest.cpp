#include "hiforead/backtest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "hiforead/errors.hpp"
#include "hiforead/log.hpp"
#include "hiforead/metrics.hpp"
#include "hiforead/parallel.hpp"

namespace hiforead {

namespace {

bool row_covers_level(std::size_t row, int level, int levels) {
    const Stage stage = backtest_stage_rows[row];
    switch (stage) {
        case Stage::BO:
        case Stage::TD:
        case Stage::SSWFS: return true;
        case Stage::HHAFA: return level >= 2;
        case Stage::MINT: return level <= levels - 1;
        default: return false;
    }
}

const ForecastSet& row_set(const StageOutputs& stages, std::size_t row) {
    switch (backtest_stage_rows[row]) {
        case Stage::BO: return stages.bo;
        case Stage::TD: return stages.td;
        case Stage::HHAFA: return stages.hhafa;
        case Stage::MINT: return stages.mint;
        default: return stages.final_set; // SSWFS row scores the final set
    }
}

BacktestReport::StageCoherence row_coherence(const Hierarchy& h,
                                             const StageOutputs& stages,
                                             std::size_t row) {
    BacktestReport::StageCoherence out;
    const Stage stage = backtest_stage_rows[row];
    if (stage == Stage::MINT) {
        if (h.levels() == 2) return out; // root only, trivially coherent
        const Hierarchy sub = restrict_to_levels(h, h.levels() - 1);
        ForecastSet sub_set;
        sub_set.stage = Stage::MINT;
        sub_set.values.resize(sub.node_count());
        for (std::size_t s = 0; s < sub.node_count(); ++s) {
            sub_set.values[s] = stages.mint.at(h.index_of(sub.id_of(s)));
        }
        const CoherenceReport r = check_coherence(sub, sub_set);
        out.coherent = r.coherent;
        out.max_rel_violation = r.max_rel_violation;
        return out;
    }
    const CoherenceReport r = check_coherence(h, row_set(stages, row));
    out.coherent = r.coherent;
    out.max_rel_violation = r.max_rel_violation;
    return out;
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

} // namespace

BacktestReport run_backtest(const SeriesFrame& frame, const Hierarchy& h,
                            const PipelineConfig& config,
                            BaseForecastProvider provider) {
    using clock = std::chrono::steady_clock;
    if (!provider) {
        provider = [](const SeriesFrame& f, const Hierarchy& hier,
                      const PipelineConfig& cfg, const OriginPlan& plan,
                      std::vector<std::string>* notes) {
            return prepare_base_forecasts(f, hier, cfg, plan, notes);
        };
    }

    const std::size_t n = h.node_count();
    const std::size_t rows = backtest_stage_rows.size();
    const auto folds = make_folds(frame.length(), config.horizon, config.folds,
                                  config.effective_min_train());

    BacktestReport report;
    report.levels = h.levels();
    report.node_ids = h.node_ids();
    report.node_levels.resize(n);
    for (std::size_t node = 0; node < n; ++node) {
        report.node_levels[node] = h.level_of(node);
    }
    report.folds = folds;
    report.fold_apes.assign(
        rows, std::vector<std::vector<std::optional<double>>>(
                  folds.size(), std::vector<std::optional<double>>(n)));
    report.coherence.assign(rows, {});
    report.runtime_seconds.assign(rows, 0.0);
    report.weights.assign(folds.size(),
                          std::vector<std::array<double, 3>>(n));

    for (std::size_t v = 0; v < folds.size(); ++v) {
        const BacktestFold& fold = folds[v];

        OriginPlan plan;
        plan.history_end = fold.train_end;
        plan.horizon = config.horizon;
        plan.target_offset = config.horizon; // test block sits after validation
        plan.selection_folds = {fold};
        plan.bo_folds = {fold};

        const auto prep_start = clock::now();
        const auto base = provider(frame, h, config, plan, &report.notes);
        report.prep_seconds +=
            std::chrono::duration<double>(clock::now() - prep_start).count();

        const StageOutputs stages = run_multistage(
            frame, h, base, fold.train_end, config.horizon,
            multistage_config(config,
                              mix_seed(config.seed, static_cast<std::uint64_t>(
                                                        fold.fold_id))),
            config.workers);

        for (std::size_t node = 0; node < n; ++node) {
            report.weights[v][node] = stages.weights[node].w;
            if (stages.weights_fallback[node] && v == 0) {
                report.notes.push_back("node '" + h.id_of(node) +
                                       "': weight optimization undefined, "
                                       "equal weights used");
            }
        }

        for (std::size_t row = 0; row < rows; ++row) {
            const ForecastSet& set = row_set(stages, row);
            for (std::size_t node = 0; node < n; ++node) {
                if (!row_covers_level(row, h.level_of(node), report.levels)) continue;
                if (!set.covers(node)) continue;
                const std::span<const double> truth(
                    frame.values[node].data() + fold.test_begin,
                    fold.test_end - fold.test_begin);
                report.fold_apes[row][v][node] = ape(set.at(node), truth);
            }
            const auto coherence = row_coherence(h, stages, row);
            report.coherence[row].coherent &= coherence.coherent;
            report.coherence[row].max_rel_violation =
                std::max(report.coherence[row].max_rel_violation,
                         coherence.max_rel_violation);
            report.runtime_seconds[row] += stages.stage_seconds[row];
        }
    }

    // Across-fold mean APE per node, then level summaries.
    report.mean_apes.assign(rows, std::vector<std::optional<double>>(n));
    report.level_cells.assign(
        rows, std::vector<BacktestReport::Cell>(
                  static_cast<std::size_t>(report.levels)));
    for (std::size_t row = 0; row < rows; ++row) {
        for (std::size_t node = 0; node < n; ++node) {
            double total = 0.0;
            std::size_t defined = 0;
            for (std::size_t v = 0; v < folds.size(); ++v) {
                if (report.fold_apes[row][v][node]) {
                    total += *report.fold_apes[row][v][node];
                    ++defined;
                }
            }
            if (defined > 0) {
                report.mean_apes[row][node] = total / static_cast<double>(defined);
            }
        }
        for (int level = 1; level <= report.levels; ++level) {
            auto& cell = report.level_cells[row][static_cast<std::size_t>(level - 1)];
            cell.covered = row_covers_level(row, level, report.levels);
            if (!cell.covered) continue;
            std::vector<double> values;
            for (std::size_t node : h.level_nodes(level)) {
                if (report.mean_apes[row][node]) {
                    values.push_back(*report.mean_apes[row][node]);
                } else {
                    ++cell.excluded;
                }
            }
            cell.nodes = values.size();
            if (values.empty()) {
                cell.covered = false;
                continue;
            }
            const LevelSummary summary = level_summary(std::move(values));
            cell.mean = summary.mean;
            cell.median = summary.median;
        }
    }

    for (std::size_t row = 0; row < rows; ++row) {
        log::info(std::string(stage_name(backtest_stage_rows[row])) +
                  " stage time: " + format_double(report.runtime_seconds[row]) +
                  " s");
    }
    log::info("base model preparation time: " +
              format_double(report.prep_seconds) + " s");
    return report;
}

void write_backtest_summary_csv(const BacktestReport& report,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "level,stage,mean_ape,median_ape\n";
    for (int level = 1; level <= report.levels; ++level) {
        for (std::size_t row = 0; row < backtest_stage_rows.size(); ++row) {
            const auto& cell =
                report.level_cells[row][static_cast<std::size_t>(level - 1)];
            if (!cell.covered) continue;
            out << level << ',' << stage_name(backtest_stage_rows[row]) << ','
                << format_double(cell.mean) << ',' << format_double(cell.median)
                << '\n';
        }
    }
}

void write_backtest_detail_json(const BacktestReport& report,
                                const std::string& path) {
    nlohmann::json doc;
    doc["levels"] = report.levels;
    doc["folds"] = nlohmann::json::array();
    for (const auto& fold : report.folds) {
        doc["folds"].push_back({{"fold_id", fold.fold_id},
                                {"train", {fold.train_begin, fold.train_end}},
                                {"validation", {fold.val_begin, fold.val_end}},
                                {"test", {fold.test_begin, fold.test_end}}});
    }
    doc["nodes"] = nlohmann::json::array();
    for (std::size_t node = 0; node < report.node_ids.size(); ++node) {
        doc["nodes"].push_back({{"id", report.node_ids[node]},
                                {"level", report.node_levels[node]}});
    }
    auto ape_json = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    doc["ape"] = nlohmann::json::object();
    for (std::size_t row = 0; row < backtest_stage_rows.size(); ++row) {
        nlohmann::json stage_doc;
        stage_doc["mean"] = nlohmann::json::array();
        for (const auto& v : report.mean_apes[row]) stage_doc["mean"].push_back(ape_json(v));
        stage_doc["folds"] = nlohmann::json::array();
        for (const auto& fold_values : report.fold_apes[row]) {
            nlohmann::json fold_doc = nlohmann::json::array();
            for (const auto& v : fold_values) fold_doc.push_back(ape_json(v));
            stage_doc["folds"].push_back(std::move(fold_doc));
        }
        doc["ape"][stage_name(backtest_stage_rows[row])] = std::move(stage_doc);
    }
    doc["level_summary"] = nlohmann::json::object();
    for (std::size_t row = 0; row < backtest_stage_rows.size(); ++row) {
        nlohmann::json rows_doc = nlohmann::json::array();
        for (int level = 1; level <= report.levels; ++level) {
            const auto& cell =
                report.level_cells[row][static_cast<std::size_t>(level - 1)];
            if (!cell.covered) {
                rows_doc.push_back(nullptr);
            } else {
                rows_doc.push_back({{"mean", cell.mean},
                                    {"median", cell.median},
                                    {"nodes", cell.nodes},
                                    {"excluded", cell.excluded}});
            }
        }
        doc["level_summary"][stage_name(backtest_stage_rows[row])] =
            std::move(rows_doc);
    }
    doc["coherence"] = nlohmann::json::object();
    for (std::size_t row = 0; row < backtest_stage_rows.size(); ++row) {
        doc["coherence"][stage_name(backtest_stage_rows[row])] = {
            {"coherent", report.coherence[row].coherent},
            {"max_rel_violation", report.coherence[row].max_rel_violation}};
    }
    doc["weights"] = nlohmann::json::array();
    for (const auto& fold_weights : report.weights) {
        nlohmann::json fold_doc = nlohmann::json::array();
        for (const auto& w : fold_weights) fold_doc.push_back({w[0], w[1], w[2]});
        doc["weights"].push_back(std::move(fold_doc));
    }
    doc["notes"] = report.notes;

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << doc.dump(2) << '\n';
}

std::string format_backtest_table(const BacktestReport& report) {
    std::string out;
    char line[512];
    std::snprintf(line, sizeof(line), "%-10s", "stage");
    out += line;
    for (int level = 1; level <= report.levels; ++level) {
        std::snprintf(line, sizeof(line), " | L%d mean   median ", level);
        out += line;
    }
    out += '\n';
    out += std::string(out.size() - 1, '-');
    out += '\n';

    for (std::size_t row = 0; row < backtest_stage_rows.size(); ++row) {
        std::snprintf(line, sizeof(line), "%-10s",
                      stage_name(backtest_stage_rows[row]));
        out += line;
        for (int level = 1; level <= report.levels; ++level) {
            const auto& cell =
                report.level_cells[row][static_cast<std::size_t>(level - 1)];
            if (!cell.covered) {
                std::snprintf(line, sizeof(line), " | %8s %8s", "-", "-");
            } else {
                std::snprintf(line, sizeof(line), " | %7.2f%% %7.2f%%",
                              100.0 * cell.mean, 100.0 * cell.median);
            }
            out += line;
        }
        const bool coherent = report.coherence[row].coherent;
        out += coherent ? "  *" : "";
        out += '\n';
    }

    // Improvement of the final (SSWFS) row over the BO row.
    std::snprintf(line, sizeof(line), "%-10s", "vs BO");
    out += line;
    const std::size_t bo_row = 0;
    const std::size_t final_row = backtest_stage_rows.size() - 1;
    for (int level = 1; level <= report.levels; ++level) {
        const auto& bo = report.level_cells[bo_row][static_cast<std::size_t>(level - 1)];
        const auto& fin =
            report.level_cells[final_row][static_cast<std::size_t>(level - 1)];
        if (!bo.covered || !fin.covered || bo.mean == 0.0 || bo.median == 0.0) {
            std::snprintf(line, sizeof(line), " | %8s %8s", "-", "-");
        } else {
            std::snprintf(line, sizeof(line), " | %+7.2f%% %+7.2f%%",
                          100.0 * (bo.mean - fin.mean) / bo.mean,
                          100.0 * (bo.median - fin.median) / bo.median);
        }
        out += line;
    }
    out += '\n';
    return out;
}

} // namespace hiforead
