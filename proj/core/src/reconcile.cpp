#include "hiforead/reconcile.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "hiforead/errors.hpp"
#include "hiforead/log.hpp"
#include "hiforead/parallel.hpp"

namespace hiforead {

namespace {

std::size_t forecast_length(const ForecastSet& f, const Hierarchy& h) {
    std::size_t length = 0;
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        if (!f.covers(node)) continue;
        if (length == 0) length = f.at(node).size();
        if (f.at(node).size() != length) {
            throw Error("forecast length mismatch at node '" + h.id_of(node) + "'");
        }
    }
    if (length == 0) throw Error("empty forecast set");
    return length;
}

void require_covers(const ForecastSet& f, const Hierarchy& h,
                    const std::vector<std::size_t>& nodes, const char* what) {
    for (std::size_t node : nodes) {
        if (!f.covers(node)) {
            throw Error(std::string(what) + ": missing forecast for node '" +
                        h.id_of(node) + "'");
        }
    }
}

} // namespace

ProportionTable topdown_proportions(const SeriesFrame& frame, std::size_t window,
                                    std::size_t history_end) {
    const Hierarchy& h = *frame.hierarchy;
    if (history_end > frame.length()) throw Error("history_end beyond frame length");
    if (window == 0 || window > history_end) {
        throw Error("proportion window must be in [1, history length]");
    }
    const std::size_t begin = history_end - window;
    const auto& root = frame.values[h.root()];

    std::vector<std::size_t> valid_steps;
    for (std::size_t t = begin; t < history_end; ++t) {
        if (root[t] != 0.0) valid_steps.push_back(t);
    }
    if (valid_steps.empty()) {
        throw Error("top-down proportions: root history is zero over the whole window");
    }

    ProportionTable table;
    table.p.assign(h.node_count(), 0.0);
    table.p[h.root()] = 1.0;
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        if (node == h.root()) continue;
        double sum = 0.0;
        for (std::size_t t : valid_steps) sum += frame.values[node][t] / root[t];
        table.p[node] = sum / static_cast<double>(valid_steps.size());
    }
    return table;
}

ForecastSet topdown_forecast(const std::vector<double>& root_forecast,
                             const ProportionTable& proportions,
                             const Hierarchy& h) {
    if (proportions.p.size() != h.node_count()) {
        throw Error("topdown_forecast: missing proportion entries");
    }
    ForecastSet out;
    out.stage = Stage::TD;
    out.values.resize(h.node_count());
    out.values[h.root()] = root_forecast;
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        if (node == h.root()) continue;
        auto& v = out.values[node];
        v.resize(root_forecast.size());
        for (std::size_t t = 0; t < root_forecast.size(); ++t) {
            v[t] = proportions.p[node] * root_forecast[t];
        }
    }
    return out;
}

ForecastSet hhafa_adjust(const ForecastSet& bo, const ForecastSet& td,
                         const std::vector<SeasonalitySet>& seasets,
                         std::size_t reference, const Hierarchy& h) {
    if (seasets.size() != h.node_count()) {
        throw Error("hhafa_adjust: seasonality set count mismatch");
    }
    ForecastSet out;
    out.stage = Stage::HHAFA;
    out.values.resize(h.node_count());
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        const bool in_bo = bo.covers(node);
        const bool in_td = td.covers(node);
        if (in_bo != in_td) {
            throw Error("hhafa_adjust: node '" + h.id_of(node) +
                        "' missing from one input");
        }
        if (!in_bo) continue;
        if (node == reference) {
            out.values[node] = bo.at(node);
            continue;
        }
        const double similarity = jaccard(seasets[node], seasets[reference]);
        const auto& bo_v = bo.at(node);
        const auto& td_v = td.at(node);
        if (bo_v.size() != td_v.size()) {
            throw Error("hhafa_adjust: forecast length mismatch at node '" +
                        h.id_of(node) + "'");
        }
        auto& v = out.values[node];
        v.resize(bo_v.size());
        for (std::size_t t = 0; t < bo_v.size(); ++t) {
            v[t] = similarity * td_v[t] + (1.0 - similarity) * bo_v[t];
        }
    }
    return out;
}

ForecastSet mintrace_wls_weighted(const Hierarchy& h, const ForecastSet& base,
                                  std::span<const double> w_diag) {
    const std::size_t n = h.node_count();
    const std::size_t m = h.leaf_count();
    if (w_diag.size() != n) throw Error("mintrace: weight diagonal size mismatch");
    for (double w : w_diag) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error("mintrace: weights must be positive and finite");
        }
    }
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    require_covers(base, h, all, "mintrace");
    const std::size_t steps = forecast_length(base, h);

    const SummingMatrix sm = summing_matrix(h);
    Eigen::MatrixXd s(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                static_cast<double>(sm.at(r, c));
        }
    }
    Eigen::VectorXd inv_w(n);
    for (std::size_t i = 0; i < n; ++i) {
        inv_w(static_cast<Eigen::Index>(i)) = 1.0 / w_diag[i];
    }

    const Eigen::MatrixXd stw = s.transpose() * inv_w.asDiagonal(); // m x n
    const Eigen::MatrixXd a = stw * s;                              // m x m

    Eigen::MatrixXd base_matrix(n, steps);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& v = base.at(r);
        for (std::size_t t = 0; t < steps; ++t) {
            base_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = v[t];
        }
    }
    const Eigen::MatrixXd rhs = stw * base_matrix; // m x steps

    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        const double scale = a.trace() / static_cast<double>(m);
        bool ok = false;
        for (double jitter = 1e-8; jitter <= 1e-4 + 1e-20; jitter *= 10.0) {
            Eigen::MatrixXd jittered = a;
            jittered.diagonal().array() += jitter * scale;
            llt.compute(jittered);
            if (llt.info() == Eigen::Success) {
                ok = true;
                break;
            }
        }
        if (!ok) throw Error("mintrace: S^T W^-1 S singular even with jitter");
    }
    const Eigen::MatrixXd bottom = llt.solve(rhs); // m x steps
    const Eigen::MatrixXd reconciled = s * bottom; // n x steps

    ForecastSet out;
    out.stage = Stage::MINT;
    out.values.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        auto& v = out.values[r];
        v.resize(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            v[t] = reconciled(static_cast<Eigen::Index>(r),
                              static_cast<Eigen::Index>(t));
        }
    }
    return out;
}

ForecastSet mintrace_wls(const Hierarchy& h, const ForecastSet& base,
                         const std::vector<std::vector<double>>& residuals) {
    if (residuals.size() != h.node_count()) {
        throw Error("mintrace: residual vector count mismatch");
    }
    std::vector<double> w(h.node_count());
    for (std::size_t node = 0; node < h.node_count(); ++node) {
        const auto& r = residuals[node];
        if (r.empty()) {
            throw Error("mintrace: empty residuals for node '" + h.id_of(node) + "'");
        }
        double mean_sq = 0.0;
        for (double v : r) mean_sq += v * v;
        mean_sq /= static_cast<double>(r.size());

        double scale = 0.0;
        for (double v : base.at(node)) scale += std::abs(v);
        scale = std::max(1.0, scale / static_cast<double>(base.at(node).size()));
        w[node] = std::max(mean_sq, 1e-12 * scale * scale);
    }
    return mintrace_wls_weighted(h, base, w);
}

ForecastSet subtree_topdown_bottom(const SeriesFrame& frame, const Hierarchy& h,
                                   const ForecastSet& parent_forecasts,
                                   std::size_t window, std::size_t history_end) {
    if (history_end > frame.length()) throw Error("history_end beyond frame length");
    if (window == 0 || window > history_end) {
        throw Error("proportion window must be in [1, history length]");
    }
    const int bottom_level = h.levels();
    require_covers(parent_forecasts, h, h.level_nodes(bottom_level - 1),
                   "subtree top-down");
    const std::size_t begin = history_end - window;

    ForecastSet out;
    out.stage = Stage::TD;
    out.values.resize(h.node_count());
    for (std::size_t parent : h.level_nodes(bottom_level - 1)) {
        const auto& children = h.children_of(parent);
        const auto& parent_history = frame.values[parent];
        std::vector<std::size_t> valid_steps;
        for (std::size_t t = begin; t < history_end; ++t) {
            if (parent_history[t] != 0.0) valid_steps.push_back(t);
        }
        const auto& pf = parent_forecasts.at(parent);
        for (std::size_t child : children) {
            double share;
            if (valid_steps.empty()) {
                share = 1.0 / static_cast<double>(children.size());
            } else {
                double sum = 0.0;
                for (std::size_t t : valid_steps) {
                    sum += frame.values[child][t] / parent_history[t];
                }
                share = sum / static_cast<double>(valid_steps.size());
            }
            auto& v = out.values[child];
            v.resize(pf.size());
            for (std::size_t t = 0; t < pf.size(); ++t) v[t] = share * pf[t];
        }
    }
    return out;
}

SswFsResult ssw_fs(const Hierarchy& h, const ForecastSet& parent_final,
                   const ForecastSet& bottom, const ForecastSet& td_bottom,
                   const std::vector<SeasonalitySet>& seasets) {
    const int bottom_level = h.levels();
    require_covers(parent_final, h, h.level_nodes(bottom_level - 1), "ssw_fs");
    require_covers(bottom, h, h.level_nodes(bottom_level), "ssw_fs");
    require_covers(td_bottom, h, h.level_nodes(bottom_level), "ssw_fs");
    if (seasets.size() != h.node_count()) {
        throw Error("ssw_fs: seasonality set count mismatch");
    }

    SswFsResult result;
    result.set.stage = Stage::SSWFS;
    result.set.values.resize(h.node_count());

    for (std::size_t parent : h.level_nodes(bottom_level - 1)) {
        const auto& children = h.children_of(parent);
        const auto& pf = parent_final.at(parent);
        const std::size_t steps = pf.size();

        // Blend each child, then rescale the subtree to match the parent.
        std::vector<std::vector<double>> blended(children.size());
        for (std::size_t c = 0; c < children.size(); ++c) {
            const std::size_t child = children[c];
            const double similarity = jaccard(seasets[parent], seasets[child]);
            const auto& base_v = bottom.at(child);
            const auto& td_v = td_bottom.at(child);
            if (base_v.size() != steps || td_v.size() != steps) {
                throw Error("ssw_fs: forecast length mismatch at node '" +
                            h.id_of(child) + "'");
            }
            auto& b = blended[c];
            b.resize(steps);
            for (std::size_t t = 0; t < steps; ++t) {
                b[t] = similarity * td_v[t] + (1.0 - similarity) * base_v[t];
            }
        }
        for (std::size_t c = 0; c < children.size(); ++c) {
            result.set.values[children[c]].resize(steps);
        }
        for (std::size_t t = 0; t < steps; ++t) {
            double agg = 0.0;
            for (const auto& b : blended) agg += b[t];
            if (agg == 0.0) {
                ++result.equal_split_steps;
                const double share = pf[t] / static_cast<double>(children.size());
                for (std::size_t c = 0; c < children.size(); ++c) {
                    result.set.values[children[c]][t] = share;
                }
            } else {
                for (std::size_t c = 0; c < children.size(); ++c) {
                    result.set.values[children[c]][t] = pf[t] * blended[c][t] / agg;
                }
            }
        }
    }
    return result;
}

std::vector<double> ensemble_residuals(
    const std::array<std::vector<double>, 3>& residuals,
    const EnsembleWeights& weights) {
    std::size_t len = residuals[0].size();
    for (const auto& r : residuals) len = std::min(len, r.size());
    std::vector<double> out(len, 0.0);
    for (std::size_t m = 0; m < residuals.size(); ++m) {
        const std::size_t offset = residuals[m].size() - len;
        for (std::size_t t = 0; t < len; ++t) {
            out[t] += weights.w[m] * residuals[m][offset + t];
        }
    }
    return out;
}

StageOutputs run_multistage(const SeriesFrame& frame, const Hierarchy& h,
                            const std::vector<NodeBaseForecasts>& base,
                            std::size_t history_end, std::size_t horizon,
                            const MultistageConfig& config, int workers) {
    const std::size_t n = h.node_count();
    if (base.size() != n) throw Error("run_multistage: base forecast count mismatch");
    if (history_end < 4 || history_end > frame.length()) {
        throw Error("run_multistage: history_end out of range");
    }
    if (horizon == 0) throw Error("run_multistage: horizon must be >= 1");
    for (std::size_t node = 0; node < n; ++node) {
        for (const auto& f : base[node].target) {
            if (f.size() != horizon) {
                throw Error("run_multistage: target forecast length mismatch at '" +
                            h.id_of(node) + "'");
            }
        }
    }

    StageOutputs out;
    using clock = std::chrono::steady_clock;
    auto mark = clock::now();
    auto lap = [&mark] {
        const auto now = clock::now();
        const double seconds = std::chrono::duration<double>(now - mark).count();
        mark = now;
        return seconds;
    };

    // Seasonality sets from the history before the origin.
    const int tau = config.tau > 0 ? config.tau
                                   : static_cast<int>(history_end / 2);
    out.seasets.resize(n);
    parallel_for(n, workers, [&](std::size_t node) {
        const std::span<const double> history(frame.values[node].data(), history_end);
        out.seasets[node] =
            dominant_periods(periodogram(history), config.max_peaks, tau);
    });

    // Stage BO: per-node weight optimization and ensemble combination.
    out.weights.assign(n, EnsembleWeights{});
    out.weights_fallback.assign(n, 0);
    out.bo.stage = Stage::BO;
    out.bo.values.resize(n);
    parallel_for(n, workers, [&](std::size_t node) {
        BoConfig bo = config.bo;
        bo.seed = mix_seed(config.bo.seed, node);
        try {
            out.weights[node] = optimize_weights(base[node].folds, bo).weights;
        } catch (const Error&) {
            out.weights[node] = EnsembleWeights{};
            out.weights_fallback[node] = 1;
        }
        out.bo.values[node] = combine(base[node].target, out.weights[node]);
    });
    out.stage_seconds[0] = lap();

    // Stage TD.
    const std::size_t window =
        config.td_window > 0 ? std::min(config.td_window, history_end) :
        std::min(horizon, history_end);
    const ProportionTable proportions =
        topdown_proportions(frame, window, history_end);
    out.td = topdown_forecast(out.bo.at(h.root()), proportions, h);
    out.stage_seconds[1] = lap();

    // Stage HHAFA, reference = root.
    out.hhafa = hhafa_adjust(out.bo, out.td, out.seasets, h.root(), h);
    out.stage_seconds[2] = lap();

    // Stage MINT over levels 1..K-1.
    const int levels = h.levels();
    if (levels == 2) {
        out.mint.stage = Stage::MINT;
        out.mint.values.resize(n);
        out.mint.values[h.root()] = out.hhafa.at(h.root());
    } else {
        const Hierarchy sub = restrict_to_levels(h, levels - 1);
        ForecastSet sub_base;
        sub_base.stage = Stage::HHAFA;
        sub_base.values.resize(sub.node_count());
        std::vector<std::vector<double>> sub_residuals(sub.node_count());
        for (std::size_t s = 0; s < sub.node_count(); ++s) {
            const std::size_t full = h.index_of(sub.id_of(s));
            sub_base.values[s] = out.hhafa.at(full);
            sub_residuals[s] =
                ensemble_residuals(base[full].residuals, out.weights[full]);
            if (sub_residuals[s].empty()) sub_residuals[s].push_back(0.0);
        }
        const ForecastSet sub_mint = mintrace_wls(sub, sub_base, sub_residuals);
        out.mint.stage = Stage::MINT;
        out.mint.values.resize(n);
        for (std::size_t s = 0; s < sub.node_count(); ++s) {
            out.mint.values[h.index_of(sub.id_of(s))] = sub_mint.at(s);
        }
    }
    out.stage_seconds[3] = lap();

    // Stage SSW-FS over the bottom level.
    const ForecastSet td_bottom =
        subtree_topdown_bottom(frame, h, out.mint, window, history_end);
    SswFsResult ssw = ssw_fs(h, out.mint, out.hhafa, td_bottom, out.seasets);
    out.equal_split_steps = ssw.equal_split_steps;
    out.sswfs = std::move(ssw.set);
    out.stage_seconds[4] = lap();

    // FINAL = MINT on levels 1..K-1 plus SSWFS on level K.
    out.final_set.stage = Stage::FINAL;
    out.final_set.values.resize(n);
    for (std::size_t node = 0; node < n; ++node) {
        if (h.is_leaf(node)) {
            out.final_set.values[node] = out.sswfs.at(node);
        } else {
            out.final_set.values[node] = out.mint.at(node);
        }
    }

    // Optional demand semantics: clip negatives and rescale each subtree so
    // coherence survives the clipping.
    if (config.nonnegative) {
        auto& final_values = out.final_set.values;
        auto& root_v = final_values[h.root()];
        for (double& v : root_v) v = std::max(0.0, v);
        for (int k = 1; k < levels; ++k) {
            for (std::size_t parent : h.level_nodes(k)) {
                const auto& children = h.children_of(parent);
                const auto& pv = final_values[parent];
                for (std::size_t t = 0; t < pv.size(); ++t) {
                    double sum = 0.0;
                    for (std::size_t child : children) {
                        final_values[child][t] = std::max(0.0, final_values[child][t]);
                        sum += final_values[child][t];
                    }
                    if (sum == 0.0) {
                        const double share =
                            pv[t] / static_cast<double>(children.size());
                        for (std::size_t child : children) {
                            final_values[child][t] = share;
                        }
                    } else {
                        const double factor = pv[t] / sum;
                        for (std::size_t child : children) {
                            final_values[child][t] *= factor;
                        }
                    }
                }
            }
        }
    }
    return out;
}

} // namespace hiforead
