#include "hiforead/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "hiforead/errors.hpp"

namespace hiforead {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
}

void expect_keys(const json& object, const std::set<std::string>& allowed,
                 const std::string& prefix) {
    for (const auto& [key, value] : object.items()) {
        if (!allowed.count(key)) {
            bad_key(prefix.empty() ? key : prefix + "." + key, "unknown key");
        }
    }
}

double number_at(const json& object, const std::string& key,
                 const std::string& prefix, double fallback) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number()) bad_key(prefix + key, "expected a number");
    return v.get<double>();
}

std::string string_at(const json& object, const std::string& key,
                      const std::string& prefix, const std::string& fallback) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_string()) bad_key(prefix + key, "expected a string");
    return v.get<std::string>();
}

} // namespace

Stage parse_stage(const std::string& text) {
    std::string upper;
    for (char c : text) upper.push_back(static_cast<char>(std::toupper(c)));
    if (upper == "BO") return Stage::BO;
    if (upper == "TD") return Stage::TD;
    if (upper == "HHAFA") return Stage::HHAFA;
    if (upper == "MINT") return Stage::MINT;
    if (upper == "SSWFS" || upper == "SSW-FS") return Stage::SSWFS;
    if (upper == "FINAL") return Stage::FINAL;
    throw ConfigError("unknown stage '" + text + "'");
}

HyperGrid default_grid(ModelKind kind) {
    switch (kind) {
        case ModelKind::lag_regression:
            return {{"lambda", {1e-4, 1e-2, 1.0}}};
        case ModelKind::harmonic_regression:
            return {{"fourier_order", {1, 2}}, {"lambda", {1e-6, 1e-2, 1.0}}};
        case ModelKind::ets_additive:
            return {{"alpha", {0.2, 0.5, 0.8}}, {"beta", {0.05, 0.2}}};
        case ModelKind::seasonal_naive:
            return {};
    }
    return {};
}

std::vector<ForecasterSpec> expand_grid(ModelKind kind, const HyperGrid& grid) {
    const HyperGrid& effective = grid.empty() ? default_grid(kind) : grid;
    std::vector<ForecasterSpec> specs;
    specs.push_back(ForecasterSpec{kind, {}, {}});
    for (const auto& [key, values] : effective) {
        if (values.empty()) {
            throw ConfigError("models." + std::string(model_kind_name(kind)) + "." +
                              key + ": empty value list");
        }
        std::vector<ForecasterSpec> expanded;
        expanded.reserve(specs.size() * values.size());
        for (const auto& spec : specs) {
            for (double value : values) {
                ForecasterSpec next = spec;
                next.hyper[key] = value;
                expanded.push_back(std::move(next));
            }
        }
        specs = std::move(expanded);
    }
    return specs;
}

PipelineConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!root.is_object()) throw ConfigError(path + ": config must be a JSON object");

    expect_keys(root,
                {"data", "frequency", "horizon", "folds", "fill_policy",
                 "nonnegative", "min_train", "td", "spectral", "bo", "models",
                 "workers", "seed", "output_dir", "stages"},
                "");

    PipelineConfig config;
    if (root.contains("data")) {
        const auto& data = root.at("data");
        if (!data.is_object()) bad_key("data", "expected an object");
        expect_keys(data, {"observations", "hierarchy"}, "data");
        config.observations_path = string_at(data, "observations", "data.", "");
        config.hierarchy_path = string_at(data, "hierarchy", "data.", "");
    }
    config.frequency = parse_frequency(string_at(root, "frequency", "", "daily"));
    config.horizon = static_cast<std::size_t>(number_at(root, "horizon", "", 0));
    config.folds = static_cast<int>(number_at(root, "folds", "", 4));
    config.fill_policy = parse_fill_policy(string_at(root, "fill_policy", "", "zero"));
    if (root.contains("nonnegative")) {
        if (!root.at("nonnegative").is_boolean()) bad_key("nonnegative", "expected a boolean");
        config.nonnegative = root.at("nonnegative").get<bool>();
    }
    config.min_train = static_cast<std::size_t>(number_at(root, "min_train", "", 0));

    if (root.contains("td")) {
        const auto& td = root.at("td");
        if (!td.is_object()) bad_key("td", "expected an object");
        expect_keys(td, {"window"}, "td");
        config.td_window = static_cast<std::size_t>(number_at(td, "window", "td.", 0));
    }
    if (root.contains("spectral")) {
        const auto& spectral = root.at("spectral");
        if (!spectral.is_object()) bad_key("spectral", "expected an object");
        expect_keys(spectral, {"max_peaks", "tau"}, "spectral");
        config.max_peaks =
            static_cast<int>(number_at(spectral, "max_peaks", "spectral.", 5));
        config.tau = static_cast<int>(number_at(spectral, "tau", "spectral.", 0));
    }
    if (root.contains("bo")) {
        const auto& bo = root.at("bo");
        if (!bo.is_object()) bad_key("bo", "expected an object");
        expect_keys(bo,
                    {"acquisition", "init_points", "iterations", "seed", "xi",
                     "kappa", "length_scale", "noise"},
                    "bo");
        config.bo.acquisition =
            parse_acquisition(string_at(bo, "acquisition", "bo.", "EI"));
        config.bo.init_points = static_cast<int>(number_at(bo, "init_points", "bo.", 8));
        config.bo.iterations = static_cast<int>(number_at(bo, "iterations", "bo.", 25));
        config.bo.seed =
            static_cast<std::uint64_t>(number_at(bo, "seed", "bo.", 0));
        config.bo.xi = number_at(bo, "xi", "bo.", 0.0);
        config.bo.kappa = number_at(bo, "kappa", "bo.", 2.0);
        config.bo.gp.length_scale = number_at(bo, "length_scale", "bo.", 0.2);
        config.bo.gp.noise_variance = number_at(bo, "noise", "bo.", 1e-6);
    }
    if (root.contains("models")) {
        const auto& models = root.at("models");
        if (!models.is_object()) bad_key("models", "expected an object");
        for (const auto& [kind_name, grid_json] : models.items()) {
            const ModelKind kind = parse_model_kind(kind_name);
            if (!grid_json.is_object()) {
                bad_key("models." + kind_name, "expected an object of value lists");
            }
            HyperGrid grid;
            for (const auto& [hyper_name, values] : grid_json.items()) {
                if (!values.is_array()) {
                    bad_key("models." + kind_name + "." + hyper_name,
                            "expected an array of numbers");
                }
                std::vector<double> list;
                for (const auto& v : values) {
                    if (!v.is_number()) {
                        bad_key("models." + kind_name + "." + hyper_name,
                                "expected an array of numbers");
                    }
                    list.push_back(v.get<double>());
                }
                grid[hyper_name] = std::move(list);
            }
            config.model_grids[kind] = std::move(grid);
        }
    }
    config.workers = static_cast<int>(number_at(root, "workers", "", 1));
    config.seed = static_cast<std::uint64_t>(number_at(root, "seed", "", 0));
    config.output_dir = string_at(root, "output_dir", "", "out");
    if (root.contains("stages")) {
        const auto& stages = root.at("stages");
        if (!stages.is_array()) bad_key("stages", "expected an array of stage names");
        for (const auto& s : stages) {
            if (!s.is_string()) bad_key("stages", "expected an array of stage names");
            config.stages.push_back(parse_stage(s.get<std::string>()));
        }
    }
    return config;
}

std::vector<std::string> validate_config(const PipelineConfig& config) {
    std::vector<std::string> violations;
    auto flag = [&](const std::string& key, const std::string& why) {
        violations.push_back(key + ": " + why);
    };

    if (config.observations_path.empty()) {
        flag("data.observations", "missing observations path");
    } else if (!std::filesystem::exists(config.observations_path)) {
        flag("data.observations", "file not found: " + config.observations_path);
    }
    if (config.hierarchy_path.empty()) {
        flag("data.hierarchy", "missing hierarchy path");
    } else if (!std::filesystem::exists(config.hierarchy_path)) {
        flag("data.hierarchy", "file not found: " + config.hierarchy_path);
    }
    if (config.horizon < 1) flag("horizon", "must be >= 1");
    if (config.folds < 1) flag("folds", "must be >= 1");
    if (config.workers < 1) flag("workers", "must be >= 1");
    if (config.max_peaks < 1) flag("spectral.max_peaks", "must be >= 1");
    if (config.tau < 0) flag("spectral.tau", "must be >= 0");
    if (config.tau == 1) flag("spectral.tau", "must be 0 (auto) or >= 2");
    if (config.bo.init_points < 3) flag("bo.init_points", "must be >= 3");
    if (config.bo.iterations < 0) flag("bo.iterations", "must be >= 0");
    if (config.bo.gp.length_scale <= 0) flag("bo.length_scale", "must be > 0");
    if (config.bo.gp.noise_variance < 0) flag("bo.noise", "must be >= 0");
    return violations;
}

} // namespace hiforead
