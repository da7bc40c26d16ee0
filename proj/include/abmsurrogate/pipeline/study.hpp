#pragma once

// Scenario configuration, method comparison and report emission.

#include <abmsurrogate/analysis/main_effects.hpp>
#include <abmsurrogate/analysis/pca.hpp>
#include <abmsurrogate/analysis/statistics.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/text.hpp>
#include <abmsurrogate/design/design.hpp>
#include <abmsurrogate/pipeline/runs.hpp>
#include <abmsurrogate/surrogates/model.hpp>

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace abmsurrogate::pipeline {

using surrogates::Method;

struct ScenarioConfig {
    std::vector<std::size_t> sizes{200, 400, 800, 1600};
    std::uint64_t baseSeed = 0;
    design::DesignMethod designMethod = design::DesignMethod::lptau;
    std::string rangesPath;      // empty: canonical ranges
    std::string demographyPath;  // empty: built-in constants
    std::vector<Method> methods{};
    surrogates::HyperParams hyper{};
    std::string outputDir = "report";
    unsigned jobs = 1;
    bool concurrentFits = false;  // fits in parallel; runtimes are then not reported
    bool mainEffects = true;
    std::size_t mainEffectsGrid = 20;
    std::size_t mainEffectsSamples = 500;

    ScenarioConfig() {
        for (const auto& info : surrogates::kMethods) methods.push_back(info.method);
    }

    /// Keys: sizes, baseSeed, design, ranges, demography, methods, outputDir,
    /// jobs, concurrent, mainEffects, mainEffects.grid, mainEffects.samples,
    /// plus `<method>.<field>` hyperparameter overrides.
    static ScenarioConfig from(const KeyValueConfig& kv) {
        ScenarioConfig c;
        for (const auto& [key, value] : kv.entries()) {
            if (key == "sizes") {
                c.sizes.clear();
                for (const auto& s : split(value, ',')) {
                    const double n = parse_number(s, key);
                    require(n >= 5 && n == std::floor(n), "scenario sizes must be integers >= 5");
                    c.sizes.push_back(static_cast<std::size_t>(n));
                }
            } else if (key == "baseSeed") {
                c.baseSeed = std::stoull(value);
            } else if (key == "design") {
                c.designMethod = design::parse_design_method(value);
            } else if (key == "ranges") {
                c.rangesPath = value;
            } else if (key == "demography") {
                c.demographyPath = value;
            } else if (key == "methods") {
                c.methods.clear();
                for (const auto& m : split(value, ',')) {
                    if (!trim(m).empty()) c.methods.push_back(surrogates::parse_method(m));
                }
            } else if (key == "outputDir") {
                c.outputDir = value;
            } else if (key == "jobs") {
                const double j = parse_number(value, key);
                require(j >= 1, "jobs must be >= 1");
                c.jobs = static_cast<unsigned>(j);
            } else if (key == "concurrent") {
                c.concurrentFits = value == "true" || value == "1";
            } else if (key == "mainEffects") {
                c.mainEffects = value == "true" || value == "1";
            } else if (key == "mainEffects.grid") {
                c.mainEffectsGrid = static_cast<std::size_t>(parse_number(value, key));
            } else if (key == "mainEffects.samples") {
                c.mainEffectsSamples = static_cast<std::size_t>(parse_number(value, key));
            } else if (key.find('.') == std::string::npos) {
                throw DataError("unknown config key '" + key + "'");
            }
        }
        c.hyper.apply(kv);
        return c;
    }

    static ScenarioConfig load(const std::string& path) { return from(KeyValueConfig::load(path)); }

    [[nodiscard]] design::ParamRanges ranges() const {
        return rangesPath.empty() ? design::ParamRanges::canonical() : design::ParamRanges::load(rangesPath);
    }

    [[nodiscard]] abm::DemographyConfig demography() const {
        return demographyPath.empty() ? abm::DemographyConfig{} : abm::DemographyConfig::load(demographyPath);
    }
};

struct MethodResult {
    Method method = Method::linear;
    bool ok = false;
    std::string error;
    std::optional<double> runtimeSeconds;  // fit only; absent in concurrent mode
    std::optional<double> mse;              // test set
    std::optional<double> validationMse;
    std::vector<double> actual;             // test targets
    std::vector<double> predicted;
    std::optional<double> speedScore;
    std::optional<double> accuracyScore;
    std::optional<analysis::MainEffectsResult> mainEffects;
};

struct PcaSummary {
    std::vector<std::string> variables;
    analysis::PcaResult result;
};

struct ScenarioReport {
    std::size_t scenario = 0;  // number of runs
    std::size_t trainSize = 0, validationSize = 0, testSize = 0;
    std::vector<MethodResult> methods;
    std::optional<PcaSummary> pca;
};

struct AnalysisReport {
    std::vector<ScenarioReport> scenarios;
};

/// Split seed of a scenario, so scenarios never share split indices.
inline std::uint64_t scenario_split_seed(std::uint64_t base_seed, std::size_t n) {
    return derive_seed(derive_seed(base_seed, 0x5eed5u), n);
}

inline std::uint64_t scenario_fit_seed(std::uint64_t base_seed, std::size_t n) {
    return derive_seed(derive_seed(base_seed, 0xf17u), n);
}

/// Fills speed and accuracy scores for methods that have the needed values.
inline void assign_relative_scores(std::vector<MethodResult>& methods) {
    auto fill = [&](auto value_of, auto target) {
        std::vector<double> values;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < methods.size(); ++i) {
            const std::optional<double> v = value_of(methods[i]);
            if (methods[i].ok && v && *v > 0.0 && std::isfinite(*v)) {
                values.push_back(*v);
                idx.push_back(i);
            }
        }
        if (values.size() < 2) return;
        const auto scores = analysis::relative_scores(values, true);
        for (std::size_t k = 0; k < idx.size(); ++k) methods[idx[k]].*target = scores[k];
    };
    fill([](const MethodResult& m) { return m.runtimeSeconds; }, &MethodResult::speedScore);
    fill([](const MethodResult& m) { return m.mse; }, &MethodResult::accuracyScore);
}

inline PcaSummary pca_of_runs(const std::vector<RunRecord>& runs) {
    const auto data = runs_to_dataset(runs);
    Matrix joined(data.rows(), data.dimension() + 1);
    joined.leftCols(data.dimension()) = data.X;
    joined.col(data.dimension()) = data.y;
    PcaSummary s{data.featureNames, analysis::pca_decompose(joined)};
    s.variables.emplace_back("output");
    return s;
}

/// One shared split, every configured method fitted on the training rows
/// (the MLP also sees the validation rows) and scored on the test rows.
/// A failing method is reported and never affects the others.
inline ScenarioReport compare_methods(const std::vector<RunRecord>& runs, const ScenarioConfig& config,
                                      std::ostream* log = nullptr) {
    const auto data = runs_to_dataset(runs);
    const auto n = static_cast<std::size_t>(data.rows());
    const auto split = analysis::split_dataset(n, scenario_split_seed(config.baseSeed, n));
    const auto train = data.subset(split.trainIdx);
    const auto val = data.subset(split.valIdx);
    const auto test = data.subset(split.testIdx);

    ScenarioReport report;
    report.scenario = n;
    report.trainSize = split.trainIdx.size();
    report.validationSize = split.valIdx.size();
    report.testSize = split.testIdx.size();

    surrogates::HyperParams hp = config.hyper;
    hp.seed = scenario_fit_seed(config.baseSeed, n);
    std::optional<design::ParamRanges> ranges;
    if (config.mainEffects) ranges = config.ranges();

    auto run_one = [&](Method method, bool timed) {
        MethodResult r;
        r.method = method;
        try {
            const auto t0 = std::chrono::steady_clock::now();
            const auto model = surrogates::fit(method, train, val, hp);
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (timed) r.runtimeSeconds = elapsed;
            const Vector pred = model.predict(test.X);
            r.mse = analysis::mse(test.y, pred);
            r.validationMse = analysis::mse(val.y, model.predict(val.X));
            r.actual.assign(test.y.data(), test.y.data() + test.y.size());
            r.predicted.assign(pred.data(), pred.data() + pred.size());
            if (ranges) {
                r.mainEffects = analysis::main_effects(model, *ranges, config.mainEffectsGrid,
                                                       config.mainEffectsSamples, derive_seed(hp.seed, 7));
            }
            r.ok = true;
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
            r.runtimeSeconds.reset();
            r.mse.reset();
        }
        return r;
    };

    if (config.concurrentFits) {
        std::vector<std::future<MethodResult>> futures;
        for (Method m : config.methods) futures.push_back(std::async(std::launch::async, run_one, m, false));
        for (auto& f : futures) report.methods.push_back(f.get());
    } else {
        for (Method m : config.methods) {
            if (log != nullptr) *log << "scenario " << n << ": fitting " << surrogates::method_display_name(m) << '\n';
            report.methods.push_back(run_one(m, true));
        }
    }
    if (log != nullptr) {
        for (const auto& r : report.methods) {
            if (!r.ok) *log << "scenario " << n << ": " << surrogates::method_display_name(r.method) << " failed: " << r.error << '\n';
        }
    }
    assign_relative_scores(report.methods);
    try {
        report.pca = pca_of_runs(runs);
    } catch (const std::exception& e) {
        if (log != nullptr) *log << "scenario " << n << ": PCA skipped: " << e.what() << '\n';
    }
    return report;
}

namespace report_detail {

inline std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

inline std::ofstream open(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

inline std::vector<Method> methods_in(const AnalysisReport& report) {
    std::vector<Method> out;
    for (const auto& s : report.scenarios) {
        for (const auto& m : s.methods) {
            if (std::find(out.begin(), out.end(), m.method) == out.end()) out.push_back(m.method);
        }
    }
    return out;
}

}  // namespace report_detail

inline void write_comparison_csv(std::ostream& out, const AnalysisReport& report) {
    out << "scenario,method,runtime_s,mse\n";
    for (const auto& s : report.scenarios) {
        for (const auto& m : s.methods) {
            out << s.scenario << ',' << surrogates::method_display_name(m.method) << ','
                << report_detail::opt(m.runtimeSeconds) << ',' << report_detail::opt(m.mse) << '\n';
        }
    }
}

inline void write_spider_csv(std::ostream& out, const AnalysisReport& report) {
    out << "scenario,method,speed_score,accuracy_score\n";
    for (const auto& s : report.scenarios) {
        for (const auto& m : s.methods) {
            out << s.scenario << ',' << surrogates::method_display_name(m.method) << ','
                << report_detail::opt(m.speedScore) << ',' << report_detail::opt(m.accuracyScore) << '\n';
        }
    }
}

/// Eigenvalues, cumulative fractions, retention and loadings, one row per component.
inline void write_pca_csv(std::ostream& out, const PcaSummary& pca) {
    out << "component,eigenvalue,cumulative_fraction,retained";
    for (const auto& v : pca.variables) out << ",loading_" << v;
    out << '\n';
    const auto& r = pca.result;
    for (Eigen::Index k = 0; k < r.eigenvalues.size(); ++k) {
        out << (k + 1) << ',' << format_number(r.eigenvalues(k)) << ',' << format_number(r.cumulativeVarianceFraction(k))
            << ',' << (static_cast<std::size_t>(k) < r.retainedCount ? 1 : 0);
        for (Eigen::Index v = 0; v < r.loadings.rows(); ++v) out << ',' << format_number(r.loadings(v, k));
        out << '\n';
    }
}

/// Correlation of each variable with the first two components.
inline void write_factor_map_csv(std::ostream& out, const PcaSummary& pca) {
    out << "variable,pc1,pc2\n";
    const Matrix corr = analysis::loading_correlations(pca.result);
    for (Eigen::Index v = 0; v < corr.rows(); ++v) {
        out << pca.variables[static_cast<std::size_t>(v)] << ',' << format_number(corr(v, 0)) << ','
            << format_number(corr.cols() > 1 ? corr(v, 1) : 0.0) << '\n';
    }
}

inline void write_main_effects_csv(std::ostream& out, const analysis::MainEffectsResult& me,
                                   std::optional<std::size_t> scenario = std::nullopt) {
    out << (scenario ? "scenario," : "") << "parameter,grid_value,effect,std_error\n";
    for (const auto& c : me.curves) {
        for (std::size_t k = 0; k < c.gridValues.size(); ++k) {
            if (scenario) out << *scenario << ',';
            out << c.name << ',' << format_number(c.gridValues[k]) << ',' << format_number(c.effectValues[k]) << ','
                << format_number(c.standardErrors[k]) << '\n';
        }
    }
}

inline nlohmann::json report_to_json(const AnalysisReport& report) {
    using nlohmann::json;
    json scenarios = json::array();
    for (const auto& s : report.scenarios) {
        json methods = json::array();
        for (const auto& m : s.methods) {
            json jm{{"method", surrogates::method_display_name(m.method)},
                    {"id", surrogates::method_id(m.method)},
                    {"ok", m.ok},
                    {"runtime_s", report_detail::opt_json(m.runtimeSeconds)},
                    {"mse", report_detail::opt_json(m.mse)},
                    {"validation_mse", report_detail::opt_json(m.validationMse)},
                    {"speed_score", report_detail::opt_json(m.speedScore)},
                    {"accuracy_score", report_detail::opt_json(m.accuracyScore)},
                    {"actual", m.actual},
                    {"predicted", m.predicted}};
            if (!m.ok) jm["error"] = m.error;
            if (m.mainEffects) {
                json curves = json::array();
                for (const auto& c : m.mainEffects->curves) {
                    curves.push_back({{"parameter", c.name},
                                      {"grid", c.gridValues},
                                      {"effect", c.effectValues},
                                      {"std_error", c.standardErrors}});
                }
                jm["main_effects"] = {{"overall_mean", m.mainEffects->overallMean},
                                      {"overall_variance", m.mainEffects->overallVariance},
                                      {"samples", m.mainEffects->samples},
                                      {"curves", curves}};
            }
            methods.push_back(std::move(jm));
        }
        json js{{"scenario", s.scenario},
                {"split", {{"train", s.trainSize}, {"validation", s.validationSize}, {"test", s.testSize}}},
                {"methods", methods}};
        if (s.pca) {
            const auto& r = s.pca->result;
            std::vector<std::vector<double>> loadings;
            for (Eigen::Index v = 0; v < r.loadings.rows(); ++v) {
                loadings.emplace_back();
                for (Eigen::Index k = 0; k < r.loadings.cols(); ++k) loadings.back().push_back(r.loadings(v, k));
            }
            js["pca"] = {{"variables", s.pca->variables},
                         {"eigenvalues", std::vector<double>(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size())},
                         {"cumulative_fraction",
                          std::vector<double>(r.cumulativeVarianceFraction.data(),
                                              r.cumulativeVarianceFraction.data() + r.cumulativeVarianceFraction.size())},
                         {"retained", r.retainedCount},
                         {"loadings", loadings}};
        }
        scenarios.push_back(std::move(js));
    }
    return {{"format", "abmsurrogate-report"}, {"version", 1}, {"scenarios", scenarios}};
}

/// Writes comparison.csv, spider.csv, pred_vs_actual_<id>.csv,
/// pca_<scenario>.csv, factor_map_<scenario>.csv, main_effects_<id>.csv and report.json.
inline void emit_report(const AnalysisReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create directory '" + dir.string() + "'");

    {
        auto out = report_detail::open(dir / "comparison.csv");
        write_comparison_csv(out, report);
    }
    {
        auto out = report_detail::open(dir / "spider.csv");
        write_spider_csv(out, report);
    }
    for (Method method : report_detail::methods_in(report)) {
        const std::string id = surrogates::method_id(method);
        auto out = report_detail::open(dir / ("pred_vs_actual_" + id + ".csv"));
        out << "scenario,actual,predicted\n";
        bool any_effects = false;
        for (const auto& s : report.scenarios) {
            for (const auto& m : s.methods) {
                if (m.method != method) continue;
                for (std::size_t i = 0; i < m.actual.size(); ++i) {
                    out << s.scenario << ',' << format_number(m.actual[i]) << ',' << format_number(m.predicted[i]) << '\n';
                }
                any_effects = any_effects || m.mainEffects.has_value();
            }
        }
        if (!any_effects) continue;
        auto me = report_detail::open(dir / ("main_effects_" + id + ".csv"));
        me << "scenario,parameter,grid_value,effect,std_error\n";
        for (const auto& s : report.scenarios) {
            for (const auto& m : s.methods) {
                if (m.method != method || !m.mainEffects) continue;
                std::ostringstream body;
                write_main_effects_csv(body, *m.mainEffects, s.scenario);
                const std::string text = body.str();
                me << text.substr(text.find('\n') + 1);
            }
        }
    }
    for (const auto& s : report.scenarios) {
        if (!s.pca) continue;
        auto pca = report_detail::open(dir / ("pca_" + std::to_string(s.scenario) + ".csv"));
        write_pca_csv(pca, *s.pca);
        auto fm = report_detail::open(dir / ("factor_map_" + std::to_string(s.scenario) + ".csv"));
        write_factor_map_csv(fm, *s.pca);
    }
    auto json_out = report_detail::open(dir / "report.json");
    json_out << report_to_json(report).dump(2) << '\n';
}

/// End to end: design, simulate and compare every configured scenario.
inline AnalysisReport run_study(const ScenarioConfig& config, std::ostream* log = nullptr) {
    AnalysisReport report;
    const auto ranges = config.ranges();
    std::filesystem::create_directories(config.outputDir);
    BatchOptions batch;
    batch.jobs = config.jobs;
    batch.demography = config.demography();
    batch.progress = log;
    for (std::size_t n : config.sizes) {
        const auto unit = design::generate_design(config.designMethod, n, ranges, derive_seed(config.baseSeed, n));
        // scenario-specific run seeds: nested lptau prefixes must not replay the same runs
        batch.baseSeed = derive_seed(config.baseSeed, n);
        const auto runs = run_batch(design::scale_design(unit, ranges), batch);
        save_runs_csv((std::filesystem::path(config.outputDir) / ("runs_" + std::to_string(n) + ".csv")).string(), runs);
        report.scenarios.push_back(compare_methods(runs, config, log));
    }
    return report;
}

}  // namespace abmsurrogate::pipeline
