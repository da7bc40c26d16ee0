// Command-line front end: design, simulate, train, compare, pca, main-effects, study.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <abmsurrogate/analysis/main_effects.hpp>
#include <abmsurrogate/analysis/statistics.hpp>
#include <abmsurrogate/design/design.hpp>
#include <abmsurrogate/pipeline/runs.hpp>
#include <abmsurrogate/pipeline/study.hpp>
#include <abmsurrogate/surrogates/model.hpp>
#include <abmsurrogate/surrogates/serialize.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace as = abmsurrogate;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw as::DataError("cannot write '" + path + "'");
    return out;
}

as::pipeline::ScenarioConfig load_config(const std::string& path) {
    return path.empty() ? as::pipeline::ScenarioConfig{} : as::pipeline::ScenarioConfig::load(path);
}

void cmd_design(const std::string& method, std::size_t n, const std::string& ranges_path, std::uint64_t seed,
                const std::string& out_path) {
    const auto ranges = as::design::ParamRanges::load(ranges_path);
    const auto unit = as::design::generate_design(as::design::parse_design_method(method), n, ranges, seed);
    auto out = open_output(out_path);
    as::design::write_design_csv(out, as::design::scale_design(unit, ranges), ranges.names());
}

void cmd_simulate(const std::string& design_path, std::uint64_t seed, unsigned jobs, const std::string& demography,
                  bool timing, bool unchecked, const std::string& out_path) {
    const auto design = as::design::read_design_csv(design_path);
    if (design.names != as::pipeline::policy_names()) {
        throw as::DataError(design_path + ": columns must be the ten policy parameters in canonical order");
    }
    as::pipeline::BatchOptions options;
    options.baseSeed = seed;
    options.jobs = jobs;
    options.checkRanges = !unchecked;
    options.progress = &std::cerr;
    if (!demography.empty()) options.demography = as::abm::DemographyConfig::load(demography);
    const auto records = as::pipeline::run_batch(design.values, options);
    auto out = open_output(out_path);
    as::pipeline::write_runs_csv(out, records, timing);
}

void cmd_train(const std::string& runs_path, const std::string& method_name, const std::string& config_path,
               std::uint64_t seed, const std::string& out_path) {
    const auto runs = as::pipeline::load_runs_csv(runs_path);
    const auto data = as::pipeline::runs_to_dataset(runs);
    const auto n = static_cast<std::size_t>(data.rows());
    const auto split = as::analysis::split_dataset(n, as::pipeline::scenario_split_seed(seed, n));
    auto hp = load_config(config_path).hyper;
    hp.seed = as::pipeline::scenario_fit_seed(seed, n);
    const auto method = as::surrogates::parse_method(method_name);
    const auto model = as::surrogates::fit(method, data.subset(split.trainIdx), data.subset(split.valIdx), hp);
    const auto test = data.subset(split.testIdx);
    const double test_mse = as::analysis::mse(test.y, model.predict(test.X));
    as::surrogates::save_model(model, out_path);
    std::cout << as::surrogates::method_display_name(method) << " test_mse " << as::format_number(test_mse) << '\n';
}

void cmd_compare(const std::vector<std::string>& runs_paths, const std::string& config_path,
                 const std::string& out_dir) {
    const auto config = load_config(config_path);
    as::pipeline::AnalysisReport report;
    for (const auto& path : runs_paths) {
        report.scenarios.push_back(as::pipeline::compare_methods(as::pipeline::load_runs_csv(path), config, &std::cerr));
    }
    as::pipeline::emit_report(report, out_dir);
}

void cmd_pca(const std::string& runs_path, const std::string& out_path, const std::string& factor_map_path) {
    const auto pca = as::pipeline::pca_of_runs(as::pipeline::load_runs_csv(runs_path));
    auto out = open_output(out_path);
    as::pipeline::write_pca_csv(out, pca);
    if (!factor_map_path.empty()) {
        auto fm = open_output(factor_map_path);
        as::pipeline::write_factor_map_csv(fm, pca);
    }
    std::cout << "retained components " << pca.result.retainedCount << '\n';
}

void cmd_main_effects(const std::string& model_path, const std::string& ranges_path, std::size_t grid,
                      std::size_t samples, std::uint64_t seed, const std::string& scheme, const std::string& out_path) {
    const auto model = as::surrogates::load_model(model_path);
    const auto ranges = as::design::ParamRanges::load(ranges_path);
    as::analysis::SamplingScheme s = as::analysis::SamplingScheme::quasi;
    if (scheme == "pseudo") s = as::analysis::SamplingScheme::pseudo;
    else if (scheme != "quasi") throw as::DataError("unknown sampling scheme '" + scheme + "'");
    const auto me = as::analysis::main_effects(model, ranges, grid, samples, seed, s);
    auto out = open_output(out_path);
    as::pipeline::write_main_effects_csv(out, me);
    std::cout << "overall_mean " << as::format_number(me.overallMean) << " overall_variance "
              << as::format_number(me.overallVariance) << '\n';
}

void cmd_study(const std::string& config_path, const std::string& out_dir) {
    auto config = load_config(config_path);
    if (!out_dir.empty()) config.outputDir = out_dir;
    const auto report = as::pipeline::run_study(config, &std::cerr);
    as::pipeline::emit_report(report, config.outputDir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based social-care simulation and surrogate modelling toolkit"};
    app.require_subcommand(1);

    std::string method, ranges, out, design_path, demography, config, model_path, scheme = "quasi", factor_map;
    std::size_t n = 0, grid = 20, samples = 1000;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool no_timing = false, unchecked = false;
    std::vector<std::string> runs;

    auto* design = app.add_subcommand("design", "generate a scaled experimental design");
    design->add_option("--method", method, "lptau or lhs")->required();
    design->add_option("--n", n, "number of runs")->required()->check(CLI::Range(2, 1 << 30));
    design->add_option("--ranges", ranges, "ranges file")->required();
    design->add_option("--seed", seed, "seed (lhs only)");
    design->add_option("--out", out, "output CSV")->required();

    auto* simulate = app.add_subcommand("simulate", "run the ABM on every design row");
    simulate->add_option("--design", design_path, "design CSV")->required();
    simulate->add_option("--seed", seed, "base seed")->required();
    simulate->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    simulate->add_option("--demography", demography, "demographic constants file");
    simulate->add_flag("--no-timing", no_timing, "write 0 in the wall-time column");
    simulate->add_flag("--unchecked", unchecked, "allow parameters outside the study ranges");
    simulate->add_option("--out", out, "output runs CSV")->required();

    auto* train = app.add_subcommand("train", "fit one surrogate and save it");
    train->add_option("--runs", design_path, "runs CSV")->required();
    train->add_option("--method", method, "method id or name")->required();
    train->add_option("--config", config, "hyperparameter overrides");
    train->add_option("--seed", seed, "base seed for the split and fit");
    train->add_option("--out", out, "model file")->required();

    auto* compare = app.add_subcommand("compare", "fit and compare methods on one or more run files");
    compare->add_option("--runs", runs, "runs CSV files")->required()->expected(1, -1);
    compare->add_option("--config", config, "scenario config");
    compare->add_option("--out", out, "report directory")->required();

    auto* pca = app.add_subcommand("pca", "principal components of parameters and output");
    pca->add_option("--runs", design_path, "runs CSV")->required();
    pca->add_option("--factor-map", factor_map, "optional factor-map CSV");
    pca->add_option("--out", out, "output CSV")->required();

    auto* effects = app.add_subcommand("main-effects", "main-effect curves of a saved model");
    effects->add_option("--model", model_path, "model file")->required();
    effects->add_option("--ranges", ranges, "ranges file")->required();
    effects->add_option("--grid", grid, "grid points per parameter");
    effects->add_option("--samples", samples, "Monte Carlo points");
    effects->add_option("--seed", seed, "sampling seed");
    effects->add_option("--scheme", scheme, "quasi or pseudo");
    effects->add_option("--out", out, "output CSV")->required();

    auto* study = app.add_subcommand("study", "design, simulate and compare every scenario");
    study->add_option("--config", config, "scenario config");
    study->add_option("--out", out, "report directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*design) cmd_design(method, n, ranges, seed, out);
        else if (*simulate) cmd_simulate(design_path, seed, jobs, demography, !no_timing, unchecked, out);
        else if (*train) cmd_train(design_path, method, config, seed, out);
        else if (*compare) cmd_compare(runs, config, out);
        else if (*pca) cmd_pca(design_path, out, factor_map);
        else if (*effects) cmd_main_effects(model_path, ranges, grid, samples, seed, scheme, out);
        else if (*study) cmd_study(config, out);
    } catch (const as::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const as::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
