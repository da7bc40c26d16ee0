#pragma once

// Batch simulation over a scaled design and the run CSV format:
//   <10 parameter columns>,seed,output,sim_time_s,extinct

#include <abmsurrogate/abm/model.hpp>
#include <abmsurrogate/abm/params.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/random.hpp>
#include <abmsurrogate/core/text.hpp>
#include <abmsurrogate/surrogates/dataset.hpp>

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace abmsurrogate::pipeline {

struct RunRecord {
    std::size_t runIndex = 0;
    std::vector<double> params;  // policy order
    std::uint64_t seed = 0;
    double output = 0.0;
    double simWallTime = 0.0;
    bool extinct = false;
};

inline std::vector<std::string> policy_names() {
    std::vector<std::string> out;
    for (const auto& info : abm::kPolicyTable) out.emplace_back(info.name);
    return out;
}

inline std::vector<std::string> run_csv_header() {
    auto h = policy_names();
    for (const char* extra : {"seed", "output", "sim_time_s", "extinct"}) h.emplace_back(extra);
    return h;
}

struct BatchOptions {
    std::uint64_t baseSeed = 0;
    unsigned jobs = 1;
    abm::DemographyConfig demography{};
    bool checkRanges = true;     // reject rows outside the canonical ranges
    std::ostream* progress = nullptr;
};

/// Seed of run i, independent of execution order.
inline std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index) {
    return derive_seed(base_seed, static_cast<std::uint64_t>(run_index));
}

/// Simulates every design row (parameter units, policy column order). Rows
/// are validated up front; a run that fails at runtime is recorded as
/// extinct with output 0 and the batch carries on.
inline std::vector<RunRecord> run_batch(const Matrix& design, const BatchOptions& options) {
    require(design.rows() >= 1, "run_batch: empty design");
    require(design.cols() == static_cast<Eigen::Index>(abm::kPolicyCount),
            "run_batch: design must have " + std::to_string(abm::kPolicyCount) + " columns");
    require(options.jobs >= 1, "run_batch: parallelism must be >= 1");
    const auto n = static_cast<std::size_t>(design.rows());

    std::vector<abm::SimParams> params;
    params.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(abm::kPolicyCount);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        try {
            params.push_back(options.checkRanges ? abm::SimParams::checked(row, options.demography)
                                                 : abm::SimParams::unchecked(row, options.demography));
        } catch (const DataError& e) {
            throw DataError("design row " + std::to_string(i) + ": " + e.what());
        }
    }

    std::vector<RunRecord> records(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            RunRecord& rec = records[i];
            rec.runIndex = i;
            const auto values = params[i].policy_values();
            rec.params.assign(values.begin(), values.end());
            rec.seed = run_seed(options.baseSeed, i);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const auto result = abm::run_simulation(params[i], rec.seed);
                rec.output = result.finalCostPerCapita;
                rec.extinct = result.extinct;
            } catch (const std::exception& e) {
                rec.output = 0.0;
                rec.extinct = true;
                const std::lock_guard lock(log_mutex);
                std::cerr << "run " << i << " failed: " << e.what() << '\n';
            }
            rec.simWallTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const std::size_t finished = ++done;
            if (options.progress != nullptr && (finished % 50 == 0 || finished == n)) {
                const std::lock_guard lock(log_mutex);
                *options.progress << "simulated " << finished << "/" << n << '\n';
            }
        }
    };
    const unsigned threads = std::min<unsigned>(options.jobs, static_cast<unsigned>(n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return records;
}

/// With `include_timing` false the wall-time column is written as 0 so the
/// file depends only on the inputs.
inline void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records, bool include_timing = true) {
    out << join(run_csv_header()) << '\n';
    for (const auto& r : records) {
        for (double v : r.params) out << format_number(v) << ',';
        out << r.seed << ',' << format_number(r.output) << ',' << format_number(include_timing ? r.simWallTime : 0.0)
            << ',' << (r.extinct ? 1 : 0) << '\n';
    }
}

inline void save_runs_csv(const std::string& path, const std::vector<RunRecord>& records, bool include_timing = true) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_runs_csv(out, records, include_timing);
    if (!out) throw DataError("failed writing '" + path + "'");
}

inline std::vector<RunRecord> parse_runs_csv(const CsvTable& table, std::string_view source) {
    const auto expected = run_csv_header();
    if (table.header != expected) {
        throw DataError(std::string(source) + ": header must be '" + join(expected) + "'");
    }
    std::vector<RunRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        RunRecord r;
        r.runIndex = i;
        for (std::size_t j = 0; j < abm::kPolicyCount; ++j) r.params.push_back(parse_number(row[j], source));
        const double seed = parse_number(row[abm::kPolicyCount], source);
        require(seed >= 0.0, std::string(source) + ": negative seed");
        r.seed = std::stoull(row[abm::kPolicyCount]);
        r.output = parse_number(row[abm::kPolicyCount + 1], source);
        r.simWallTime = parse_number(row[abm::kPolicyCount + 2], source);
        const auto& ext = row[abm::kPolicyCount + 3];
        require(ext == "0" || ext == "1", std::string(source) + ": extinct flag must be 0 or 1");
        r.extinct = ext == "1";
        require(std::isfinite(r.output) && r.output >= 0.0,
                std::string(source) + ": row " + std::to_string(i) + " has an invalid output");
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<RunRecord> load_runs_csv(const std::string& path) { return parse_runs_csv(read_csv(path), path); }

/// Features are the policy parameters, the target is the run output.
inline surrogates::Dataset runs_to_dataset(const std::vector<RunRecord>& records) {
    require(!records.empty(), "no runs");
    Matrix x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(abm::kPolicyCount));
    Vector y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < abm::kPolicyCount; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records[i].params[j];
        }
        y(static_cast<Eigen::Index>(i)) = records[i].output;
    }
    return surrogates::Dataset(std::move(x), std::move(y), policy_names());
}

}  // namespace abmsurrogate::pipeline
