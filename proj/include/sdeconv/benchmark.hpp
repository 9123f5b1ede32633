#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdeconv/forward_model.hpp"
#include "sdeconv/solver.hpp"

namespace sdeconv {

struct PsnrResult {
    double db = 0.0;
    bool identical = false; // MSE was exactly zero; db is +infinity
};

// 10*log10(peak^2 / MSE), MSE over all channels and pixels. Throws on a
// shape mismatch.
PsnrResult psnr(const Image& a, const Image& b, double peak = 1.0);

struct SweepConfig {
    DataTerm data_term = DataTerm::Simple;
    RegTerm regularizer = RegTerm::Tv;
    std::string id() const { return to_string(data_term) + "+" + to_string(regularizer); }
};

struct SweepSpec {
    std::vector<double> lambdas;       // strictly positive, ascending
    std::vector<SweepConfig> configs;
    std::vector<DatasetEntry> entries; // degradation parameters come per entry
    SolverConfig solver;               // per-run solver settings; seed is the base seed

    void validate() const;

    // Plain-text spec file: manifest path, config list, lambda grid
    // (explicit list or log-spaced min/max/count) and solver.* overrides.
    static SweepSpec load(const std::string& path);
};

struct ResultRow {
    std::string entry_id;
    std::string config_id;
    double lambda = 0.0;
    double psnr_db = 0.0;
    bool identical = false;
    double final_energy = 0.0;
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
    std::string psnr_space = "display";
    std::string status = "ok"; // "ok", "identical" or "error <message>"

    bool ok() const { return status == "ok" || status == "identical"; }
    std::string key() const;
};

// One restoration run: deconvolve entry.observed with the config and
// lambda, then PSNR of the display-space estimate against entry.truth.
ResultRow run_single(const DatasetEntry& entry, const SweepConfig& config, double lambda,
                     const SolverConfig& solver, std::uint64_t seed);

// Runs the whole (entry x config x lambda) grid. Rows are appended to
// results_path as they finish, in grid order; rows already present in the
// file are skipped, which makes an interrupted sweep resumable. Failed
// entries produce error rows and the sweep continues. Returns every
// completed row of the grid in grid order.
std::vector<ResultRow> run_sweep(const SweepSpec& spec, const std::string& results_path,
                                 int jobs = 1);

std::vector<ResultRow> load_results(const std::string& path);

struct EntryBest {
    std::string entry_id;
    double lambda = 0.0;
    double psnr_db = 0.0;
    bool identical = false;
};

struct ConfigSummary {
    std::string config_id;
    std::vector<EntryBest> best_per_entry; // best-over-lambda per entry
    double min_db = 0.0;
    double median_db = 0.0;
    double max_db = 0.0;
};

struct LambdaPoint {
    double lambda = 0.0;
    double median_db = 0.0;
    std::vector<double> per_entry_db; // ordered like entry_ids
};

struct ConfigSeries {
    std::string config_id;
    std::vector<std::string> entry_ids;
    std::vector<LambdaPoint> points;
};

struct SweepSummary {
    std::vector<ConfigSummary> configs;
    std::vector<ConfigSeries> series;
};

// Aggregates ok rows; throws std::invalid_argument when nothing usable is
// present.
SweepSummary summarize(const std::vector<ResultRow>& rows);

// summary.tsv, best.tsv and one series_<config>.tsv per config.
void write_summary_files(const SweepSummary& summary, const std::string& out_dir);

} // namespace sdeconv
