#include "sdeconv/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sdeconv/image_io.hpp"
#include "sdeconv/kv.hpp"

namespace sdeconv {

namespace fs = std::filesystem;

PsnrResult psnr(const Image& a, const Image& b, double peak) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
        throw std::invalid_argument("psnr: image shapes differ");
    if (peak <= 0.0)
        throw std::invalid_argument("psnr: peak must be positive");
    double sum = 0.0;
    const std::size_t n = a.value_count();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.data()[i] - b.data()[i];
        sum += d * d;
    }
    PsnrResult r;
    if (sum == 0.0) {
        r.identical = true;
        r.db = std::numeric_limits<double>::infinity();
        return r;
    }
    const double mse = sum / static_cast<double>(n);
    r.db = 10.0 * std::log10(peak * peak / mse);
    return r;
}

void SweepSpec::validate() const {
    if (lambdas.empty())
        throw std::invalid_argument("sweep: no lambdas");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0))
            throw std::invalid_argument("sweep: lambdas must be positive");
        if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
            throw std::invalid_argument("sweep: lambdas must be strictly ascending");
    }
    if (configs.empty())
        throw std::invalid_argument("sweep: no configs");
    if (entries.empty())
        throw std::invalid_argument("sweep: no dataset entries");
    solver.validate();
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    for (char c : text) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item += c;
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

SweepConfig parse_config_id(const std::string& id) {
    const auto plus = id.find('+');
    if (plus == std::string::npos)
        throw std::invalid_argument("sweep: config \"" + id + "\" is not <data_term>+<regularizer>");
    SweepConfig c;
    c.data_term = parse_data_term(id.substr(0, plus));
    c.regularizer = parse_reg_term(id.substr(plus + 1));
    return c;
}

double parse_double_str(const std::string& s, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument(std::string(what) + ": bad number \"" + s + "\"");
    return v;
}

} // namespace

SweepSpec SweepSpec::load(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::load(path);
    const std::string format = kv.require("format");
    if (format != "sdeconv-sweep")
        throw std::invalid_argument(path + ": unexpected format \"" + format + "\"");

    SweepSpec spec;
    const fs::path base = fs::path(path).parent_path();

    const fs::path manifest_path = base / fs::path(kv.require("manifest"));
    DatasetManifest manifest = DatasetManifest::load(manifest_path.string());
    if (auto wanted = kv.get("entries")) {
        for (const std::string& id : split_list(*wanted)) {
            auto it = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                                   [&](const DatasetEntry& e) { return e.id == id; });
            if (it == manifest.entries.end())
                throw std::invalid_argument(path + ": unknown dataset entry \"" + id + "\"");
            spec.entries.push_back(*it);
        }
    } else {
        spec.entries = manifest.entries;
    }

    for (const std::string& id : split_list(kv.require("configs")))
        spec.configs.push_back(parse_config_id(id));

    if (auto explicit_grid = kv.get("lambdas")) {
        for (const std::string& s : split_list(*explicit_grid))
            spec.lambdas.push_back(parse_double_str(s, "sweep lambdas"));
    } else {
        const double lo = kv.require_double("lambda_min");
        const double hi = kv.require_double("lambda_max");
        const std::int64_t count = kv.require_int("lambda_count");
        if (!(lo > 0.0) || !(hi >= lo) || count < 1)
            throw std::invalid_argument(path + ": bad lambda range");
        if (count == 1) {
            spec.lambdas.push_back(lo);
        } else {
            const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
            for (std::int64_t i = 0; i < count; ++i)
                spec.lambdas.push_back(std::exp(std::log(lo) + step * static_cast<double>(i)));
            spec.lambdas.back() = hi; // keep the endpoint exact
        }
    }

    if (auto v = kv.get("solver.delta_init")) spec.solver.delta_init = parse_double_str(*v, "solver.delta_init");
    if (auto v = kv.get("solver.delta_min")) spec.solver.delta_min = parse_double_str(*v, "solver.delta_min");
    if (auto v = kv.get("solver.anneal_factor")) spec.solver.anneal_factor = parse_double_str(*v, "solver.anneal_factor");
    if (kv.has("solver.accept_window")) spec.solver.accept_window = kv.require_int("solver.accept_window");
    if (auto v = kv.get("solver.accept_threshold")) spec.solver.accept_threshold = parse_double_str(*v, "solver.accept_threshold");
    if (auto v = kv.get("solver.p_chain")) spec.solver.p_chain = parse_double_str(*v, "solver.p_chain");
    if (kv.has("solver.chain_radius")) spec.solver.chain_radius = static_cast<int>(kv.require_int("solver.chain_radius"));
    if (kv.has("solver.max_iters")) spec.solver.max_iters = kv.require_int("solver.max_iters");
    if (kv.has("solver.trace_stride")) spec.solver.trace_stride = kv.require_int("solver.trace_stride");
    if (kv.has("solver.seed")) spec.solver.seed = kv.require_uint("solver.seed");

    spec.validate();
    return spec;
}

std::string ResultRow::key() const {
    return entry_id + "\t" + config_id + "\t" + format_double(lambda);
}

namespace {

constexpr const char* kResultsHeader =
    "entry\tconfig\tlambda\tpsnr_db\tfinal_energy\truntime_s\tseed\tpsnr_space\tstatus";

std::string sanitize_field(std::string s) {
    for (char& c : s)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return s;
}

std::string format_row(const ResultRow& row) {
    std::string line;
    line += sanitize_field(row.entry_id);
    line += '\t';
    line += sanitize_field(row.config_id);
    line += '\t';
    line += format_double(row.lambda);
    line += '\t';
    line += row.identical ? "inf" : format_double(row.psnr_db);
    line += '\t';
    line += format_double(row.final_energy);
    line += '\t';
    line += format_double(row.runtime_s);
    line += '\t';
    line += std::to_string(row.seed);
    line += '\t';
    line += sanitize_field(row.psnr_space);
    line += '\t';
    line += sanitize_field(row.status);
    return line;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open results file");
    std::vector<ResultRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line == kResultsHeader) {
            first = false;
            continue;
        }
        first = false;
        const auto f = split_tabs(line);
        if (f.size() != 9) continue; // torn or foreign line, e.g. an interrupted append
        try {
            ResultRow row;
            row.entry_id = f[0];
            row.config_id = f[1];
            row.lambda = parse_double_str(f[2], "results lambda");
            row.psnr_db = parse_double_str(f[3], "results psnr");
            row.final_energy = parse_double_str(f[4], "results energy");
            row.runtime_s = parse_double_str(f[5], "results runtime");
            row.seed = static_cast<std::uint64_t>(std::strtoull(f[6].c_str(), nullptr, 10));
            row.psnr_space = f[7];
            row.status = f[8];
            row.identical = row.status == "identical" || std::isinf(row.psnr_db);
            rows.push_back(std::move(row));
        } catch (const std::invalid_argument&) {
            continue;
        }
    }
    return rows;
}

ResultRow run_single(const DatasetEntry& entry, const SweepConfig& config, double lambda,
                     const SolverConfig& solver, std::uint64_t seed) {
    const Image truth = load_image(entry.truth_path);
    const Image observed = load_image(entry.observed_path);
    const Kernel kernel = load_kernel(entry.kernel_path);

    EnergyConfig ecfg;
    ecfg.data_term = config.data_term;
    ecfg.regularizer = config.regularizer;
    ecfg.lambda = lambda;
    ecfg.params = entry.params;
    ecfg.validate();

    SolverConfig scfg = solver;
    scfg.seed = seed;

    const auto t0 = std::chrono::steady_clock::now();
    auto [estimate, report] = solve(observed, kernel, ecfg, scfg);
    const auto t1 = std::chrono::steady_clock::now();

    const double g = ecfg.latent_gamma();
    const Image display = (g != 1.0) ? gamma_compress(estimate, g) : estimate;
    const PsnrResult p = psnr(display, truth);

    ResultRow row;
    row.entry_id = entry.id;
    row.config_id = config.id();
    row.lambda = lambda;
    row.psnr_db = p.db;
    row.identical = p.identical;
    row.final_energy = report.final_energy;
    row.runtime_s = std::chrono::duration<double>(t1 - t0).count();
    row.seed = seed;
    row.status = p.identical ? "identical" : "ok";
    return row;
}

namespace {

struct GridItem {
    std::size_t entry = 0;
    std::size_t config = 0;
    std::size_t lambda = 0;
    std::uint64_t seed = 0;
};

} // namespace

std::vector<ResultRow> run_sweep(const SweepSpec& spec, const std::string& results_path,
                                 int jobs) {
    spec.validate();

    // Rows already on disk with a usable status are not recomputed; error
    // rows are retried.
    std::map<std::string, ResultRow> done;
    bool have_file = fs::exists(results_path);
    if (have_file) {
        for (ResultRow& row : load_results(results_path))
            if (row.ok())
                done[row.key()] = std::move(row);
    }

    std::vector<GridItem> grid;
    for (std::size_t e = 0; e < spec.entries.size(); ++e)
        for (std::size_t c = 0; c < spec.configs.size(); ++c)
            for (std::size_t l = 0; l < spec.lambdas.size(); ++l) {
                GridItem item{e, c, l, 0};
                item.seed = spec.solver.seed + static_cast<std::uint64_t>(grid.size());
                grid.push_back(item);
            }

    std::ofstream out(results_path, std::ios::binary | std::ios::app);
    if (!out)
        throw IoError(results_path + ": cannot open results file for append");
    if (!have_file || fs::file_size(results_path) == 0)
        out << kResultsHeader << '\n' << std::flush;

    auto compute = [&](const GridItem& item) -> ResultRow {
        const DatasetEntry& entry = spec.entries[item.entry];
        const SweepConfig& config = spec.configs[item.config];
        const double lambda = spec.lambdas[item.lambda];
        try {
            return run_single(entry, config, lambda, spec.solver, item.seed);
        } catch (const std::exception& ex) {
            ResultRow row;
            row.entry_id = entry.id;
            row.config_id = config.id();
            row.lambda = lambda;
            row.seed = item.seed;
            row.status = std::string("error ") + ex.what();
            return row;
        }
    };

    std::vector<ResultRow> all(grid.size());
    std::vector<char> ready(grid.size(), 0);
    std::vector<char> cached(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ResultRow probe;
        probe.entry_id = spec.entries[grid[i].entry].id;
        probe.config_id = spec.configs[grid[i].config].id();
        probe.lambda = spec.lambdas[grid[i].lambda];
        auto it = done.find(probe.key());
        if (it != done.end()) {
            all[i] = it->second;
            ready[i] = 1;
            cached[i] = 1;
        }
    }

    if (jobs <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (cached[i]) continue;
            all[i] = compute(grid[i]);
            out << format_row(all[i]) << '\n' << std::flush;
        }
        return all;
    }

    // Workers pull grid indices; the writer thread is this one and appends
    // rows strictly in grid order so a crash leaves a clean prefix.
    std::mutex mtx;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            if (cached[i]) continue;
            ResultRow row = compute(grid[i]);
            {
                std::lock_guard<std::mutex> lock(mtx);
                all[i] = std::move(row);
                ready[i] = 1;
            }
            cv.notify_all();
        }
    };
    std::vector<std::thread> pool;
    const int nworkers = std::min<int>(jobs, static_cast<int>(grid.size()));
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int t = 0; t < nworkers; ++t)
        pool.emplace_back(worker);

    {
        std::unique_lock<std::mutex> lock(mtx);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            cv.wait(lock, [&] { return ready[i] != 0; });
            if (!cached[i])
                out << format_row(all[i]) << '\n' << std::flush;
        }
    }
    for (std::thread& t : pool) t.join();
    return all;
}

namespace {

double row_value(const ResultRow& row) {
    return row.identical ? std::numeric_limits<double>::infinity() : row.psnr_db;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt_db(double db) {
    if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
    return format_double(db);
}

} // namespace

SweepSummary summarize(const std::vector<ResultRow>& rows) {
    // Last usable row wins per (entry, config, lambda).
    std::map<std::string, ResultRow> latest;
    std::vector<std::string> config_order;
    std::vector<std::string> entry_order;
    for (const ResultRow& row : rows) {
        if (!row.ok()) continue;
        if (std::find(config_order.begin(), config_order.end(), row.config_id) == config_order.end())
            config_order.push_back(row.config_id);
        if (std::find(entry_order.begin(), entry_order.end(), row.entry_id) == entry_order.end())
            entry_order.push_back(row.entry_id);
        latest[row.key()] = row;
    }
    if (latest.empty())
        throw std::invalid_argument("summarize: no usable result rows");

    SweepSummary summary;
    for (const std::string& config_id : config_order) {
        std::vector<const ResultRow*> config_rows;
        std::set<double> lambda_set;
        for (const auto& [key, row] : latest) {
            if (row.config_id != config_id) continue;
            config_rows.push_back(&row);
            lambda_set.insert(row.lambda);
        }

        ConfigSummary cs;
        cs.config_id = config_id;
        std::vector<double> best_values;
        for (const std::string& entry_id : entry_order) {
            const ResultRow* best = nullptr;
            for (const ResultRow* row : config_rows) {
                if (row->entry_id != entry_id) continue;
                if (!best || row_value(*row) > row_value(*best)) best = row;
            }
            if (!best) continue;
            EntryBest eb;
            eb.entry_id = entry_id;
            eb.lambda = best->lambda;
            eb.psnr_db = best->psnr_db;
            eb.identical = best->identical;
            cs.best_per_entry.push_back(eb);
            best_values.push_back(row_value(*best));
        }
        if (best_values.empty()) continue;
        cs.min_db = *std::min_element(best_values.begin(), best_values.end());
        cs.max_db = *std::max_element(best_values.begin(), best_values.end());
        cs.median_db = median_of(best_values);
        summary.configs.push_back(cs);

        ConfigSeries series;
        series.config_id = config_id;
        for (const EntryBest& eb : cs.best_per_entry)
            series.entry_ids.push_back(eb.entry_id);
        for (double lambda : lambda_set) {
            LambdaPoint point;
            point.lambda = lambda;
            std::vector<double> present;
            for (const std::string& entry_id : series.entry_ids) {
                double value = std::numeric_limits<double>::quiet_NaN();
                for (const ResultRow* row : config_rows)
                    if (row->entry_id == entry_id && row->lambda == lambda) {
                        value = row_value(*row);
                        break;
                    }
                point.per_entry_db.push_back(value);
                if (!std::isnan(value)) present.push_back(value);
            }
            if (present.empty()) continue;
            point.median_db = median_of(present);
            series.points.push_back(point);
        }
        summary.series.push_back(series);
    }
    return summary;
}

void write_summary_files(const SweepSummary& summary, const std::string& out_dir) {
    fs::create_directories(out_dir);

    {
        std::ofstream out(fs::path(out_dir) / "summary.tsv", std::ios::binary);
        out << "config\tmin_db\tmedian_db\tmax_db\n";
        for (const ConfigSummary& cs : summary.configs)
            out << cs.config_id << '\t' << fmt_db(cs.min_db) << '\t' << fmt_db(cs.median_db)
                << '\t' << fmt_db(cs.max_db) << '\n';
        if (!out)
            throw IoError(out_dir + "/summary.tsv: write failed");
    }
    {
        std::ofstream out(fs::path(out_dir) / "best.tsv", std::ios::binary);
        out << "config\tentry\tlambda\tpsnr_db\n";
        for (const ConfigSummary& cs : summary.configs)
            for (const EntryBest& eb : cs.best_per_entry)
                out << cs.config_id << '\t' << eb.entry_id << '\t' << format_double(eb.lambda)
                    << '\t' << (eb.identical ? "inf" : format_double(eb.psnr_db)) << '\n';
        if (!out)
            throw IoError(out_dir + "/best.tsv: write failed");
    }
    for (const ConfigSeries& series : summary.series) {
        const std::string name = "series_" + series.config_id + ".tsv";
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        out << "lambda\tmedian_db";
        for (const std::string& id : series.entry_ids) out << '\t' << id;
        out << '\n';
        for (const LambdaPoint& point : series.points) {
            out << format_double(point.lambda) << '\t' << fmt_db(point.median_db);
            for (double v : point.per_entry_db)
                out << '\t' << (std::isnan(v) ? std::string("nan") : fmt_db(v));
            out << '\n';
        }
        if (!out)
            throw IoError(out_dir + "/" + name + ": write failed");
    }
}

} // namespace sdeconv
