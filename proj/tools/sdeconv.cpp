// Command-line front end: degrade / deblur / dataset / sweep / report.
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "sdeconv/benchmark.hpp"
#include "sdeconv/forward_model.hpp"
#include "sdeconv/image_io.hpp"
#include "sdeconv/kv.hpp"
#include "sdeconv/plot.hpp"
#include "sdeconv/solver.hpp"

namespace fs = std::filesystem;
using namespace sdeconv;

namespace {

// Disabled pipeline stages are expressed as NaN on the command line so that
// --print-config dumps round-trip exactly.
constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

std::optional<double> opt_of(double v) {
    if (std::isnan(v)) return std::nullopt;
    return v;
}

// add_option with an exact (round-tripping) default string, so a
// --print-config dump fed back as a config file reproduces the same values.
CLI::Option* add_real(CLI::App* cmd, const std::string& name, double& v, const std::string& desc) {
    auto* o = cmd->add_option(name, v, desc)->capture_default_str();
    o->default_str(format_double(v));
    return o;
}

struct DegradeArgs {
    std::string input, kernel, output;
    double saturation = kUnset;
    double quant_step = kUnset;
    double gamma = 1.0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    int bit_depth = 16;
};

struct DeblurArgs {
    std::string input, kernel, output;
    std::string params_from;
    std::string report_path;
    std::string trace_path;
    std::string data_term = "simple";
    std::string regularizer = "tv";
    double lambda = 0.0;
    double saturation = kUnset;
    double quant_step = kUnset;
    double gamma = 1.0;
    int bit_depth = 16;
    SolverConfig solver;
};

struct DatasetArgs {
    std::vector<std::string> sources;
    std::vector<std::string> kernels;
    std::string out_dir;
    DatasetRecipe recipe; // defaults: realistic pipeline
    double quant_step = 0.0; // mirrors recipe.base.quant_step for the CLI
};

struct SweepArgs {
    std::string spec_path;
    std::string out_path;
    int jobs = std::max(1u, std::thread::hardware_concurrency());
};

struct ReportArgs {
    std::string rows_path;
    std::string out_dir;
};

std::string lower_ext(const fs::path& p) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

bool has_ext(const fs::path& p, const std::vector<std::string>& exts) {
    const std::string e = lower_ext(p);
    return std::find(exts.begin(), exts.end(), e) != exts.end();
}

// Arguments may be files or directories; directories are expanded to their
// matching files in sorted order so dataset entry ids are stable.
std::vector<std::string> expand_paths(const std::vector<std::string>& args,
                                      const std::vector<std::string>& exts,
                                      const char* what) {
    std::vector<std::string> out;
    for (const std::string& a : args) {
        if (fs::is_directory(a)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(a))
                if (e.is_regular_file() && has_ext(e.path(), exts))
                    found.push_back(e.path().string());
            if (found.empty())
                throw std::invalid_argument(a + ": no " + what + " files in directory");
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(a);
        }
    }
    if (out.empty())
        throw std::invalid_argument(std::string("no ") + what + " files given");
    return out;
}

const std::vector<std::string> kImageExts{".png", ".pgm", ".ppm", ".pnm"};
const std::vector<std::string> kKernelExts{".txt", ".kern", ".png", ".pgm", ".ppm", ".pnm"};

void write_sidecar(const std::string& path, const DegradeArgs& args) {
    KeyValueFile kv;
    kv.set("format", "sdeconv-degrade");
    kv.set("input", args.input);
    kv.set("kernel", args.kernel);
    kv.set("saturation", std::isnan(args.saturation) ? "none" : format_double(args.saturation));
    kv.set("quant_step", std::isnan(args.quant_step) ? "none" : format_double(args.quant_step));
    kv.set_double("gamma", args.gamma);
    kv.set_double("sigma", args.sigma);
    kv.set_uint("seed", args.seed);
    kv.set_int("bit_depth", args.bit_depth);
    kv.save(path);
}

int cmd_degrade(const DegradeArgs& args) {
    DegradationParams params;
    params.saturation = opt_of(args.saturation);
    params.quant_step = opt_of(args.quant_step);
    params.gamma = args.gamma;
    params.sigma = args.sigma;
    params.seed = args.seed;
    params.validate();

    const Image input = load_image(args.input);
    const Kernel kernel = load_kernel(args.kernel);
    const Image observed = degrade(input, kernel, params);
    save_image(observed, args.output, args.bit_depth);
    write_sidecar(args.output + ".meta", args);
    std::cerr << "wrote " << args.output << " (" << observed.width() << "x" << observed.height()
              << ") and " << args.output << ".meta\n";
    return 0;
}

void fill_from_sidecar(DeblurArgs& args, const CLI::Option* sat_opt, const CLI::Option* quant_opt,
                       const CLI::Option* gamma_opt) {
    const KeyValueFile kv = KeyValueFile::load(args.params_from);
    const std::string format = kv.require("format");
    if (format != "sdeconv-degrade")
        throw std::invalid_argument(args.params_from + ": not a degradation record (format \"" +
                                    format + "\")");
    auto fill = [&](const CLI::Option* opt, const char* key, double& dst) {
        if (opt->count() > 0) return; // explicit flag/config wins
        const auto v = kv.get(key);
        if (!v || *v == "none") return;
        dst = kv.require_double(key);
    };
    fill(sat_opt, "saturation", args.saturation);
    fill(quant_opt, "quant_step", args.quant_step);
    fill(gamma_opt, "gamma", args.gamma);
}

int cmd_deblur(const DeblurArgs& args) {
    EnergyConfig ecfg;
    ecfg.data_term = parse_data_term(args.data_term);
    ecfg.regularizer = parse_reg_term(args.regularizer);
    ecfg.lambda = args.lambda;
    ecfg.params.saturation = opt_of(args.saturation);
    ecfg.params.quant_step = opt_of(args.quant_step);
    ecfg.params.gamma = args.gamma;
    ecfg.validate();
    args.solver.validate();

    const Image observed = load_image(args.input);
    const Kernel kernel = load_kernel(args.kernel);
    auto [estimate, report] = solve(observed, kernel, ecfg, args.solver);

    const double g = ecfg.latent_gamma();
    const Image display = (g != 1.0) ? gamma_compress(estimate, g) : estimate;
    save_image(display, args.output, args.bit_depth);

    const std::string report_path =
        args.report_path.empty() ? args.output + ".report" : args.report_path;
    report.save(report_path);

    if (!args.trace_path.empty()) {
        std::ofstream trace(args.trace_path, std::ios::binary);
        trace << "iteration\tenergy\n";
        for (const auto& [iter, energy] : report.trace)
            trace << iter << '\t' << format_double(energy) << '\n';
        if (!trace)
            throw IoError(args.trace_path + ": write failed");
    }

    std::cerr << "wrote " << args.output << "; energy " << format_double(report.initial_energy)
              << " -> " << format_double(report.final_energy) << " in " << report.iterations
              << " iterations (" << format_double(report.seconds) << " s)\n";
    return 0;
}

int cmd_dataset(const DatasetArgs& args) {
    const auto sources = expand_paths(args.sources, kImageExts, "source image");
    const auto kernels = expand_paths(args.kernels, kKernelExts, "kernel");
    DatasetRecipe recipe = args.recipe;
    recipe.base.quant_step = opt_of(args.quant_step);
    const DatasetManifest manifest = make_dataset(sources, kernels, recipe, args.out_dir);
    std::cerr << "wrote " << manifest.entries.size() << " dataset entries to " << args.out_dir
              << '\n';
    return 0;
}

int cmd_sweep(const SweepArgs& args) {
    const SweepSpec spec = SweepSpec::load(args.spec_path);
    const auto rows = run_sweep(spec, args.out_path, args.jobs);
    std::size_t ok = 0;
    for (const ResultRow& row : rows)
        if (row.ok()) ++ok;
    std::cerr << "sweep complete: " << ok << "/" << rows.size() << " rows usable, results in "
              << args.out_path << '\n';
    if (ok < rows.size())
        return 3; // some rows failed; their error records are in the file
    return 0;
}

int cmd_report(const ReportArgs& args) {
    const auto rows = load_results(args.rows_path);
    const SweepSummary summary = summarize(rows); // throws on nothing usable
    write_summary_files(summary, args.out_dir);
    try {
        save_image(plot_series(summary), (fs::path(args.out_dir) / "series.png").string(), 8);
        save_image(plot_summary_bars(summary), (fs::path(args.out_dir) / "summary_bars.png").string(), 8);
    } catch (const std::invalid_argument& ex) {
        std::cerr << "warning: plots skipped: " << ex.what() << '\n';
    }
    std::cerr << "wrote summary for " << summary.configs.size() << " configs to " << args.out_dir
              << '\n';
    return 0;
}

void add_solver_options(CLI::App* cmd, SolverConfig& s) {
    add_real(cmd, "--delta_init", s.delta_init, "Initial mutation magnitude");
    add_real(cmd, "--delta_min", s.delta_min, "Stop when delta falls below this");
    add_real(cmd, "--anneal_factor", s.anneal_factor, "Delta multiplier on a stalled window");
    cmd->add_option("--accept_window", s.accept_window,
                    "Iterations per annealing check (0 = 10x latent values)")
        ->capture_default_str();
    add_real(cmd, "--accept_threshold", s.accept_threshold,
             "Acceptance rate below which delta shrinks");
    add_real(cmd, "--p_chain", s.p_chain, "Probability of sampling near the last accepted pixel");
    cmd->add_option("--chain_radius", s.chain_radius, "Chained-sample box radius")
        ->capture_default_str();
    cmd->add_option("--max_iters", s.max_iters, "Hard iteration cap")->capture_default_str();
    cmd->add_option("--trace_stride", s.trace_stride,
                    "Iterations between energy-trace samples (0 = one window)")
        ->capture_default_str();
    cmd->add_option("--seed", s.seed, "Sampler seed")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-blind deconvolution with a camera-pipeline-aware data term"};
    app.set_config("--config", "", "Read option defaults from a key = value file");
    bool print_config = false;
    app.add_flag("--print-config", print_config,
                 "Dump the effective configuration of every command and exit")
        ->configurable(false);
    app.require_subcommand(0, 1);

    DegradeArgs degrade_args;
    auto* degrade_cmd =
        app.add_subcommand("degrade", "Apply the forward degradation pipeline to a sharp image");
    degrade_cmd->add_option("-i,--input", degrade_args.input, "Sharp input image")->required();
    degrade_cmd->add_option("-k,--kernel", degrade_args.kernel, "Blur kernel file")->required();
    degrade_cmd->add_option("-o,--output", degrade_args.output, "Observation output image")
        ->required();
    add_real(degrade_cmd, "--saturation", degrade_args.saturation,
             "Clip level c in (0,1]; nan disables");
    add_real(degrade_cmd, "--quant_step", degrade_args.quant_step,
             "Quantization step q in (0,1); nan disables");
    add_real(degrade_cmd, "--gamma", degrade_args.gamma, "Display gamma (1 = linear)");
    add_real(degrade_cmd, "--sigma", degrade_args.sigma, "Gaussian noise standard deviation");
    degrade_cmd->add_option("--seed", degrade_args.seed, "Noise seed")->capture_default_str();
    degrade_cmd->add_option("--bit_depth", degrade_args.bit_depth, "Output depth (8 or 16)")
        ->capture_default_str();

    DeblurArgs deblur_args;
    auto* deblur_cmd = app.add_subcommand("deblur", "Restore a sharp image from an observation");
    deblur_cmd->add_option("-i,--input", deblur_args.input, "Observed (degraded) image")
        ->required();
    deblur_cmd->add_option("-k,--kernel", deblur_args.kernel, "Blur kernel file")->required();
    deblur_cmd->add_option("-o,--output", deblur_args.output, "Restored output image")->required();
    deblur_cmd->add_option("--params-from", deblur_args.params_from,
                           "Degradation sidecar record; fills saturation/quant_step/gamma unless "
                           "given explicitly");
    deblur_cmd->add_option("--data_term", deblur_args.data_term,
                           "simple | saturation | quant_forward | quant_convex | gamma_inverse | "
                           "gamma | full")
        ->capture_default_str();
    deblur_cmd->add_option("--regularizer", deblur_args.regularizer, "tv | tv_gamma")
        ->capture_default_str();
    add_real(deblur_cmd, "--lambda", deblur_args.lambda, "Regularization weight");
    auto* sat_opt = add_real(deblur_cmd, "--saturation", deblur_args.saturation,
                             "Clip level c in (0,1]; nan disables");
    auto* quant_opt = add_real(deblur_cmd, "--quant_step", deblur_args.quant_step,
                               "Quantization step q in (0,1); nan disables");
    auto* gamma_opt = add_real(deblur_cmd, "--gamma", deblur_args.gamma,
                               "Display gamma used by the gamma-aware terms");
    deblur_cmd->add_option("--bit_depth", deblur_args.bit_depth, "Output depth (8 or 16)")
        ->capture_default_str();
    deblur_cmd->add_option("--report", deblur_args.report_path,
                           "Solver report path (default: <output>.report)");
    deblur_cmd->add_option("--trace", deblur_args.trace_path, "Energy trace TSV path");
    add_solver_options(deblur_cmd, deblur_args.solver);

    DatasetArgs dataset_args;
    auto* dataset_cmd =
        app.add_subcommand("dataset", "Generate a realistic degraded dataset with a manifest");
    dataset_cmd->add_option("-s,--sources", dataset_args.sources, "Source images or directories")
        ->required();
    dataset_cmd->add_option("-k,--kernels", dataset_args.kernels, "Kernel files or directories")
        ->required();
    dataset_cmd->add_option("-o,--out", dataset_args.out_dir, "Output directory")->required();
    add_real(dataset_cmd, "--gamma", dataset_args.recipe.base.gamma, "Display gamma");
    add_real(dataset_cmd, "--sigma", dataset_args.recipe.base.sigma, "Noise standard deviation");
    dataset_args.quant_step = dataset_args.recipe.base.quant_step.value_or(kUnset);
    add_real(dataset_cmd, "--quant_step", dataset_args.quant_step,
             "Quantization step; nan disables");
    add_real(dataset_cmd, "--clip_percentile", dataset_args.recipe.clip_percentile,
             "Saturation level percentile of the blurred linear image");
    dataset_cmd->add_option("--seed", dataset_args.recipe.base.seed, "Base noise seed")
        ->capture_default_str();
    dataset_cmd->add_option("--bit_depth", dataset_args.recipe.bit_depth, "Output depth (8 or 16)")
        ->capture_default_str();

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Run a (dataset x config x lambda) benchmark sweep, resumable");
    sweep_cmd->add_option("--spec", sweep_args.spec_path, "Sweep specification file")->required();
    sweep_cmd->add_option("-o,--out", sweep_args.out_path, "Results TSV path")->required();
    sweep_cmd->add_option("-j,--jobs", sweep_args.jobs, "Parallel rows")->capture_default_str();

    ReportArgs report_args;
    auto* report_cmd =
        app.add_subcommand("report", "Summarize sweep results into tables and plots");
    report_cmd->add_option("--rows", report_args.rows_path, "Results TSV from sweep")->required();
    report_cmd->add_option("-o,--out", report_args.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message to stderr
        return 1;
    }

    if (print_config) {
        std::cout << app.config_to_str(true, false);
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 1;
    }

    try {
        if (*degrade_cmd) return cmd_degrade(degrade_args);
        if (*deblur_cmd) {
            if (!deblur_args.params_from.empty())
                fill_from_sidecar(deblur_args, sat_opt, quant_opt, gamma_opt);
            return cmd_deblur(deblur_args);
        }
        if (*dataset_cmd) return cmd_dataset(dataset_args);
        if (*sweep_cmd) return cmd_sweep(sweep_args);
        if (*report_cmd) return cmd_report(report_args);
    } catch (const IoError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << '\n';
        return 3;
    }
    return 0;
}
