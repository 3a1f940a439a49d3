// Command-line front end: run experiments from config files, sweep config
// directories, run the property-check suite, audit traces for sublinear
// cell visits. Exit codes: 0 success, 1 check/run failure, 2 config error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uol/harness.hpp"
#include "uol/verify.hpp"

namespace fs = std::filesystem;

namespace {

int write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return 1;
    }
    out << text;
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
    uol::ExperimentConfig cfg;
    try {
        cfg = uol::ExperimentConfig::from_config(uol::Config::parse_file(config_path));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        uol::LossCurve curve = uol::run_experiment(cfg);
        std::string out_path = output_override.empty() ? cfg.output : output_override;
        if (int rc = write_text(out_path, uol::to_csv(curve)); rc != 0) return rc;
        if (!curve.rows.empty() && curve.rows.back().violations != 0) {
            std::cerr << "run finished with " << curve.rows.back().violations
                      << " per-step bound violations\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_sweep(const std::string& dir, std::size_t jobs) {
    std::vector<std::pair<std::string, uol::ExperimentConfig>> configs;
    std::vector<std::pair<std::string, std::string>> bad; // name, error
    std::vector<fs::path> files;
    try {
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".cfg")
                files.push_back(entry.path());
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
        try {
            configs.emplace_back(p.string(),
                                 uol::ExperimentConfig::from_config(uol::Config::parse_file(p.string())));
        } catch (const std::exception& e) {
            bad.emplace_back(p.string(), e.what());
        }
    }
    auto results = uol::sweep(configs, jobs);
    bool any_failed = !bad.empty();
    for (const auto& [name, err] : bad) std::cout << "[FAIL] " << name << " — " << err << "\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const uol::SweepResult& r = results[i];
        if (!r.curve) {
            std::cout << "[FAIL] " << r.name << " — " << r.error << "\n";
            any_failed = true;
            continue;
        }
        std::string out_path = configs[i].second.output;
        if (out_path.empty())
            out_path = fs::path(r.name).replace_extension(".csv").string();
        std::ofstream out(out_path, std::ios::binary);
        out << uol::to_csv(*r.curve);
        std::uint64_t v = r.curve->rows.empty() ? 0 : r.curve->rows.back().violations;
        std::cout << (v == 0 ? "[ OK ] " : "[FAIL] ") << r.name << " -> " << out_path;
        if (v != 0) {
            std::cout << " (" << v << " violations)";
            any_failed = true;
        }
        std::cout << "\n";
    }
    return any_failed ? 1 : 0;
}

int cmd_verify(const std::string& scope) {
    uol::VerifyReport report;
    try {
        report = uol::verify_suite(scope);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    for (const uol::VerifyLine& line : report.lines)
        std::cout << (line.pass ? "[PASS] " : "[FAIL] ") << line.scope << "/" << line.name
                  << " — " << line.detail << "\n";
    std::cout << (report.all_pass ? "all checks passed" : "CHECK FAILURES PRESENT") << " ("
              << report.lines.size() << " checks)\n";
    return report.all_pass ? 0 : 1;
}

int cmd_smv(const std::string& trace_path, const std::string& partition_spec,
            std::vector<std::uint64_t> checkpoints, const std::string& output) {
    try {
        uol::ProcessGen gen = uol::ProcessGen::file_trace(trace_path);
        std::vector<uol::Point> xs;
        for (std::uint64_t t = 1;; ++t) {
            try {
                xs.push_back(gen.next_input(t));
            } catch (const uol::end_of_trace&) {
                break;
            }
        }
        std::size_t colon = partition_spec.find(':');
        std::string kind = partition_spec.substr(0, colon);
        double param = colon == std::string::npos
                           ? 0.0
                           : uol::Config::parse_real(partition_spec.substr(colon + 1), "partition");
        uol::PartitionSpec partition = uol::PartitionSpec::dyadic_around(0.0L);
        if (kind == "dyadic_around")
            partition = uol::PartitionSpec::dyadic_around(static_cast<uol::Point>(param));
        else if (kind == "uniform_grid")
            partition = uol::PartitionSpec::uniform_grid(static_cast<uol::Point>(param));
        else
            throw std::invalid_argument("partition must be dyadic_around:<a> or uniform_grid:<w>");
        if (checkpoints.empty())
            for (std::uint64_t t = 1; t <= xs.size(); t *= 2) checkpoints.push_back(t);
        std::sort(checkpoints.begin(), checkpoints.end());
        auto rows = uol::smv_audit(xs, partition, checkpoints);
        std::string csv = "T,cells,ratio\n";
        char buf[128];
        for (const uol::SmvRow& r : rows) {
            std::snprintf(buf, sizeof(buf), "%llu,%llu,%.17g\n",
                          static_cast<unsigned long long>(r.horizon),
                          static_cast<unsigned long long>(r.distinct_cells), r.ratio);
            csv += buf;
        }
        return write_text(output, csv);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"online learning reductions simulator"};
    app.require_subcommand(1);

    std::string run_config, run_output;
    CLI::App* run = app.add_subcommand("run", "run one experiment config, emit the loss-curve CSV");
    run->add_option("config", run_config, "config file")->required();
    run->add_option("--output", run_output, "CSV destination (default: config's output, else stdout)");

    std::string sweep_dir;
    std::size_t jobs = 1;
    CLI::App* sw = app.add_subcommand("sweep", "run every *.cfg in a directory");
    sw->add_option("config-dir", sweep_dir, "directory of config files")->required();
    sw->add_option("--jobs", jobs, "parallel workers")->default_val(1);

    std::string scope = "all";
    CLI::App* ver = app.add_subcommand("verify", "run the property-check suite");
    ver->add_option("--scope", scope,
                    "all | value_space | learners | reductions | processes | harness");

    std::string trace_path, partition_spec = "dyadic_around:0", smv_output;
    std::vector<std::uint64_t> checkpoints;
    CLI::App* smv = app.add_subcommand("smv-check", "count distinct partition cells along a trace");
    smv->add_option("trace-file", trace_path, "one input point per line")->required();
    smv->add_option("--partition", partition_spec, "dyadic_around:<a> or uniform_grid:<w>");
    smv->add_option("--checkpoints", checkpoints, "horizons to report (default: powers of two)");
    smv->add_option("--output", smv_output, "CSV destination (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(run_config, run_output);
    if (sw->parsed()) return cmd_sweep(sweep_dir, jobs);
    if (ver->parsed()) return cmd_verify(scope);
    if (smv->parsed()) return cmd_smv(trace_path, partition_spec, checkpoints, smv_output);
    return 2;
}
