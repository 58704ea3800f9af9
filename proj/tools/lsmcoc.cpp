// Command line front end. Three operations, one JSON configuration:
//   value     fit the backward recursion, write coefficients.csv + manifest.json
//   validate  out-of-sample diagnostics for fitted coefficients
//   oracle    independent estimate (nested simulation or closed form)
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 oracle unsupported for the requested setup.

#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lsmcoc/config.hpp"

namespace {

void print_value_summary(const lsmcoc::ResolvedConfig& cfg, const lsmcoc::ValueArtifacts& art) {
    double total = 0.0;
    for (const auto& [t, seconds] : art.step_seconds) {
        std::printf("step t=%d: %.2f s\n", t, seconds);
        total += seconds;
    }
    if (art.selection_ran) {
        std::printf("selected strikes:");
        for (double k : art.selection.strikes) std::printf(" %g", k);
        std::printf("\n");
    }
    for (const auto& [t, cols] : art.pruned_columns) {
        std::printf("note: t=%d design had dependent columns, coefficients zeroed:", t);
        for (const auto& c : cols) std::printf(" %s", c.c_str());
        std::printf("\n");
    }
    std::printf("r0 = %.10g\ne0 = %.10g\nv0 = %.10g\n", art.table.time_zero.r,
                art.table.time_zero.e, art.table.time_zero.v);
    std::printf("identity %s\n", art.manifest["identity"].get<std::string>().c_str());
    std::printf("total %.2f s; wrote %s/coefficients.csv and manifest.json\n", total,
                cfg.output_dir.c_str());
}

void print_validation_summary(const lsmcoc::ResolvedConfig& cfg,
                              const lsmcoc::ValidationReport& report) {
    for (const auto& tv : report.per_time) {
        std::printf(
            "t=%d  nrmse R/E/V = %.4g / %.4g / %.4g  andp [%.4g, %.4g]  aroc median %.4g"
            " (excluded %zu)\n",
            tv.t, tv.nrmse_r, tv.nrmse_e, tv.nrmse_v, tv.andp_lo, tv.andp_hi, tv.aroc_median,
            tv.aroc_excluded);
    }
    std::printf("wrote %s/validation_report.csv and histograms.csv\n", cfg.output_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Least squares Monte Carlo valuation of liability cash flows under a "
        "cost-of-capital risk margin"};
    app.require_subcommand(1);

    std::string config_path, output_dir, coeff_path;
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    std::optional<int> bins;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--output-dir", output_dir,
                        "artifact directory (default: output.dir from the config)");
        sub->add_option("--threads", threads, "worker threads (0 = all hardware threads)");
        sub->add_option("--seed", seed, "override the operation's seed");
    };

    CLI::App* value =
        app.add_subcommand("value", "fit the backward recursion and write the artifacts");
    add_common(value);
    CLI::App* validate =
        app.add_subcommand("validate", "out-of-sample diagnostics for fitted coefficients");
    add_common(validate);
    validate->add_option("--coefficients", coeff_path,
                         "coefficient table (default: <output-dir>/coefficients.csv)");
    validate->add_option("--bins", bins, "histogram bins per diagnostic series");
    CLI::App* oracle = app.add_subcommand(
        "oracle", "independent estimate (nested simulation or closed form)");
    add_common(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        lsmcoc::ResolvedConfig cfg = lsmcoc::load_config(config_path);
        lsmcoc::apply_thread_request(cfg, threads);
        if (!output_dir.empty()) cfg.output_dir = output_dir;

        if (value->parsed()) {
            if (seed) cfg.run.seed = *seed;
            auto art = lsmcoc::run_value(cfg);
            lsmcoc::write_value_artifacts(cfg.output_dir, art);
            print_value_summary(cfg, art);
        } else if (validate->parsed()) {
            if (seed) cfg.validation.seed = *seed;
            if (bins) cfg.validation.bins = *bins;

            lsmcoc::Json manifest_json;
            try {
                manifest_json =
                    lsmcoc::Json::parse(lsmcoc::read_file(cfg.output_dir + "/manifest.json"));
            } catch (const lsmcoc::Json::parse_error& e) {
                throw lsmcoc::ConfigError(std::string("manifest: ") + e.what());
            }
            lsmcoc::ManifestData md = lsmcoc::read_manifest(manifest_json);

            std::string cpath =
                coeff_path.empty() ? cfg.output_dir + "/coefficients.csv" : coeff_path;
            std::istringstream is(lsmcoc::read_file(cpath));
            lsmcoc::CoefficientTable table = lsmcoc::read_coefficients(is);
            table.coc = md.coc;
            table.seed = md.seed;

            std::string expect = lsmcoc::compute_identity(cfg.model.canonical, cfg.run.coc,
                                                          cfg.horizon, table.labels);
            if (expect != md.identity)
                throw lsmcoc::ConfigError(
                    "validate: the artifacts in " + cfg.output_dir +
                    " were produced under a different configuration (identity " + md.identity +
                    ", expected " + expect + ")");
            if (md.horizon != table.horizon)
                throw lsmcoc::ConfigError("validate: manifest horizon " +
                                          std::to_string(md.horizon) +
                                          " does not match the coefficient table");

            auto report = lsmcoc::run_validation(cfg, md.strikes, table);
            lsmcoc::write_validation_artifacts(cfg.output_dir, report);
            print_validation_summary(cfg, report);
        } else {
            if (seed) cfg.oracle.seed = *seed;
            auto est = lsmcoc::run_oracle(cfg);
            lsmcoc::write_oracle_artifact(cfg.output_dir, est);
            std::printf("value = %.10g (se %.4g, method %s)\n", est.value, est.standard_error,
                        est.method.c_str());
            std::printf("wrote %s/oracle.csv\n", cfg.output_dir.c_str());
        }
    } catch (const lsmcoc::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const lsmcoc::OracleUnsupportedError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const lsmcoc::NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
