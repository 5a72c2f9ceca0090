#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "jtwpa/config.hpp"
#include "jtwpa/csvio.hpp"
#include "jtwpa/scenario.hpp"
#include "jtwpa/touchstone.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitIo = 4;

void print_json(const json& j) { std::printf("%s\n", j.dump(2).c_str()); }

int fail(const char* code, int exit_code, const std::string& message,
         const std::vector<jtwpa::ValidationError>& errors = {}) {
    json j;
    j["error"]["code"] = code;
    j["error"]["message"] = message;
    json fields = json::array();
    json details = json::array();
    for (const auto& e : errors) {
        fields.push_back(e.path);
        details.push_back({{"path", e.path}, {"message", e.message}});
    }
    j["error"]["fields"] = fields;
    if (!details.empty())
        j["error"]["details"] = details;
    print_json(j);
    return exit_code;
}

int cmd_run(const std::string& config_path, const jtwpa::RunOverrides& overrides) {
    std::string text;
    try {
        text = jtwpa::read_file(config_path);
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    const jtwpa::ConfigLoadResult res = jtwpa::load_scenario_config(text);
    if (!res.errors.empty())
        return fail("config", kExitConfig, "configuration is invalid", res.errors);

    try {
        const std::vector<std::string> written =
            jtwpa::run_scenario(*res.config, res.config_hash, overrides);
        json j;
        j["written"] = written;
        j["config_hash"] = res.config_hash;
        print_json(j);
        return 0;
    } catch (const jtwpa::scenario_io_error& e) {
        return fail("io", kExitIo, e.what());
    } catch (const jtwpa::scenario_compute_error& e) {
        return fail("compute", kExitCompute, e.what());
    } catch (const std::exception& e) {
        return fail("compute", kExitCompute, e.what());
    }
}

int cmd_validate(const std::string& config_path) {
    std::string text;
    try {
        text = jtwpa::read_file(config_path);
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    const jtwpa::ConfigLoadResult res = jtwpa::load_scenario_config(text);
    json j;
    j["ok"] = res.errors.empty();
    json errs = json::array();
    for (const auto& e : res.errors)
        errs.push_back({{"path", e.path}, {"message", e.message}});
    j["errors"] = errs;
    print_json(j);
    return res.errors.empty() ? 0 : kExitConfig;
}

jtwpa::TouchstoneUnit unit_from_string(const std::string& s) {
    if (s == "hz")
        return jtwpa::TouchstoneUnit::Hz;
    if (s == "khz")
        return jtwpa::TouchstoneUnit::kHz;
    if (s == "mhz")
        return jtwpa::TouchstoneUnit::MHz;
    return jtwpa::TouchstoneUnit::GHz;
}

int cmd_touchstone_convert(const std::string& in, const std::string& out,
                           const std::string& format, const std::string& unit) {
    std::string text;
    try {
        text = jtwpa::read_file(in);
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    jtwpa::TouchstoneData data;
    try {
        data = jtwpa::parse_touchstone(text);
    } catch (const std::exception& e) {
        return fail("compute", kExitCompute, std::string(in) + ": " + e.what());
    }
    try {
        jtwpa::write_file_atomic(out,
                                 jtwpa::format_touchstone(
                                     data, jtwpa::touchstone_format_from_string(format),
                                     unit_from_string(unit)));
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    json j;
    j["written"] = {out};
    print_json(j);
    return 0;
}

int cmd_touchstone_resample(const std::string& in, const std::string& out, double start,
                            double stop, double step, const std::string& format,
                            const std::string& unit) {
    std::string text;
    try {
        text = jtwpa::read_file(in);
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    try {
        const jtwpa::TouchstoneData data = jtwpa::parse_touchstone(text);
        const jtwpa::TouchstoneData res =
            jtwpa::resample_touchstone(data, jtwpa::make_grid(start, stop, step));
        jtwpa::write_file_atomic(out,
                                 jtwpa::format_touchstone(
                                     res, jtwpa::touchstone_format_from_string(format),
                                     unit_from_string(unit)));
    } catch (const jtwpa::touchstone_error& e) {
        return fail("compute", kExitCompute, std::string(in) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        return fail("compute", kExitCompute, e.what());
    } catch (const std::exception& e) {
        return fail("io", kExitIo, e.what());
    }
    json j;
    j["written"] = {out};
    print_json(j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Josephson traveling-wave parametric amplifier analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int workers = 0;

    CLI::App* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("--config", config_path, "scenario config file")->required();
    CLI::Option* out_opt = run->add_option("--out", out_dir, "output directory override");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "root seed override");
    run->add_option("--workers", workers, "worker threads (0 = all cores)");

    CLI::App* validate = app.add_subcommand("validate", "validate a scenario config");
    validate->add_option("--config", config_path, "scenario config file")->required();

    CLI::App* touchstone = app.add_subcommand("touchstone", "two-port file helpers");
    touchstone->require_subcommand(1);
    std::string ts_in, ts_out, ts_format = "ri", ts_unit = "hz";
    double rs_start = 0, rs_stop = 0, rs_step = 0;

    CLI::App* conv = touchstone->add_subcommand("convert", "rewrite in another format");
    conv->add_option("--in", ts_in, "input .s2p file")->required();
    conv->add_option("--out", ts_out, "output .s2p file")->required();
    conv->add_option("--format", ts_format, "ri|ma|db")
        ->check(CLI::IsMember({"ri", "ma", "db"}));
    conv->add_option("--unit", ts_unit, "hz|khz|mhz|ghz")
        ->check(CLI::IsMember({"hz", "khz", "mhz", "ghz"}));

    CLI::App* resam = touchstone->add_subcommand("resample", "linear resample onto a grid");
    resam->add_option("--in", ts_in, "input .s2p file")->required();
    resam->add_option("--out", ts_out, "output .s2p file")->required();
    resam->add_option("--start", rs_start, "grid start, Hz")->required();
    resam->add_option("--stop", rs_stop, "grid stop, Hz")->required();
    resam->add_option("--step", rs_step, "grid step, Hz")->required();
    resam->add_option("--format", ts_format, "ri|ma|db")
        ->check(CLI::IsMember({"ri", "ma", "db"}));
    resam->add_option("--unit", ts_unit, "hz|khz|mhz|ghz")
        ->check(CLI::IsMember({"hz", "khz", "mhz", "ghz"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("config", kExitConfig, e.what());
    }

    if (run->parsed()) {
        jtwpa::RunOverrides ov;
        if (out_opt->count())
            ov.output_dir = out_dir;
        if (seed_opt->count())
            ov.seed = seed;
        ov.workers = workers;
        return cmd_run(config_path, ov);
    }
    if (validate->parsed())
        return cmd_validate(config_path);
    if (touchstone->parsed()) {
        if (conv->parsed())
            return cmd_touchstone_convert(ts_in, ts_out, ts_format, ts_unit);
        if (resam->parsed())
            return cmd_touchstone_resample(ts_in, ts_out, rs_start, rs_stop, rs_step,
                                           ts_format, ts_unit);
    }
    return fail("config", kExitConfig, "no subcommand given");
}
