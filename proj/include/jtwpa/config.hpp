#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jtwpa/circuit.hpp"
#include "jtwpa/mixing.hpp"
#include "jtwpa/noise.hpp"

namespace jtwpa {

enum class SweepKind {
    dispersion,
    sparams,
    stopband_mc,
    gain,
    noise,
    calibrate,
    power_sweep,
    imd,
};

const char* sweep_kind_name(SweepKind k);

struct SweepSpec {
    SweepKind kind = SweepKind::dispersion;
    std::optional<double> f_start_hz, f_stop_hz, f_step_hz;
    std::optional<double> p_start_dbm, p_stop_dbm, p_step_dbm;
    std::optional<double> probe_freq_hz;     // power_sweep pump sweeps
    int lines = 100;                         // stopband_mc ensemble size
    double tone_separation_hz = 5e6;         // imd
    int max_order = 3;                       // imd
};

struct IoSpec {
    std::vector<std::string> inputs;
    std::string output_dir = ".";
};

struct ChainSpec {
    double z_ref = 50.0;
    ChainModel model;
};

struct ScenarioConfig {
    std::uint64_t seed = 0x4a57'50'41ull;
    UnitCellParams cell;
    int cell_count = 0;
    std::optional<DisorderSpec> disorder; // seed field filled from the root seed
    std::optional<PumpSettings> pump;
    SweepSpec sweep;
    IoSpec io;
    ChainSpec chain;
};

struct ValidationError {
    std::string path;    // dotted field path, e.g. "device.cell_count"
    std::string message;
};

struct ConfigLoadResult {
    std::optional<ScenarioConfig> config; // set only when errors is empty
    std::vector<ValidationError> errors;
    std::string config_hash; // FNV-1a of the raw document, hex
};

// Full-document strict parse: unknown keys are errors, all problems are
// collected in one pass with field paths.
ConfigLoadResult load_scenario_config(const std::string& text);
ConfigLoadResult load_scenario_config_file(const std::string& path);

// Inclusive numeric grid start..stop in steps of step (last point within half
// a step of stop is kept).
std::vector<double> make_grid(double start, double stop, double step);

} // namespace jtwpa
