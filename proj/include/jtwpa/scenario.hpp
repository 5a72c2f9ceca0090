#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jtwpa/config.hpp"

namespace jtwpa {

class scenario_compute_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class scenario_io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    int workers = 0; // 0 = hardware concurrency
};

// Executes the configured sweep and writes its CSV/JSON outputs. All results
// are computed before the first file is touched, and each file lands via a
// temp-and-rename, so a failing run leaves no partial outputs. Returns the
// paths written.
std::vector<std::string> run_scenario(const ScenarioConfig& cfg,
                                      const std::string& config_hash,
                                      const RunOverrides& overrides = {});

} // namespace jtwpa
