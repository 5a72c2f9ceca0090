#include "jtwpa/config.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "jtwpa/csvio.hpp"
#include "jtwpa/rng.hpp"

namespace jtwpa {

namespace {

using nlohmann::json;

struct Ctx {
    std::vector<ValidationError>* errors;

    void fail(const std::string& path, const std::string& msg) {
        errors->push_back({path, msg});
    }
};

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

void check_keys(Ctx& c, const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            c.fail(join(path, it.key()), "unknown key");
    }
}

const json* get_object(Ctx& c, const json& obj, const std::string& path,
                       const char* key, bool required) {
    if (!obj.contains(key)) {
        if (required)
            c.fail(join(path, key), "required section missing");
        return nullptr;
    }
    const json& v = obj.at(key);
    if (!v.is_object()) {
        c.fail(join(path, key), "expected an object");
        return nullptr;
    }
    return &v;
}

std::optional<double> get_number(Ctx& c, const json& obj, const std::string& path,
                                 const char* key, bool required) {
    if (!obj.contains(key)) {
        if (required)
            c.fail(join(path, key), "required field missing");
        return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        c.fail(join(path, key), "expected a number");
        return std::nullopt;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        c.fail(join(path, key), "expected a finite number");
        return std::nullopt;
    }
    return d;
}

std::optional<std::int64_t> get_integer(Ctx& c, const json& obj, const std::string& path,
                                        const char* key, bool required) {
    if (!obj.contains(key)) {
        if (required)
            c.fail(join(path, key), "required field missing");
        return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        c.fail(join(path, key), "expected an integer");
        return std::nullopt;
    }
    return v.get<std::int64_t>();
}

std::optional<std::string> get_string(Ctx& c, const json& obj, const std::string& path,
                                      const char* key, bool required) {
    if (!obj.contains(key)) {
        if (required)
            c.fail(join(path, key), "required field missing");
        return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        c.fail(join(path, key), "expected a string");
        return std::nullopt;
    }
    return v.get<std::string>();
}

void parse_device(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* dev = get_object(c, root, "", "device", true);
    if (!dev)
        return;
    check_keys(c, *dev, "device", {"cell_count", "c_ground", "junctions", "resonator"});

    if (auto n = get_integer(c, *dev, "device", "cell_count", true)) {
        if (*n <= 0)
            c.fail("device.cell_count", "must be positive");
        else
            cfg.cell_count = static_cast<int>(*n);
    }
    if (auto v = get_number(c, *dev, "device", "c_ground", true)) {
        if (*v <= 0)
            c.fail("device.c_ground", "must be positive");
        else
            cfg.cell.c_ground = *v;
    }

    if (const json* j = get_object(c, *dev, "device", "junctions", true)) {
        const std::string p = "device.junctions";
        check_keys(c, *j, p, {"critical_current", "self_capacitance", "count_per_cell"});
        if (auto v = get_number(c, *j, p, "critical_current", true)) {
            if (*v <= 0)
                c.fail(p + ".critical_current", "must be positive");
            else
                cfg.cell.junctions.critical_current = *v;
        }
        if (auto v = get_number(c, *j, p, "self_capacitance", true)) {
            if (*v < 0)
                c.fail(p + ".self_capacitance", "must be non-negative");
            else
                cfg.cell.junctions.self_capacitance = *v;
        }
        if (auto v = get_integer(c, *j, p, "count_per_cell", true)) {
            if (*v <= 0)
                c.fail(p + ".count_per_cell", "must be positive");
            else
                cfg.cell.junctions.count_per_cell = static_cast<int>(*v);
        }
    }

    if (const json* r = get_object(c, *dev, "device", "resonator", true)) {
        const std::string p = "device.resonator";
        check_keys(c, *r, p, {"c_res", "l_res", "c_coupling"});
        if (auto v = get_number(c, *r, p, "c_res", true)) {
            if (*v <= 0)
                c.fail(p + ".c_res", "must be positive");
            else
                cfg.cell.resonator.c_res = *v;
        }
        if (auto v = get_number(c, *r, p, "l_res", true)) {
            if (*v <= 0)
                c.fail(p + ".l_res", "must be positive");
            else
                cfg.cell.resonator.l_res = *v;
        }
        if (auto v = get_number(c, *r, p, "c_coupling", true)) {
            if (*v < 0)
                c.fail(p + ".c_coupling", "must be non-negative");
            else
                cfg.cell.resonator.c_coupling = *v;
        }
    }
}

void parse_disorder(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* d = get_object(c, root, "", "disorder", false);
    if (!d)
        return;
    check_keys(c, *d, "disorder", {"sigma_rel", "target"});
    DisorderSpec spec;
    bool ok = true;
    if (auto v = get_number(c, *d, "disorder", "sigma_rel", true)) {
        if (*v < 0.0 || *v >= 0.2) {
            c.fail("disorder.sigma_rel", "must lie in [0, 0.2)");
            ok = false;
        } else
            spec.sigma_rel = *v;
    } else
        ok = false;
    if (auto t = get_string(c, *d, "disorder", "target", true)) {
        if (*t == "resonator_c_res")
            spec.target = DisorderTarget::resonator_c_res;
        else if (*t == "junction_critical_current")
            spec.target = DisorderTarget::junction_critical_current;
        else if (*t == "c_ground")
            spec.target = DisorderTarget::c_ground;
        else {
            c.fail("disorder.target", "must be one of resonator_c_res, "
                                      "junction_critical_current, c_ground");
            ok = false;
        }
    } else
        ok = false;
    if (ok)
        cfg.disorder = spec;
}

void parse_pump(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* p = get_object(c, root, "", "pump", false);
    if (!p)
        return;
    check_keys(c, *p, "pump", {"frequency_hz", "power_dbm"});
    PumpSettings pump;
    bool ok = true;
    if (auto v = get_number(c, *p, "pump", "frequency_hz", true)) {
        if (*v <= 0) {
            c.fail("pump.frequency_hz", "must be positive");
            ok = false;
        } else
            pump.frequency_hz = *v;
    } else
        ok = false;
    if (auto v = get_number(c, *p, "pump", "power_dbm", true))
        pump.power_dbm = *v;
    else
        ok = false;
    if (ok)
        cfg.pump = pump;
}

SweepKind kind_from_string(Ctx& c, const std::string& s, bool& ok) {
    ok = true;
    if (s == "dispersion")
        return SweepKind::dispersion;
    if (s == "sparams")
        return SweepKind::sparams;
    if (s == "stopband_mc")
        return SweepKind::stopband_mc;
    if (s == "gain")
        return SweepKind::gain;
    if (s == "noise")
        return SweepKind::noise;
    if (s == "calibrate")
        return SweepKind::calibrate;
    if (s == "power_sweep")
        return SweepKind::power_sweep;
    if (s == "imd")
        return SweepKind::imd;
    c.fail("sweep.kind", "unknown sweep kind '" + s + "'");
    ok = false;
    return SweepKind::dispersion;
}

void parse_sweep(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* s = get_object(c, root, "", "sweep", true);
    if (!s)
        return;
    check_keys(c, *s, "sweep",
               {"kind", "f_start_hz", "f_stop_hz", "f_step_hz", "p_start_dbm",
                "p_stop_dbm", "p_step_dbm", "probe_freq_hz", "lines",
                "tone_separation_hz", "max_order"});

    if (auto k = get_string(c, *s, "sweep", "kind", true)) {
        bool ok;
        cfg.sweep.kind = kind_from_string(c, *k, ok);
    }
    cfg.sweep.f_start_hz = get_number(c, *s, "sweep", "f_start_hz", false);
    cfg.sweep.f_stop_hz = get_number(c, *s, "sweep", "f_stop_hz", false);
    cfg.sweep.f_step_hz = get_number(c, *s, "sweep", "f_step_hz", false);
    cfg.sweep.p_start_dbm = get_number(c, *s, "sweep", "p_start_dbm", false);
    cfg.sweep.p_stop_dbm = get_number(c, *s, "sweep", "p_stop_dbm", false);
    cfg.sweep.p_step_dbm = get_number(c, *s, "sweep", "p_step_dbm", false);
    cfg.sweep.probe_freq_hz = get_number(c, *s, "sweep", "probe_freq_hz", false);
    if (auto v = get_integer(c, *s, "sweep", "lines", false)) {
        if (*v < 2)
            c.fail("sweep.lines", "ensemble needs at least 2 lines");
        else
            cfg.sweep.lines = static_cast<int>(*v);
    }
    if (auto v = get_number(c, *s, "sweep", "tone_separation_hz", false)) {
        if (*v <= 0)
            c.fail("sweep.tone_separation_hz", "must be positive");
        else
            cfg.sweep.tone_separation_hz = *v;
    }
    if (auto v = get_integer(c, *s, "sweep", "max_order", false)) {
        if (*v != 3 && *v != 5 && *v != 7)
            c.fail("sweep.max_order", "must be 3, 5 or 7");
        else
            cfg.sweep.max_order = static_cast<int>(*v);
    }
}

void parse_io(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* io = get_object(c, root, "", "io", false);
    if (!io)
        return;
    check_keys(c, *io, "io", {"inputs", "output_dir"});
    if (io->contains("inputs")) {
        const json& v = io->at("inputs");
        if (!v.is_array())
            c.fail("io.inputs", "expected an array of paths");
        else
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_string())
                    c.fail("io.inputs[" + std::to_string(i) + "]", "expected a string");
                else
                    cfg.io.inputs.push_back(v[i].get<std::string>());
            }
    }
    if (auto v = get_string(c, *io, "io", "output_dir", false))
        cfg.io.output_dir = *v;
}

void parse_chain(Ctx& c, const json& root, ScenarioConfig& cfg) {
    const json* ch = get_object(c, root, "", "chain", false);
    if (!ch)
        return;
    check_keys(c, *ch, "chain", {"z_ref", "system_noise_quanta", "system_gain_db"});
    if (auto v = get_number(c, *ch, "chain", "z_ref", false)) {
        if (*v <= 0)
            c.fail("chain.z_ref", "must be positive");
        else
            cfg.chain.z_ref = *v;
    }
    if (auto v = get_number(c, *ch, "chain", "system_noise_quanta", false)) {
        if (*v < 0)
            c.fail("chain.system_noise_quanta", "must be non-negative");
        else
            cfg.chain.model.system_noise_quanta = *v;
    }
    if (auto v = get_number(c, *ch, "chain", "system_gain_db", false))
        cfg.chain.model.system_gain_db = *v;
}

void require_freq_grid(Ctx& c, const ScenarioConfig& cfg) {
    const SweepSpec& s = cfg.sweep;
    if (!s.f_start_hz)
        c.fail("sweep.f_start_hz", "required for this sweep kind");
    if (!s.f_stop_hz)
        c.fail("sweep.f_stop_hz", "required for this sweep kind");
    if (!s.f_step_hz)
        c.fail("sweep.f_step_hz", "required for this sweep kind");
    if (s.f_start_hz && s.f_stop_hz && s.f_step_hz) {
        if (*s.f_start_hz <= 0)
            c.fail("sweep.f_start_hz", "must be positive");
        if (*s.f_stop_hz < *s.f_start_hz)
            c.fail("sweep.f_stop_hz", "must be at or above f_start_hz");
        if (*s.f_step_hz <= 0)
            c.fail("sweep.f_step_hz", "must be positive");
    }
}

void check_power_grid(Ctx& c, const ScenarioConfig& cfg) {
    const SweepSpec& s = cfg.sweep;
    const bool any = s.p_start_dbm || s.p_stop_dbm || s.p_step_dbm;
    if (!any)
        return; // canonical defaults apply
    if (!(s.p_start_dbm && s.p_stop_dbm && s.p_step_dbm)) {
        c.fail("sweep.p_start_dbm", "power grid needs all of p_start_dbm, p_stop_dbm, "
                                    "p_step_dbm or none");
        return;
    }
    if (*s.p_stop_dbm < *s.p_start_dbm)
        c.fail("sweep.p_stop_dbm", "must be at or above p_start_dbm");
    if (*s.p_step_dbm <= 0)
        c.fail("sweep.p_step_dbm", "must be positive");
}

void validate_kind_requirements(Ctx& c, const ScenarioConfig& cfg) {
    const SweepKind k = cfg.sweep.kind;
    const bool needs_pump = k == SweepKind::gain || k == SweepKind::noise ||
                            k == SweepKind::power_sweep || k == SweepKind::imd;
    if (needs_pump && !cfg.pump)
        c.fail("pump", "required for sweep kind '" +
                           std::string(sweep_kind_name(k)) + "'");

    switch (k) {
    case SweepKind::dispersion:
    case SweepKind::sparams:
    case SweepKind::gain:
    case SweepKind::noise:
        require_freq_grid(c, cfg);
        break;
    case SweepKind::stopband_mc:
        require_freq_grid(c, cfg);
        if (!cfg.disorder)
            c.fail("disorder", "required for sweep kind 'stopband_mc'");
        break;
    case SweepKind::calibrate:
        if (cfg.io.inputs.empty())
            c.fail("io.inputs", "at least one qubit dataset required for 'calibrate'");
        break;
    case SweepKind::power_sweep:
        require_freq_grid(c, cfg);
        check_power_grid(c, cfg);
        break;
    case SweepKind::imd:
        require_freq_grid(c, cfg);
        check_power_grid(c, cfg);
        break;
    }
}

} // namespace

const char* sweep_kind_name(SweepKind k) {
    switch (k) {
    case SweepKind::dispersion:
        return "dispersion";
    case SweepKind::sparams:
        return "sparams";
    case SweepKind::stopband_mc:
        return "stopband_mc";
    case SweepKind::gain:
        return "gain";
    case SweepKind::noise:
        return "noise";
    case SweepKind::calibrate:
        return "calibrate";
    case SweepKind::power_sweep:
        return "power_sweep";
    case SweepKind::imd:
        return "imd";
    }
    return "?";
}

ConfigLoadResult load_scenario_config(const std::string& text) {
    ConfigLoadResult out;
    {
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(hash_label(text)));
        out.config_hash = buf;
    }

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        out.errors.push_back({"", std::string("invalid JSON: ") + e.what()});
        return out;
    }
    if (!root.is_object()) {
        out.errors.push_back({"", "top level must be an object"});
        return out;
    }

    ScenarioConfig cfg;
    Ctx c{&out.errors};
    check_keys(c, root, "", {"seed", "device", "disorder", "pump", "sweep", "io", "chain"});

    if (root.contains("seed")) {
        const json& v = root.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            c.fail("seed", "expected an unsigned integer");
        else if (v.is_number_integer() && v.get<std::int64_t>() < 0)
            c.fail("seed", "must be non-negative");
        else
            cfg.seed = v.get<std::uint64_t>();
    }

    parse_device(c, root, cfg);
    parse_disorder(c, root, cfg);
    parse_pump(c, root, cfg);
    parse_sweep(c, root, cfg);
    parse_io(c, root, cfg);
    parse_chain(c, root, cfg);
    if (out.errors.empty())
        validate_kind_requirements(c, cfg);

    if (out.errors.empty())
        out.config = std::move(cfg);
    return out;
}

ConfigLoadResult load_scenario_config_file(const std::string& path) {
    return load_scenario_config(read_file(path));
}

std::vector<double> make_grid(double start, double stop, double step) {
    if (step <= 0)
        throw std::invalid_argument("grid step must be positive");
    std::vector<double> g;
    const double n = std::floor((stop - start) / step + 0.5);
    for (int i = 0; i <= static_cast<int>(n); ++i) {
        const double v = start + step * i;
        if (v > stop + step / 2)
            break;
        g.push_back(v);
    }
    if (g.empty())
        g.push_back(start);
    return g;
}

} // namespace jtwpa
