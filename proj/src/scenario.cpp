#include "jtwpa/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>

#include "jtwpa/constants.hpp"
#include "jtwpa/csvio.hpp"
#include "jtwpa/power.hpp"
#include "jtwpa/rng.hpp"
#include "jtwpa/transmon.hpp"
#include "jtwpa/twoport.hpp"

namespace jtwpa {

namespace {

using nlohmann::json;

struct OutputFile {
    std::string name;
    std::string body;
};

struct RunContext {
    const ScenarioConfig* cfg;
    std::uint64_t seed;
    std::string config_hash;
    int workers;
    std::vector<OutputFile> files;

    std::vector<std::string> provenance() const {
        return {"config_hash=" + config_hash, "seed=" + std::to_string(seed),
                std::string("version=") + toolkit_name + " " + toolkit_version};
    }

    CsvBuilder csv(std::vector<std::string> header) const {
        CsvBuilder b;
        for (const std::string& p : provenance())
            b.add_comment(p);
        b.set_header(std::move(header));
        return b;
    }

    void add_json(const std::string& name, const json& j) {
        json doc = j;
        doc["provenance"] = {{"config_hash", config_hash},
                             {"seed", seed},
                             {"version", std::string(toolkit_name) + " " + toolkit_version}};
        files.push_back({name, doc.dump(2) + "\n"});
    }
};

std::vector<double> freq_grid(const ScenarioConfig& cfg) {
    return make_grid(*cfg.sweep.f_start_hz, *cfg.sweep.f_stop_hz, *cfg.sweep.f_step_hz);
}

std::vector<double> input_power_grid(const ScenarioConfig& cfg, double def_start,
                                     double def_stop, double def_step) {
    const SweepSpec& s = cfg.sweep;
    if (s.p_start_dbm)
        return make_grid(*s.p_start_dbm, *s.p_stop_dbm, *s.p_step_dbm);
    return make_grid(def_start, def_stop, def_step);
}

double grid_center_freq(const ScenarioConfig& cfg) {
    if (cfg.sweep.probe_freq_hz)
        return *cfg.sweep.probe_freq_hz;
    return (*cfg.sweep.f_start_hz + *cfg.sweep.f_stop_hz) / 2.0;
}

void run_dispersion(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    CsvBuilder b = ctx.csv({"freq_hz", "k_re", "k_im"});
    for (double f : freq_grid(cfg)) {
        const BlochWavenumber k = bloch_wavenumber(cell_abcd(cfg.cell, f));
        b.add_row({f, k.re, k.im});
    }
    ctx.files.push_back({"dispersion.csv", b.str()});
}

void run_sparams(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    const DeviceLine line = uniform_line(cfg.cell, cfg.cell_count);
    CsvBuilder b = ctx.csv({"freq_hz", "s11_re", "s11_im", "s21_re", "s21_im", "s21_db"});
    for (double f : freq_grid(cfg)) {
        const ScaledABCD m = cascade(line, f);
        const SMatrix s = abcd_to_s(m, cfg.chain.z_ref);
        const double p21 = s21_power(m, cfg.chain.z_ref);
        const double db = 10.0 * std::log10(std::max(p21, 1e-300));
        b.add_row({f, s.s11.real(), s.s11.imag(), s.s21.real(), s.s21.imag(), db});
    }
    ctx.files.push_back({"sparams.csv", b.str()});
}

void run_stopband_mc(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    DisorderSpec disorder = *cfg.disorder;
    disorder.seed = derive_seed(ctx.seed, "stopband-mc");
    const std::vector<double> freqs = freq_grid(cfg);

    const std::vector<double> avg = ensemble_average_s21_sq(
        cfg.cell, cfg.cell_count, disorder, cfg.sweep.lines, freqs, cfg.chain.z_ref,
        ctx.workers);

    const auto& r = cfg.cell.resonator;
    const double f_pole =
        1.0 / (2.0 * pi * std::sqrt(r.l_res * (r.c_res + r.c_coupling)));
    const double f_zero = 1.0 / (2.0 * pi * std::sqrt(r.l_res * r.c_res));
    const StopbandResult sb = stopband_width(freqs, avg, (f_pole + f_zero) / 2.0);

    CsvBuilder b = ctx.csv({"freq_hz", "avg_s21_sq_db"});
    for (std::size_t i = 0; i < freqs.size(); ++i)
        b.add_row({freqs[i], 10.0 * std::log10(std::max(avg[i], 1e-300))});
    ctx.files.push_back({"stopband_mc.csv", b.str()});

    json j;
    j["found"] = sb.found;
    j["width_hz"] = sb.found ? json(sb.width_hz) : json();
    j["lo_hz"] = sb.found ? json(sb.lo_hz) : json();
    j["hi_hz"] = sb.found ? json(sb.hi_hz) : json();
    j["passband_median_db"] = sb.passband_median_db;
    j["lines"] = cfg.sweep.lines;
    j["sigma_rel"] = disorder.sigma_rel;
    ctx.add_json("stopband.json", j);
}

void run_gain(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    const auto profile = gain_profile(cfg.cell, cfg.cell_count, *cfg.pump, freq_grid(cfg));
    CsvBuilder b = ctx.csv({"freq_hz", "gain_db", "phase_rad", "stopband_flag"});
    for (const GainPoint& p : profile)
        b.add_row({p.freq_hz, p.gain_db, p.phase_rad, p.stopband_flag ? 1.0 : 0.0});
    ctx.files.push_back({"gain.csv", b.str()});
}

void run_noise(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    const std::vector<double> freqs = freq_grid(cfg);
    const auto profile = gain_profile(cfg.cell, cfg.cell_count, *cfg.pump, freqs);

    std::vector<double> g_twpa(freqs.size()), n_add(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        g_twpa[i] = std::max(std::pow(10.0, profile[i].gain_db / 10.0), 1.0);
        n_add[i] = standard_quantum_limit(g_twpa[i]); // quantum-limited synthesis
    }
    const NoiseSpectra spectra =
        synthesize_chain_spectra(freqs, g_twpa, n_add, cfg.chain.model);
    ChainGains gains;
    gains.g_twpa = g_twpa;
    gains.g_sys.assign(freqs.size(), std::pow(10.0, cfg.chain.model.system_gain_db / 10.0));
    const std::vector<double> n_rec = added_noise(spectra, gains);
    const std::vector<double> snri = snr_improvement(spectra, gains);

    CsvBuilder b = ctx.csv({"freq_hz", "gain_db", "n_add_quanta", "sql_quanta", "snri_db"});
    for (std::size_t i = 0; i < freqs.size(); ++i)
        b.add_row({freqs[i], profile[i].gain_db, n_rec[i],
                   standard_quantum_limit(g_twpa[i]), snri[i]});
    ctx.files.push_back({"noise.csv", b.str()});
    ctx.files.push_back(
        {"spectra.csv", format_noise_spectra_csv(spectra, ctx.provenance())});
}

void run_calibrate(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    json datasets = json::array();
    std::vector<double> fit_freqs, fit_atts;
    for (std::size_t i = 0; i < cfg.io.inputs.size(); ++i) {
        QubitDataset data;
        try {
            data = read_qubit_dataset_csv(cfg.io.inputs[i]);
        } catch (const std::exception& e) {
            throw scenario_io_error(e.what());
        }
        QubitFitOptions opts;
        opts.seed = derive_seed(ctx.seed, "qubit-fit-" + std::to_string(i));
        const QubitFitResult fit = fit_qubit_dataset(data, opts);
        json d;
        d["file"] = cfg.io.inputs[i];
        d["f_q_hz"] = fit.params.f_q_hz;
        d["gamma1_hz"] = fit.params.gamma1_hz;
        d["gamma2_hz"] = fit.params.gamma2_hz;
        d["attenuation_db"] = fit.params.attenuation_db;
        d["rms_residual"] = fit.rms_residual;
        d["converged"] = fit.converged;
        d["at_bound"] = fit.at_bound;
        datasets.push_back(d);
        fit_freqs.push_back(fit.params.f_q_hz);
        fit_atts.push_back(fit.params.attenuation_db);
    }

    json j;
    j["datasets"] = datasets;
    if (fit_freqs.size() >= 2) {
        const AttenuationModel m = fit_attenuation_linear(fit_freqs, fit_atts);
        j["attenuation_model"] = {{"slope_db_per_ghz", m.slope_db_per_ghz},
                                  {"intercept_db", m.intercept_db},
                                  {"rms_residual_db", m.rms_residual_db}};
    } else {
        j["attenuation_model"] = nullptr;
    }
    ctx.add_json("calibration.json", j);
}

json optional_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json();
}

void run_power_sweep(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    const PumpSettings pump = *cfg.pump;
    const double probe_hz = grid_center_freq(cfg);

    // Pump-power sweep on a coarse grid ending at the operating power.
    const std::vector<double> pump_grid =
        make_grid(pump.power_dbm - 15.0, pump.power_dbm, 2.5);
    const auto sweep = pump_sweep(cfg.cell, cfg.cell_count, pump.frequency_hz, pump_grid,
                                  probe_hz, -130.0, cfg.chain.model);
    CsvBuilder pb = ctx.csv({"pump_dbm", "gain_db", "snri_db"});
    for (const PumpSweepPoint& p : sweep)
        pb.add_row({p.pump_dbm, p.gain_db, p.snri_db});
    ctx.files.push_back({"pump_sweep.csv", pb.str()});

    // Saturation curves and extractions per summary frequency.
    const std::vector<double> pin = input_power_grid(cfg, -130.0, -85.0, 1.0);
    const std::vector<double> freqs = freq_grid(cfg);
    const std::vector<double> ip3_grid = make_grid(-130.0, -118.0, 3.0);

    json results = json::array();
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        const auto curve = gain_vs_input_power(cfg.cell, cfg.cell_count, pump, freqs[k], pin);
        char name[40];
        std::snprintf(name, sizeof(name), "compression_%02zu.csv", k);
        CsvBuilder cb;
        for (const std::string& p : ctx.provenance())
            cb.add_comment(p);
        cb.add_comment("freq_hz=" + csv_format_double(freqs[k]));
        cb.set_header({"pin_dbm", "gain_db", "phase_deg"});
        for (const InputPowerPoint& p : curve)
            cb.add_row({p.pin_dbm, p.gain_db, p.phase_rad * 180.0 / pi});
        ctx.files.push_back({name, cb.str()});

        const CompressionResult comp = compression_summary(curve);
        json r;
        r["freq_hz"] = freqs[k];
        r["small_signal_gain_db"] = comp.small_signal_gain_db;
        r["p_1db_dbm"] = optional_to_json(comp.p_1db_dbm);
        r["p_5deg_dbm"] = optional_to_json(comp.p_5deg_dbm);
        try {
            const auto imd = imd_vs_input_power(cfg.cell, cfg.cell_count, pump, freqs[k],
                                                cfg.sweep.tone_separation_hz, ip3_grid);
            std::vector<double> pv, fv, mv;
            for (const ImdCurvePoint& p : imd) {
                pv.push_back(p.pin_dbm);
                fv.push_back(p.p_fund_dbm);
                mv.push_back(p.p_imd3_dbm);
            }
            r["ip3_dbm"] = ip3_from_two_tone(pv, fv, mv).ip3_dbm;
        } catch (const std::exception&) {
            r["ip3_dbm"] = nullptr; // regime not identified at this frequency
        }
        results.push_back(r);
    }

    json j;
    j["probe_freq_hz"] = probe_hz;
    j["results"] = results;
    ctx.add_json("summary.json", j);
}

void run_imd(RunContext& ctx) {
    const ScenarioConfig& cfg = *ctx.cfg;
    const PumpSettings pump = *cfg.pump;
    const double f_center = grid_center_freq(cfg);
    const double sep = cfg.sweep.tone_separation_hz;
    const std::vector<double> pin = input_power_grid(cfg, -130.0, -94.0, 3.0);

    const auto curve = imd_vs_input_power(cfg.cell, cfg.cell_count, pump, f_center, sep,
                                          pin, cfg.sweep.max_order);
    CsvBuilder b = ctx.csv({"pin_dbm", "p_fund_dbm", "p_imd3_dbm"});
    for (const ImdCurvePoint& p : curve)
        b.add_row({p.pin_dbm, p.p_fund_dbm, p.p_imd3_dbm});
    ctx.files.push_back({"imd.csv", b.str()});

    json j;
    j["f1_hz"] = f_center - sep / 2.0;
    j["f2_hz"] = f_center + sep / 2.0;
    j["max_order"] = cfg.sweep.max_order;
    j["margin_low_db"] = curve.front().p_fund_dbm - curve.front().p_imd3_dbm;
    j["margin_high_db"] = curve.back().p_fund_dbm - curve.back().p_imd3_dbm;
    try {
        std::vector<double> pv, fv, mv;
        for (const ImdCurvePoint& p : curve) {
            pv.push_back(p.pin_dbm);
            fv.push_back(p.p_fund_dbm);
            mv.push_back(p.p_imd3_dbm);
        }
        const Ip3Result ip3 = ip3_from_two_tone(pv, fv, mv);
        j["ip3_dbm"] = ip3.ip3_dbm;
        j["fund_slope"] = ip3.fund_slope;
        j["imd3_slope"] = ip3.imd3_slope;
    } catch (const std::exception& e) {
        j["ip3_dbm"] = nullptr;
        j["ip3_error"] = e.what();
    }

    ToneSet ts;
    ts.pump = pump;
    ts.tones = {{f_center - sep / 2.0, pin.back()}, {f_center + sep / 2.0, pin.back()}};
    const ImdSpectrum spec = two_tone_imd(cfg.cell, cfg.cell_count, ts, cfg.sweep.max_order);
    json prods = json::array();
    for (const ImdProduct& p : spec.products)
        prods.push_back({{"name", p.name},
                         {"freq_hz", p.freq_hz},
                         {"order", p.order},
                         {"output_power_dbm", p.output_power_dbm}});
    j["products_at_max_pin"] = prods;
    ctx.add_json("imd_summary.json", j);
}

} // namespace

std::vector<std::string> run_scenario(const ScenarioConfig& cfg,
                                      const std::string& config_hash,
                                      const RunOverrides& overrides) {
    RunContext ctx;
    ctx.cfg = &cfg;
    ctx.seed = overrides.seed.value_or(cfg.seed);
    ctx.config_hash = config_hash;
    ctx.workers = overrides.workers;

    // Compute phase: any failure here leaves the output directory untouched.
    try {
        switch (cfg.sweep.kind) {
        case SweepKind::dispersion:
            run_dispersion(ctx);
            break;
        case SweepKind::sparams:
            run_sparams(ctx);
            break;
        case SweepKind::stopband_mc:
            run_stopband_mc(ctx);
            break;
        case SweepKind::gain:
            run_gain(ctx);
            break;
        case SweepKind::noise:
            run_noise(ctx);
            break;
        case SweepKind::calibrate:
            run_calibrate(ctx);
            break;
        case SweepKind::power_sweep:
            run_power_sweep(ctx);
            break;
        case SweepKind::imd:
            run_imd(ctx);
            break;
        }
    } catch (const scenario_io_error&) {
        throw;
    } catch (const std::exception& e) {
        throw scenario_compute_error(e.what());
    }

    // Write phase.
    const std::string dir = overrides.output_dir.value_or(cfg.io.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw scenario_io_error("cannot create output directory '" + dir +
                                "': " + ec.message());
    std::vector<std::string> written;
    for (const OutputFile& f : ctx.files) {
        const std::string path = (std::filesystem::path(dir) / f.name).string();
        try {
            write_file_atomic(path, f.body);
        } catch (const std::exception& e) {
            throw scenario_io_error(e.what());
        }
        written.push_back(path);
    }
    return written;
}

} // namespace jtwpa
