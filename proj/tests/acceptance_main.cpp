// Acceptance gate: nine end-to-end criteria, one per invocation argument.
// Each prints a single "ACCEPTANCE <n> PASS|FAIL" line with its key numbers
// and fails if it exceeds its wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "jtwpa/circuit.hpp"
#include "jtwpa/config.hpp"
#include "jtwpa/constants.hpp"
#include "jtwpa/csvio.hpp"
#include "jtwpa/mixing.hpp"
#include "jtwpa/noise.hpp"
#include "jtwpa/power.hpp"
#include "jtwpa/rng.hpp"
#include "jtwpa/touchstone.hpp"
#include "jtwpa/transmon.hpp"
#include "jtwpa/twoport.hpp"

using namespace jtwpa;

namespace {

struct Gate {
    bool ok = true;
    std::ostringstream note;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!note.str().empty())
                note << "; ";
            note << what;
        }
    }

    void info(const std::string& what) {
        if (!note.str().empty())
            note << "; ";
        note << what;
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> linspace_step(double start, double stop, double step) {
    return make_grid(start, stop, step);
}

// ---------------------------------------------------------------- criterion 1
// Linear network exactness on the 256-cell reference line, 3-11 GHz.

void criterion_1(Gate& g) {
    const UnitCellParams cell = reference_cell();
    const DeviceLine line = uniform_line(cell, reference_cell_count);
    const auto freqs = linspace_step(3e9, 11e9, 20e6);

    double worst_det = 0, worst_unit = 0, worst_phase = 0, worst_s11 = 0;
    std::vector<bool> flagged(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i)
        flagged[i] = bloch_wavenumber(cell, freqs[i]).im > 1e-6;

    for (std::size_t i = 0; i < freqs.size(); ++i) {
        const double f = freqs[i];
        const ScaledABCD sc = cascade(line, f);
        const SMatrix s = abcd_to_s(sc);
        const double unit =
            std::abs(std::norm(s.s11) + std::norm(s.s21) - 1.0);
        worst_unit = std::max(worst_unit, unit);

        if (flagged[i])
            continue;
        // Determinant reconstruction only converges outside the stopband,
        // where the carried log scale stays near zero.
        const double det =
            std::abs(sc.m.determinant() * std::exp(2.0 * sc.log_scale) - 1.0);
        worst_det = std::max(worst_det, det);

        // Image-referenced line: no reflection, phase advances by -N k.
        const bool near_edge = (i > 0 && flagged[i - 1]) ||
                               (i + 1 < freqs.size() && flagged[i + 1]);
        if (near_edge)
            continue;
        const cplx zi = image_impedance(cell, f);
        if (std::abs(zi.imag()) > 1e-6 * std::abs(zi.real()))
            continue;
        const SMatrix si = abcd_to_s(sc, zi.real());
        const BlochWavenumber k = bloch_wavenumber(cell, f);
        const double phase_err = std::abs(std::remainder(
            std::arg(si.s21) + reference_cell_count * k.re, 2.0 * pi));
        worst_phase = std::max(worst_phase, phase_err);
        worst_s11 = std::max(worst_s11, std::abs(si.s11));
    }

    g.require(worst_det <= 1e-9, "det error " + fmt("%.3g", worst_det));
    g.require(worst_unit <= 1e-9, "unitarity error " + fmt("%.3g", worst_unit));
    g.require(worst_phase <= 1e-6, "image phase error " + fmt("%.3g", worst_phase));
    g.require(worst_s11 <= 1e-9, "image s11 " + fmt("%.3g", worst_s11));
    if (g.ok)
        g.info("det<=" + fmt("%.2g", worst_det) + " unit<=" + fmt("%.2g", worst_unit) +
               " phase<=" + fmt("%.2g", worst_phase));
}

// ---------------------------------------------------------------- criterion 2
// Disorder broadens the ensemble stopband monotonically; the sigma = 0.002
// width lands in the pinned window.

void criterion_2(Gate& g) {
    const UnitCellParams cell = reference_cell();
    const double f_pole =
        1.0 / (2.0 * pi * std::sqrt(cell.resonator.l_res *
                                    (cell.resonator.c_res + cell.resonator.c_coupling)));
    const double f_zero =
        1.0 / (2.0 * pi * std::sqrt(cell.resonator.l_res * cell.resonator.c_res));
    const double f_center = 0.5 * (f_pole + f_zero);
    const auto freqs = linspace_step(f_center - 120e6, f_center + 120e6, 0.25e6);

    const std::vector<double> sigmas = {0.0, 0.001, 0.002, 0.004};
    std::vector<double> widths;
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        DisorderSpec d;
        d.sigma_rel = sigmas[i];
        d.target = DisorderTarget::resonator_c_res;
        d.seed = derive_seed(7, "acceptance-mc-" + std::to_string(i));
        const auto avg = ensemble_average_s21_sq(cell, reference_cell_count, d, 100,
                                                 freqs);
        const StopbandResult r = stopband_width(freqs, avg, f_center);
        g.require(r.found, "no stopband found at sigma " + fmt("%.3f", sigmas[i]));
        widths.push_back(r.found ? r.width_hz : 0.0);
    }
    for (std::size_t i = 1; i < widths.size(); ++i)
        g.require(widths[i] > widths[i - 1],
                  "width not increasing at sigma " + fmt("%.3f", sigmas[i]));
    g.require(widths[2] >= 30e6 && widths[2] <= 56e6,
              "sigma 0.002 width " + fmt("%.2f", widths[2] / 1e6) + " MHz outside [30, 56]");
    if (g.ok) {
        std::ostringstream os;
        os << "widths/MHz";
        for (double w : widths)
            os << " " << fmt("%.2f", w / 1e6);
        g.info(os.str());
    }
}

// ---------------------------------------------------------------- criterion 3
// Coupled-mode integration against the closed-form two-mode solution,
// including continuity across the zero of the parametric growth rate.

void criterion_3(Gate& g) {
    const UnitCellParams cell = reference_cell();
    const std::vector<double> freqs = {4.0e9, 4.25e9, 4.5e9, 4.75e9, 5.0e9,
                                       5.25e9, 5.5e9, 5.75e9, 6.0e9, 6.45e9};
    const std::vector<double> powers = {-79.5, -76.5, -73.5};
    const std::vector<int> lengths = {64, 256};

    CmeOptions und;
    und.depleted_pump = false;

    int combos = 0;
    double worst_rel = 0, worst_photon = 0, worst_analytic = 0;
    for (double f : freqs) {
        for (double p : powers) {
            PumpSettings pump;
            pump.power_dbm = p;
            const MismatchTerms mm = phase_mismatch(cell, pump, f);
            for (int n : lengths) {
                const AnalyticGain ag = analytic_gain(mm.kappa, mm.total, n);
                const CmeResult cr = integrate_cme(cell, n, pump, f, und);
                worst_rel = std::max(
                    worst_rel, std::abs(cr.signal_gain - ag.signal) / ag.signal);
                if (ag.idler > 1e-12)
                    worst_rel = std::max(
                        worst_rel, std::abs(cr.idler_gain - ag.idler) / ag.idler);
                worst_photon = std::max(
                    worst_photon, std::abs(cr.signal_gain - cr.idler_gain - 1.0));
                worst_analytic = std::max(
                    worst_analytic, std::abs(ag.signal - ag.idler - 1.0));
                ++combos;
            }
        }
    }
    g.require(combos >= 50, "grid too small");
    g.require(worst_rel <= 1e-4, "CME vs analytic rel " + fmt("%.3g", worst_rel));
    g.require(worst_photon <= 1e-6,
              "numeric photon-number gap " + fmt("%.3g", worst_photon));
    g.require(worst_analytic <= 1e-12,
              "analytic photon-number gap " + fmt("%.3g", worst_analytic));

    // g^2 changes sign at dk = 2 kappa; the gain must stay smooth through it.
    const double kappa = 1e-3;
    double prev = -1, worst_jump = 0;
    for (int i = 0; i <= 2000; ++i) {
        const double dk = 1.9e-3 + i * (0.2e-3 / 2000.0);
        const double gain = analytic_gain(kappa, dk, 10).signal;
        if (i > 0)
            worst_jump = std::max(worst_jump, std::abs(gain - prev) / prev);
        prev = gain;
    }
    const double lo = analytic_gain(kappa, 2 * kappa * (1 - 1e-12), 10).signal;
    const double hi = analytic_gain(kappa, 2 * kappa * (1 + 1e-12), 10).signal;
    const double mid = analytic_gain(kappa, 2 * kappa, 10).signal;
    g.require(worst_jump <= 1e-8, "ridge scan jump " + fmt("%.3g", worst_jump));
    g.require(std::abs(hi - lo) / mid <= 1e-10, "ridge discontinuity");
    if (g.ok)
        g.info(std::to_string(combos) + " combos, rel<=" + fmt("%.2g", worst_rel) +
               ", ridge jump<=" + fmt("%.2g", worst_jump));
}

// ---------------------------------------------------------------- criterion 4
// The reference design delivers a contiguous >=10 dB band at least 3 GHz
// wide, ignoring the flagged evanescent window and 150 MHz around the pump.

void criterion_4(Gate& g) {
    const UnitCellParams cell = reference_cell();
    PumpSettings pump;
    const auto freqs = linspace_step(3e9, 11e9, 25e6);
    const auto profile = gain_profile(cell, reference_cell_count, pump, freqs);

    double best_width = 0, best_lo = 0, best_hi = 0;
    double run_lo = -1, run_hi = -1;
    auto close_run = [&]() {
        if (run_lo >= 0 && run_hi - run_lo > best_width) {
            best_width = run_hi - run_lo;
            best_lo = run_lo;
            best_hi = run_hi;
        }
        run_lo = run_hi = -1;
    };
    for (const GainPoint& pt : profile) {
        const bool excluded =
            pt.stopband_flag || std::abs(pt.freq_hz - pump.frequency_hz) <= 0.15e9;
        if (excluded)
            continue; // neither extends nor breaks a run
        if (pt.gain_db >= 10.0) {
            if (run_lo < 0)
                run_lo = pt.freq_hz;
            run_hi = pt.freq_hz;
        } else {
            close_run();
        }
    }
    close_run();

    g.require(best_width >= 3e9,
              "widest >=10 dB band is " + fmt("%.2f", best_width / 1e9) + " GHz");
    if (g.ok)
        g.info("band [" + fmt("%.2f", best_lo / 1e9) + ", " + fmt("%.2f", best_hi / 1e9) +
               "] GHz (" + fmt("%.2f", best_width / 1e9) + " GHz wide)");
}

// ---------------------------------------------------------------- criterion 5
// Added-noise extraction inverts the chain synthesis to machine precision
// and reproduces the quantum-limit reference points.

void criterion_5(Gate& g) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double g_twpa = std::pow(10.0, 0.1 + 3.9 * u(rng)); // 1.26 .. 1e4
        const double g_sys = std::pow(10.0, 1.0 + 5.0 * u(rng));
        const double n_sys = 50.0 * u(rng);
        const double n_add = 10.0 * u(rng);
        const double n_off = g_sys * (0.5 + n_sys);
        const double n_on = g_sys * (g_twpa * (n_add + 0.5) + n_sys);
        const double back = added_noise_point(n_on, n_off, g_sys, g_twpa);
        worst = std::max(worst, std::abs(back - n_add) / std::max(1.0, n_add));
    }
    g.require(worst <= 1e-12, "roundtrip error " + fmt("%.3g", worst));

    g.require(standard_quantum_limit(1.0) == 0.0, "SQL(1) != 0");
    g.require(std::abs(standard_quantum_limit(100.0) - 0.495) < 1e-15,
              "SQL(100) != 0.495");
    g.require(standard_quantum_limit(std::numeric_limits<double>::infinity()) == 0.5,
              "SQL(inf) != 1/2");
    double prev = -1;
    for (double gain = 1.0; gain < 1e6; gain *= 10.0) {
        const double sql = standard_quantum_limit(gain);
        g.require(sql >= prev && sql < 0.5, "SQL not monotone below 1/2");
        prev = sql;
    }

    // Quantum-limited amplifier in a 10-quanta chain: pinned improvement.
    ChainModel chain;
    chain.system_noise_quanta = 10.0;
    chain.system_gain_db = 40.0;
    const double snri =
        snr_improvement_from_chain(100.0, standard_quantum_limit(100.0), chain);
    g.require(std::abs(snri - 9.817752) < 1e-3,
              "chain SNRi " + fmt("%.6f", snri) + " != 9.817752");

    // Synthesized spectra invert back to the quantum limit exactly.
    const std::vector<double> freqs = {4e9, 5e9, 6e9};
    const std::vector<double> gains = {50.0, 100.0, 200.0};
    std::vector<double> n_add(gains.size());
    for (std::size_t i = 0; i < gains.size(); ++i)
        n_add[i] = standard_quantum_limit(gains[i]);
    const NoiseSpectra spec = synthesize_chain_spectra(freqs, gains, n_add, chain);
    ChainGains cg;
    cg.g_twpa = gains;
    cg.g_sys.assign(gains.size(), std::pow(10.0, chain.system_gain_db / 10.0));
    const auto rec = added_noise(spec, cg);
    for (std::size_t i = 0; i < rec.size(); ++i)
        g.require(std::abs(rec[i] - n_add[i]) < 0.05,
                  "recovered added noise departs the quantum limit");
    if (g.ok)
        g.info("roundtrip<=" + fmt("%.2g", worst) + ", SNRi=" + fmt("%.4f", snri) + " dB");
}

// ---------------------------------------------------------------- criterion 6
// Twenty noisy synthetic qubit power sweeps: the fit recovers attenuation to
// 0.1 dB and both rates to 2% on at least nineteen.

double half_saturation_dbm(const QubitParams& p, double c) {
    const double g2_rad = 2.0 * pi * p.gamma2_hz;
    const double omega_q = 2.0 * pi * p.f_q_hz;
    const double p_qubit = g2_rad * PhysicalConstants::reduced_planck * omega_q / c;
    return watts_to_dbm(p_qubit) - p.attenuation_db;
}

std::vector<double> fit_grid_freqs(const QubitParams& p, int n = 41) {
    const double half_span = 6.0 * p.gamma2_hz;
    std::vector<double> f(n);
    for (int i = 0; i < n; ++i)
        f[i] = p.f_q_hz - half_span + 2.0 * half_span * i / (n - 1);
    return f;
}

std::vector<double> fit_grid_powers(const QubitParams& p, double c) {
    const double mid = half_saturation_dbm(p, c);
    std::vector<double> out;
    for (double q = mid - 15.0; q <= mid + 15.0 + 0.1; q += 3.0)
        out.push_back(q);
    return out;
}

void criterion_6(Gate& g) {
    auto rng = make_rng(derive_seed(20260814, "acceptance-fit"));
    std::uniform_real_distribution<double> u(0.0, 1.0);

    int recovered = 0;
    std::ostringstream misses;
    for (int i = 0; i < 20; ++i) {
        QubitParams truth;
        truth.f_q_hz = 4e9 + 4e9 * u(rng);
        truth.gamma1_hz = (0.2 + 1.8 * u(rng)) * 1e6;
        truth.gamma2_hz = truth.gamma1_hz * (0.55 + 0.95 * u(rng));
        truth.attenuation_db = -75.0 + 15.0 * u(rng);
        const double mag = 0.9 + 0.2 * u(rng);
        const double ph = -0.3 + 0.6 * u(rng);
        truth.background = std::polar(mag, ph);
        truth.delay_s = 2e-9 * u(rng);

        const QubitDataset data = synthesize_qubit_dataset(
            truth, fit_grid_freqs(truth), fit_grid_powers(truth, 4.0), 0.01,
            derive_seed(555, "data-" + std::to_string(i)));
        QubitFitOptions opts;
        opts.seed = derive_seed(555, "fit-" + std::to_string(i));
        const QubitFitResult fit = fit_qubit_dataset(data, opts);

        const bool good =
            fit.converged &&
            std::abs(fit.params.attenuation_db - truth.attenuation_db) <= 0.1 &&
            std::abs(fit.params.gamma1_hz - truth.gamma1_hz) <= 0.02 * truth.gamma1_hz &&
            std::abs(fit.params.gamma2_hz - truth.gamma2_hz) <= 0.02 * truth.gamma2_hz;
        if (good)
            ++recovered;
        else
            misses << " #" << i;
    }
    g.require(recovered >= 19,
              std::to_string(recovered) + "/20 recovered (missed:" + misses.str() + ")");

    // A noiseless sweep pins every parameter tightly.
    QubitParams truth;
    truth.f_q_hz = 5.2e9;
    truth.gamma1_hz = 1.2e6;
    truth.gamma2_hz = 0.9e6;
    truth.attenuation_db = -68.0;
    truth.background = cplx{1.02, -0.03};
    truth.delay_s = 0.7e-9;
    const QubitDataset clean = synthesize_qubit_dataset(
        truth, fit_grid_freqs(truth), fit_grid_powers(truth, 4.0), 0.0, 1);
    const QubitFitResult fit = fit_qubit_dataset(clean);
    g.require(fit.converged, "noiseless fit did not converge");
    g.require(std::abs(fit.params.f_q_hz - truth.f_q_hz) <= 1e-6 * truth.f_q_hz,
              "noiseless f_q off");
    g.require(std::abs(fit.params.gamma1_hz - truth.gamma1_hz) <= 1e-6 * truth.gamma1_hz,
              "noiseless gamma1 off");
    g.require(std::abs(fit.params.gamma2_hz - truth.gamma2_hz) <= 1e-6 * truth.gamma2_hz,
              "noiseless gamma2 off");
    g.require(std::abs(fit.params.attenuation_db - truth.attenuation_db) <= 1e-5,
              "noiseless attenuation off");
    if (g.ok)
        g.info(std::to_string(recovered) + "/20 noisy sweeps recovered");
}

// ---------------------------------------------------------------- criterion 7
// Power handling of the reference design at 5 GHz: compression point in the
// pinned window, slope-3 third-order products, intercept consistency.

void criterion_7(Gate& g) {
    const UnitCellParams cell = reference_cell();
    PumpSettings pump;

    std::vector<double> pins;
    for (double p = -130.0; p <= -85.0 + 1e-9; p += 1.0)
        pins.push_back(p);
    const auto curve = gain_vs_input_power(cell, reference_cell_count, pump, 5e9, pins);
    const CompressionResult comp = compression_summary(curve);
    g.require(comp.p_1db_dbm.has_value(), "no 1 dB compression point found");
    if (comp.p_1db_dbm) {
        g.require(*comp.p_1db_dbm > -105.0 && *comp.p_1db_dbm < -95.0,
                  "P1dB " + fmt("%.2f", *comp.p_1db_dbm) + " outside [-105, -95]");
    }
    g.require(comp.p_5deg_dbm.has_value(), "no 5 degree phase point found");
    if (comp.p_1db_dbm && comp.p_5deg_dbm)
        g.require(std::abs(*comp.p_5deg_dbm - *comp.p_1db_dbm) <= 5.0,
                  "phase point further than 5 dB from P1dB");

    const auto imd = imd_vs_input_power(cell, reference_cell_count, pump, 5e9, 5e6,
                                        linspace_step(-130.0, -118.0, 3.0));
    std::vector<double> ip, fu, i3;
    for (const auto& pt : imd) {
        ip.push_back(pt.pin_dbm);
        fu.push_back(pt.p_fund_dbm);
        i3.push_back(pt.p_imd3_dbm);
    }
    const Ip3Result ip3 = ip3_from_two_tone(ip, fu, i3);
    g.require(std::abs(ip3.fund_slope - 1.0) <= 0.05,
              "fundamental slope " + fmt("%.3f", ip3.fund_slope));
    g.require(std::abs(ip3.imd3_slope - 3.0) <= 0.15,
              "third-order slope " + fmt("%.3f", ip3.imd3_slope));
    if (comp.p_1db_dbm) {
        const double gap = ip3.ip3_dbm - *comp.p_1db_dbm;
        g.require(gap >= 6.0 && gap <= 14.0,
                  "IP3 - P1dB = " + fmt("%.2f", gap) + " outside [6, 14]");
    }

    // Extraction is exact on ideal lines.
    std::vector<double> spin, sfund, simd;
    for (double p = -130.0; p <= -120.0 + 1e-9; p += 1.0) {
        spin.push_back(p);
        sfund.push_back(p + 20.0);
        simd.push_back(3.0 * p + 200.0);
    }
    const double synth = ip3_from_two_tone(spin, sfund, simd).ip3_dbm;
    g.require(std::abs(synth - (-90.0)) <= 0.1,
              "synthetic intercept " + fmt("%.3f", synth) + " != -90");
    if (g.ok)
        g.info("P1dB=" + fmt("%.2f", *comp.p_1db_dbm) +
               " dBm, IP3=" + fmt("%.2f", ip3.ip3_dbm) +
               " dBm, slope3=" + fmt("%.3f", ip3.imd3_slope));
}

// ---------------------------------------------------------------- criterion 8
// Touchstone round trips across every format/unit pair, and malformed input
// is rejected with the offending line number.

void criterion_8(Gate& g) {
    TouchstoneData data;
    data.z_ref = 50.0;
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 7; ++i) {
        TouchstonePoint p;
        p.freq_hz = 1e9 * (i + 1) + 1.5e8 * u(rng);
        p.s.s11 = cplx{0.3 * u(rng), 0.3 * u(rng)};
        p.s.s21 = std::polar(5.0 + 4.0 * u(rng), pi * u(rng)); // amplifying device
        p.s.s12 = cplx{1e-3 * u(rng), 1e-3 * u(rng)};
        p.s.s22 = cplx{0.3 * u(rng), 0.3 * u(rng)};
        data.points.push_back(p);
    }

    double worst = 0;
    for (TouchstoneFormat fmt_ : {TouchstoneFormat::RI, TouchstoneFormat::MA,
                                  TouchstoneFormat::DB}) {
        for (TouchstoneUnit unit : {TouchstoneUnit::Hz, TouchstoneUnit::kHz,
                                    TouchstoneUnit::MHz, TouchstoneUnit::GHz}) {
            const TouchstoneData back =
                parse_touchstone(format_touchstone(data, fmt_, unit));
            if (back.points.size() != data.points.size()) {
                g.require(false, "round trip changed the point count");
                return;
            }
            for (std::size_t i = 0; i < data.points.size(); ++i) {
                const auto& a = data.points[i];
                const auto& b = back.points[i];
                worst = std::max(worst,
                                 std::abs(a.freq_hz - b.freq_hz) / a.freq_hz);
                for (auto pick : {&SMatrix::s11, &SMatrix::s21, &SMatrix::s12,
                                  &SMatrix::s22}) {
                    const cplx da = a.s.*pick, db = b.s.*pick;
                    const double scale = std::max(1.0, std::abs(da));
                    worst = std::max(worst, std::abs(da - db) / scale);
                }
            }
        }
    }
    g.require(worst <= 1e-12, "round trip error " + fmt("%.3g", worst));

    const std::vector<std::pair<std::string, int>> bad = {
        {"", 1},
        {"1e9 0.1 0 0.9 0 0.9 0 0.1 0\n# hz S ri R 50\n", 1},
        {"# hz S ri R 50\n1e9 0.1 0 0.9 0\n", 2},
        {"# hz S ri R 50\n1e9 0.1 0 0.9 0 0.9 0 0.1 0\n"
         "0.5e9 0.1 0 0.9 0 0.9 0 0.1 0\n", 3},
        {"# hz Y ri R 50\n", 1},
        {"# hz S ri R -50\n", 1},
        {"# hz S ri R 50\n# hz S ma R 50\n1e9 0.1 0 0.9 0 0.9 0 0.1 0\n", 2},
        {"# hz S ri R 50\n1e9 0.1 zero 0.9 0 0.9 0 0.1 0\n", 2},
    };
    for (const auto& [text, line] : bad) {
        bool threw = false;
        try {
            parse_touchstone(text);
        } catch (const touchstone_error& e) {
            threw = true;
            g.require(e.line() == line,
                      "wrong line " + std::to_string(e.line()) + " (expected " +
                          std::to_string(line) + ")");
        }
        g.require(threw, "malformed input was accepted");
    }
    if (g.ok)
        g.info("12 round trips <=" + fmt("%.2g", worst) + ", 8 rejects with line numbers");
}

// ---------------------------------------------------------------- criterion 9
// CLI contract: byte-identical reruns for a pinned seed, and a battery of
// broken configs mapping to the documented exit codes.

struct CliOut {
    int code = -1;
    std::string text;
};

CliOut run_cli(const std::string& cli, const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    CliOut r;
    if (!pipe)
        return r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0)
        r.text.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

void criterion_9(Gate& g) {
    const char* cli = std::getenv("JTWPA_CLI");
    if (!cli) {
        g.require(false, "JTWPA_CLI is not set");
        return;
    }
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("jtwpa_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string device =
        "  \"device\": {\n"
        "    \"cell_count\": 64,\n"
        "    \"c_ground\": 234e-15,\n"
        "    \"junctions\": {\"critical_current\": 3.29e-6,\n"
        "                    \"self_capacitance\": 100e-15, \"count_per_cell\": 8},\n"
        "    \"resonator\": {\"c_res\": 690.2937e-15, \"l_res\": 0.8e-9,\n"
        "                    \"c_coupling\": 12.4253e-15}\n"
        "  },\n";
    const std::string good =
        "{\n" + device +
        "  \"pump\": {\"frequency_hz\": 6.688e9, \"power_dbm\": -73.5},\n"
        "  \"sweep\": {\"kind\": \"gain\", \"f_start_hz\": 4.9e9,\n"
        "             \"f_stop_hz\": 5.1e9, \"f_step_hz\": 100e6},\n"
        "  \"io\": {\"output_dir\": \"" + (dir / "out").string() + "\"}\n"
        "}\n";
    {
        std::ofstream f(dir / "good.json");
        f << good;
    }

    const auto ra = run_cli(cli, "run --config \"" + (dir / "good.json").string() +
                                     "\" --seed 3 --out \"" + (dir / "a").string() + "\"");
    const auto rb = run_cli(cli, "run --config \"" + (dir / "good.json").string() +
                                     "\" --seed 3 --out \"" + (dir / "b").string() + "\"");
    g.require(ra.code == 0, "first run exited " + std::to_string(ra.code));
    g.require(rb.code == 0, "second run exited " + std::to_string(rb.code));
    if (ra.code == 0 && rb.code == 0) {
        const std::string a = read_file((dir / "a" / "gain.csv").string());
        const std::string b = read_file((dir / "b" / "gain.csv").string());
        g.require(!a.empty() && a == b, "seeded reruns differ");
    }

    const std::string fgrid =
        "  \"sweep\": {\"kind\": \"dispersion\", \"f_start_hz\": 4e9,\n"
        "             \"f_stop_hz\": 5e9, \"f_step_hz\": 1e9},\n"
        "  \"io\": {\"output_dir\": \"x\"}\n";
    const std::vector<std::pair<std::string, std::string>> broken = {
        {"notjson", "this is not json\n"},
        {"unknown_key", "{\n  \"mystery\": 1,\n" + device + fgrid + "}\n"},
        {"no_device", "{\n" + fgrid + "}\n"},
        {"neg_cells", "{\n  \"device\": {\"cell_count\": -4, \"c_ground\": 234e-15,\n"
                      "  \"junctions\": {\"critical_current\": 3.29e-6,\n"
                      "                  \"self_capacitance\": 1e-13, \"count_per_cell\": 8},\n"
                      "  \"resonator\": {\"c_res\": 6.9e-13, \"l_res\": 8e-10,\n"
                      "                  \"c_coupling\": 1.2e-14}},\n" + fgrid + "}\n"},
        {"big_sigma", "{\n" + device +
                      "  \"disorder\": {\"sigma_rel\": 0.5, \"target\": \"c_ground\"},\n" +
                      fgrid + "}\n"},
        {"bad_target", "{\n" + device +
                       "  \"disorder\": {\"sigma_rel\": 0.01, \"target\": \"coffee\"},\n" +
                       fgrid + "}\n"},
        {"no_pump", "{\n" + device +
                    "  \"sweep\": {\"kind\": \"gain\", \"f_start_hz\": 4e9,\n"
                    "             \"f_stop_hz\": 5e9, \"f_step_hz\": 1e9},\n"
                    "  \"io\": {\"output_dir\": \"x\"}\n}\n"},
        {"bad_kind", "{\n" + device +
                     "  \"sweep\": {\"kind\": \"banana\"},\n"
                     "  \"io\": {\"output_dir\": \"x\"}\n}\n"},
        {"partial_pgrid", "{\n" + device +
                          "  \"sweep\": {\"kind\": \"dispersion\", \"f_start_hz\": 4e9,\n"
                          "             \"f_stop_hz\": 5e9, \"f_step_hz\": 1e9,\n"
                          "             \"p_start_dbm\": -100},\n"
                          "  \"io\": {\"output_dir\": \"x\"}\n}\n"},
        {"bad_order", "{\n" + device +
                      "  \"pump\": {\"frequency_hz\": 6.688e9, \"power_dbm\": -73.5},\n"
                      "  \"sweep\": {\"kind\": \"imd\", \"f_start_hz\": 5e9,\n"
                      "             \"f_stop_hz\": 5e9, \"f_step_hz\": 1e9,\n"
                      "             \"tone_separation_hz\": 5e6, \"max_order\": 4},\n"
                      "  \"io\": {\"output_dir\": \"x\"}\n}\n"},
    };
    int checked = 0;
    for (const auto& [name, text] : broken) {
        const fs::path p = dir / (name + ".json");
        {
            std::ofstream f(p);
            f << text;
        }
        const auto r = run_cli(cli, "validate --config \"" + p.string() + "\"");
        g.require(r.code == 2, name + " exited " + std::to_string(r.code) +
                                   " instead of 2");
        ++checked;
    }
    const auto missing = run_cli(cli, "run --config \"" +
                                          (dir / "does_not_exist.json").string() + "\"");
    g.require(missing.code == 4,
              "missing file exited " + std::to_string(missing.code) + " instead of 4");
    ++checked;

    fs::remove_all(dir);
    if (g.ok)
        g.info("seeded rerun identical, " + std::to_string(checked) +
               " broken configs mapped to exit codes");
}

// -----------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* label;
    double budget_s;
    void (*run)(Gate&);
};

const Criterion kCriteria[] = {
    {1, "linear network exactness", 10.0, criterion_1},
    {2, "disorder-broadened stopband", 60.0, criterion_2},
    {3, "coupled modes vs closed form", 30.0, criterion_3},
    {4, "3 GHz of 10 dB gain", 120.0, criterion_4},
    {5, "added-noise inversion", 5.0, criterion_5},
    {6, "qubit power-sweep recovery", 60.0, criterion_6},
    {7, "compression and intercepts", 180.0, criterion_7},
    {8, "touchstone round trips", 2.0, criterion_8},
    {9, "CLI determinism and exit codes", 10.0, criterion_9},
};

bool run_one(const Criterion& c) {
    Gate g;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.run(g);
    } catch (const std::exception& e) {
        g.require(false, std::string("unexpected exception: ") + e.what());
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > c.budget_s)
        g.require(false, "wall clock " + fmt("%.1f", dt) + " s over the " +
                             fmt("%.0f", c.budget_s) + " s budget");
    std::printf("ACCEPTANCE %d %s: %s [%s; %.1f s]\n", c.id,
                g.ok ? "PASS" : "FAIL", c.label, g.note.str().c_str(), dt);
    std::fflush(stdout);
    return g.ok;
}

} // namespace

int main(int argc, char** argv) {
    int failures = 0;
    if (argc > 1) {
        const int want = std::atoi(argv[1]);
        for (const Criterion& c : kCriteria)
            if (c.id == want)
                return run_one(c) ? 0 : 1;
        std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
        return 2;
    }
    for (const Criterion& c : kCriteria)
        if (!run_one(c))
            ++failures;
    return failures == 0 ? 0 : 1;
}
