#include "jtwpa/power.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "jtwpa/constants.hpp"
#include "jtwpa/detail/rk45.hpp"
#include "jtwpa/twoport.hpp"

namespace jtwpa {

namespace {

constexpr cplx kI{0.0, 1.0};

double wrap_pi(double a) {
    while (a > pi)
        a -= 2.0 * pi;
    while (a < -pi)
        a += 2.0 * pi;
    return a;
}

struct PairProcess {
    int j, k, l, m;    // (j,k) <-> (l,m), photon pair exchange
    double coupling;   // rad/cell
    double mismatch;   // k_j + k_k - k_l - k_m
};

// Every unordered frequency-degenerate pairing within the mode set couples;
// the 1 Hz window absorbs floating-point noise in the combination arithmetic.
std::vector<PairProcess> enumerate_processes(const std::vector<Mode>& modes,
                                             const std::vector<double>& k_re,
                                             double eta) {
    struct Pair {
        int j, k;
        double sum;
    };
    std::vector<Pair> pairs;
    const int n = static_cast<int>(modes.size());
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k)
            pairs.push_back({j, k, modes[static_cast<std::size_t>(j)].freq_hz +
                                       modes[static_cast<std::size_t>(k)].freq_hz});

    std::vector<PairProcess> procs;
    for (std::size_t a = 0; a < pairs.size(); ++a)
        for (std::size_t b = a + 1; b < pairs.size(); ++b) {
            if (std::abs(pairs[a].sum - pairs[b].sum) >= 1.0)
                continue;
            if (pairs[a].j == pairs[b].j && pairs[a].k == pairs[b].k)
                continue;
            PairProcess p;
            p.j = pairs[a].j;
            p.k = pairs[a].k;
            p.l = pairs[b].j;
            p.m = pairs[b].k;
            const auto ki = [&](int i) { return k_re[static_cast<std::size_t>(i)]; };
            p.coupling = eta * (ki(p.j) + ki(p.k) + ki(p.l) + ki(p.m)) / 32.0;
            p.mismatch = ki(p.j) + ki(p.k) - ki(p.l) - ki(p.m);
            procs.push_back(p);
        }
    return procs;
}

} // namespace

std::vector<PumpSweepPoint> pump_sweep(const UnitCellParams& cell, int n_cells,
                                       double pump_freq_hz,
                                       const std::vector<double>& pump_powers_dbm,
                                       double signal_freq_hz, double signal_power_dbm,
                                       const ChainModel& chain) {
    if (pump_powers_dbm.empty())
        throw std::invalid_argument("pump power grid is empty");
    const double weakest = *std::min_element(pump_powers_dbm.begin(), pump_powers_dbm.end());
    if (signal_power_dbm > weakest - 40.0)
        throw std::invalid_argument("probe must sit at least 40 dB below every pump power");

    std::vector<PumpSweepPoint> out;
    out.reserve(pump_powers_dbm.size());
    for (double p : pump_powers_dbm) {
        PumpSettings pump{pump_freq_hz, p};
        CmeOptions opts;
        opts.signal_power_dbm = signal_power_dbm;
        const CmeResult r = integrate_cme(cell, n_cells, pump, signal_freq_hz, opts);
        PumpSweepPoint pt;
        pt.pump_dbm = p;
        pt.gain_db = 10.0 * std::log10(r.signal_gain);
        const double n_add = standard_quantum_limit(std::max(r.signal_gain, 1.0));
        pt.snri_db =
            snr_improvement_from_chain(std::max(r.signal_gain, 1.0), n_add, chain);
        out.push_back(pt);
    }
    return out;
}

std::vector<InputPowerPoint> gain_vs_input_power(const UnitCellParams& cell, int n_cells,
                                                 const PumpSettings& pump,
                                                 double signal_freq_hz,
                                                 const std::vector<double>& input_powers_dbm) {
    std::vector<InputPowerPoint> out;
    out.reserve(input_powers_dbm.size());
    for (double pin : input_powers_dbm) {
        CmeOptions opts;
        opts.signal_power_dbm = pin;
        const CmeResult r = integrate_cme(cell, n_cells, pump, signal_freq_hz, opts);
        out.push_back({pin, 10.0 * std::log10(r.signal_gain), r.signal_phase});
    }
    return out;
}

std::optional<double> compression_point_1db(const std::vector<InputPowerPoint>& curve) {
    if (curve.size() < 2)
        return std::nullopt;
    const double target = curve.front().gain_db - 1.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].gain_db < target && curve[i - 1].gain_db >= target) {
            const double x0 = curve[i - 1].pin_dbm, x1 = curve[i].pin_dbm;
            const double y0 = curve[i - 1].gain_db, y1 = curve[i].gain_db;
            return x0 + (target - y0) * (x1 - x0) / (y1 - y0);
        }
    }
    return std::nullopt;
}

std::optional<double> phase_distortion_point(const std::vector<InputPowerPoint>& curve,
                                             double threshold_deg) {
    if (curve.size() < 2)
        return std::nullopt;
    const double ref = curve.front().phase_rad;
    auto dev_deg = [&](const InputPowerPoint& p) {
        return std::abs(wrap_pi(p.phase_rad - ref)) * 180.0 / pi;
    };
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double d1 = dev_deg(curve[i]);
        if (d1 <= threshold_deg)
            continue;
        const double d0 = dev_deg(curve[i - 1]);
        const double x0 = curve[i - 1].pin_dbm, x1 = curve[i].pin_dbm;
        return x0 + (threshold_deg - d0) * (x1 - x0) / (d1 - d0);
    }
    return std::nullopt;
}

CompressionResult compression_summary(const std::vector<InputPowerPoint>& curve,
                                      double threshold_deg) {
    CompressionResult r;
    r.small_signal_gain_db = curve.empty() ? 0.0 : curve.front().gain_db;
    r.p_1db_dbm = compression_point_1db(curve);
    r.p_5deg_dbm = phase_distortion_point(curve, threshold_deg);
    return r;
}

std::vector<Mode> imd_mode_set(double f1_hz, double f2_hz, double pump_freq_hz,
                               int max_order) {
    if (max_order != 3 && max_order != 5 && max_order != 7)
        throw std::invalid_argument("max_order must be 3, 5 or 7");
    if (f1_hz == f2_hz)
        throw std::invalid_argument("tone frequencies must be distinct");
    if (f1_hz > f2_hz)
        std::swap(f1_hz, f2_hz);

    std::vector<Mode> modes;
    auto add = [&](const std::string& name, double f, int order) {
        if (f <= 0.0)
            return;
        for (const Mode& m : modes)
            if (std::abs(m.freq_hz - f) < 1.0)
                return; // merged with an existing mode
        modes.push_back({name, f, order});
    };

    add("pump", pump_freq_hz, 0);
    add("s1", f1_hz, 1);
    add("s2", f2_hz, 1);
    add("i1", 2.0 * pump_freq_hz - f1_hz, 1);
    add("i2", 2.0 * pump_freq_hz - f2_hz, 1);
    add("m1", 2.0 * f1_hz - f2_hz, 3);
    add("m2", 2.0 * f2_hz - f1_hz, 3);
    for (int order = 5; order <= max_order; order += 2) {
        const int half = (order - 1) / 2;
        const std::string tag = std::to_string(order);
        add("m" + tag + "1", (half + 1.0) * f1_hz - half * f2_hz, order);
        add("m" + tag + "2", (half + 1.0) * f2_hz - half * f1_hz, order);
        // Pump idlers of the previous order's sidebands.
        const int prev = order - 2;
        const std::string ptag = prev == 3 ? "" : std::to_string(prev);
        const int phalf = (prev - 1) / 2;
        add("im" + ptag + "1", 2.0 * pump_freq_hz - ((phalf + 1.0) * f1_hz - phalf * f2_hz),
            prev);
        add("im" + ptag + "2", 2.0 * pump_freq_hz - ((phalf + 1.0) * f2_hz - phalf * f1_hz),
            prev);
    }
    if (modes.size() > 25)
        throw std::invalid_argument("mode set exceeds 25 modes");
    return modes;
}

ModeIntegrationResult integrate_mode_set(const UnitCellParams& cell, int n_cells,
                                         const PumpSettings& pump,
                                         const std::vector<Mode>& modes,
                                         const std::vector<double>& input_power_dbm,
                                         double rtol, double atol) {
    if (modes.size() != input_power_dbm.size())
        throw std::invalid_argument("one input power per mode required");
    if (n_cells <= 0)
        throw std::invalid_argument("cell count must be positive");
    const double pw_p = pump.power_watts();
    if (pw_p <= 0.0)
        throw std::invalid_argument("mode-set integration requires a pump");

    const std::size_t n = modes.size();
    std::vector<double> k_re(n);
    for (std::size_t i = 0; i < n; ++i)
        k_re[i] = bloch_wavenumber(cell_abcd(cell, modes[i].freq_hz)).re;
    const double eta = pump_intensity(cell, pump);
    const double fp = pump.frequency_hz;

    ModeIntegrationResult res;
    res.modes = modes;
    res.input.resize(n, cplx{0.0, 0.0});
    int pump_index = -1;
    for (std::size_t i = 0; i < n; ++i) {
        if (modes[i].name == "pump") {
            pump_index = static_cast<int>(i);
            res.input[i] = cplx{1.0, 0.0};
            continue;
        }
        const double pw = dbm_to_watts(input_power_dbm[i]);
        if (pw > 0.0)
            res.input[i] = cplx{std::sqrt(pw / pw_p * (fp / modes[i].freq_hz)), 0.0};
    }
    if (pump_index < 0)
        throw std::invalid_argument("mode set must contain a mode named 'pump'");

    const auto procs = enumerate_processes(modes, k_re, eta);

    std::vector<cplx> y = res.input;
    auto rhs = [&](double x, const std::vector<cplx>& v, std::vector<cplx>& dv) {
        double tot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            tot += std::norm(v[i]);
        for (std::size_t i = 0; i < n; ++i)
            dv[i] = kI * (k_re[i] * eta / 8.0) * (4.0 * tot - 3.0 * std::norm(v[i])) * v[i];
        for (const PairProcess& p : procs) {
            const auto at = [&](int i) { return v[static_cast<std::size_t>(i)]; };
            const auto d = [&](int i) -> cplx& { return dv[static_cast<std::size_t>(i)]; };
            const cplx e = std::exp(kI * (p.mismatch * x));
            const cplx ajk = at(p.j) * at(p.k);
            if (p.l == p.m) {
                d(p.l) += 2.0 * kI * p.coupling * ajk * std::conj(at(p.l)) * e;
            } else {
                d(p.l) += kI * p.coupling * ajk * std::conj(at(p.m)) * e;
                d(p.m) += kI * p.coupling * ajk * std::conj(at(p.l)) * e;
            }
            const cplx alm = at(p.l) * at(p.m);
            const cplx ec = std::conj(e);
            if (p.j == p.k) {
                d(p.j) += 2.0 * kI * p.coupling * alm * std::conj(at(p.j)) * ec;
            } else {
                d(p.j) += kI * p.coupling * alm * std::conj(at(p.k)) * ec;
                d(p.k) += kI * p.coupling * alm * std::conj(at(p.j)) * ec;
            }
        }
    };
    detail::rk45_integrate(rhs, y, 0.0, static_cast<double>(n_cells), rtol, atol);
    res.output = std::move(y);
    return res;
}

const ImdProduct& ImdSpectrum::by_name(const std::string& name) const {
    for (const ImdProduct& p : products)
        if (p.name == name)
            return p;
    throw std::out_of_range("no product named '" + name + "'");
}

ImdSpectrum two_tone_imd(const UnitCellParams& cell, int n_cells, const ToneSet& tones,
                         int max_order) {
    if (tones.tones.size() != 2)
        throw std::invalid_argument("two input tones required");
    const Tone& t1 = tones.tones[0].freq_hz <= tones.tones[1].freq_hz ? tones.tones[0]
                                                                      : tones.tones[1];
    const Tone& t2 = tones.tones[0].freq_hz <= tones.tones[1].freq_hz ? tones.tones[1]
                                                                      : tones.tones[0];

    const auto modes = imd_mode_set(t1.freq_hz, t2.freq_hz, tones.pump.frequency_hz,
                                    max_order);
    std::vector<double> pin(modes.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i].name == "s1")
            pin[i] = t1.power_dbm;
        else if (modes[i].name == "s2")
            pin[i] = t2.power_dbm;
    }
    const ModeIntegrationResult r = integrate_mode_set(cell, n_cells, tones.pump, modes, pin);

    const double pw_p = tones.pump.power_watts();
    const double fp = tones.pump.frequency_hz;
    ImdSpectrum spec;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        ImdProduct p;
        p.name = modes[i].name;
        p.freq_hz = modes[i].freq_hz;
        p.order = modes[i].order;
        p.output_power_dbm =
            watts_to_dbm(std::norm(r.output[i]) * (modes[i].freq_hz / fp) * pw_p);
        spec.products.push_back(std::move(p));
    }
    return spec;
}

std::vector<ImdCurvePoint> imd_vs_input_power(const UnitCellParams& cell, int n_cells,
                                              const PumpSettings& pump, double f_center_hz,
                                              double separation_hz,
                                              const std::vector<double>& input_powers_dbm,
                                              int max_order) {
    std::vector<ImdCurvePoint> out;
    out.reserve(input_powers_dbm.size());
    for (double pin : input_powers_dbm) {
        ToneSet ts;
        ts.pump = pump;
        ts.tones = {{f_center_hz - separation_hz / 2.0, pin},
                    {f_center_hz + separation_hz / 2.0, pin}};
        const ImdSpectrum spec = two_tone_imd(cell, n_cells, ts, max_order);
        ImdCurvePoint pt;
        pt.pin_dbm = pin;
        pt.p_fund_dbm = spec.by_name("s1").output_power_dbm;
        pt.p_fund_hi_dbm = spec.by_name("s2").output_power_dbm;
        pt.p_imd3_dbm = spec.by_name("m1").output_power_dbm;
        pt.p_imd3_hi_dbm = spec.by_name("m2").output_power_dbm;
        out.push_back(pt);
    }
    return out;
}

Ip3Result ip3_from_two_tone(const std::vector<double>& pin_dbm,
                            const std::vector<double>& p_fund_dbm,
                            const std::vector<double>& p_imd3_dbm) {
    const std::size_t n = pin_dbm.size();
    if (p_fund_dbm.size() != n || p_imd3_dbm.size() != n)
        throw std::invalid_argument("curves must share the input power grid");

    const double pmin = *std::min_element(pin_dbm.begin(), pin_dbm.end());
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
        if (pin_dbm[i] <= pmin + 10.0)
            idx.push_back(i);
    if (idx.size() < 3)
        throw std::invalid_argument("need at least 3 points in the lowest decade");

    // Free-slope OLS prefits guard the regime before the fixed-slope fits.
    auto fit_slope = [&](const std::vector<double>& y) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i : idx) {
            sx += pin_dbm[i];
            sy += y[i];
            sxx += pin_dbm[i] * pin_dbm[i];
            sxy += pin_dbm[i] * y[i];
        }
        const double m = static_cast<double>(idx.size());
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };

    Ip3Result r;
    r.fund_slope = fit_slope(p_fund_dbm);
    r.imd3_slope = fit_slope(p_imd3_dbm);
    if (std::abs(r.fund_slope - 1.0) > 0.2 || std::abs(r.imd3_slope - 3.0) > 0.6)
        throw std::runtime_error("regime not identified: small-signal slopes are " +
                                 std::to_string(r.fund_slope) + " and " +
                                 std::to_string(r.imd3_slope));

    double b1 = 0, b3 = 0;
    for (std::size_t i : idx) {
        b1 += p_fund_dbm[i] - pin_dbm[i];
        b3 += p_imd3_dbm[i] - 3.0 * pin_dbm[i];
    }
    b1 /= static_cast<double>(idx.size());
    b3 /= static_cast<double>(idx.size());
    r.fund_intercept = b1;
    r.imd3_intercept = b3;
    r.ip3_dbm = (b1 - b3) / 2.0;
    return r;
}

} // namespace jtwpa
