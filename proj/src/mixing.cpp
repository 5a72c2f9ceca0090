#include "jtwpa/mixing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "jtwpa/constants.hpp"
#include "jtwpa/detail/rk45.hpp"
#include "jtwpa/twoport.hpp"

namespace jtwpa {

namespace {

constexpr cplx kI{0.0, 1.0};

double real_wavenumber(const UnitCellParams& cell, double f_hz) {
    return bloch_wavenumber(cell_abcd(cell, f_hz)).re;
}

double idler_frequency(const PumpSettings& pump, double f_signal_hz) {
    const double fi = 2.0 * pump.frequency_hz - f_signal_hz;
    if (fi <= 0.0)
        throw std::domain_error("idler frequency 2 f_pump - f_signal must be positive");
    return fi;
}

} // namespace

double dbm_to_watts(double dbm) {
    if (std::isinf(dbm) && dbm < 0)
        return 0.0;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double watts_to_dbm(double watts) {
    if (watts <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(watts) + 30.0;
}

double PumpSettings::power_watts() const { return dbm_to_watts(power_dbm); }

double pump_current_amplitude(double power_dbm, double z_line_ohm) {
    if (z_line_ohm <= 0.0)
        throw std::invalid_argument("line impedance must be positive");
    return std::sqrt(2.0 * dbm_to_watts(power_dbm) / z_line_ohm);
}

double pump_intensity(const UnitCellParams& cell, const PumpSettings& pump) {
    const double ic = cell.junctions.critical_current;
    if (ic <= 0.0)
        throw std::invalid_argument("critical current must be positive");
    const double ip = pump_current_amplitude(pump.power_dbm, line_impedance(cell));
    const double eta = (ip / ic) * (ip / ic);
    return eta;
}

MismatchTerms phase_mismatch(const UnitCellParams& cell, const PumpSettings& pump,
                             double f_signal_hz) {
    const double fi = idler_frequency(pump, f_signal_hz);

    MismatchTerms m;
    m.k_s = real_wavenumber(cell, f_signal_hz);
    m.k_i = real_wavenumber(cell, fi);
    m.k_p = real_wavenumber(cell, pump.frequency_hz);
    m.eta = pump_intensity(cell, pump);
    m.linear = m.k_s + m.k_i - 2.0 * m.k_p;
    // Self/cross phase rotation rates: signal and idler at k*eta/2, pump at
    // k_p*eta/8, the pump entering twice.
    m.total = m.linear + m.eta * (m.k_s / 2.0 + m.k_i / 2.0 - m.k_p / 4.0);
    m.kappa = m.k_p * m.eta / 8.0;
    return m;
}

AnalyticGain analytic_gain(double kappa, double delta_k_total, double n_cells) {
    const double half_dk = delta_k_total / 2.0;
    const double g2 = kappa * kappa - half_dk * half_dk;
    const double z2 = g2 * n_cells * n_cells; // (g n)^2, signed

    double s; // sinh(g n)/g continued through g^2 <= 0
    if (std::abs(z2) < 1e-6) {
        s = n_cells * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
    } else if (g2 > 0.0) {
        const double g = std::sqrt(g2);
        s = std::sinh(g * n_cells) / g;
    } else {
        const double q = std::sqrt(-g2);
        s = std::sin(q * n_cells) / q;
    }

    AnalyticGain out;
    out.idler = (kappa * s) * (kappa * s);
    out.signal = 1.0 + out.idler;
    return out;
}

CmeResult integrate_cme(const UnitCellParams& cell, int n_cells,
                        const PumpSettings& pump, double f_signal_hz,
                        const CmeOptions& opts) {
    if (n_cells <= 0)
        throw std::invalid_argument("cell count must be positive");
    if (f_signal_hz <= 0.0)
        throw std::invalid_argument("signal frequency must be positive");

    const double pw_p = pump.power_watts();
    CmeResult res;
    if (pw_p <= 0.0) {
        // No pump: no mixing and no power-dependent phase; unity transfer.
        res.a_signal = cplx{1.0, 0.0};
        return res;
    }

    const double fi = idler_frequency(pump, f_signal_hz);
    const double fs = f_signal_hz;
    const double fp = pump.frequency_hz;

    const double ks = real_wavenumber(cell, fs);
    const double ki = real_wavenumber(cell, fi);
    const double kp = real_wavenumber(cell, fp);
    const double eta = pump_intensity(cell, pump);

    const double kap = kp * eta / 8.0;
    const double dl = ks + ki - 2.0 * kp;
    const double rs = ks * eta / 2.0;
    const double ri = ki * eta / 2.0;
    const double rp = kp * eta / 8.0;

    const double pw_s = dbm_to_watts(opts.signal_power_dbm);
    const double us0 = std::sqrt(pw_s / pw_p * (fp / fs)); // photon-flux units

    std::vector<cplx> y = {cplx{us0, 0.0}, cplx{0.0, 0.0}, cplx{1.0, 0.0}};

    const bool depleted = opts.depleted_pump;
    auto rhs = [&](double x, const std::vector<cplx>& v, std::vector<cplx>& dv) {
        const cplx us = v[0], ui = v[1], up = v[2];
        const double app = std::norm(up);
        const cplx ph = std::exp(-kI * (dl * x));
        const cplx up2 = up * up;
        dv[0] = kI * rs * app * us + kI * kap * up2 * std::conj(ui) * ph;
        dv[1] = kI * ri * app * ui + kI * kap * up2 * std::conj(us) * ph;
        if (depleted)
            dv[2] = kI * rp * app * up +
                    2.0 * kI * kap * us * ui * std::conj(up) * std::conj(ph);
        else
            dv[2] = kI * rp * up;
    };

    detail::rk45_integrate(rhs, y, 0.0, static_cast<double>(n_cells), opts.rtol,
                           opts.atol);

    res.a_signal = y[0];
    res.a_idler = y[1];
    res.a_pump = y[2];
    if (us0 > 0.0) {
        res.signal_gain = std::norm(y[0]) / (us0 * us0);
        res.idler_gain = std::norm(y[1]) / (us0 * us0);
        res.signal_phase = std::arg(y[0]);
    }
    res.pump_depletion = 1.0 - std::norm(y[2]);
    return res;
}

std::vector<GainPoint> gain_profile(const UnitCellParams& cell, int n_cells,
                                    const PumpSettings& pump,
                                    const std::vector<double>& freqs_hz,
                                    const CmeOptions& opts) {
    std::vector<GainPoint> out;
    out.reserve(freqs_hz.size());
    const bool pumped = pump.power_watts() > 0.0;
    for (double f : freqs_hz) {
        GainPoint pt;
        pt.freq_hz = f;
        if (pumped) {
            const double fi = idler_frequency(pump, f);
            const BlochWavenumber bs = bloch_wavenumber(cell_abcd(cell, f));
            const BlochWavenumber bi = bloch_wavenumber(cell_abcd(cell, fi));
            pt.stopband_flag = bs.im > 1e-6 || bi.im > 1e-6;
        }
        const CmeResult r = integrate_cme(cell, n_cells, pump, f, opts);
        pt.gain_db = 10.0 * std::log10(r.signal_gain);
        pt.phase_rad = r.signal_phase;
        out.push_back(pt);
    }
    return out;
}

} // namespace jtwpa
