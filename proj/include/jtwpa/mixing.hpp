#pragma once

#include <complex>
#include <vector>

#include "jtwpa/circuit.hpp"

namespace jtwpa {

using cplx = std::complex<double>;

struct PumpSettings {
    double frequency_hz = reference_pump_hz;
    double power_dbm = reference_pump_dbm;

    double power_watts() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Peak pump current on a line of impedance z_line for a given input power.
double pump_current_amplitude(double power_dbm, double z_line_ohm);

// (i_p / I_c)^2 for the pump travelling on the given cell's line.
double pump_intensity(const UnitCellParams& cell, const PumpSettings& pump);

struct MismatchTerms {
    double k_s = 0, k_i = 0, k_p = 0; // rad/cell, real parts
    double linear = 0;                // k_s + k_i - 2 k_p
    double total = 0;                 // linear + power-dependent corrections
    double kappa = 0;                 // pump-pump coupling rate, rad/cell
    double eta = 0;                   // (i_p/I_c)^2
};

// Phase mismatch for degenerate-pump four-wave mixing at signal frequency
// f_signal; the idler sits at 2 f_pump - f_signal and must be positive.
MismatchTerms phase_mismatch(const UnitCellParams& cell, const PumpSettings& pump,
                             double f_signal_hz);

struct AnalyticGain {
    double signal = 1; // power gain, linear
    double idler = 0;
};

// Quadrature-solution gain for the undepleted-pump two-mode problem:
// signal = 1 + (kappa S)^2, idler = (kappa S)^2 with S = sinh(g n)/g,
// g^2 = kappa^2 - (dk/2)^2, continued through g -> 0 by series.
AnalyticGain analytic_gain(double kappa, double delta_k_total, double n_cells);

struct CmeOptions {
    bool depleted_pump = true;
    double signal_power_dbm = -130.0;
    double rtol = 1e-9;
    double atol = 1e-12;
};

struct CmeResult {
    cplx a_signal{0, 0}; // photon-flux amplitudes, pump input normalized to 1
    cplx a_idler{0, 0};
    cplx a_pump{1, 0};
    double signal_gain = 1;   // |a_s(L)/a_s(0)|^2, linear power gain
    double signal_phase = 0;  // arg a_s(L), radians
    double idler_gain = 0;    // |a_i(L)|^2 / |a_s(0)|^2
    double pump_depletion = 0; // 1 - |a_p(L)|^2
};

// Coupled-mode integration of signal/idler/pump along n_cells cells.
CmeResult integrate_cme(const UnitCellParams& cell, int n_cells,
                        const PumpSettings& pump, double f_signal_hz,
                        const CmeOptions& opts = {});

struct GainPoint {
    double freq_hz = 0;
    double gain_db = 0;
    double phase_rad = 0;
    bool stopband_flag = false; // signal or idler inside an evanescent window
};

std::vector<GainPoint> gain_profile(const UnitCellParams& cell, int n_cells,
                                    const PumpSettings& pump,
                                    const std::vector<double>& freqs_hz,
                                    const CmeOptions& opts = {});

} // namespace jtwpa
