#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jtwpa/circuit.hpp"
#include "jtwpa/mixing.hpp"
#include "jtwpa/noise.hpp"

namespace jtwpa {

struct PumpSweepPoint {
    double pump_dbm = 0;
    double gain_db = 0;
    double snri_db = 0;
};

// Small-signal gain and SNR improvement versus pump power. The probe must sit
// at least 40 dB below every pump power in the grid; SNRi assumes a
// quantum-limited amplifier in front of the configured system chain.
std::vector<PumpSweepPoint> pump_sweep(const UnitCellParams& cell, int n_cells,
                                       double pump_freq_hz,
                                       const std::vector<double>& pump_powers_dbm,
                                       double signal_freq_hz, double signal_power_dbm,
                                       const ChainModel& chain = {});

struct InputPowerPoint {
    double pin_dbm = 0;
    double gain_db = 0;
    double phase_rad = 0;
};

std::vector<InputPowerPoint> gain_vs_input_power(const UnitCellParams& cell, int n_cells,
                                                 const PumpSettings& pump,
                                                 double signal_freq_hz,
                                                 const std::vector<double>& input_powers_dbm);

// Input power where gain first drops 1 dB below the lowest-power gain;
// linear interpolation in (dBm, dB). Empty when the curve never crosses.
std::optional<double> compression_point_1db(const std::vector<InputPowerPoint>& curve);

// Input power where the output phase first departs threshold_deg from the
// lowest-power phase.
std::optional<double> phase_distortion_point(const std::vector<InputPowerPoint>& curve,
                                             double threshold_deg = 5.0);

struct CompressionResult {
    std::optional<double> p_1db_dbm;
    std::optional<double> p_5deg_dbm;
    double small_signal_gain_db = 0;
};

CompressionResult compression_summary(const std::vector<InputPowerPoint>& curve,
                                      double threshold_deg = 5.0);

struct Tone {
    double freq_hz = 0;
    double power_dbm = -130;
};

struct ToneSet {
    std::vector<Tone> tones;
    PumpSettings pump;
};

struct Mode {
    std::string name;
    double freq_hz = 0;
    int order = 0; // |m|+|n| over the two input tones; pump itself is 0
};

// Pump, both tones, their pump idlers, and difference-frequency sidebands up
// to max_order (3, 5 or 7), each with its pump idler beyond order 3. Throws
// when the set would exceed 25 modes.
std::vector<Mode> imd_mode_set(double f1_hz, double f2_hz, double pump_freq_hz,
                               int max_order);

struct ModeIntegrationResult {
    std::vector<Mode> modes;
    std::vector<cplx> input;  // photon-flux amplitudes, pump normalized to 1
    std::vector<cplx> output;
};

// Integrates the full four-wave-mixing system over every phase-matched pair
// process within the mode set. input_power_dbm aligns with modes; -inf means
// the mode starts dark, and the pump entry is ignored.
ModeIntegrationResult integrate_mode_set(const UnitCellParams& cell, int n_cells,
                                         const PumpSettings& pump,
                                         const std::vector<Mode>& modes,
                                         const std::vector<double>& input_power_dbm,
                                         double rtol = 1e-9, double atol = 1e-12);

struct ImdProduct {
    std::string name;
    double freq_hz = 0;
    int order = 0;
    double output_power_dbm = 0;
};

struct ImdSpectrum {
    std::vector<ImdProduct> products;

    const ImdProduct& by_name(const std::string& name) const;
};

ImdSpectrum two_tone_imd(const UnitCellParams& cell, int n_cells, const ToneSet& tones,
                         int max_order = 3);

struct ImdCurvePoint {
    double pin_dbm = 0;
    double p_fund_dbm = 0;     // lower tone output
    double p_imd3_dbm = 0;     // lower third-order product output
    double p_fund_hi_dbm = 0;  // upper tone output
    double p_imd3_hi_dbm = 0;  // upper third-order product output
};

std::vector<ImdCurvePoint> imd_vs_input_power(const UnitCellParams& cell, int n_cells,
                                              const PumpSettings& pump, double f_center_hz,
                                              double separation_hz,
                                              const std::vector<double>& input_powers_dbm,
                                              int max_order = 3);

struct Ip3Result {
    double ip3_dbm = 0;        // input-referred intercept
    double fund_slope = 0;     // free-slope fit on the lowest decade
    double imd3_slope = 0;
    double fund_intercept = 0; // fixed slope-1 intercept
    double imd3_intercept = 0; // fixed slope-3 intercept
};

// Fits slope-1 and slope-3 lines on the lowest decade of input power and
// returns their intersection. Throws when the free-slope prefits deviate more
// than 20% from the nominal slopes.
Ip3Result ip3_from_two_tone(const std::vector<double>& pin_dbm,
                            const std::vector<double>& p_fund_dbm,
                            const std::vector<double>& p_imd3_dbm);

} // namespace jtwpa
