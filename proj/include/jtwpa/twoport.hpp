#pragma once

#include "jtwpa/circuit.hpp"

#include <complex>
#include <optional>
#include <vector>

namespace jtwpa {

using cplx = std::complex<double>;

// Chain (transmission) matrix, V1 = A V2 + B I2, I1 = C V2 + D I2.
struct TwoPortABCD {
    cplx a{1.0, 0.0};
    cplx b{0.0, 0.0};
    cplx c{0.0, 0.0};
    cplx d{1.0, 0.0};

    cplx determinant() const { return a * d - b * c; }
};

// Cascade with per-step normalization. Inside a stopband the raw entries of a
// 256-cell product grow like e^{Im k * N} and overflow double range, so the
// entries are kept O(1) and the common magnitude is carried as a log.
// True matrix = m * exp(log_scale).
struct ScaledABCD {
    TwoPortABCD m;
    double log_scale = 0.0;
};

struct SMatrix {
    cplx s11, s21, s12, s22;
};

// Bloch wavenumber per cell, principal branch: Re k in [0, pi], Im k >= 0
// (decaying wave). Purely real in the passband of a lossless line.
struct BlochWavenumber {
    double re = 0.0; // rad/cell
    double im = 0.0; // rad/cell
};

// Series branch: count_per_cell junctions, each jwL_J / (1 - w^2 L_J C_J).
// Throws at the junction plasma resonance (pole named in the message).
cplx series_impedance(const UnitCellParams& cell, double freq_hz);

// Shunt branch: jw c_ground in parallel with the coupled resonator,
// y_res = jw c_c (1 - w^2 l_r c_r) / (1 - w^2 l_r (c_r + c_c)).
// Throws at the shunt short frequency (pole named in the message).
cplx shunt_admittance(const UnitCellParams& cell, double freq_hz);

// Symmetric T cell: Z/2 series, Y shunt, Z/2 series. A = D by construction.
TwoPortABCD cell_abcd(const UnitCellParams& cell, double freq_hz);

TwoPortABCD cascade_networks(const TwoPortABCD& first, const TwoPortABCD& second);

ScaledABCD cascade(const DeviceLine& line, double freq_hz);

SMatrix abcd_to_s(const TwoPortABCD& m, double z_ref = 50.0);
SMatrix abcd_to_s(const ScaledABCD& m, double z_ref = 50.0);

// Power transmission |s21|^2 computed in the log domain; underflows to 0
// deep inside a stopband instead of producing NaN.
double s21_power(const ScaledABCD& m, double z_ref = 50.0);

// cos k = (A + D)/2 for the symmetric cell.
BlochWavenumber bloch_wavenumber(const TwoPortABCD& cell_matrix);
BlochWavenumber bloch_wavenumber(const UnitCellParams& cell, double freq_hz);

// Image impedance sqrt(B/C) of one cell; real in the passband. A uniform
// line referenced to it has s11 = 0 and arg s21 = -N k exactly.
cplx image_impedance(const UnitCellParams& cell, double freq_hz);

// |s21|^2 of the full line at each frequency.
std::vector<double> transmission_spectrum(const DeviceLine& line,
                                          const std::vector<double>& freqs_hz,
                                          double z_ref = 50.0);

std::vector<SMatrix> s_parameter_sweep(const DeviceLine& line,
                                       const std::vector<double>& freqs_hz,
                                       double z_ref = 50.0);

// Ensemble average of |s21|^2 over n_lines independently disordered lines.
// Per-line seeds derive from disorder.seed by labeled splitting, and partial
// spectra are summed in line order, so the result does not depend on the
// worker count.
std::vector<double> ensemble_average_s21_sq(const UnitCellParams& nominal, int n_cells,
                                            const DisorderSpec& disorder, int n_lines,
                                            const std::vector<double>& freqs_hz,
                                            double z_ref = 50.0, int workers = 0);

struct StopbandResult {
    bool found = false;
    double width_hz = 0.0;
    double lo_hz = 0.0;
    double hi_hz = 0.0;
    double passband_median_db = 0.0; // threshold is median - 3 dB
};

// Width of the contiguous region around f_center where the spectrum sits more
// than 3 dB below the passband median. Absence of such a region is a valid
// "no stopband" result, not an error.
StopbandResult stopband_width(const std::vector<double>& freqs_hz,
                              const std::vector<double>& s21_sq, double f_center_hz);

} // namespace jtwpa
