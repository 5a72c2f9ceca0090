#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace jtwpa {

using cplx = std::complex<double>;

// Rectangular sweep of complex feedline transmittance versus probe frequency
// and instrument-plane probe power; t is row-major [freq][power].
struct QubitDataset {
    std::vector<double> probe_freqs_hz;
    std::vector<double> probe_powers_dbm;
    std::vector<cplx> t;

    cplx at(std::size_t fi, std::size_t pi) const {
        return t[fi * probe_powers_dbm.size() + pi];
    }
};

struct QubitParams {
    double f_q_hz = 5e9;
    double gamma1_hz = 1e6;       // energy relaxation rate / 2 pi
    double gamma2_hz = 0.6e6;     // total dephasing rate / 2 pi
    double attenuation_db = -70;  // power at qubit = instrument power + this
    cplx background{1.0, 0.0};
    double delay_s = 0.0;
};

struct QubitFitResult {
    QubitParams params;
    double rms_residual = 0;
    std::array<double, 7> uncertainty{}; // 1-sigma: f_q, g1, g2, att, bg_re, bg_im, delay
    bool converged = false;
    bool at_bound = false; // gamma2 < gamma1/2 or attenuation_db >= 0 at the optimum
    int iterations = 0;
};

struct QubitFitOptions {
    double rabi_convention_c = 4.0; // omega_rabi^2 = c*gamma1*P_qubit/(hbar*omega_q)
    int max_iterations = 400;
    int restarts = 5;
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

// Saturable two-level lineshape of a waveguide-coupled qubit, notch
// convention (|t| dips at resonance, t -> 1 when fully saturated).
cplx transmon_transmittance(double delta_rad, double omega_rabi_rad, double gamma1_rad,
                            double gamma2_rad);

// omega_rabi^2 from the power arriving at the qubit plane.
double rabi_squared(double power_at_qubit_w, double f_q_hz, double gamma1_rad,
                    double convention_c = 4.0);

// Full forward model including background scale and electrical delay.
cplx qubit_model(const QubitParams& p, double freq_hz, double power_dbm,
                 double convention_c = 4.0);

QubitDataset synthesize_qubit_dataset(const QubitParams& truth,
                                      const std::vector<double>& freqs_hz,
                                      const std::vector<double>& powers_dbm,
                                      double noise_sigma, std::uint64_t seed,
                                      double convention_c = 4.0);

// Damped least squares over stacked real/imaginary residuals with seeded
// multi-start; recovers the seven model parameters from a power sweep.
QubitFitResult fit_qubit_dataset(const QubitDataset& data,
                                 const QubitFitOptions& opts = {});

// CSV "freq_hz,power_dbm,t_re,t_im"; the grid must be complete rectangular.
QubitDataset read_qubit_dataset_csv(const std::string& path);
std::string format_qubit_dataset_csv(const QubitDataset& data,
                                     const std::vector<std::string>& provenance = {});

struct AttenuationModel {
    double slope_db_per_ghz = 0;
    double intercept_db = 0;
    double rms_residual_db = 0;
};

// Ordinary least squares affine fit of attenuation (dB) versus frequency (GHz).
AttenuationModel fit_attenuation_linear(const std::vector<double>& freqs_hz,
                                        const std::vector<double>& attenuation_db);

} // namespace jtwpa
