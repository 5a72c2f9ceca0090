#pragma once

#include <string>
#include <vector>

namespace jtwpa {

enum class PsdUnits { quanta, w_per_hz };

struct NoiseSpectra {
    std::vector<double> freqs_hz;
    std::vector<double> psd_on;  // quanta/s/Hz
    std::vector<double> psd_off; // quanta/s/Hz
};

struct ChainGains {
    std::vector<double> g_sys;  // power ratio per frequency
    std::vector<double> g_twpa; // power ratio per frequency
};

// Dechained amplifier input-referred added noise:
// n_add = ((N_on - N_off)/G_sys + 1/2)/G_T - 1/2, evaluated pointwise.
std::vector<double> added_noise(const NoiseSpectra& spectra, const ChainGains& gains);
double added_noise_point(double n_on, double n_off, double g_sys, double g_twpa);

// Minimum added noise of a phase-insensitive amplifier: (g - 1)/(2 g).
double standard_quantum_limit(double g);

// Signal gain minus noise-floor rise: 10 log10(G_T) - 10 log10(N_on/N_off).
std::vector<double> snr_improvement(const NoiseSpectra& spectra, const ChainGains& gains);
double snr_improvement_point(double n_on, double n_off, double g_twpa);

struct ChainModel {
    double system_noise_quanta = 15.0;
    double system_gain_db = 40.0;
};

// Forward synthesis of the measured PSD pair from amplifier gain/added noise
// and the post-amplifier chain; inverse of added_noise by construction.
NoiseSpectra synthesize_chain_spectra(const std::vector<double>& freqs_hz,
                                      const std::vector<double>& g_twpa,
                                      const std::vector<double>& n_add,
                                      const ChainModel& chain);

double snr_improvement_from_chain(double g_twpa, double n_add, const ChainModel& chain);

// quanta/s/Hz <-> W/Hz at the analysis frequency (one photon = hbar*omega).
double quanta_to_w_per_hz(double quanta, double freq_hz);
double w_per_hz_to_quanta(double psd_w, double freq_hz);

// CSV "freq_hz,psd_on,psd_off" with a "! units=quanta" or "! units=w_per_hz"
// comment; W/Hz input is converted to quanta on load.
NoiseSpectra read_noise_spectra_csv(const std::string& path);
std::string format_noise_spectra_csv(const NoiseSpectra& spectra,
                                     const std::vector<std::string>& provenance = {});

} // namespace jtwpa
