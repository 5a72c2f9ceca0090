#include "jtwpa/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "jtwpa/constants.hpp"
#include "jtwpa/csvio.hpp"

namespace jtwpa {

namespace {

void check_sizes(const NoiseSpectra& s, const ChainGains& g) {
    const std::size_t n = s.freqs_hz.size();
    if (s.psd_on.size() != n || s.psd_off.size() != n || g.g_sys.size() != n ||
        g.g_twpa.size() != n)
        throw std::invalid_argument("noise spectra and gains must share one grid");
}

} // namespace

double added_noise_point(double n_on, double n_off, double g_sys, double g_twpa) {
    if (g_sys <= 0.0 || g_twpa <= 0.0)
        throw std::domain_error("chain gains must be positive");
    return ((n_on - n_off) / g_sys + 0.5) / g_twpa - 0.5;
}

std::vector<double> added_noise(const NoiseSpectra& spectra, const ChainGains& gains) {
    check_sizes(spectra, gains);
    std::vector<double> out(spectra.freqs_hz.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = added_noise_point(spectra.psd_on[i], spectra.psd_off[i], gains.g_sys[i],
                                   gains.g_twpa[i]);
    return out;
}

double standard_quantum_limit(double g) {
    if (g < 1.0)
        throw std::domain_error("quantum limit defined for gain >= 1");
    if (std::isinf(g))
        return 0.5;
    return (g - 1.0) / (2.0 * g);
}

double snr_improvement_point(double n_on, double n_off, double g_twpa) {
    if (n_off <= 0.0)
        throw std::domain_error("pump-off noise floor must be positive");
    if (n_on <= 0.0)
        throw std::domain_error("pump-on noise floor must be positive");
    if (g_twpa <= 0.0)
        throw std::domain_error("amplifier gain must be positive");
    return 10.0 * std::log10(g_twpa) - 10.0 * std::log10(n_on / n_off);
}

std::vector<double> snr_improvement(const NoiseSpectra& spectra, const ChainGains& gains) {
    check_sizes(spectra, gains);
    std::vector<double> out(spectra.freqs_hz.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = snr_improvement_point(spectra.psd_on[i], spectra.psd_off[i],
                                       gains.g_twpa[i]);
    return out;
}

NoiseSpectra synthesize_chain_spectra(const std::vector<double>& freqs_hz,
                                      const std::vector<double>& g_twpa,
                                      const std::vector<double>& n_add,
                                      const ChainModel& chain) {
    if (g_twpa.size() != freqs_hz.size() || n_add.size() != freqs_hz.size())
        throw std::invalid_argument("gain and added-noise grids must match frequencies");
    const double g_sys = std::pow(10.0, chain.system_gain_db / 10.0);
    NoiseSpectra s;
    s.freqs_hz = freqs_hz;
    s.psd_on.resize(freqs_hz.size());
    s.psd_off.resize(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        s.psd_off[i] = g_sys * (0.5 + chain.system_noise_quanta);
        s.psd_on[i] = g_sys * (g_twpa[i] * (n_add[i] + 0.5) + chain.system_noise_quanta);
    }
    return s;
}

double snr_improvement_from_chain(double g_twpa, double n_add, const ChainModel& chain) {
    const double n_sys = chain.system_noise_quanta;
    const double ratio = (g_twpa * (n_add + 0.5) + n_sys) / (0.5 + n_sys);
    return 10.0 * std::log10(g_twpa) - 10.0 * std::log10(ratio);
}

double quanta_to_w_per_hz(double quanta, double freq_hz) {
    return quanta * PhysicalConstants::reduced_planck * 2.0 * pi * freq_hz;
}

double w_per_hz_to_quanta(double psd_w, double freq_hz) {
    if (freq_hz <= 0.0)
        throw std::domain_error("conversion frequency must be positive");
    return psd_w / (PhysicalConstants::reduced_planck * 2.0 * pi * freq_hz);
}

NoiseSpectra read_noise_spectra_csv(const std::string& path) {
    const CsvTable t = read_csv_file(path);
    PsdUnits units = PsdUnits::quanta;
    bool units_seen = false;
    for (const std::string& c : t.comments) {
        if (c == "units=quanta") {
            units = PsdUnits::quanta;
            units_seen = true;
        } else if (c == "units=w_per_hz") {
            units = PsdUnits::w_per_hz;
            units_seen = true;
        }
    }
    if (!units_seen)
        throw std::runtime_error(path + ": missing '! units=...' comment");
    const int cf = t.column("freq_hz"), con = t.column("psd_on"), coff = t.column("psd_off");
    if (cf < 0 || con < 0 || coff < 0)
        throw std::runtime_error(path + ": expected header freq_hz,psd_on,psd_off");
    NoiseSpectra s;
    for (const auto& row : t.rows) {
        const auto need = [&](int col) {
            const auto& v = row[static_cast<std::size_t>(col)];
            if (!v)
                throw std::runtime_error(path + ": empty cell in noise spectra");
            return *v;
        };
        const double f = need(cf);
        double on = need(con), off = need(coff);
        if (units == PsdUnits::w_per_hz) {
            on = w_per_hz_to_quanta(on, f);
            off = w_per_hz_to_quanta(off, f);
        }
        s.freqs_hz.push_back(f);
        s.psd_on.push_back(on);
        s.psd_off.push_back(off);
    }
    return s;
}

std::string format_noise_spectra_csv(const NoiseSpectra& spectra,
                                     const std::vector<std::string>& provenance) {
    CsvBuilder b;
    for (const std::string& p : provenance)
        b.add_comment(p);
    b.add_comment("units=quanta");
    b.set_header({"freq_hz", "psd_on", "psd_off"});
    for (std::size_t i = 0; i < spectra.freqs_hz.size(); ++i)
        b.add_row({spectra.freqs_hz[i], spectra.psd_on[i], spectra.psd_off[i]});
    return b.str();
}

} // namespace jtwpa
