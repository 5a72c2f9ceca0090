#include "jtwpa/twoport.hpp"

#include "jtwpa/constants.hpp"
#include "jtwpa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace jtwpa {

namespace {

constexpr cplx j_unit{0.0, 1.0};

[[noreturn]] void throw_pole(const char* name, double freq_hz) {
    std::ostringstream os;
    os << "singular element at " << freq_hz << " Hz: " << name;
    throw std::domain_error(os.str());
}

} // namespace

cplx series_impedance(const UnitCellParams& cell, double freq_hz) {
    const double w = 2.0 * pi * freq_hz;
    const double lj = josephson_inductance(cell.junctions.critical_current);
    const double cj = cell.junctions.self_capacitance;
    const double den = 1.0 - w * w * lj * cj;
    if (den == 0.0)
        throw_pole("junction plasma resonance", freq_hz);
    return static_cast<double>(cell.junctions.count_per_cell) * j_unit * w * lj / den;
}

cplx shunt_admittance(const UnitCellParams& cell, double freq_hz) {
    const double w = 2.0 * pi * freq_hz;
    const auto& r = cell.resonator;
    // Rational form of c_coupling in series with the l_res/c_res tank; avoids
    // intermediate infinities at the tank's own resonance (a zero here).
    const double num = 1.0 - w * w * r.l_res * r.c_res;
    const double den = 1.0 - w * w * r.l_res * (r.c_res + r.c_coupling);
    if (r.c_coupling != 0.0 && den == 0.0)
        throw_pole("resonator short (series LC pole of the shunt branch)", freq_hz);
    cplx y = j_unit * w * cell.c_ground;
    if (r.c_coupling != 0.0)
        y += j_unit * w * r.c_coupling * num / den;
    return y;
}

TwoPortABCD cell_abcd(const UnitCellParams& cell, double freq_hz) {
    const cplx z = series_impedance(cell, freq_hz);
    const cplx y = shunt_admittance(cell, freq_hz);
    const cplx zh = 0.5 * z;
    TwoPortABCD m;
    m.a = 1.0 + zh * y;
    m.b = z + zh * zh * y;
    m.c = y;
    m.d = m.a;
    return m;
}

TwoPortABCD cascade_networks(const TwoPortABCD& first, const TwoPortABCD& second) {
    TwoPortABCD r;
    r.a = first.a * second.a + first.b * second.c;
    r.b = first.a * second.b + first.b * second.d;
    r.c = first.c * second.a + first.d * second.c;
    r.d = first.c * second.b + first.d * second.d;
    return r;
}

ScaledABCD cascade(const DeviceLine& line, double freq_hz) {
    ScaledABCD acc;
    for (const auto& cell : line.cells) {
        acc.m = cascade_networks(acc.m, cell_abcd(cell, freq_hz));
        const double scale = std::max(
            std::max(std::abs(acc.m.a), std::abs(acc.m.b)),
            std::max(std::abs(acc.m.c), std::abs(acc.m.d)));
        if (scale > 1e100 || (scale > 0.0 && scale < 1e-100)) {
            acc.m.a /= scale;
            acc.m.b /= scale;
            acc.m.c /= scale;
            acc.m.d /= scale;
            acc.log_scale += std::log(scale);
        }
    }
    return acc;
}

SMatrix abcd_to_s(const TwoPortABCD& m, double z_ref) {
    if (!(z_ref > 0.0))
        throw std::invalid_argument("abcd_to_s: z_ref must be > 0");
    const cplx a = m.a, b = m.b / z_ref, c = m.c * z_ref, d = m.d;
    const cplx den = a + b + c + d;
    if (den == 0.0)
        throw std::domain_error("abcd_to_s: degenerate network (zero denominator)");
    SMatrix s;
    s.s11 = (a + b - c - d) / den;
    s.s22 = (-a + b - c + d) / den;
    s.s21 = 2.0 / den;
    s.s12 = 2.0 * m.determinant() / den;
    return s;
}

SMatrix abcd_to_s(const ScaledABCD& m, double z_ref) {
    if (!(z_ref > 0.0))
        throw std::invalid_argument("abcd_to_s: z_ref must be > 0");
    const cplx a = m.m.a, b = m.m.b / z_ref, c = m.m.c * z_ref, d = m.m.d;
    const cplx den = a + b + c + d;
    if (den == 0.0)
        throw std::domain_error("abcd_to_s: degenerate network (zero denominator)");
    SMatrix s;
    s.s11 = (a + b - c - d) / den;
    s.s22 = (-a + b - c + d) / den;
    // True entries are exp(log_scale) times the stored ones; transmission picks
    // up exp(-log_scale), which underflows to zero deep inside a stopband.
    // Reciprocity of the cascaded cells gives s12 = s21 without evaluating the
    // (catastrophically cancelling) determinant of the scaled product.
    s.s21 = (2.0 / den) * std::exp(-m.log_scale);
    s.s12 = s.s21;
    return s;
}

double s21_power(const ScaledABCD& m, double z_ref) {
    const cplx den = m.m.a + m.m.b / z_ref + m.m.c * z_ref + m.m.d;
    const double log_p =
        2.0 * (std::log(2.0) - m.log_scale - std::log(std::abs(den)));
    if (log_p < -700.0)
        return 0.0;
    return std::exp(log_p);
}

BlochWavenumber bloch_wavenumber(const TwoPortABCD& cell_matrix) {
    const cplx cos_k = 0.5 * (cell_matrix.a + cell_matrix.d);
    cplx k = std::acos(cos_k);
    // std::acos maps to Re in [0, pi]; flip the branch so Im k >= 0.
    if (k.imag() < 0.0)
        k = std::conj(k);
    BlochWavenumber out;
    out.re = k.real();
    out.im = k.imag();
    return out;
}

BlochWavenumber bloch_wavenumber(const UnitCellParams& cell, double freq_hz) {
    return bloch_wavenumber(cell_abcd(cell, freq_hz));
}

cplx image_impedance(const UnitCellParams& cell, double freq_hz) {
    const TwoPortABCD m = cell_abcd(cell, freq_hz);
    if (m.c == 0.0)
        throw std::domain_error("image_impedance: C = 0 (no shunt path)");
    return std::sqrt(m.b / m.c);
}

std::vector<double> transmission_spectrum(const DeviceLine& line,
                                          const std::vector<double>& freqs_hz,
                                          double z_ref) {
    std::vector<double> out(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i)
        out[i] = s21_power(cascade(line, freqs_hz[i]), z_ref);
    return out;
}

std::vector<SMatrix> s_parameter_sweep(const DeviceLine& line,
                                       const std::vector<double>& freqs_hz,
                                       double z_ref) {
    std::vector<SMatrix> out(freqs_hz.size());
    for (std::size_t i = 0; i < freqs_hz.size(); ++i)
        out[i] = abcd_to_s(cascade(line, freqs_hz[i]), z_ref);
    return out;
}

std::vector<double> ensemble_average_s21_sq(const UnitCellParams& nominal, int n_cells,
                                            const DisorderSpec& disorder, int n_lines,
                                            const std::vector<double>& freqs_hz,
                                            double z_ref, int workers) {
    if (n_lines < 1)
        throw std::invalid_argument("ensemble_average_s21_sq: n_lines must be >= 1");
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n_lines);

    // Each line gets its own spectrum slot; the final sum runs in line order
    // so the result is independent of scheduling.
    std::vector<std::vector<double>> per_line(static_cast<std::size_t>(n_lines));
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto run_block = [&](int begin, int end) {
        try {
            for (int i = begin; i < end; ++i) {
                DisorderSpec line_spec = disorder;
                line_spec.seed = derive_seed(disorder.seed, "mc-line-" + std::to_string(i));
                const DeviceLine line = sample_disordered_line(nominal, n_cells, line_spec);
                per_line[static_cast<std::size_t>(i)] =
                    transmission_spectrum(line, freqs_hz, z_ref);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    if (workers == 1) {
        run_block(0, n_lines);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_lines + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int begin = w * chunk;
            const int end = std::min(n_lines, begin + chunk);
            if (begin < end)
                pool.emplace_back(run_block, begin, end);
        }
        for (auto& t : pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    std::vector<double> avg(freqs_hz.size(), 0.0);
    for (const auto& spectrum : per_line)
        for (std::size_t k = 0; k < avg.size(); ++k)
            avg[k] += spectrum[k];
    for (auto& v : avg)
        v /= n_lines;
    return avg;
}

StopbandResult stopband_width(const std::vector<double>& freqs_hz,
                              const std::vector<double>& s21_sq, double f_center_hz) {
    if (freqs_hz.size() != s21_sq.size() || freqs_hz.size() < 3)
        throw std::invalid_argument("stopband_width: need matching grids with >= 3 points");

    std::vector<double> db(s21_sq.size());
    for (std::size_t i = 0; i < s21_sq.size(); ++i)
        db[i] = 10.0 * std::log10(std::max(s21_sq[i], 1e-300));

    std::vector<double> sorted = db;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
        const double upper = median;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2 - 1, sorted.end());
        median = 0.5 * (sorted[sorted.size() / 2 - 1] + upper);
    }
    const double threshold = median - 3.0;

    StopbandResult out;
    out.passband_median_db = median;

    // Index closest to the requested center; if that point is not below the
    // threshold, fall back to the nearest below-threshold point.
    std::size_t ic = 0;
    double best = std::abs(freqs_hz[0] - f_center_hz);
    for (std::size_t i = 1; i < freqs_hz.size(); ++i) {
        const double d = std::abs(freqs_hz[i] - f_center_hz);
        if (d < best) {
            best = d;
            ic = i;
        }
    }
    if (db[ic] >= threshold) {
        bool any = false;
        double nearest = 0.0;
        for (std::size_t i = 0; i < db.size(); ++i) {
            if (db[i] < threshold) {
                const double d = std::abs(freqs_hz[i] - f_center_hz);
                if (!any || d < nearest) {
                    any = true;
                    nearest = d;
                    ic = i;
                }
            }
        }
        if (!any)
            return out; // found = false: no stopband
    }

    std::size_t lo = ic, hi = ic;
    while (lo > 0 && db[lo - 1] < threshold)
        --lo;
    while (hi + 1 < db.size() && db[hi + 1] < threshold)
        ++hi;

    out.found = true;
    out.lo_hz = freqs_hz[lo];
    out.hi_hz = freqs_hz[hi];
    out.width_hz = out.hi_hz - out.lo_hz;
    return out;
}

} // namespace jtwpa
