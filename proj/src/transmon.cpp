#include "jtwpa/transmon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "jtwpa/constants.hpp"
#include "jtwpa/csvio.hpp"
#include "jtwpa/mixing.hpp"
#include "jtwpa/rng.hpp"

namespace jtwpa {

namespace {

// Internal fit vector, scaled so every entry is O(1..100):
// x = {f_q [GHz], gamma1 [MHz], gamma2 [MHz], attenuation [dB],
//      bg_re, bg_im, delay [ns]}
//
// The background entries hold bg * exp(-i 2 pi f_ref delay), the complex
// prefactor at the sweep centre. In absolute terms a delay step rotates the
// background by the enormous carrier phase 2 pi f delay, which couples the
// two parameters into a curved valley the damped solver creeps along; with
// the centre rotation absorbed, delay only controls the residual tilt across
// the narrow sweep span and the fit is well conditioned.
using Vec7 = std::array<double, 7>;

QubitParams params_from_vec(const Vec7& x, double f_ref_hz) {
    QubitParams p;
    p.f_q_hz = x[0] * 1e9;
    p.gamma1_hz = x[1] * 1e6;
    p.gamma2_hz = x[2] * 1e6;
    p.attenuation_db = x[3];
    p.delay_s = x[6] * 1e-9;
    p.background = cplx{x[4], x[5]} *
                   std::exp(cplx{0.0, 2.0 * pi * f_ref_hz * p.delay_s});
    return p;
}

Vec7 vec_from_params(const QubitParams& p, double f_ref_hz) {
    const cplx centred =
        p.background * std::exp(cplx{0.0, -2.0 * pi * f_ref_hz * p.delay_s});
    return {p.f_q_hz / 1e9,   p.gamma1_hz / 1e6, p.gamma2_hz / 1e6,
            p.attenuation_db, centred.real(),    centred.imag(),
            p.delay_s / 1e-9};
}

double reference_freq(const QubitDataset& d) {
    return 0.5 * (d.probe_freqs_hz.front() + d.probe_freqs_hz.back());
}

// Natural-unit scale of each vector entry, used to map uncertainties back.
constexpr Vec7 kNaturalScale = {1e9, 1e6, 1e6, 1.0, 1.0, 1.0, 1e-9};

struct Residuals {
    std::vector<double> r; // stacked re/im
    double sse = 0;
};

Residuals compute_residuals(const Vec7& x, const QubitDataset& d, double c) {
    const QubitParams p = params_from_vec(x, reference_freq(d));
    Residuals out;
    out.r.resize(2 * d.t.size());
    std::size_t k = 0;
    for (std::size_t fi = 0; fi < d.probe_freqs_hz.size(); ++fi) {
        for (std::size_t pi = 0; pi < d.probe_powers_dbm.size(); ++pi) {
            const cplx m =
                qubit_model(p, d.probe_freqs_hz[fi], d.probe_powers_dbm[pi], c);
            const cplx res = m - d.at(fi, pi);
            out.r[k++] = res.real();
            out.r[k++] = res.imag();
        }
    }
    for (double v : out.r)
        out.sse += v * v;
    return out;
}

// Solves A x = b for a small dense symmetric system by Gaussian elimination
// with partial pivoting. Returns false when singular.
bool solve7(std::array<std::array<double, 7>, 7> a, Vec7 b, Vec7& x) {
    constexpr int n = 7;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col]))
                piv = r;
        if (std::abs(a[piv][col]) < 1e-300)
            return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int cc = col; cc < n; ++cc)
                a[r][cc] -= f * a[col][cc];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int cc = r + 1; cc < n; ++cc)
            s -= a[r][cc] * x[cc];
        x[r] = s / a[r][r];
    }
    return true;
}

struct LmOutcome {
    Vec7 x{};
    double sse = 0;
    bool converged = false;
    int iterations = 0;
    std::array<std::array<double, 7>, 7> jtj{};
    std::size_t n_residuals = 0;
};

LmOutcome levenberg_marquardt(Vec7 x0, const QubitDataset& d, double c,
                              int max_iterations) {
    LmOutcome best;
    best.x = x0;
    Residuals cur = compute_residuals(x0, d, c);
    best.sse = cur.sse;
    best.n_residuals = cur.r.size();

    const std::size_t m = cur.r.size();
    std::vector<double> jac(m * 7);
    double lambda = 1e-3;

    for (int it = 0; it < max_iterations; ++it) {
        best.iterations = it + 1;
        // Forward-difference Jacobian in the scaled parameter space.
        for (int k = 0; k < 7; ++k) {
            Vec7 xp = best.x;
            const double h = 1e-6 * std::max(std::abs(xp[k]), 1e-2);
            xp[k] += h;
            const Residuals rp = compute_residuals(xp, d, c);
            for (std::size_t i = 0; i < m; ++i)
                jac[i * 7 + k] = (rp.r[i] - cur.r[i]) / h;
        }
        std::array<std::array<double, 7>, 7> jtj{};
        Vec7 jtr{};
        for (std::size_t i = 0; i < m; ++i) {
            for (int a = 0; a < 7; ++a) {
                jtr[a] += jac[i * 7 + a] * cur.r[i];
                for (int b = a; b < 7; ++b)
                    jtj[a][b] += jac[i * 7 + a] * jac[i * 7 + b];
            }
        }
        for (int a = 0; a < 7; ++a)
            for (int b = 0; b < a; ++b)
                jtj[a][b] = jtj[b][a];
        best.jtj = jtj;

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            auto damped = jtj;
            for (int a = 0; a < 7; ++a)
                damped[a][a] += lambda * std::max(jtj[a][a], 1e-12);
            Vec7 neg_jtr;
            for (int a = 0; a < 7; ++a)
                neg_jtr[a] = -jtr[a];
            Vec7 dx;
            if (!solve7(damped, neg_jtr, dx)) {
                lambda *= 10.0;
                continue;
            }
            Vec7 xn = best.x;
            for (int a = 0; a < 7; ++a)
                xn[a] += dx[a];
            // Keep rates physical; reflection keeps the step finite.
            xn[1] = std::abs(xn[1]);
            xn[2] = std::abs(xn[2]);
            const Residuals rn = compute_residuals(xn, d, c);
            if (rn.sse < best.sse) {
                const double rel = (best.sse - rn.sse) / std::max(best.sse, 1e-300);
                best.x = xn;
                cur = rn;
                best.sse = rn.sse;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (rel < 1e-14) {
                    best.converged = true;
                    return best;
                }
                break;
            }
            lambda *= 5.0;
            if (lambda > 1e12)
                break;
        }
        if (!stepped) {
            best.converged = true; // no descent direction left at tiny damping
            return best;
        }
    }
    return best;
}

// Heuristic starting point read off the raw sweep.
QubitParams initial_guess(const QubitDataset& d, double c) {
    const std::size_t nf = d.probe_freqs_hz.size();
    const std::size_t np = d.probe_powers_dbm.size();

    std::size_t j0 = 0, jmax = 0;
    for (std::size_t j = 1; j < np; ++j) {
        if (d.probe_powers_dbm[j] < d.probe_powers_dbm[j0])
            j0 = j;
        if (d.probe_powers_dbm[j] > d.probe_powers_dbm[jmax])
            jmax = j;
    }

    std::size_t i0 = 0;
    for (std::size_t i = 1; i < nf; ++i)
        if (std::abs(d.at(i, j0)) < std::abs(d.at(i0, j0)))
            i0 = i;
    const double f_q = d.probe_freqs_hz[i0];

    const cplx bg = 0.5 * (d.at(0, j0) + d.at(nf - 1, j0));
    const double bg_mag = std::max(std::abs(bg), 1e-6);
    const double depth = std::clamp(1.0 - std::abs(d.at(i0, j0)) / bg_mag, 1e-3, 0.999);

    // Half-depth crossings around the dip give the dephasing rate.
    const double half_level = 1.0 - depth / 2.0;
    double f_lo = d.probe_freqs_hz.front(), f_hi = d.probe_freqs_hz.back();
    for (std::size_t i = i0; i-- > 0;)
        if (std::abs(d.at(i, j0)) / bg_mag > half_level) {
            f_lo = d.probe_freqs_hz[i];
            break;
        }
    for (std::size_t i = i0 + 1; i < nf; ++i)
        if (std::abs(d.at(i, j0)) / bg_mag > half_level) {
            f_hi = d.probe_freqs_hz[i];
            break;
        }
    double hwhm_hz = std::max((f_hi - f_lo) / 2.0, 1e3);

    QubitParams p;
    p.f_q_hz = f_q;
    p.gamma2_hz = hwhm_hz;
    p.gamma1_hz = 2.0 * hwhm_hz * depth;

    // Saturation halves the dip when omega_rabi^2 = gamma1*gamma2; locate the
    // power where that happens and invert the power chain for attenuation.
    std::vector<std::size_t> order(np);
    for (std::size_t j = 0; j < np; ++j)
        order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return d.probe_powers_dbm[a] < d.probe_powers_dbm[b];
    });
    double p_half_dbm = d.probe_powers_dbm[jmax];
    for (std::size_t j : order) {
        if (1.0 - std::abs(d.at(i0, j)) / bg_mag < depth / 2.0) {
            p_half_dbm = d.probe_powers_dbm[j];
            break;
        }
    }
    const double gamma2_rad = 2.0 * pi * p.gamma2_hz;
    const double omega_q = 2.0 * pi * p.f_q_hz;
    const double p_half_w = dbm_to_watts(p_half_dbm);
    p.attenuation_db =
        10.0 * std::log10(gamma2_rad * PhysicalConstants::reduced_planck * omega_q /
                          (c * p_half_w));

    // Saturated trace is nearly pure background; its phase tilt gives delay.
    const double dphi =
        std::arg(d.at(nf - 1, jmax) * std::conj(d.at(0, jmax)));
    const double span = d.probe_freqs_hz.back() - d.probe_freqs_hz.front();
    p.delay_s = span > 0 ? -dphi / (2.0 * pi * span) : 0.0;
    // The endpoint average estimates the background already rotated to the
    // sweep centre; undo that to keep the absolute convention of QubitParams.
    p.background =
        bg * std::exp(cplx{0.0, 2.0 * pi * reference_freq(d) * p.delay_s});
    return p;
}

} // namespace

cplx transmon_transmittance(double delta_rad, double omega_rabi_rad, double gamma1_rad,
                            double gamma2_rad) {
    if (gamma1_rad <= 0.0 || gamma2_rad <= 0.0)
        throw std::domain_error("decay rates must be positive");
    const double dg = delta_rad / gamma2_rad;
    const double denom = 1.0 + dg * dg +
                         omega_rabi_rad * omega_rabi_rad / (gamma1_rad * gamma2_rad);
    const cplx num{1.0, -dg};
    return 1.0 - (gamma1_rad / (2.0 * gamma2_rad)) * num / denom;
}

double rabi_squared(double power_at_qubit_w, double f_q_hz, double gamma1_rad,
                    double convention_c) {
    const double omega_q = 2.0 * pi * f_q_hz;
    return convention_c * gamma1_rad * power_at_qubit_w /
           (PhysicalConstants::reduced_planck * omega_q);
}

cplx qubit_model(const QubitParams& p, double freq_hz, double power_dbm,
                 double convention_c) {
    const double g1 = 2.0 * pi * p.gamma1_hz;
    const double g2 = 2.0 * pi * p.gamma2_hz;
    const double delta = 2.0 * pi * (freq_hz - p.f_q_hz);
    const double p_qubit_w =
        dbm_to_watts(power_dbm) * std::pow(10.0, p.attenuation_db / 10.0);
    const double om2 = rabi_squared(p_qubit_w, p.f_q_hz, g1, convention_c);
    const cplx line = transmon_transmittance(delta, std::sqrt(std::max(om2, 0.0)), g1, g2);
    const cplx rot = std::exp(cplx{0.0, -2.0 * pi * freq_hz * p.delay_s});
    return p.background * rot * line;
}

QubitDataset synthesize_qubit_dataset(const QubitParams& truth,
                                      const std::vector<double>& freqs_hz,
                                      const std::vector<double>& powers_dbm,
                                      double noise_sigma, std::uint64_t seed,
                                      double convention_c) {
    QubitDataset d;
    d.probe_freqs_hz = freqs_hz;
    d.probe_powers_dbm = powers_dbm;
    d.t.reserve(freqs_hz.size() * powers_dbm.size());
    auto rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0 ? noise_sigma : 1.0);
    for (double f : freqs_hz)
        for (double p : powers_dbm) {
            cplx v = qubit_model(truth, f, p, convention_c);
            if (noise_sigma > 0)
                v += cplx{noise(rng), noise(rng)};
            d.t.push_back(v);
        }
    return d;
}

QubitFitResult fit_qubit_dataset(const QubitDataset& data, const QubitFitOptions& opts) {
    if (data.probe_freqs_hz.size() < 5 || data.probe_powers_dbm.size() < 3)
        throw std::invalid_argument("dataset too small for a seven-parameter fit");
    if (data.t.size() != data.probe_freqs_hz.size() * data.probe_powers_dbm.size())
        throw std::invalid_argument("dataset grid is not rectangular");
    const auto [pmin, pmax] = std::minmax_element(data.probe_powers_dbm.begin(),
                                                  data.probe_powers_dbm.end());
    if (*pmax - *pmin < 20.0)
        throw std::invalid_argument("power sweep must span at least 20 dB");

    const QubitParams guess = initial_guess(data, opts.rabi_convention_c);
    const Vec7 base = vec_from_params(guess, reference_freq(data));

    LmOutcome best;
    best.sse = 1e300;
    for (int r = 0; r < std::max(opts.restarts, 1); ++r) {
        Vec7 x0 = base;
        if (r > 0) {
            auto rng = make_rng(derive_seed(opts.seed, "fit-restart-" + std::to_string(r)));
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            x0[0] *= 1.0 + 2e-4 * u(rng);
            x0[1] *= std::pow(2.0, u(rng));
            x0[2] *= std::pow(2.0, u(rng));
            x0[3] += 8.0 * u(rng);
            x0[6] += 0.2 * u(rng);
        }
        LmOutcome o = levenberg_marquardt(x0, data, opts.rabi_convention_c,
                                          opts.max_iterations);
        if (o.sse < best.sse)
            best = o;
    }

    QubitFitResult res;
    res.params = params_from_vec(best.x, reference_freq(data));
    res.converged = best.converged;
    res.iterations = best.iterations;
    res.rms_residual = std::sqrt(best.sse / static_cast<double>(best.n_residuals));
    res.at_bound = res.params.gamma2_hz < res.params.gamma1_hz / 2.0 ||
                   res.params.attenuation_db >= 0.0;
    if (!best.converged)
        throw std::runtime_error("qubit fit did not converge; residual rms " +
                                 std::to_string(res.rms_residual));

    // 1-sigma uncertainties from the damped-free normal matrix.
    const double dof =
        std::max<double>(static_cast<double>(best.n_residuals) - 7.0, 1.0);
    const double s2 = best.sse / dof;
    auto a = best.jtj;
    // Invert via 7 solves against unit vectors.
    for (int k = 0; k < 7; ++k) {
        Vec7 e{};
        e[k] = 1.0;
        Vec7 col;
        if (solve7(a, e, col))
            res.uncertainty[k] = std::sqrt(std::max(col[k] * s2, 0.0)) * kNaturalScale[k];
        else
            res.uncertainty[k] = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

QubitDataset read_qubit_dataset_csv(const std::string& path) {
    const CsvTable t = read_csv_file(path);
    const int cf = t.column("freq_hz"), cp = t.column("power_dbm");
    const int cre = t.column("t_re"), cim = t.column("t_im");
    if (cf < 0 || cp < 0 || cre < 0 || cim < 0)
        throw std::runtime_error(path + ": expected header freq_hz,power_dbm,t_re,t_im");

    std::vector<double> freqs, powers;
    std::map<std::pair<double, double>, cplx> cells;
    for (const auto& row : t.rows) {
        const auto need = [&](int col) {
            const auto& v = row[static_cast<std::size_t>(col)];
            if (!v)
                throw std::runtime_error(path + ": empty cell in qubit dataset");
            return *v;
        };
        const double f = need(cf), p = need(cp);
        cells[{f, p}] = cplx{need(cre), need(cim)};
        if (std::find(freqs.begin(), freqs.end(), f) == freqs.end())
            freqs.push_back(f);
        if (std::find(powers.begin(), powers.end(), p) == powers.end())
            powers.push_back(p);
    }
    std::sort(freqs.begin(), freqs.end());
    std::sort(powers.begin(), powers.end());
    if (cells.size() != freqs.size() * powers.size())
        throw std::runtime_error(path + ": qubit dataset grid is not rectangular");

    QubitDataset d;
    d.probe_freqs_hz = freqs;
    d.probe_powers_dbm = powers;
    d.t.reserve(cells.size());
    for (double f : freqs)
        for (double p : powers)
            d.t.push_back(cells.at({f, p}));
    return d;
}

std::string format_qubit_dataset_csv(const QubitDataset& data,
                                     const std::vector<std::string>& provenance) {
    CsvBuilder b;
    for (const std::string& p : provenance)
        b.add_comment(p);
    b.set_header({"freq_hz", "power_dbm", "t_re", "t_im"});
    for (std::size_t fi = 0; fi < data.probe_freqs_hz.size(); ++fi)
        for (std::size_t pi = 0; pi < data.probe_powers_dbm.size(); ++pi) {
            const cplx v = data.at(fi, pi);
            b.add_row({data.probe_freqs_hz[fi], data.probe_powers_dbm[pi], v.real(),
                       v.imag()});
        }
    return b.str();
}

AttenuationModel fit_attenuation_linear(const std::vector<double>& freqs_hz,
                                        const std::vector<double>& attenuation_db) {
    const std::size_t n = freqs_hz.size();
    if (n < 2 || attenuation_db.size() != n)
        throw std::invalid_argument("attenuation fit needs at least two (freq, dB) points");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = freqs_hz[i] / 1e9;
        sx += x;
        sy += attenuation_db[i];
        sxx += x * x;
        sxy += x * attenuation_db[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * sxx - sx * sx;
    if (std::abs(det) < 1e-12)
        throw std::invalid_argument("attenuation fit needs two distinct frequencies");

    AttenuationModel m;
    m.slope_db_per_ghz = (dn * sxy - sx * sy) / det;
    m.intercept_db = (sy - m.slope_db_per_ghz * sx) / dn;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r =
            attenuation_db[i] - (m.intercept_db + m.slope_db_per_ghz * freqs_hz[i] / 1e9);
        ss += r * r;
    }
    m.rms_residual_db = std::sqrt(ss / dn);
    return m;
}

} // namespace jtwpa
