#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace jtwpa::detail {

class integration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dormand-Prince 5(4) embedded pair over a complex state vector. The error
// estimate is scaled per component by atol + rtol*max(|y0|,|y1|); the step is
// accepted when the max scaled error is <= 1. Throws integration_error when
// the controller pushes the step below the floor.
template <class Rhs>
void rk45_integrate(Rhs&& rhs, std::vector<std::complex<double>>& y, double x0,
                    double x1, double rtol, double atol) {
    using cvec = std::vector<std::complex<double>>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                            e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const std::size_t n = y.size();
    const double span = x1 - x0;
    if (span <= 0.0)
        return;
    const double h_min = span * 1e-12;

    cvec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y5(n);
    double x = x0;
    double h = std::min(0.5, span);
    rhs(x, y, k1); // FSAL seed

    while (x < x1) {
        h = std::min(h, x1 - x);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a21 * k1[i]);
        rhs(x + c2 * h, yt, k2);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(x + c3 * h, yt, k3);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(x + c4 * h, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(x + c5 * h, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] +
                    h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        rhs(x + h, yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        rhs(x + h, y5, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double scale =
                atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(e) / scale);
        }

        if (err <= 1.0) {
            x += h;
            y.swap(y5);
            k1.swap(k7); // FSAL
        }
        const double factor =
            (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        if (h < h_min)
            throw integration_error("rk45: step size underflow before reaching tolerance");
    }
}

} // namespace jtwpa::detail
