#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jtwpa {

struct JunctionParams {
    double critical_current = 0.0; // A, per junction
    double self_capacitance = 0.0; // F, per junction
    int count_per_cell = 1;        // junctions in series per cell
};

struct ResonatorParams {
    double c_res = 0.0;      // F
    double l_res = 0.0;      // H
    double c_coupling = 0.0; // F
};

struct UnitCellParams {
    JunctionParams junctions;
    ResonatorParams resonator;
    double c_ground = 0.0; // F
};

struct DeviceLine {
    std::vector<UnitCellParams> cells;
    int cell_count() const { return static_cast<int>(cells.size()); }
};

enum class DisorderTarget {
    resonator_c_res,
    junction_critical_current,
    c_ground,
};

struct DisorderSpec {
    double sigma_rel = 0.0;
    DisorderTarget target = DisorderTarget::resonator_c_res;
    std::uint64_t seed = 0;
};

// L_J = Phi0 / (2 pi I_c). Throws std::invalid_argument for I_c <= 0.
double josephson_inductance(double critical_current);

// Ambegaokar-Baratoff zero-temperature relation I_c = pi*Delta/(2 e R_n),
// gap energy in eV. Throws std::invalid_argument for non-positive inputs.
double ic_from_normal_resistance(double r_n_ohm, double gap_energy_ev);

// sqrt(L_cell / c_ground) in the low-frequency, resonator-detached limit,
// with L_cell = count_per_cell * L_J.
double line_impedance(const UnitCellParams& cell);

// Replicates the nominal cell n_cells times with the target parameter drawn
// as nominal*(1 + N(0, sigma_rel)) independently per cell. Draws that would
// make the parameter non-positive are rejected and redrawn; more than 100
// rejections for one cell is a pathological sigma and throws.
DeviceLine sample_disordered_line(const UnitCellParams& nominal, int n_cells,
                                  const DisorderSpec& disorder);

// Uniform line, no disorder.
DeviceLine uniform_line(const UnitCellParams& nominal, int n_cells);

// Reference device: values solved so that the line hits 58.5 ohm, a plasma
// frequency far above band, a resonator pole just above the 6.688 GHz pump,
// and a zero-disorder stopband much narrower than the disorder-broadened one.
UnitCellParams reference_cell();
constexpr int reference_cell_count = 256;
constexpr double reference_pump_hz = 6.688e9;
constexpr double reference_pump_dbm = -73.5;

} // namespace jtwpa
