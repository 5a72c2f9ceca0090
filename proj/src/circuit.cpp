#include "jtwpa/circuit.hpp"

#include "jtwpa/constants.hpp"
#include "jtwpa/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace jtwpa {

double josephson_inductance(double critical_current) {
    if (!(critical_current > 0.0))
        throw std::invalid_argument("josephson_inductance: critical current must be > 0");
    return PhysicalConstants::flux_quantum / (2.0 * pi * critical_current);
}

double ic_from_normal_resistance(double r_n_ohm, double gap_energy_ev) {
    if (!(r_n_ohm > 0.0))
        throw std::invalid_argument("ic_from_normal_resistance: resistance must be > 0");
    if (!(gap_energy_ev > 0.0))
        throw std::invalid_argument("ic_from_normal_resistance: gap energy must be > 0");
    const double gap_joule = gap_energy_ev * PhysicalConstants::electron_charge;
    return pi * gap_joule / (2.0 * PhysicalConstants::electron_charge * r_n_ohm);
}

double line_impedance(const UnitCellParams& cell) {
    if (!(cell.c_ground > 0.0))
        throw std::invalid_argument("line_impedance: c_ground must be > 0");
    const double l_cell =
        cell.junctions.count_per_cell * josephson_inductance(cell.junctions.critical_current);
    return std::sqrt(l_cell / cell.c_ground);
}

namespace {

double& target_field(UnitCellParams& cell, DisorderTarget target) {
    switch (target) {
    case DisorderTarget::resonator_c_res: return cell.resonator.c_res;
    case DisorderTarget::junction_critical_current: return cell.junctions.critical_current;
    case DisorderTarget::c_ground: return cell.c_ground;
    }
    throw std::logic_error("target_field: unhandled disorder target");
}

} // namespace

DeviceLine sample_disordered_line(const UnitCellParams& nominal, int n_cells,
                                  const DisorderSpec& disorder) {
    if (n_cells < 1)
        throw std::invalid_argument("sample_disordered_line: n_cells must be >= 1");
    if (!(disorder.sigma_rel >= 0.0) || disorder.sigma_rel >= 0.2)
        throw std::invalid_argument("sample_disordered_line: sigma_rel must be in [0, 0.2)");

    DeviceLine line;
    line.cells.assign(static_cast<std::size_t>(n_cells), nominal);
    if (disorder.sigma_rel == 0.0)
        return line;

    auto rng = std::mt19937_64(disorder.seed);
    std::normal_distribution<double> normal(0.0, disorder.sigma_rel);
    for (auto& cell : line.cells) {
        double& value = target_field(cell, disorder.target);
        const double nominal_value = value;
        int rejections = 0;
        for (;;) {
            const double drawn = nominal_value * (1.0 + normal(rng));
            if (drawn > 0.0) {
                value = drawn;
                break;
            }
            if (++rejections > 100)
                throw std::runtime_error(
                    "sample_disordered_line: over 100 rejected draws; sigma_rel pathological");
        }
    }
    return line;
}

DeviceLine uniform_line(const UnitCellParams& nominal, int n_cells) {
    DisorderSpec none;
    none.sigma_rel = 0.0;
    return sample_disordered_line(nominal, n_cells, none);
}

UnitCellParams reference_cell() {
    UnitCellParams cell;
    cell.junctions.critical_current = 3.29e-6;
    cell.junctions.self_capacitance = 100e-15;
    cell.junctions.count_per_cell = 8;
    cell.resonator.l_res = 0.8e-9;
    cell.resonator.c_res = 690.2937e-15;
    cell.resonator.c_coupling = 12.4253e-15;
    cell.c_ground = 234e-15;
    return cell;
}

} // namespace jtwpa
