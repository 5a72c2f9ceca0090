#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "jtwpa/twoport.hpp"

namespace jtwpa {

enum class TouchstoneFormat { RI, MA, DB };
enum class TouchstoneUnit { Hz, kHz, MHz, GHz };

struct TouchstonePoint {
    double freq_hz = 0;
    SMatrix s;
};

struct TouchstoneData {
    std::vector<TouchstonePoint> points;
    double z_ref = 50.0;
};

// Parse failure; the message carries the 1-based line number of the offence.
class touchstone_error : public std::runtime_error {
public:
    touchstone_error(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

// Version-1 two-port file: one option line, '!' comments, 9-number data rows
// (frequency plus four complex entries in s11 s21 s12 s22 order), strictly
// increasing frequency.
TouchstoneData parse_touchstone(const std::string& text);
TouchstoneData read_touchstone_file(const std::string& path);

std::string format_touchstone(const TouchstoneData& data,
                              TouchstoneFormat format = TouchstoneFormat::RI,
                              TouchstoneUnit unit = TouchstoneUnit::Hz);
void write_touchstone_file(const std::string& path, const TouchstoneData& data,
                           TouchstoneFormat format = TouchstoneFormat::RI,
                           TouchstoneUnit unit = TouchstoneUnit::Hz);

// Linear interpolation of each real/imaginary component onto new_freqs_hz,
// which must lie within the sampled span.
TouchstoneData resample_touchstone(const TouchstoneData& data,
                                   const std::vector<double>& new_freqs_hz);

TouchstoneFormat touchstone_format_from_string(const std::string& name);

} // namespace jtwpa
