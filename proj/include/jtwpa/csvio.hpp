#pragma once

#include <optional>
#include <string>
#include <vector>

namespace jtwpa {

// Numeric CSV with a mandatory header row and optional '!'-prefixed comment
// lines above it. Empty cells decode to nullopt (used for "not reached"
// extractions); comma separator, '.' decimal point, '\n' line endings.
struct CsvTable {
    std::vector<std::string> comments; // without the leading "! "
    std::vector<std::string> header;
    std::vector<std::vector<std::optional<double>>> rows;

    int column(const std::string& name) const; // -1 when absent
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

std::string csv_format_double(double v);

class CsvBuilder {
public:
    void add_comment(const std::string& line);
    void set_header(std::vector<std::string> names);
    void add_row(const std::vector<std::optional<double>>& cells);
    std::string str() const;

private:
    std::string out_;
    std::size_t columns_ = 0;
    bool header_set_ = false;
};

// Writes via a sibling temp file renamed into place, so a crash never leaves
// a truncated file at the destination.
void write_file_atomic(const std::string& path, const std::string& body);

std::string read_file(const std::string& path);

} // namespace jtwpa
