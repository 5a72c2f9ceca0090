#include "jtwpa/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace jtwpa {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

} // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(is, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        if (raw.empty())
            continue;
        if (raw[0] == '!') {
            std::string c = raw.substr(1);
            if (!c.empty() && c[0] == ' ')
                c.erase(0, 1);
            t.comments.push_back(c);
            continue;
        }
        if (!have_header) {
            for (const std::string& f : split_fields(raw))
                t.header.push_back(trim(f));
            have_header = true;
            continue;
        }
        const auto fields = split_fields(raw);
        if (fields.size() != t.header.size())
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        std::vector<std::optional<double>> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) {
            const std::string v = trim(f);
            if (v.empty()) {
                row.push_back(std::nullopt);
                continue;
            }
            char* end = nullptr;
            const double d = std::strtod(v.c_str(), &end);
            if (end != v.c_str() + v.size())
                throw std::runtime_error("csv line " + std::to_string(line_no) +
                                         ": not a number: '" + v + "'");
            row.push_back(d);
        }
        t.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw std::runtime_error("csv: missing header row");
    return t;
}

CsvTable read_csv_file(const std::string& path) { return parse_csv(read_file(path)); }

std::string csv_format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvBuilder::add_comment(const std::string& line) {
    if (header_set_)
        throw std::logic_error("csv comments must precede the header");
    out_ += "! ";
    out_ += line;
    out_ += '\n';
}

void CsvBuilder::set_header(std::vector<std::string> names) {
    if (header_set_)
        throw std::logic_error("csv header already set");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i)
            out_ += ',';
        out_ += names[i];
    }
    out_ += '\n';
    columns_ = names.size();
    header_set_ = true;
}

void CsvBuilder::add_row(const std::vector<std::optional<double>>& cells) {
    if (!header_set_)
        throw std::logic_error("csv header must be set before rows");
    if (cells.size() != columns_)
        throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out_ += ',';
        if (cells[i])
            out_ += csv_format_double(*cells[i]);
    }
    out_ += '\n';
}

std::string CsvBuilder::str() const { return out_; }

void write_file_atomic(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out << body;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace jtwpa
