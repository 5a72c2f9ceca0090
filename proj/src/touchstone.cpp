#include "jtwpa/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jtwpa/constants.hpp"

namespace jtwpa {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok)
        out.push_back(tok);
    return out;
}

double parse_number(const std::string& tok, int line_no) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || tok.empty())
        throw touchstone_error(line_no, "not a number: '" + tok + "'");
    return v;
}

cplx decode_pair(double a, double b, TouchstoneFormat fmt) {
    switch (fmt) {
    case TouchstoneFormat::RI:
        return {a, b};
    case TouchstoneFormat::MA:
        return std::polar(a, b * pi / 180.0);
    case TouchstoneFormat::DB:
        return std::polar(std::pow(10.0, a / 20.0), b * pi / 180.0);
    }
    return {};
}

void encode_pair(cplx v, TouchstoneFormat fmt, double& a, double& b) {
    switch (fmt) {
    case TouchstoneFormat::RI:
        a = v.real();
        b = v.imag();
        return;
    case TouchstoneFormat::MA:
        a = std::abs(v);
        b = std::arg(v) * 180.0 / pi;
        return;
    case TouchstoneFormat::DB:
        a = 20.0 * std::log10(std::abs(v));
        b = std::arg(v) * 180.0 / pi;
        return;
    }
}

double unit_scale(TouchstoneUnit u) {
    switch (u) {
    case TouchstoneUnit::Hz:
        return 1.0;
    case TouchstoneUnit::kHz:
        return 1e3;
    case TouchstoneUnit::MHz:
        return 1e6;
    case TouchstoneUnit::GHz:
        return 1e9;
    }
    return 1.0;
}

const char* unit_name(TouchstoneUnit u) {
    switch (u) {
    case TouchstoneUnit::Hz:
        return "HZ";
    case TouchstoneUnit::kHz:
        return "KHZ";
    case TouchstoneUnit::MHz:
        return "MHZ";
    case TouchstoneUnit::GHz:
        return "GHZ";
    }
    return "HZ";
}

const char* format_name(TouchstoneFormat f) {
    switch (f) {
    case TouchstoneFormat::RI:
        return "RI";
    case TouchstoneFormat::MA:
        return "MA";
    case TouchstoneFormat::DB:
        return "DB";
    }
    return "RI";
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

touchstone_error::touchstone_error(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

TouchstoneFormat touchstone_format_from_string(const std::string& name) {
    const std::string n = lower(name);
    if (n == "ri")
        return TouchstoneFormat::RI;
    if (n == "ma")
        return TouchstoneFormat::MA;
    if (n == "db")
        return TouchstoneFormat::DB;
    throw std::invalid_argument("unknown format '" + name + "' (expected ri, ma or db)");
}

TouchstoneData parse_touchstone(const std::string& text) {
    TouchstoneData data;
    double freq_scale = 1e9; // touchstone defaults: GHZ S MA R 50
    TouchstoneFormat fmt = TouchstoneFormat::MA;
    bool saw_options = false;

    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r')
            raw.pop_back();
        const auto bang = raw.find('!');
        if (bang != std::string::npos)
            raw.erase(bang);
        const auto toks = tokenize(raw);
        if (toks.empty())
            continue;

        if (toks[0] == "#" || toks[0][0] == '#') {
            if (saw_options)
                throw touchstone_error(line_no, "duplicate option line");
            if (!data.points.empty())
                throw touchstone_error(line_no, "option line after data");
            saw_options = true;
            std::vector<std::string> opts;
            if (toks[0].size() > 1)
                opts.push_back(lower(toks[0].substr(1)));
            for (std::size_t i = 1; i < toks.size(); ++i)
                opts.push_back(lower(toks[i]));
            for (std::size_t i = 0; i < opts.size(); ++i) {
                const std::string& o = opts[i];
                if (o == "hz")
                    freq_scale = 1.0;
                else if (o == "khz")
                    freq_scale = 1e3;
                else if (o == "mhz")
                    freq_scale = 1e6;
                else if (o == "ghz")
                    freq_scale = 1e9;
                else if (o == "s")
                    ; // scattering parameters, the only supported kind
                else if (o == "y" || o == "z" || o == "h" || o == "g")
                    throw touchstone_error(line_no,
                                           "unsupported parameter type '" + o + "'");
                else if (o == "ri")
                    fmt = TouchstoneFormat::RI;
                else if (o == "ma")
                    fmt = TouchstoneFormat::MA;
                else if (o == "db")
                    fmt = TouchstoneFormat::DB;
                else if (o == "r") {
                    if (i + 1 >= opts.size())
                        throw touchstone_error(line_no, "option 'R' missing resistance");
                    data.z_ref = parse_number(opts[++i], line_no);
                    if (data.z_ref <= 0.0)
                        throw touchstone_error(line_no, "reference resistance must be positive");
                } else
                    throw touchstone_error(line_no, "unknown option token '" + o + "'");
            }
            continue;
        }

        if (!saw_options)
            throw touchstone_error(line_no, "data before option line");
        if (toks.size() != 9)
            throw touchstone_error(line_no,
                                   "expected 9 values for a two-port row, got " +
                                       std::to_string(toks.size()));
        double v[9];
        for (int i = 0; i < 9; ++i)
            v[i] = parse_number(toks[static_cast<std::size_t>(i)], line_no);

        TouchstonePoint pt;
        pt.freq_hz = v[0] * freq_scale;
        if (pt.freq_hz <= 0.0)
            throw touchstone_error(line_no, "frequency must be positive");
        if (!data.points.empty() && pt.freq_hz <= data.points.back().freq_hz)
            throw touchstone_error(line_no, "frequency must be strictly increasing");
        pt.s.s11 = decode_pair(v[1], v[2], fmt);
        pt.s.s21 = decode_pair(v[3], v[4], fmt);
        pt.s.s12 = decode_pair(v[5], v[6], fmt);
        pt.s.s22 = decode_pair(v[7], v[8], fmt);
        data.points.push_back(pt);
    }

    if (!saw_options)
        throw touchstone_error(line_no == 0 ? 1 : line_no, "missing option line");
    if (data.points.empty())
        throw touchstone_error(line_no == 0 ? 1 : line_no, "no data rows");
    return data;
}

TouchstoneData read_touchstone_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_touchstone(ss.str());
}

std::string format_touchstone(const TouchstoneData& data, TouchstoneFormat format,
                              TouchstoneUnit unit) {
    std::ostringstream os;
    const double scale = unit_scale(unit);
    os << "! two-port scattering data\n";
    os << "# " << unit_name(unit) << " S " << format_name(format) << " R "
       << fmt_double(data.z_ref) << "\n";
    for (const auto& pt : data.points) {
        double a, b;
        os << fmt_double(pt.freq_hz / scale);
        for (const cplx v : {pt.s.s11, pt.s.s21, pt.s.s12, pt.s.s22}) {
            encode_pair(v, format, a, b);
            os << ' ' << fmt_double(a) << ' ' << fmt_double(b);
        }
        os << '\n';
    }
    return os.str();
}

void write_touchstone_file(const std::string& path, const TouchstoneData& data,
                           TouchstoneFormat format, TouchstoneUnit unit) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << format_touchstone(data, format, unit);
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

TouchstoneData resample_touchstone(const TouchstoneData& data,
                                   const std::vector<double>& new_freqs_hz) {
    if (data.points.size() < 2)
        throw std::invalid_argument("resampling needs at least two source points");
    const double lo = data.points.front().freq_hz;
    const double hi = data.points.back().freq_hz;

    TouchstoneData out;
    out.z_ref = data.z_ref;
    out.points.reserve(new_freqs_hz.size());
    for (double f : new_freqs_hz) {
        if (f < lo || f > hi)
            throw std::invalid_argument("resample frequency outside sampled span");
        auto it = std::lower_bound(data.points.begin(), data.points.end(), f,
                                   [](const TouchstonePoint& p, double v) {
                                       return p.freq_hz < v;
                                   });
        if (it == data.points.begin())
            ++it;
        const TouchstonePoint& b = *it;
        const TouchstonePoint& a = *(it - 1);
        const double t = (f - a.freq_hz) / (b.freq_hz - a.freq_hz);
        auto lerp = [t](cplx u, cplx v) { return u + t * (v - u); };
        TouchstonePoint pt;
        pt.freq_hz = f;
        pt.s.s11 = lerp(a.s.s11, b.s.s11);
        pt.s.s21 = lerp(a.s.s21, b.s.s21);
        pt.s.s12 = lerp(a.s.s12, b.s.s12);
        pt.s.s22 = lerp(a.s.s22, b.s.s22);
        out.points.push_back(pt);
    }
    return out;
}

} // namespace jtwpa
