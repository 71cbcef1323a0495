#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "experiments.hpp"

namespace ucbsde {

//! Malformed CSV content; the message names the path and line.
class ParseError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view csv_header = "x,method,mean,stderr,reps";

//---------------------------------------------------------------------------//
// CSV
//---------------------------------------------------------------------------//

namespace detail {
inline std::string format_g17(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        auto pos = line.find(sep, start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return fields;
}

inline bool parse_finite(std::string_view text, double& value)
{
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(value);
}
}  // namespace detail

inline void write_csv(std::ostream& os, SweepTable const& table)
{
    for (auto const& [key, value] : table.metadata)
    {
        if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
            throw std::invalid_argument("metadata entry '" + key + "' cannot be written as a comment");
        os << "# " << key << '=' << value << '\n';
    }
    for (auto const& row : table.rows)
    {
        if (row.method.empty() || row.method.find_first_of(",\n") != std::string::npos)
            throw std::invalid_argument("method label '" + row.method + "' is not a CSV field");
    }
    os << csv_header << '\n';
    for (auto const& row : table.rows)
    {
        os << detail::format_g17(row.x) << ',' << row.method << ','
           << detail::format_g17(row.mean) << ','
           << (row.std_error ? detail::format_g17(*row.std_error) : std::string{}) << ','
           << row.reps << '\n';
    }
}

inline void write_csv(SweepTable const& table, std::string const& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out, table);
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

/*!
 * \brief Parse a table written by write_csv.
 *
 * Comment lines ("# key=value") before the header become metadata. Every
 * numeric field must be finite; the stderr field may be empty.
 */
inline SweepTable read_csv(std::istream& is, std::string const& source = "<stream>")
{
    SweepTable table;
    std::string line;
    long line_no = 0;
    bool seen_header = false;

    auto fail = [&](std::string const& why) {
        throw ParseError(source + ":" + std::to_string(line_no) + ": " + why);
    };

    while (std::getline(is, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!seen_header)
        {
            if (line.starts_with('#'))
            {
                std::string_view body = std::string_view(line).substr(1);
                if (body.starts_with(' '))
                    body.remove_prefix(1);
                auto eq = body.find('=');
                if (eq == std::string_view::npos)
                    fail("comment line is not key=value");
                table.metadata.emplace_back(std::string(body.substr(0, eq)),
                                            std::string(body.substr(eq + 1)));
                continue;
            }
            if (line != csv_header)
                fail("expected header '" + std::string(csv_header) + "'");
            seen_header = true;
            continue;
        }
        if (line.empty())
            continue;

        auto fields = detail::split(line, ',');
        if (fields.size() != 5)
            fail("expected 5 fields, found " + std::to_string(fields.size()));

        SweepRow row;
        if (!detail::parse_finite(fields[0], row.x))
            fail("bad x value '" + std::string(fields[0]) + "'");
        if (fields[1].empty())
            fail("empty method");
        row.method = std::string(fields[1]);
        if (!detail::parse_finite(fields[2], row.mean))
            fail("bad mean value '" + std::string(fields[2]) + "'");
        if (!fields[3].empty())
        {
            double se = 0;
            if (!detail::parse_finite(fields[3], se) || se < 0)
                fail("bad stderr value '" + std::string(fields[3]) + "'");
            row.std_error = se;
        }
        auto reps_text = fields[4];
        auto [ptr, ec] = std::from_chars(reps_text.data(), reps_text.data() + reps_text.size(),
                                         row.reps);
        if (ec != std::errc{} || ptr != reps_text.data() + reps_text.size() || row.reps < 1)
            fail("bad reps value '" + std::string(reps_text) + "'");
        table.rows.push_back(std::move(row));
    }
    if (!seen_header)
        fail("missing header");
    return table;
}

inline SweepTable read_csv(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "' for reading");
    return read_csv(in, path);
}

//---------------------------------------------------------------------------//
// SVG
//---------------------------------------------------------------------------//

namespace detail {
inline std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s)
    {
        switch (c)
        {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string px(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

// Round a span to a 1-2-5 step giving roughly `target` intervals
inline double nice_step(double span, int target)
{
    double raw = span / target;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double norm = raw / mag;
    double step = norm < 1.5 ? 1 : norm < 3 ? 2 : norm < 7 ? 5 : 10;
    return step * mag;
}
}  // namespace detail

/*!
 * \brief Static SVG line chart: one polyline and legend entry per method.
 */
inline void emit_svg(std::ostream& os, SweepTable const& table)
{
    if (table.rows.empty())
        throw std::domain_error("emit_svg: table has no rows");

    constexpr double width = 800, height = 500;
    constexpr double left = 70, right = 190, top = 30, bottom = 60;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr char const* palette[]
        = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    double x_min = table.rows.front().x, x_max = x_min;
    double y_min = 0, y_max = table.rows.front().mean;
    for (auto const& row : table.rows)
    {
        x_min = std::min(x_min, row.x);
        x_max = std::max(x_max, row.x);
        y_min = std::min(y_min, row.mean);
        y_max = std::max(y_max, row.mean);
    }
    if (x_max == x_min)
        x_max = x_min + 1;
    if (y_max == y_min)
        y_max = y_min + 1;
    y_max += 0.05 * (y_max - y_min);

    auto map_x = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto map_y = [&](double y) { return top + (1 - (y - y_min) / (y_max - y_min)) * plot_h; };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes and ticks
    os << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
       << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(top + plot_h) << "\" x2=\""
       << detail::px(left + plot_w) << "\" y2=\"" << detail::px(top + plot_h) << "\"/>\n"
       << "<line x1=\"" << detail::px(left) << "\" y1=\"" << detail::px(top) << "\" x2=\""
       << detail::px(left) << "\" y2=\"" << detail::px(top + plot_h) << "\"/>\n"
       << "</g>\n";

    os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    double xs = detail::nice_step(x_max - x_min, 8);
    for (double t = std::ceil(x_min / xs) * xs; t <= x_max + 1e-9 * xs; t += xs)
    {
        double sx = map_x(t);
        os << "<line x1=\"" << detail::px(sx) << "\" y1=\"" << detail::px(top + plot_h)
           << "\" x2=\"" << detail::px(sx) << "\" y2=\"" << detail::px(top + plot_h + 5)
           << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << detail::px(sx) << "\" y=\"" << detail::px(top + plot_h + 20)
           << "\" text-anchor=\"middle\">" << detail::tick_label(t) << "</text>\n";
    }
    double ys = detail::nice_step(y_max - y_min, 6);
    for (double t = std::ceil(y_min / ys) * ys; t <= y_max + 1e-9 * ys; t += ys)
    {
        double sy = map_y(t);
        os << "<line x1=\"" << detail::px(left - 5) << "\" y1=\"" << detail::px(sy) << "\" x2=\""
           << detail::px(left) << "\" y2=\"" << detail::px(sy) << "\" stroke=\"black\"/>\n"
           << "<text x=\"" << detail::px(left - 8) << "\" y=\"" << detail::px(sy + 4)
           << "\" text-anchor=\"end\">" << detail::tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << detail::px(left + plot_w / 2) << "\" y=\"" << detail::px(height - 15)
       << "\" text-anchor=\"middle\">" << detail::xml_escape(table.x_name()) << "</text>\n"
       << "<text x=\"18\" y=\"" << detail::px(top + plot_h / 2)
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << detail::px(top + plot_h / 2)
       << ")\">normalized regret</text>\n"
       << "</g>\n";

    auto methods = table.methods();
    for (std::size_t i = 0; i < methods.size(); ++i)
    {
        auto rows = table.rows_for(methods[i]);
        std::stable_sort(rows.begin(), rows.end(),
                         [](SweepRow const& a, SweepRow const& b) { return a.x < b.x; });
        char const* color = palette[i % std::size(palette)];
        os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < rows.size(); ++k)
            os << (k ? " " : "") << detail::px(map_x(rows[k].x)) << ','
               << detail::px(map_y(rows[k].mean));
        os << "\"/>\n";
    }

    os << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < methods.size(); ++i)
    {
        double ly = top + 10 + 20 * static_cast<double>(i);
        double lx = left + plot_w + 15;
        char const* color = palette[i % std::size(palette)];
        os << "<line x1=\"" << detail::px(lx) << "\" y1=\"" << detail::px(ly) << "\" x2=\""
           << detail::px(lx + 25) << "\" y2=\"" << detail::px(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << detail::px(lx + 32) << "\" y=\"" << detail::px(ly + 4) << "\">"
           << detail::xml_escape(methods[i]) << "</text>\n";
    }
    os << "</g>\n</svg>\n";
}

inline void emit_svg(SweepTable const& table, std::string const& path)
{
    std::ostringstream buffer;
    emit_svg(buffer, table);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << buffer.str();
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace ucbsde
