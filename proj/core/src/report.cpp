#include "iff/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "iff/errors.hpp"

namespace iff
{

namespace
{

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;)
    {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

double to_double(std::string_view s)
{
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InvalidArgument("parse_phase_csv: bad number '" + std::string(s) + "'");
    return v;
}

int to_int(std::string_view s)
{
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw InvalidArgument("parse_phase_csv: bad integer '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string format_phase_csv(const std::vector<PhaseTransitionRecord>& records)
{
    std::string out(kPhaseCsvHeader);
    out += '\n';
    for (const auto& r : records)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.trial, r.n, r.tau, r.srf, r.snr,
                           r.log_srf, r.log_snr, r.success ? 1 : 0, r.n_recovered,
                           r.max_matched_error);
    return out;
}

std::vector<PhaseTransitionRecord> parse_phase_csv(std::string_view text)
{
    std::vector<PhaseTransitionRecord> out;
    bool header = true;
    for (auto line : split(text, '\n'))
    {
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (header)
        {
            if (line != kPhaseCsvHeader)
                throw InvalidArgument("parse_phase_csv: unexpected header");
            header = false;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10)
            throw InvalidArgument("parse_phase_csv: expected 10 fields, got " +
                                  std::to_string(f.size()));
        out.push_back({to_int(f[0]), to_int(f[1]), to_double(f[2]), to_double(f[3]),
                       to_double(f[4]), to_double(f[5]), to_double(f[6]), to_int(f[7]) != 0,
                       to_int(f[8]), to_double(f[9])});
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os)
        throw IoError("write to '" + path.string() + "' failed");
}

void emit_csv(const std::vector<PhaseTransitionRecord>& records, const std::filesystem::path& path)
{
    write_text_file(path, format_phase_csv(records));
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace
{

std::vector<int> decade_ticks(double lo, double hi)
{
    std::vector<int> t;
    for (int d = static_cast<int>(std::lround(lo)); d <= static_cast<int>(std::lround(hi)); ++d)
        t.push_back(d);
    return t;
}

} // namespace

std::vector<int> LogAxes::x_ticks() const { return decade_ticks(x_lo, x_hi); }
std::vector<int> LogAxes::y_ticks() const { return decade_ticks(y_lo, y_hi); }

LogAxes axes_for(const std::vector<PhaseTransitionRecord>& records)
{
    if (records.empty())
        return {0.0, 1.0, 0.0, 1.0};
    double xl = records.front().log_srf, xh = xl;
    double yl = records.front().log_snr, yh = yl;
    for (const auto& r : records)
    {
        xl = std::min(xl, r.log_srf);
        xh = std::max(xh, r.log_srf);
        yl = std::min(yl, r.log_snr);
        yh = std::max(yh, r.log_snr);
    }
    LogAxes a{std::floor(xl), std::ceil(xh), std::floor(yl), std::ceil(yh)};
    if (a.x_hi <= a.x_lo)
        a.x_hi = a.x_lo + 1.0;
    if (a.y_hi <= a.y_lo)
        a.y_hi = a.y_lo + 1.0;
    return a;
}

std::string render_svg_scatter(const std::vector<PhaseTransitionRecord>& records,
                               const std::vector<FittedLine>& lines)
{
    constexpr double width = 640, height = 480;
    constexpr double left = 70, right = 20, top = 20, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    const LogAxes ax = axes_for(records);

    auto sx = [&](double x) { return left + (x - ax.x_lo) / (ax.x_hi - ax.x_lo) * pw; };
    auto sy = [&](double y) { return top + (ax.y_hi - y) / (ax.y_hi - ax.y_lo) * ph; };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
        "viewBox=\"0 0 {} {}\">\n",
        width, height, width, height);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" "
                     "stroke=\"black\"/>\n",
                     left, top, pw, ph);

    for (int t : ax.x_ticks())
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
                         "stroke=\"black\"/><text x=\"{0:.2f}\" y=\"{3:.2f}\" font-size=\"12\" "
                         "text-anchor=\"middle\">1e{4}</text>\n",
                         sx(t), top + ph, top + ph + 5, top + ph + 20, t);
    for (int t : ax.y_ticks())
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
                         "stroke=\"black\"/><text x=\"{3:.2f}\" y=\"{4:.2f}\" font-size=\"12\" "
                         "text-anchor=\"end\">1e{5}</text>\n",
                         left - 5, sy(t), left, left - 8, sy(t) + 4, t);
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"14\" "
                     "text-anchor=\"middle\">SRF</text>\n",
                     left + pw / 2, height - 15);
    s += fmt::format("<text x=\"15\" y=\"{:.2f}\" font-size=\"14\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 15 {:.2f})\">SNR</text>\n",
                     top + ph / 2, top + ph / 2);

    for (const auto& r : records)
        s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n",
                         sx(r.log_srf), sy(r.log_snr), r.success ? "red" : "blue");

    for (const auto& l : lines)
    {
        // clip y = slope x + c to the box along x
        double x0 = ax.x_lo, x1 = ax.x_hi;
        if (l.slope != 0.0)
        {
            const double xa = (ax.y_lo - l.intercept) / l.slope;
            const double xb = (ax.y_hi - l.intercept) / l.slope;
            x0 = std::max(x0, std::min(xa, xb));
            x1 = std::min(x1, std::max(xa, xb));
        }
        if (!(x1 > x0))
            continue;
        s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                         "stroke=\"black\" stroke-dasharray=\"6 3\"/>\n",
                         sx(x0), sy(l.slope * x0 + l.intercept), sx(x1),
                         sy(l.slope * x1 + l.intercept));
    }
    s += "</svg>\n";
    return s;
}

void emit_svg_scatter(const std::vector<PhaseTransitionRecord>& records,
                      const std::vector<FittedLine>& lines, const std::filesystem::path& path)
{
    write_text_file(path, render_svg_scatter(records, lines));
}

} // namespace iff
