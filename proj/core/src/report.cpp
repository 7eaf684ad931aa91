#include "adaptsde/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace adaptsde {

namespace {

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
std::optional<T> parse_field(const std::string& s, std::size_t line, const char* name)
{
    if (s.empty()) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) throw MalformedCsv(line, std::string("bad number in ") + name);
        return v;
    } else {
        T v{};
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw MalformedCsv(line, std::string("bad integer in ") + name);
        return v;
    }
}

std::string malformed_message(std::size_t line, const std::string& what)
{
    return "malformed CSV at line " + std::to_string(line) + ": " + what;
}

}  // namespace

MalformedCsv::MalformedCsv(std::size_t line, const std::string& what)
    : std::runtime_error(malformed_message(line, what)), line_(line)
{
}

void write_csv(std::ostream& os, const ConvergenceTable& table, const CsvWriteOptions& opts)
{
    os << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        os << r.problem << ',' << scheme_name(r.scheme) << ',' << fmt(r.h_max) << ',' << fmt(r.rho)
           << ',' << r.samples << ',' << fmt(r.rmse) << ','
           << (opts.omit_timing ? std::string{} : fmt(r.mean_cputime_s)) << ','
           << fmt(r.mean_adaptive_h) << ',' << r.n_backstop << ',' << r.n_diverged << ",\n";
    }
    std::vector<SchemeId> order;
    for (const auto& r : table.rows)
        if (std::find(order.begin(), order.end(), r.scheme) == order.end()) order.push_back(r.scheme);
    for (SchemeId id : order) {
        auto it = table.order.find(id);
        const std::string slope = it != table.order.end() && it->second.ok ? fmt(it->second.slope) : "";
        os << table.problem << ',' << scheme_name(id) << ",,,,,,,,," << slope << '\n';
    }
}

std::vector<CsvRecord> read_csv(std::istream& is)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(is, line)) throw MalformedCsv(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw MalformedCsv(1, "unexpected header");

    std::vector<CsvRecord> rows;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = split(line);
        if (f.size() != 11) throw MalformedCsv(line_no, "expected 11 fields, got " + std::to_string(f.size()));
        if (f[0].empty() || f[1].empty()) throw MalformedCsv(line_no, "missing problem or scheme");
        CsvRecord r;
        r.problem = f[0];
        r.scheme = f[1];
        r.h_max = parse_field<double>(f[2], line_no, "h_max");
        r.rho = parse_field<double>(f[3], line_no, "rho");
        r.samples = parse_field<int>(f[4], line_no, "samples");
        r.rmse = parse_field<double>(f[5], line_no, "rmse");
        r.mean_cputime_s = parse_field<double>(f[6], line_no, "mean_cputime_s");
        r.mean_adaptive_h = parse_field<double>(f[7], line_no, "mean_adaptive_h");
        r.n_backstop = parse_field<long>(f[8], line_no, "n_backstop");
        r.n_diverged = parse_field<long>(f[9], line_no, "n_diverged");
        r.order_slope = parse_field<double>(f[10], line_no, "order_slope");
        if (r.h_max && !r.rmse) throw MalformedCsv(line_no, "data row without rmse");
        if (!r.h_max && !r.order_slope && r.rmse) throw MalformedCsv(line_no, "rmse without h_max");
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
    double x0, x1, y0, y1;  // log10 bounds
    double left = 80, right = 170, top = 40, bottom = 60, width = 720, height = 480;

    double px(double lx) const { return left + (lx - x0) / (x1 - x0) * (width - left - right); }
    double py(double ly) const { return height - bottom - (ly - y0) / (y1 - y0) * (height - top - bottom); }
};

}  // namespace

std::string render_svg(const std::vector<CsvRecord>& rows, PlotAxis axis, const std::string& title)
{
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::vector<std::string> order;
    for (const auto& r : rows) {
        if (!r.h_max) continue;
        const auto x = axis == PlotAxis::h_max ? r.h_max : r.mean_cputime_s;
        if (!x || !r.rmse || !(*x > 0.0) || !(*r.rmse > 0.0) || !std::isfinite(*r.rmse)) continue;
        if (!series.count(r.scheme)) order.push_back(r.scheme);
        series[r.scheme].emplace_back(std::log10(*x), std::log10(*r.rmse));
    }

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [name, pts] : series)
        for (auto [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (series.empty()) {
        xmin = -4, xmax = 0, ymin = -4, ymax = 0;
    }
    Frame fr{std::floor(xmin), std::ceil(xmax), std::floor(ymin), std::ceil(ymax)};
    if (fr.x1 <= fr.x0) fr.x1 = fr.x0 + 1;
    if (fr.y1 <= fr.y0) fr.y1 = fr.y0 + 1;

    std::ostringstream s;
    s.precision(6);
    s << std::fixed;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\"" << fr.height
      << "\" viewBox=\"0 0 " << fr.width << ' ' << fr.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        s << "<text x=\"" << fr.width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";

    const double plot_l = fr.px(fr.x0), plot_r = fr.px(fr.x1), plot_t = fr.py(fr.y1), plot_b = fr.py(fr.y0);
    s << "<clipPath id=\"plot\"><rect x=\"" << plot_l << "\" y=\"" << plot_t << "\" width=\""
      << plot_r - plot_l << "\" height=\"" << plot_b - plot_t << "\"/></clipPath>\n";
    s << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
    s << "<rect x=\"" << plot_l << "\" y=\"" << plot_t << "\" width=\"" << plot_r - plot_l
      << "\" height=\"" << plot_b - plot_t << "\"/>\n";
    for (double e = fr.x0; e <= fr.x1 + 1e-9; e += 1)
        s << "<line x1=\"" << fr.px(e) << "\" y1=\"" << plot_b << "\" x2=\"" << fr.px(e) << "\" y2=\""
          << plot_b + 5 << "\"/>\n";
    for (double e = fr.y0; e <= fr.y1 + 1e-9; e += 1)
        s << "<line x1=\"" << plot_l - 5 << "\" y1=\"" << fr.py(e) << "\" x2=\"" << plot_l << "\" y2=\""
          << fr.py(e) << "\"/>\n";
    s << "</g>\n<g class=\"labels\">\n";
    for (double e = fr.x0; e <= fr.x1 + 1e-9; e += 1)
        s << "<text x=\"" << fr.px(e) << "\" y=\"" << plot_b + 20 << "\" text-anchor=\"middle\">1e"
          << static_cast<int>(e) << "</text>\n";
    for (double e = fr.y0; e <= fr.y1 + 1e-9; e += 1)
        s << "<text x=\"" << plot_l - 8 << "\" y=\"" << fr.py(e) + 4 << "\" text-anchor=\"end\">1e"
          << static_cast<int>(e) << "</text>\n";
    s << "<text x=\"" << (plot_l + plot_r) / 2 << "\" y=\"" << fr.height - 15 << "\" text-anchor=\"middle\">"
      << (axis == PlotAxis::h_max ? "h_max" : "mean cputime (s)") << "</text>\n";
    s << "<text x=\"20\" y=\"" << (plot_t + plot_b) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (plot_t + plot_b) / 2 << ")\">RMSE</text>\n</g>\n";

    // Guides through the upper-right data corner (or the frame centre).
    const double ax = series.empty() ? (fr.x0 + fr.x1) / 2 : xmax;
    const double ay = series.empty() ? (fr.y0 + fr.y1) / 2 : ymax;
    s << "<g class=\"guides\" clip-path=\"url(#plot)\" stroke=\"gray\" stroke-dasharray=\"6 4\">\n";
    for (double slope : {1.0, 0.5}) {
        const double ya = ay + slope * (fr.x0 - ax), yb = ay + slope * (fr.x1 - ax);
        s << "<line class=\"guide\" data-slope=\"" << slope << "\" x1=\"" << fr.px(fr.x0) << "\" y1=\""
          << fr.py(ya) << "\" x2=\"" << fr.px(fr.x1) << "\" y2=\"" << fr.py(yb) << "\"/>\n";
    }
    s << "</g>\n";

    for (std::size_t k = 0; k < order.size(); ++k) {
        auto pts = series[order[k]];
        std::sort(pts.begin(), pts.end());
        const char* color = kPalette[k % kPalette.size()];
        s << "<g class=\"series\" data-scheme=\"" << order[k] << "\" stroke=\"" << color << "\" fill=\""
          << color << "\">\n<polyline fill=\"none\" points=\"";
        for (auto [x, y] : pts) s << fr.px(x) << ',' << fr.py(y) << ' ';
        s << "\"/>\n";
        for (auto [x, y] : pts)
            s << "<circle class=\"point\" cx=\"" << fr.px(x) << "\" cy=\"" << fr.py(y) << "\" r=\"3.5\"/>\n";
        s << "</g>\n";
        const double ly = plot_t + 15 + 18.0 * static_cast<double>(k);
        s << "<g class=\"legend\"><line x1=\"" << plot_r + 15 << "\" y1=\"" << ly << "\" x2=\"" << plot_r + 35
          << "\" y2=\"" << ly << "\" stroke=\"" << color << "\"/><text x=\"" << plot_r + 40 << "\" y=\""
          << ly + 4 << "\">" << order[k] << "</text></g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace adaptsde
