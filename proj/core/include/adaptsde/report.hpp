#pragma once

#include "adaptsde/harness.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaptsde {

/// Header of the convergence CSV.
inline constexpr std::string_view kCsvHeader =
    "problem,scheme,h_max,rho,samples,rmse,mean_cputime_s,mean_adaptive_h,n_backstop,"
    "n_diverged,order_slope";

struct CsvWriteOptions {
    /// Leave mean_cputime_s blank so identical runs give identical bytes.
    bool omit_timing = false;
};

/// Writes one row per (scheme, h_max) with a blank order_slope, followed by
/// one summary row per scheme carrying only problem, scheme and order_slope.
void write_csv(std::ostream& os, const ConvergenceTable& table, const CsvWriteOptions& opts = {});

/// One parsed CSV line. Summary rows have no h_max.
struct CsvRecord {
    std::string problem;
    std::string scheme;
    std::optional<double> h_max;
    std::optional<double> rho;
    std::optional<int> samples;
    std::optional<double> rmse;
    std::optional<double> mean_cputime_s;
    std::optional<double> mean_adaptive_h;
    std::optional<long> n_backstop;
    std::optional<long> n_diverged;
    std::optional<double> order_slope;
};

class MalformedCsv : public std::runtime_error {
public:
    MalformedCsv(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses the convergence CSV; throws MalformedCsv naming the first bad line.
std::vector<CsvRecord> read_csv(std::istream& is);

enum class PlotAxis { h_max, cputime };

/// Log-log SVG of rmse against h_max or mean cputime, one series per scheme,
/// with slope-1 and slope-1/2 guide lines. Summary rows and rows without a
/// finite positive x or rmse are skipped.
std::string render_svg(const std::vector<CsvRecord>& rows, PlotAxis axis,
                       const std::string& title = {});

}  // namespace adaptsde
