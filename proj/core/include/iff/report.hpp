#ifndef IFF_REPORT_HPP
#define IFF_REPORT_HPP

///
/// \file report.hpp
///
/// CSV and SVG output for phase-transition sweeps. Floats are written in the
/// shortest form that reads back to the same double.
///

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iff/experiments.hpp"

namespace iff
{

inline constexpr std::string_view kPhaseCsvHeader =
    "trial,n,tau,srf,snr,log_srf,log_snr,success,n_recovered,max_matched_error";

std::string format_phase_csv(const std::vector<PhaseTransitionRecord>& records);

/// Inverse of format_phase_csv. Throws InvalidArgument on a malformed line.
std::vector<PhaseTransitionRecord> parse_phase_csv(std::string_view text);

/// Writes format_phase_csv to path; IoError names the path on failure.
void emit_csv(const std::vector<PhaseTransitionRecord>& records,
              const std::filesystem::path& path);

/// Plot ranges in log10 units, widened outward to whole decades.
struct LogAxes
{
    double x_lo, x_hi;
    double y_lo, y_hi;

    std::vector<int> x_ticks() const;
    std::vector<int> y_ticks() const;
};

/// Axes covering every record; a single decade [0, 1] per axis when empty.
LogAxes axes_for(const std::vector<PhaseTransitionRecord>& records);

/// Scatter in (log SRF, log SNR): red for success, blue for failure, with
/// each line clipped to the plot box.
std::string render_svg_scatter(const std::vector<PhaseTransitionRecord>& records,
                               const std::vector<FittedLine>& lines);

void emit_svg_scatter(const std::vector<PhaseTransitionRecord>& records,
                      const std::vector<FittedLine>& lines, const std::filesystem::path& path);

/// Writes text to path, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace iff

#endif
