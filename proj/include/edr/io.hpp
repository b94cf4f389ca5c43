#ifndef EDR_IO_HPP
#define EDR_IO_HPP

#include <iosfwd>
#include <string>

#include "edr/analysis.hpp"
#include "edr/dynamics.hpp"
#include "edr/model.hpp"
#include "edr/result.hpp"

namespace edr {

// Throws std::runtime_error with a field-path diagnostic on malformed
// input. Numbers travel as strings ("900", "316.5", "950/3"); plain JSON
// integers are accepted, other JSON numbers are rejected to keep the
// interchange exact.
Profile parse_profile_json(const std::string& text);
Profile load_profile(const std::string& path);

// {"amounts": {charity: value, ...}, "mode": "exact"|"float"} or a bare
// {charity: value} object (mode defaults to exact).
Distribution parse_distribution_json(const std::string& text, const Profile& profile);
Distribution load_distribution(const std::string& path, const Profile& profile);

struct RenderOptions {
  int emit_decimals = -1;  // >= 0 renders fixed-point approximations
};

std::string format_amount(const Rat& value, Mode mode, const RenderOptions& opt = {});

std::string result_to_json(const Profile& profile, const EquilibriumResult& result,
                           double wall_time_ms, const RenderOptions& opt = {});
// Round-trip reader for exact-mode result files.
EquilibriumResult parse_result_json(const std::string& text, const Profile& profile);

std::string probe_report_to_json(const ProbeReport& report);

// Fixed columns: round, agent, shifted, potential, residual, then one
// column per charity (binary64 renderings).
void write_trace_csv(std::ostream& os, const Profile& profile, const DynamicsTrace& trace);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace edr

#endif
