#pragma once

#include <iosfwd>
#include <string_view>

#include "beamfactory/link.hpp"

namespace beamfactory {

// Trace CSV schema, one line per (sample, beam) entry:
//   time_s,x_m,y_m,config,row,col,rsrp_dbm
// seconds and meters with 3 decimals, dBm with 2 decimals.
inline constexpr std::string_view kTraceCsvHeader = "time_s,x_m,y_m,config,row,col,rsrp_dbm";

void write_trace_csv(std::ostream& out, const MeasurementTrace& trace);

// Reads the same schema (e.g. an externally measured trace). Consecutive
// lines sharing time_s form one sample. Throws ConfigError("line N", ...) on
// malformed input, mixed configurations, unknown beams or duplicate entries.
MeasurementTrace read_trace_csv(std::istream& in);

}  // namespace beamfactory
