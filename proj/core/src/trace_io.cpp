#include "beamfactory/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <optional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

void write_trace_csv(std::ostream& out, const MeasurementTrace& trace) {
  out << kTraceCsvHeader << '\n';
  fmt::memory_buffer buf;
  for (const auto& s : trace.samples) {
    for (const auto& e : s.beams) {
      buf.clear();
      fmt::format_to(std::back_inserter(buf), "{:.3f},{:.3f},{:.3f},{},{},{},{:.2f}\n", s.time,
                     s.position.x, s.position.y, to_string(e.id.config), e.id.row, e.id.col,
                     e.rsrp_dbm);
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, const std::string& where, std::string_view name) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ConfigError(where, fmt::format("cannot parse {} from '{}'", name, field));
  }
  return value;
}

}  // namespace

MeasurementTrace read_trace_csv(std::istream& in) {
  MeasurementTrace trace;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ConfigError("line 1", "empty trace file (missing header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceCsvHeader) {
    throw ConfigError("line 1", fmt::format("unexpected header '{}', expected '{}'", line,
                                            kTraceCsvHeader));
  }

  std::optional<TxConfig> config;
  std::optional<BeamGridConfig> table;
  std::string current_time;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = fmt::format("line {}", line_no);
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw ConfigError(where, fmt::format("expected 7 fields, got {}", f.size()));
    }
    const double t = parse_number<double>(f[0], where, "time_s");
    const double x = parse_number<double>(f[1], where, "x_m");
    const double y = parse_number<double>(f[2], where, "y_m");
    TxConfig cfg;
    try {
      cfg = parse_tx_config(f[3]);
    } catch (const InvalidArgument& e) {
      throw ConfigError(where, e.what());
    }
    const int row = parse_number<int>(f[4], where, "row");
    const int col = parse_number<int>(f[5], where, "col");
    const double rsrp = parse_number<double>(f[6], where, "rsrp_dbm");
    if (!std::isfinite(rsrp)) throw ConfigError(where, "rsrp_dbm must be finite");

    if (!config) {
      config = cfg;
      table = make_config(cfg);
      trace.config = cfg;
    } else if (*config != cfg) {
      throw ConfigError(where, "trace mixes beam configurations");
    }
    const SsbId id{cfg, row, col};
    if (!table->contains(id)) {
      throw ConfigError(where, fmt::format("beam {} does not exist in configuration {}",
                                           to_string(id), to_string(cfg)));
    }

    if (trace.samples.empty() || f[0] != current_time) {
      if (!trace.samples.empty() && !(t > trace.samples.back().time)) {
        throw ConfigError(where, "timestamps must be strictly increasing");
      }
      current_time = std::string(f[0]);
      trace.samples.push_back({t, {x, y}, {}});
    } else if (trace.samples.back().position != Point2{x, y}) {
      throw ConfigError(where, "entries of one sample disagree on the position");
    }
    auto& beams = trace.samples.back().beams;
    const auto pos = std::lower_bound(beams.begin(), beams.end(), id,
                                      [](const BeamRsrp& e, const SsbId& key) { return e.id < key; });
    if (pos != beams.end() && pos->id == id) {
      throw ConfigError(where, fmt::format("duplicate entry for beam {}", to_string(id)));
    }
    beams.insert(pos, {id, rsrp});
  }
  return trace;
}

}  // namespace beamfactory
