#pragma once

#include <map>
#include <string>

#include "kinestat/sim.hpp"

// Sensor-log CSV with a versioned header line and strict validation. Doubles
// are serialized as the shortest round-trip decimal so golden files are
// bit-stable.

namespace kinestat {

void write_sensor_log(const std::string& path, const SensorLog& log);

// Validates the version line, the header, strictly increasing uniform
// timestamps, and row completeness; errors cite the data row and column.
// Unknown extra columns are preserved verbatim.
SensorLog read_sensor_log(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal

// Flat key-value report, one "key = value" line each (text and machine
// readable at once).
void write_kv_report(const std::string& path, const std::map<std::string, double>& kv,
                     const std::string& header_comment = "");

}  // namespace kinestat
