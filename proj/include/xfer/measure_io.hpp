#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "xfer/measure.hpp"

namespace xfer {

/// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string format_double(double x);

// {"atoms": [[location, weight], ...]}
nlohmann::json measure_to_json(const AtomicMeasure& u);
AtomicMeasure measure_from_json(const nlohmann::json& j);

// Header row "location,weight", one atom per line.
void write_measure_csv(std::ostream& os, const AtomicMeasure& u);
AtomicMeasure read_measure_csv(std::istream& is);

AtomicMeasure load_measure(const std::string& path);

}  // namespace xfer
