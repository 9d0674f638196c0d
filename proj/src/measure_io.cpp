#include "xfer/measure_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "xfer/errors.hpp"

namespace xfer {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

nlohmann::json measure_to_json(const AtomicMeasure& u) {
  auto atoms = nlohmann::json::array();
  for (const Atom& a : u.atoms()) atoms.push_back({a.location, a.weight});
  return {{"atoms", std::move(atoms)}};
}

AtomicMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.at("atoms").is_array()) {
    throw InvalidSpec(R"(measure JSON must be {"atoms": [[location, weight], ...]})");
  }
  std::vector<Atom> atoms;
  for (const auto& pair : j.at("atoms")) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw InvalidSpec("measure atom must be a [location, weight] pair of numbers");
    }
    atoms.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return AtomicMeasure(std::move(atoms));
}

void write_measure_csv(std::ostream& os, const AtomicMeasure& u) {
  os << "location,weight\n";
  for (const Atom& a : u.atoms()) {
    os << format_double(a.location) << ',' << format_double(a.weight) << '\n';
  }
}

AtomicMeasure read_measure_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("location,weight", 0) != 0) {
    throw InvalidSpec("measure CSV must start with the header 'location,weight'");
  }
  std::vector<Atom> atoms;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidSpec("measure CSV row without comma: " + line);
    try {
      atoms.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::logic_error&) {
      throw InvalidSpec("measure CSV row is not numeric: " + line);
    }
  }
  return AtomicMeasure(std::move(atoms));
}

AtomicMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open measure file " + path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return read_measure_csv(in);
  try {
    return measure_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(path + ": " + e.what());
  }
}

}  // namespace xfer
