#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "xfer/measure.hpp"

namespace xfer {

/// Every pair exchanges the same fraction p.
struct DiracKernelSpec {
  double p = 0.0;
};

/// Explicit (fraction, probability) pairs; probabilities must sum to 1.
struct AtomsKernelSpec {
  std::vector<Atom> atoms;
};

enum class DensityFamily { uniform, beta, table };

/// A density on [0, 1] discretized to one atom per uniform cell.
struct DensityKernelSpec {
  DensityFamily family = DensityFamily::uniform;
  double a = 1.0;  // beta shape parameters
  double b = 1.0;
  std::vector<std::pair<double, double>> table;  // (z, density), piecewise linear
  std::size_t nodes = 512;
};

using KernelSpec = std::variant<DiracKernelSpec, AtomsKernelSpec, DensityKernelSpec>;

/// Law B of the exchanged fraction, held as a probability measure on [0, 1].
struct TransferKernel {
  AtomicMeasure atoms;
  KernelSpec spec;
  double lambda1 = 0.0;  // first moment of B
  double lambda2 = 0.0;  // second moment of B
  double mass_at_0 = 0.0;
  double mass_at_1 = 0.0;
  std::vector<double> cumulative;  // running sums of atom weights, for sampling

  [[nodiscard]] double variance() const { return lambda2 - lambda1 * lambda1; }
};

/// Throws InvalidSpec on p outside [0,1], atoms outside [0,1] or not summing
/// to 1, negative or non-normalizable densities, bad beta parameters.
TransferKernel make_kernel(const KernelSpec& spec);

/// One draw z ~ B.
double kernel_sample(const TransferKernel& kernel, Rng& rng);

// {"type":"dirac","p":0.3}
// {"type":"atoms","atoms":[[z,w],...]}
// {"type":"density","name":"uniform"|"beta"|"table","nodes":512,
//  "a":..,"b":.., "table":[[z,value],...]}
KernelSpec kernel_spec_from_json(const nlohmann::json& j);
nlohmann::json kernel_spec_to_json(const KernelSpec& spec);

}  // namespace xfer
