#include <cmath>
#include <random>

#include "evtol/scenario.hpp"

namespace evtol {
namespace {

struct ProfileShape {
  double scale;
  int floor_offset;
};

// Per-entry floor offsets differ by one between profiles so that every entry,
// and therefore every per-step total, is strictly ordered low < medium < high.
ProfileShape shape_of(DemandProfile p) {
  switch (p) {
    case DemandProfile::low:
      return {1.0, 0};
    case DemandProfile::medium:
      return {3.0, 1};
    case DemandProfile::high:
      return {6.0, 2};
  }
  return {1.0, 0};
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

DemandProfile parse_demand_profile(const std::string& name) {
  if (name == "low" || name == "LDB") return DemandProfile::low;
  if (name == "medium" || name == "MDB") return DemandProfile::medium;
  if (name == "high" || name == "HDB") return DemandProfile::high;
  throw std::invalid_argument("unknown demand profile '" + name + "'");
}

std::string to_string(DemandProfile profile) {
  switch (profile) {
    case DemandProfile::low:
      return "low";
    case DemandProfile::medium:
      return "medium";
    case DemandProfile::high:
      return "high";
  }
  return "low";
}

std::vector<std::vector<int>> synthesize_demand_block(DemandProfile profile, int steps,
                                                      const std::vector<Route>& routes,
                                                      std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("demand block needs at least one step");
  if (routes.empty()) throw std::invalid_argument("demand block needs at least one route");

  const ProfileShape shape = shape_of(profile);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> out(steps, std::vector<int>(routes.size(), 0));
  for (int t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < routes.size(); ++r) {
      // Same draw for every profile at a given seed; the profile only rescales it.
      const double factor = 0.5 + unit_uniform(rng);
      out[t][r] = static_cast<int>(std::floor(shape.scale * factor)) + shape.floor_offset;
    }
  }
  return out;
}

}  // namespace evtol
