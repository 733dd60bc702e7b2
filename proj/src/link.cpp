#include "zdiv/link.hpp"

#include <stdexcept>

namespace zdiv {

void LinkTopology::validate() const {
  if (l1_km <= 0.0) throw std::invalid_argument("LinkTopology: l1 must be positive");
  if (l2_km < 0.0) throw std::invalid_argument("LinkTopology: l2 must be >= 0");
  if (adc_bandwidth_hz <= 0.0)
    throw std::invalid_argument("LinkTopology: ADC bandwidth must be positive");
  fiber.validate();
  ssfm.validate();
}

LinkOutput simulate_link(const Signal& x, const LinkTopology& topo, Rng& rng) {
  topo.validate();
  const Signal after_l1 = ssfm_propagate(x, topo.fiber, topo.l1_km, topo.ssfm, rng);

  LinkOutput out;
  if (topo.mode == LinkMode::Baseline) {
    out.y1 = brickwall_filter(after_l1, topo.adc_bandwidth_hz);
    out.y2 = out.y1;
    return out;
  }

  auto [tap, fwd] = coupler_split(after_l1);
  out.y1 = brickwall_filter(tap, topo.adc_bandwidth_hz);

  Signal second = std::move(fwd);
  if (topo.mode == LinkMode::SDA)
    second = edfa_amplify(second, topo.edfa, x.grid.sample_rate_hz, rng);
  if (topo.l2_km > 0.0)
    second = ssfm_propagate(second, topo.fiber, topo.l2_km, topo.ssfm, rng);
  out.y2 = brickwall_filter(second, topo.adc_bandwidth_hz);
  return out;
}

const char* to_string(LinkMode mode) {
  switch (mode) {
    case LinkMode::Baseline: return "baseline";
    case LinkMode::SD: return "sd";
    case LinkMode::SDA: return "sda";
  }
  return "?";
}

LinkMode link_mode_from_string(const std::string& name) {
  if (name == "baseline") return LinkMode::Baseline;
  if (name == "sd") return LinkMode::SD;
  if (name == "sda") return LinkMode::SDA;
  throw std::invalid_argument("unknown link mode: " + name);
}

}  // namespace zdiv
