#pragma once

#include <string>

#include "zdiv/fiber.hpp"
#include "zdiv/signal.hpp"

namespace zdiv {

enum class LinkMode { Baseline, SD, SDA };

/// TX -> fiber(l1) -> coupler -> { direct ADC ; optional EDFA -> fiber(l2) -> ADC }.
struct LinkTopology {
  LinkMode mode = LinkMode::SD;
  double l1_km = 1000.0;
  double l2_km = 0.0;
  double adc_bandwidth_hz = 20e9;
  FiberSpec fiber;
  EdfaSpec edfa;
  SsfmConfig ssfm;

  void validate() const;
};

struct LinkOutput {
  Signal y1;  // after l1, coupler, brickwall B
  Signal y2;  // after l1, coupler, optional EDFA, l2, brickwall B
};

/// Baseline mode duplicates y1 (the baseline "obtains the same information"
/// on both branches). SD/SDA run the second fiber, SDA with the 3 dB EDFA.
LinkOutput simulate_link(const Signal& x, const LinkTopology& topo, Rng& rng);

const char* to_string(LinkMode mode);
LinkMode link_mode_from_string(const std::string& name);

}  // namespace zdiv
