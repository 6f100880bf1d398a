// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace flowplan {

// One slot/device worth of programmable resources. Components are absolute
// counts (BRAM in 36Kb blocks); percentages are derived against a device
// capacity only at report time, so multi-device arithmetic stays exact.
struct ResourceVec {
  std::int64_t lut = 0;
  std::int64_t ff = 0;
  std::int64_t bram = 0;
  std::int64_t dsp = 0;
  std::int64_t uram = 0;

  static constexpr int kClasses = 5;

  std::int64_t component(int i) const {
    switch (i) {
      case 0: return lut;
      case 1: return ff;
      case 2: return bram;
      case 3: return dsp;
      default: return uram;
    }
  }
  void set_component(int i, std::int64_t v) {
    switch (i) {
      case 0: lut = v; break;
      case 1: ff = v; break;
      case 2: bram = v; break;
      case 3: dsp = v; break;
      default: uram = v; break;
    }
  }

  ResourceVec& operator+=(const ResourceVec& o) {
    lut += o.lut;
    ff += o.ff;
    bram += o.bram;
    dsp += o.dsp;
    uram += o.uram;
    return *this;
  }
  ResourceVec& operator-=(const ResourceVec& o) {
    lut -= o.lut;
    ff -= o.ff;
    bram -= o.bram;
    dsp -= o.dsp;
    uram -= o.uram;
    return *this;
  }
  friend ResourceVec operator+(ResourceVec a, const ResourceVec& b) { return a += b; }
  friend ResourceVec operator-(ResourceVec a, const ResourceVec& b) { return a -= b; }
  bool operator==(const ResourceVec&) const = default;

  bool all_non_negative() const {
    return lut >= 0 && ff >= 0 && bram >= 0 && dsp >= 0 && uram >= 0;
  }

  // Component-wise `this <= limit`.
  bool fits_within(const ResourceVec& limit) const {
    return lut <= limit.lut && ff <= limit.ff && bram <= limit.bram &&
           dsp <= limit.dsp && uram <= limit.uram;
  }

  // floor(x * ppm / 1e6) per component. Thresholds are carried as integer
  // parts-per-million so capacity comparisons are exact and deterministic.
  ResourceVec scaled_ppm(std::int64_t ppm) const {
    ResourceVec r;
    for (int i = 0; i < kClasses; ++i)
      r.set_component(i, component(i) * ppm / 1000000);
    return r;
  }

  // floor(x / n) per component.
  ResourceVec divided(std::int64_t n) const {
    ResourceVec r;
    for (int i = 0; i < kClasses; ++i) r.set_component(i, component(i) / n);
    return r;
  }
};

inline const char* resource_class_name(int i) {
  static constexpr std::array<const char*, 5> kNames = {"lut", "ff", "bram",
                                                        "dsp", "uram"};
  return kNames[static_cast<std::size_t>(i)];
}

}  // namespace flowplan
