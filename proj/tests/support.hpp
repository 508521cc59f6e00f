#pragma once

#include <doctest.h>

#include "ponsim/sim_time.hpp"

namespace doctest {
template <>
struct StringMaker<ponsim::SimTime> {
  static String convert(ponsim::SimTime t) {
    return (ponsim::to_string(t) + " (" + std::to_string(t.count()) + " ps)").c_str();
  }
};
}  // namespace doctest
