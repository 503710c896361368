#ifndef CRNOSC_TESTS_COMMON_HPP
#define CRNOSC_TESTS_COMMON_HPP

#include <string>

#include "crnosc/network.hpp"

namespace testnets {

// Fully open 3-species oscillator; k1..k8 = 4, 3, 0.2, 2, 0.3, 2.5, 2.5, 0.2.
inline const char* kOscillator3 =
    "X + Z -> 2 Y ; k = 4\n"
    "2 Y -> X + Y ; k = 3\n"
    "0 <-> X ; kf = 0.2, kr = 2\n"
    "0 <-> Y ; kf = 0.3, kr = 2.5\n"
    "0 <-> Z ; kf = 2.5, kr = 0.2\n";

// Two reversible additions over three new species U, V, W (placeholder rates).
inline const char* kAdditionsUVW =
    "Y <-> U + V ; kf = 1, kr = 1\n"
    "U + X <-> 2 V + W ; kf = 1, kr = 1\n";

// Same oscillator constructed with explicit species order X, Y, Z.
inline crnosc::Network oscillator3_xyz() {
  using crnosc::Complex;
  using crnosc::Reaction;
  auto complex_of = [](std::initializer_list<std::pair<int, int>> terms) {
    Complex c;
    for (auto [i, k] : terms) c.add(i, k);
    return c;
  };
  std::vector<Reaction> rs(5);
  rs[0] = {complex_of({{0, 1}, {2, 1}}), complex_of({{1, 2}}), false, 4.0, 0.0};
  rs[1] = {complex_of({{1, 2}}), complex_of({{0, 1}, {1, 1}}), false, 3.0, 0.0};
  rs[2] = {complex_of({}), complex_of({{0, 1}}), true, 0.2, 2.0};
  rs[3] = {complex_of({}), complex_of({{1, 1}}), true, 0.3, 2.5};
  rs[4] = {complex_of({}), complex_of({{2, 1}}), true, 2.5, 0.2};
  return crnosc::Network({"X", "Y", "Z"}, rs);
}

}  // namespace testnets

#endif
