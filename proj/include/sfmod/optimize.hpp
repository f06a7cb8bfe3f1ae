#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace sfmod {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the maximum of a unimodal f on [a, b], stopping once the
/// bracket is narrower than tol.
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double a, double b, double tol) {
  constexpr double inv_phi = 0.6180339887498948482;  // (sqrt 5 - 1) / 2
  ScalarOptimum out;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

}  // namespace sfmod
