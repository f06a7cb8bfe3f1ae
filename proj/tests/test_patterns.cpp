#include "support.hpp"

#include <sfmod/patterns.hpp>

#include <gtest/gtest.h>

using namespace sfmod;
using testsupport::angle_distance;
using testsupport::pi;

namespace {

TEST(DoublePetal, PeaksOnXAxisAndMidpointClosedForm) {
  // 237.5 um = 95 pixels, so both peaks and the midpoint sit on pixel centres.
  const GridSpec g{512, 512, 2.5e-6, 2.5e-6};
  const auto f = generate(PatternSpec{DoublePetal{100e-6, 475e-6, 0.0}}, g);
  const int c = 256;
  EXPECT_NEAR(std::norm(f.at(c + 95, c)), 1.0, 1e-9);
  EXPECT_NEAR(std::norm(f.at(c - 95, c)), 1.0, 1e-9);
  for (int d : {-3, -1, 1, 3}) EXPECT_LT(std::norm(f.at(c + 95 + d, c)), 1.0);
  // Field exp(-r^2 / (2 w^2)) per petal: intensity exp(-r^2 / w^2).
  const double a = 237.5 * 237.5 / (2.0 * 100.0 * 100.0);
  const double peak = 1.0 + std::exp(-4.0 * a);
  const double mid = 2.0 * std::exp(-a);
  EXPECT_NEAR(std::norm(f.at(c, c)), (mid / peak) * (mid / peak), 1e-9);
}

TEST(DoublePetal, ThetaRotatesClockwise) {
  const GridSpec g{512, 512, 2.5e-6, 2.5e-6};
  const auto f = generate(PatternSpec{DoublePetal{100e-6, 475e-6, pi / 2}}, g);
  EXPECT_NEAR(std::norm(f.at(256, 256 - 95)), 1.0, 1e-9);
  EXPECT_NEAR(std::norm(f.at(256, 256 + 95)), 1.0, 1e-9);
}

TEST(DoublePetal, ThetaPlusPiIsSameIntensity) {
  const GridSpec g;
  for (double th : {0.1, 0.7, 2.0}) {
    const auto a = generate(PatternSpec{DoublePetal{100e-6, 475e-6, th}}, g).intensity();
    const auto b = generate(PatternSpec{DoublePetal{100e-6, 475e-6, th + pi}}, g).intensity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Patterns, RealNonNegativeUnitPeak) {
  const GridSpec g;
  const std::vector<PatternSpec> specs{DoublePetal{}, GridPattern{}, Letter{'E', 1e-3}, Letter{'M', 1e-3}};
  for (const auto& s : specs) {
    const auto f = generate(s, g);
    double peak = 0.0;
    for (auto v : f.values()) {
      ASSERT_EQ(v.imag(), 0.0);
      ASSERT_GE(v.real(), 0.0);
      peak = std::max(peak, v.real());
    }
    EXPECT_DOUBLE_EQ(peak, 1.0);
  }
  const auto lg = generate(PatternSpec{LGMode{1, 2, 150e-6}}, g);
  double peak = 0.0;
  for (auto v : lg.values()) peak = std::max(peak, std::abs(v));
  EXPECT_NEAR(peak, 1.0, 1e-15);
}

TEST(Patterns, Deterministic) {
  const GridSpec g;
  EXPECT_EQ(generate(PatternSpec{Letter{'E', 1e-3}}, g).vector(), generate(PatternSpec{Letter{'E', 1e-3}}, g).vector());
}

TEST(GridPattern, BarsAreSmoothedCrossedMask) {
  const GridSpec g;
  const auto f = generate(PatternSpec{GridPattern{}}, g);
  // Bar centres at +/-210 and +/-630 um; the gaps between them are dark.
  EXPECT_GT(f.at(256 + 52, 256 + 100).real(), 0.99);  // x = 208 um on a vertical bar
  EXPECT_GT(f.at(256 + 100, 256 - 158).real(), 0.99); // y = -632 um on a horizontal bar
  EXPECT_LT(f.at(256 + 52, 256 + 200).real(), 1e-6);  // past the end of the bars
  EXPECT_LT(f.at(256, 256).real(), 1e-6);
  bool has_edge = false;
  for (auto v : f.values()) has_edge = has_edge || (v.real() > 0.1 && v.real() < 0.9);
  EXPECT_TRUE(has_edge);
}

TEST(Letter, GlyphOrientationTopRowUp) {
  const GridSpec g;
  const auto f = generate(PatternSpec{Letter{'E', 1.05e-3}}, g);  // cell = 150 um
  auto at = [&](double x, double y) { return interpolate(f, {x, y}).real(); };
  EXPECT_GT(at(0.0, 450e-6), 0.99);    // top bar, middle column
  EXPECT_LT(at(0.0, 300e-6), 0.01);    // row 1 is empty in the middle
  EXPECT_GT(at(-300e-6, 300e-6), 0.99);  // left stem
  EXPECT_LT(at(300e-6, 0.0), 0.01);    // middle bar stops short of the last column
  EXPECT_GT(at(0.0, -450e-6), 0.99);   // bottom bar
}

TEST(Letter, UnsupportedGlyphListsSupportedSet) {
  try {
    generate(PatternSpec{Letter{'?', 1e-3}}, GridSpec{});
    FAIL();
  } catch (const invalid_input& e) {
    EXPECT_NE(std::string(e.what()).find("ABCDEFGHIJKLMNOPQRSTUVWXYZ"), std::string::npos) << e.what();
  }
}

TEST(Patterns, ValidationRejectsOutOfRange) {
  const GridSpec g;
  EXPECT_THROW(validate(PatternSpec{DoublePetal{-1e-6, 475e-6, 0.0}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{DoublePetal{100e-6, 3e-3, 0.0}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{GridPattern{420e-6, 140e-6, 0}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{GridPattern{420e-6, 500e-6, 2}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{GridPattern{420e-6, 140e-6, 9}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{LGMode{6, 1, 100e-6}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{LGMode{0, 11, 50e-6}}, g), invalid_input);
  EXPECT_THROW(validate(PatternSpec{Letter{'E', 2.5e-3}}, g), invalid_input);
  EXPECT_NO_THROW(validate(PatternSpec{LGMode{5, -10, 50e-6}}, g));
}

TEST(LGMode, VortexCoreIsDark) {
  const auto f = generate(PatternSpec{LGMode{0, 1, 150e-6}}, GridSpec{});
  EXPECT_EQ(std::abs(f.at_origin()), 0.0);
}

TEST(LGMode, PhaseWindsByTwoPiL) {
  const LGMode m{0, -3, 150e-6};
  double total = 0.0;
  constexpr int n = 1000;
  for (int j = 0; j < n; ++j) {
    const double a0 = 2 * pi * j / n, a1 = 2 * pi * (j + 1) / n;
    const cplx v0 = lg_value(m, 120e-6 * Vec2{std::cos(a0), std::sin(a0)});
    const cplx v1 = lg_value(m, 120e-6 * Vec2{std::cos(a1), std::sin(a1)});
    total += std::arg(v1 / v0);
  }
  EXPECT_NEAR(total, -6 * pi, 1e-9);
}

TEST(LGMode, RingIntensityIsRotationallyInvariant) {
  for (const LGMode m : {LGMode{0, 1, 150e-6}, LGMode{2, -3, 100e-6}}) {
    const double r = lg_peak_radius(m.p, m.l) * m.waist;
    std::vector<double> ring;
    for (int j = 0; j < 360; ++j) {
      const double a = 2 * pi * j / 360;
      ring.push_back(std::norm(lg_value(m, r * Vec2{std::cos(a), std::sin(a)})));
    }
    double mean = 0.0, var = 0.0;
    for (double v : ring) mean += v / ring.size();
    for (double v : ring) var += (v - mean) * (v - mean) / ring.size();
    EXPECT_LT(std::sqrt(var), 1e-10 * mean);
  }
}

TEST(LGMode, RadialProfileMatchesClosedForm) {
  // p = 1, |l| = 1: L_1^1(x) = 2 - x.
  for (double rho : {0.0, 0.3, 0.9, 1.7}) {
    const double expect = std::sqrt(2.0) * rho * (2.0 - 2.0 * rho * rho) * std::exp(-rho * rho);
    EXPECT_NEAR(lg_radial(1, -1, rho), expect, 1e-14);
  }
  EXPECT_NEAR(lg_peak_radius(0, 1), std::sqrt(0.5), 1e-4);
}

TEST(LgSpectrumCheck, WindingAndQuarterTurnOffset) {
  const GridSpec g{1024, 1024, 4e-6, 4e-6};
  const auto c1 = lg_spectrum_check(0, 1, 70e-6, g);
  EXPECT_EQ(c1.winding, 1);
  EXPECT_NEAR(std::abs(c1.spiral_offset), pi / 2, 0.05);

  const auto c0 = lg_spectrum_check(0, 0, 70e-6, g);
  EXPECT_EQ(c0.winding, 0);
  EXPECT_EQ(c0.spiral_offset, 0.0);

  const auto m2 = lg_spectrum_check(0, -2, 70e-6, g);
  const auto p2 = lg_spectrum_check(0, 2, 70e-6, g);
  EXPECT_EQ(m2.winding, -2);
  EXPECT_EQ(p2.winding, 2);
  // A two-armed spiral is defined modulo pi, so opposite sign means the sum vanishes mod pi.
  EXPECT_LT(angle_distance(m2.spiral_offset + p2.spiral_offset, 0.0, pi), 0.05);

  const auto m1 = lg_spectrum_check(0, -1, 70e-6, g);
  EXPECT_LT(m1.spiral_offset * c1.spiral_offset, 0.0);
}

TEST(LgSpectrumCheck, RadialIndexSignIsRemoved) {
  const GridSpec g{1024, 1024, 4e-6, 4e-6};
  const auto c = lg_spectrum_check(1, 1, 60e-6, g);
  EXPECT_EQ(c.winding, 1);
  EXPECT_NEAR(std::abs(c.spiral_offset), pi / 2, 0.05);
}

TEST(LgSpectrumCheck, UnderResolvedRingRejected) {
  EXPECT_THROW(lg_spectrum_check(0, 1, 5e-6, GridSpec{64, 64, 4e-6, 4e-6}), invalid_input);
}

}  // namespace
