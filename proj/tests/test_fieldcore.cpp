#include "support.hpp"

#include <sfmod/fieldcore.hpp>
#include <sfmod/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace sfmod;
using testsupport::pi;

namespace {

const GridSpec kSmall{64, 64, 4e-6, 4e-6};

TEST(GridSpec, RejectsOddOrTinyDimensions) {
  EXPECT_THROW((GridSpec{63, 64, 4e-6, 4e-6}.validate()), invalid_input);
  EXPECT_THROW((GridSpec{6, 6, 4e-6, 4e-6}.validate()), invalid_input);
  EXPECT_THROW((GridSpec{64, 64, 0.0, 4e-6}.validate()), invalid_input);
  EXPECT_NO_THROW((GridSpec{8, 8, 1.0, 1.0}.validate()));
}

TEST(GridSpec, CentredOriginAndAxes) {
  const GridSpec g = kSmall;
  EXPECT_EQ(g.position(32, 32), (Vec2{0.0, 0.0}));
  EXPECT_DOUBLE_EQ(g.x(0), -32 * 4e-6);
  EXPECT_DOUBLE_EQ(g.qx(0), -pi / 4e-6);
  EXPECT_DOUBLE_EQ(g.dqx(), 2 * pi / (64 * 4e-6));
  EXPECT_DOUBLE_EQ(g.nyquist_x(), pi / 4e-6);
}

TEST(ComplexField, RejectsNonFiniteWithIndex) {
  std::vector<cplx> v(kSmall.size(), 1.0);
  v[kSmall.index(5, 7)] = {std::nan(""), 0.0};
  try {
    ComplexField f(kSmall, v);
    FAIL() << "accepted NaN";
  } catch (const invalid_input& e) {
    EXPECT_NE(std::string(e.what()).find("(5, 7)"), std::string::npos) << e.what();
  }
}

TEST(ComplexField, RejectsSizeMismatch) {
  EXPECT_THROW(ComplexField(kSmall, std::vector<cplx>(10)), invalid_input);
  EXPECT_THROW(SpectralField(kSmall, std::vector<cplx>(10)), invalid_input);
}

TEST(ForwardFt, UniformFieldIsDcOnly) {
  const auto s = forward_ft(ComplexField::sample(kSmall, [](Vec2) { return 1.0; }));
  const double dc = std::norm(s.at(32, 32));
  double total = 0.0;
  for (auto v : s.values()) total += std::norm(v);
  EXPECT_NEAR(dc / total, 1.0, 1e-14);
  EXPECT_NEAR(s.at(32, 32).real(), 64 * 64 * kSmall.pixel_area(), 1e-20);
}

TEST(ForwardFt, LatticePlaneWaveIsSingleBin) {
  const auto s = forward_ft(testsupport::plane_wave(kSmall, 37, 29));
  for (int my = 0; my < kSmall.ny; ++my)
    for (int mx = 0; mx < kSmall.nx; ++mx) {
      const double a = std::abs(s.at(mx, my));
      if (mx == 37 && my == 29) {
        EXPECT_NEAR(a, kSmall.nx * kSmall.ny * kSmall.pixel_area(), 1e-20);
      } else {
        EXPECT_LT(a, 1e-12 * kSmall.nx * kSmall.ny * kSmall.pixel_area());
      }
    }
}

TEST(ForwardFt, GaussianMatchesAnalyticTransform) {
  // exp(-r^2 / w^2) <-> pi w^2 exp(-q^2 w^2 / 4): a Gaussian of waist 2 / w in q.
  const GridSpec g{256, 256, 2e-6, 2e-6};
  const double w = 40e-6;
  const auto s = forward_ft(ComplexField::sample(g, [&](Vec2 r) { return std::exp(-dot(r, r) / (w * w)); }));
  double worst = 0.0;
  double m2 = 0.0, m0 = 0.0;
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx) {
      const Vec2 q = g.wavevector(mx, my);
      const double expect = pi * w * w * std::exp(-dot(q, q) * w * w / 4.0);
      worst = std::max(worst, std::abs(s.at(mx, my) - expect));
      m2 += q.x * q.x * std::norm(s.at(mx, my));
      m0 += std::norm(s.at(mx, my));
    }
  EXPECT_LT(worst, 1e-10 * pi * w * w);
  // |psi~|^2 ~ exp(-q^2 w^2 / 2): per-axis variance 1 / w^2.
  EXPECT_NEAR(m2 / m0, 1.0 / (w * w), 1e-8 / (w * w));
}

TEST(InverseFt, DcBinGivesConstant) {
  std::vector<cplx> v(kSmall.size());
  const cplx a{3.0, -1.0};
  v[kSmall.index(32, 32)] = a;
  const auto f = inverse_ft(SpectralField(kSmall, v));
  const cplx expect = a / (kSmall.extent_x() * kSmall.extent_y());
  for (auto x : f.values()) EXPECT_LT(std::abs(x - expect), 1e-12 * std::abs(expect));
}

TEST(InverseFt, HermitianSpectrumGivesRealField) {
  std::mt19937_64 rng(3);
  const auto real = ComplexField::sample(kSmall, [&, n = std::normal_distribution<double>()](Vec2) mutable { return n(rng); });
  const auto back = inverse_ft(forward_ft(real));
  double peak = 0.0, imag = 0.0;
  for (auto v : back.values()) {
    peak = std::max(peak, std::abs(v));
    imag = std::max(imag, std::abs(v.imag()));
  }
  EXPECT_LT(imag, 1e-10 * peak);
}

class FieldProperty : public ::testing::TestWithParam<int> {};

TEST_P(FieldProperty, RoundTripParsevalHermitianLinearityShift) {
  std::mt19937_64 rng(1000 + GetParam());
  std::uniform_int_distribution<int> size(4, 40);
  const GridSpec g{2 * size(rng), 2 * size(rng), 1e-6 * (1 + GetParam() % 5), 2e-6};
  const ComplexField a = testsupport::random_noise(g, rng);
  const ComplexField b = testsupport::random_noise(g, rng);
  const SpectralField sa = forward_ft(a);

  EXPECT_LT(relative_l2(inverse_ft(sa), a), 1e-12);
  EXPECT_NEAR(sa.energy(), a.energy(), 1e-10 * a.energy());

  std::vector<cplx> re(a.values().size());
  for (std::size_t i = 0; i < re.size(); ++i) re[i] = a.values()[i].real();
  const SpectralField sr = forward_ft(ComplexField(g, re));
  double herm = 0.0, scale = 0.0;
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx) {
      const auto [ix, iy] = sr.mirror_bin(mx, my);
      herm = std::max(herm, std::abs(sr.at(ix, iy) - std::conj(sr.at(mx, my))));
      scale = std::max(scale, std::abs(sr.at(mx, my)));
    }
  EXPECT_LT(herm, 1e-12 * scale);

  const cplx ca{0.3, -1.2}, cb{-2.0, 0.5};
  std::vector<cplx> mix(a.values().size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = ca * a.values()[i] + cb * b.values()[i];
  const SpectralField sm = forward_ft(ComplexField(g, mix));
  const SpectralField sb = forward_ft(b);
  std::vector<cplx> lin(mix.size());
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = ca * sa.values()[i] + cb * sb.values()[i];
  EXPECT_LT(relative_l2(sm.values(), lin), 1e-12);

  // Translate by one pixel along x: psi'(x) = psi(x - dx).
  std::vector<cplx> shifted(a.values().size());
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) shifted[g.index(ix, iy)] = a.at((ix + g.nx - 1) % g.nx, iy);
  const SpectralField ss = forward_ft(ComplexField(g, shifted));
  std::vector<cplx> expect(shifted.size());
  for (int my = 0; my < g.ny; ++my)
    for (int mx = 0; mx < g.nx; ++mx)
      expect[g.index(mx, my)] = sa.at(mx, my) * std::polar(1.0, -g.qx(mx) * g.dx);
  EXPECT_LT(relative_l2(ss.values(), expect), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Random, FieldProperty, ::testing::Range(0, 25));

TEST(Helpers, WrapAngleRange) {
  EXPECT_DOUBLE_EQ(wrap_angle(pi), pi);
  EXPECT_DOUBLE_EQ(wrap_angle(-pi), pi);
  EXPECT_NEAR(wrap_angle(3 * pi / 2), -pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-7.0), -7.0 + 2 * pi, 1e-15);
}

TEST(Helpers, InterpolateHitsPixelCentres) {
  std::mt19937_64 rng(4);
  const auto f = testsupport::random_noise(kSmall, rng);
  EXPECT_LT(std::abs(interpolate(f, kSmall.position(10, 20)) - f.at(10, 20)), 1e-12);
  const cplx mid = interpolate(f, kSmall.position(10, 20) + Vec2{0.5 * kSmall.dx, 0.0});
  EXPECT_LT(std::abs(mid - 0.5 * (f.at(10, 20) + f.at(11, 20))), 1e-12);
}

TEST(Helpers, PhaseRampInverts) {
  std::mt19937_64 rng(5);
  const auto f = testsupport::random_noise(kSmall, rng);
  const Vec2 k{1.3e4, -2e4};
  EXPECT_LT(relative_l2(apply_phase_ramp(apply_phase_ramp(f, k, 1.0), k, -1.0), f), 1e-14);
}

TEST(Io, RawFieldRoundTripIsBitExact) {
  std::mt19937_64 rng(6);
  const auto f = testsupport::random_noise(GridSpec{16, 10, 3e-6, 5e-6}, rng);
  std::stringstream ss;
  io::write_field(ss, f);
  const std::string bytes = ss.str();
  const auto header = bytes.substr(0, bytes.find('\n'));
  EXPECT_EQ(header, R"({"nx":16,"ny":10,"dx":3e-06,"dy":5e-06})");
  EXPECT_EQ(bytes.size(), header.size() + 1 + 16 * 10 * 16);
  const auto back = io::read_field(ss);
  EXPECT_EQ(back.grid(), f.grid());
  EXPECT_EQ(back.vector(), f.vector());
}

TEST(Io, LittleEndianLayout) {
  const GridSpec g{8, 8, 1.0, 1.0};
  std::vector<cplx> v(g.size());
  v[0] = {1.0, -2.0};
  std::stringstream ss;
  io::write_field(ss, ComplexField(g, v));
  const std::string bytes = ss.str();
  const auto start = bytes.find('\n') + 1;
  // 1.0 = 0x3FF0000000000000, least significant byte first.
  EXPECT_EQ(static_cast<unsigned char>(bytes[start + 7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(bytes[start + 6]), 0xF0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[start + 15]), 0xC0);
}

TEST(Io, TruncatedOrBadHeaderRejected) {
  std::stringstream bad("not json\n");
  EXPECT_THROW(io::read_field(bad), invalid_input);
  std::stringstream truncated(std::string(R"({"nx":8,"ny":8,"dx":1,"dy":1})") + "\n1234");
  EXPECT_THROW(io::read_field(truncated), invalid_input);
}

TEST(Io, PgmHeaderAndScaling) {
  const std::vector<double> raster{0.0, 1.0, 2.0, 4.0};
  std::stringstream ss;
  io::write_pgm(ss, raster, 2, 2);
  const std::string s = ss.str();
  ASSERT_EQ(s.substr(0, 13), "P5\n2 2\n65535\n");
  const auto* px = reinterpret_cast<const unsigned char*>(s.data() + 13);
  // Top image row is the largest y (second raster row): 2.0 then 4.0.
  EXPECT_EQ(px[0] * 256 + px[1], 32768);
  EXPECT_EQ(px[2] * 256 + px[3], 65535);
  EXPECT_EQ(px[4] * 256 + px[5], 0);
}

TEST(Io, UnwritablePathReportsPath) {
  const auto f = ComplexField::zeros(kSmall);
  try {
    io::write_field(std::filesystem::path("/nonexistent-dir/x.field"), f);
    FAIL();
  } catch (const invalid_input& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x.field"), std::string::npos);
  }
}

}  // namespace
