// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "doctest.h"
#include "fracprop/error.hpp"
#include "fracprop/mask.hpp"
#include "support.hpp"

using namespace fracprop;

namespace {

Index zero_rows(const Mask& m) {
  Index rows = 0;
  for (Index i = 0; i < m.rows(); ++i) rows += (m.bits().row(i) == 0).all() ? 1 : 0;
  return rows;
}

bool rows_constant(const Mask& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    if ((m.bits().row(i) != m.bits()(i, 0)).any()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("round_half_up") {
  CHECK(round_half_up(2.5) == 3);
  CHECK(round_half_up(2.4999) == 2);
  CHECK(round_half_up(0.995 * 2485) == 2473);
  CHECK(round_half_up(0.995 * 200) == 199);
}

TEST_CASE("structural mask examples") {
  const Mask half = generate_structural_mask(10, 3, 0.5, 7);
  CHECK(zero_rows(half) == 5);
  CHECK(half.observed_count() == 15);
  CHECK(rows_constant(half));

  CHECK(generate_structural_mask(10, 3, 0.0, 7) == Mask(10, 3));

  const Mask sparse = generate_structural_mask(200, 4, 0.995, 1);
  CHECK(zero_rows(sparse) == 199);
}

TEST_CASE("structural mask rejects bad rates") {
  CHECK_THROWS_AS(generate_structural_mask(10, 3, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(generate_structural_mask(10, 3, -0.1, 0), ConfigError);
  // round(0.96 * 10) = 10 leaves nothing observed.
  CHECK_THROWS_AS(generate_structural_mask(10, 3, 0.96, 0), ConfigError);
}

TEST_CASE("uniform mask examples") {
  CHECK(generate_uniform_mask(4, 5, 0.5, 1).masked_count() == 10);
  CHECK(generate_uniform_mask(4, 5, 0.0, 1) == Mask(4, 5));
  CHECK_THROWS_AS(generate_uniform_mask(2, 2, 0.9, 1), ConfigError);
}

TEST_CASE("high-rate uniform masks may empty a column") {
  bool emptied = false;
  for (std::uint64_t seed = 0; seed < 50 && !emptied; ++seed) {
    const Mask m = generate_uniform_mask(20, 10, 0.95, seed);
    emptied = ((m.bits().colwise().maxCoeff()) == 0).any();
  }
  CHECK(emptied);
}

TEST_CASE("masks are a pure function of their arguments") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CHECK(generate_structural_mask(57, 3, 0.7, seed) == generate_structural_mask(57, 3, 0.7, seed));
    CHECK(generate_uniform_mask(57, 3, 0.7, seed) == generate_uniform_mask(57, 3, 0.7, seed));
  }
  CHECK_FALSE(generate_uniform_mask(57, 3, 0.7, 1) == generate_uniform_mask(57, 3, 0.7, 2));
}

TEST_CASE("mask counts follow round-half-up for many shapes") {
  fracprop::Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(300));
    const Index f = 1 + static_cast<Index>(rng.below(8));
    const double mr = rng.uniform() * 0.9;
    const Mask s = generate_structural_mask(n, f, mr, trial);
    CHECK(zero_rows(s) == round_half_up(mr * static_cast<double>(n)));
    CHECK(rows_constant(s));
    const Mask u = generate_uniform_mask(n, f, mr, trial);
    CHECK(u.masked_count() == round_half_up(mr * static_cast<double>(n * f)));
  }
}

TEST_CASE("apply_mask") {
  FeatureMatrix x(2, 2);
  x << 1, 2, 3, 4;
  Mask::Bits bits(2, 2);
  bits << 1, 0, 0, 1;
  const Mask m(bits);
  FeatureMatrix want(2, 2);
  want << 1, 0, 0, 4;
  CHECK(apply_mask(x, m) == want);
  CHECK(apply_mask(apply_mask(x, m), m) == apply_mask(x, m));
  CHECK(apply_mask(x, Mask(2, 2)) == x);

  Mask row_off(2, 2);
  row_off.set(1, 0, false);
  row_off.set(1, 1, false);
  CHECK(apply_mask(x, row_off).row(1).isZero());
  CHECK_THROWS_AS(apply_mask(x, Mask(3, 2)), ShapeError);
}

TEST_CASE("mask bits must be 0 or 1") {
  Mask::Bits bits = Mask::Bits::Constant(2, 2, 1);
  bits(0, 1) = 2;
  CHECK_THROWS_AS(Mask{bits}, ConfigError);
}

TEST_CASE("binary mask round trip") {
  const auto dir = fracprop::test::scratch_dir("mask");
  for (Index f : {1, 7, 8, 9, 17}) {
    const Mask m = generate_uniform_mask(13, f, 0.4, static_cast<std::uint64_t>(f));
    write_mask(dir / "m.fpmk", m);
    CHECK(read_mask(dir / "m.fpmk") == m);
  }
  std::ofstream(dir / "junk.fpmk") << "nope";
  CHECK_THROWS_AS(read_mask(dir / "junk.fpmk"), IoError);
}

TEST_CASE("binary mask layout") {
  const auto dir = fracprop::test::scratch_dir("mask-layout");
  Mask m(1, 10, false);
  m.set(0, 0, true);
  m.set(0, 9, true);
  write_mask(dir / "m.fpmk", m);
  std::ifstream in(dir / "m.fpmk", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() == 4 + 4 + 4 + 2);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FPMK");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 10);
  CHECK(bytes[12] == 0x01);
  CHECK(bytes[13] == 0x02);
}
