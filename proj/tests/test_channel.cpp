#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_helpers.hpp"
#include "uavisac/channel.hpp"

using namespace uavisac;

namespace {

Scenario single_link(double distance, double phase = 0.0) {
  Scenario s;
  s.ue_estimate = Vec3(distance, 0, 0);
  s.wavelength = 0.1;
  s.effective_bandwidth = 1e6;
  s.noise_psd = 1e-12;
  s.uav_positions.emplace_back(0, 0, 0);
  s.antenna_offsets.push_back(upa_layout(1, 1, 0.05));
  s.phase_shifts.push_back(phase);
  set_matched_beamformers(s);
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("channel");

TEST_CASE("channel_estimate single antenna magnitude") {
  // lambda / (4 pi d) at lambda = 0.1, d = 100
  const ChannelEstimate est = channel_estimate(single_link(100.0));
  CHECK(est.h[0](0).real() == doctest::Approx(7.9577471545947667e-5).epsilon(1e-12));
  CHECK(est.h[0](0).imag() == doctest::Approx(0.0));
  CHECK(est.distance[0] == doctest::Approx(100.0));
  CHECK(est.gain[0] == doctest::Approx(1.0));
}

TEST_CASE("phase shift rotates the channel") {
  const ChannelEstimate base = channel_estimate(single_link(100.0));
  const ChannelEstimate flipped = channel_estimate(single_link(100.0, std::numbers::pi));
  CHECK(flipped.h[0](0).real() == doctest::Approx(-base.h[0](0).real()).epsilon(1e-12));
}

TEST_CASE("path loss law: doubling distance halves the norm") {
  const ChannelEstimate near = channel_estimate(single_link(70.0));
  const ChannelEstimate far = channel_estimate(single_link(140.0));
  CHECK(far.h[0].norm() == doctest::Approx(0.5 * near.h[0].norm()).epsilon(1e-12));
}

TEST_CASE("channel_estimate norm invariant") {
  std::mt19937_64 eng(17);
  for (int i = 0; i < 50; ++i) {
    const Scenario s = testing::random_scenario(eng);
    const ChannelEstimate est = channel_estimate(s);
    for (int k = 0; k < s.uav_count(); ++k) {
      const double expected = s.wavelength / (4.0 * std::numbers::pi * est.distance[static_cast<size_t>(k)]) *
                              std::sqrt(static_cast<double>(s.antenna_count(k)));
      CHECK(est.h[static_cast<size_t>(k)].norm() == doctest::Approx(expected).epsilon(1e-12));
      CHECK(est.gain[static_cast<size_t>(k)] >= 0.0);
      CHECK(est.gain[static_cast<size_t>(k)] <= s.antenna_count(k) * (1 + 1e-12));
    }
  }
}

TEST_CASE("channel_error vanishes at zero LSE") {
  const Scenario s = testing::triangle_scenario();
  for (int k = 0; k < 3; ++k) {
    CHECK(channel_error(s, k, Vec3::Zero()).norm() == 0.0);
  }
}

TEST_CASE("channel_error single-antenna value") {
  // (0.1 / 4pi) (1/110 - 1/100)
  const Scenario s = single_link(100.0);
  const Eigen::VectorXcd dh = channel_error(s, 0, Vec3(10.0, 0, 0));
  CHECK(dh(0).real() == doctest::Approx(-7.2343155950861516e-6).epsilon(1e-12));
  CHECK(dh(0).imag() == doctest::Approx(0.0));
}

TEST_CASE("moving the UE farther shrinks the perturbed channel") {
  const Scenario s = single_link(100.0);
  const ChannelEstimate est = channel_estimate(s);
  const Eigen::VectorXcd dh = channel_error(s, 0, Vec3(25.0, 0, 0));
  CHECK((est.h[0] + dh).norm() < est.h[0].norm());
}

TEST_CASE("channel_error rejects the UE landing on the UAV") {
  const Scenario s = single_link(100.0);
  CHECK_THROWS_AS(channel_error(s, 0, Vec3(-100.0, 0, 0)), Error);
}

TEST_CASE("rate frozen value") {
  // lambda=0.1, g=16, N0=1e-12, d=100, Pc=1e-3: SNR = 101.32118364233777
  Scenario s;
  s.ue_estimate = Vec3(0, 0, 0);
  s.wavelength = 0.1;
  s.noise_psd = 1e-12;
  s.effective_bandwidth = 1e6;
  s.uav_positions.emplace_back(0, 0, 100);
  s.antenna_offsets.push_back(upa_layout(4, 4, 0.05));
  s.phase_shifts.push_back(0.0);
  set_matched_beamformers(s);
  const ChannelEstimate est = channel_estimate(s);
  REQUIRE(est.gain[0] == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(rate(s, 0, 1e-3, Vec3::Zero()) == doctest::Approx(6.6769610481711614).epsilon(1e-12));
}

TEST_CASE("rate trivial cases") {
  const Scenario s = single_link(100.0);
  CHECK(rate(s, 0, 0.0, Vec3::Zero()) == 0.0);
  // P chosen to put the SNR at exactly 1
  const double p_unit = 16.0 * std::numbers::pi * std::numbers::pi * s.noise_psd * 100.0 * 100.0 /
                        (s.wavelength * s.wavelength);
  CHECK(rate(s, 0, p_unit, Vec3::Zero()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rate is monotone in power and distance") {
  const Scenario s = testing::triangle_scenario();
  std::mt19937_64 eng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const int k = static_cast<int>(eng() % 3);
    const double p1 = 1e-6 + u(eng);
    const double p2 = p1 * (1.0 + u(eng));
    CHECK(rate(s, k, p2, Vec3::Zero()) > rate(s, k, p1, Vec3::Zero()));
    // move radially away from the UAV
    const Vec3 dir = (s.ue_estimate - s.uav_positions[static_cast<size_t>(k)]).normalized();
    const double t1 = u(eng) * 10.0;
    const double t2 = t1 + 0.1 + u(eng);
    CHECK(rate(s, k, p1, t2 * dir) < rate(s, k, p1, t1 * dir));
  }
}

TEST_CASE("the two rate forms agree") {
  const Scenario s = testing::triangle_scenario();
  std::mt19937_64 eng(29);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 300; ++i) {
    const int k = static_cast<int>(eng() % 3);
    const Vec3 lse(u(eng), u(eng), u(eng));
    const double p = 1e-4 * (1.0 + std::abs(u(eng)));
    const double direct = rate(s, k, p, lse);
    const double via_channel = rate_via_channel(s, k, p, lse);
    CHECK(direct == doctest::Approx(via_channel).epsilon(1e-9));
  }
}

TEST_SUITE_END();
