#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "qkd/link.hpp"

using namespace qkd;

namespace {

DetectorOperatingPoint room_temp_op() {
  DetectorOperatingPoint op;
  op.dark_count_prob = 5.9e-5;
  op.afterpulse_prob = 0.028;
  op.efficiency = 0.25;
  return op;
}

} // namespace

TEST_CASE("transmittance") {
  ChannelConfig c;
  c.length_km = 0.0;
  c.extra_loss_db = 0.0;
  CHECK(transmittance(c) == doctest::Approx(1.0).epsilon(1e-15));
  c.length_km = 50.0;
  c.extra_loss_db = 0.1;
  CHECK(transmittance(c) == doctest::Approx(0.09772).epsilon(1e-4));
  c.length_km = 100.0;
  CHECK(transmittance(c) == doctest::Approx(9.772e-3).epsilon(1e-4));
}

TEST_CASE("gain with no light and no noise is zero") {
  DetectorOperatingPoint op;
  op.dark_count_prob = 0.0;
  op.afterpulse_prob = 0.0;
  const GainResult g = gain_total(0.0, 0.5, op);
  CHECK(g.q_det == 0.0);
  CHECK(g.q_tot == 0.0);
}

TEST_CASE("gain against a brute-force photon-counting oracle") {
  // independent gate-by-gate draw: Poisson photons thinned by eta, dark count
  // on each of the two detectors
  const double mu = 0.5, eta = 0.1, pd = 1e-3;
  DetectorOperatingPoint op;
  op.dark_count_prob = pd;
  op.afterpulse_prob = 0.0;
  const GainResult g = gain_total(mu, eta, op);
  CHECK(g.q_det == doctest::Approx(0.050673).epsilon(2e-5));

  std::mt19937_64 rng(314159);
  std::poisson_distribution<int> photons(mu);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 10'000'000;
  std::size_t clicks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool click = u(rng) < pd || u(rng) < pd;
    const int np = photons(rng);
    for (int p = 0; p < np && !click; ++p) click = u(rng) < eta;
    clicks += click;
  }
  const double q_hat = static_cast<double>(clicks) / static_cast<double>(n);
  const double sigma = std::sqrt(g.q_det * (1.0 - g.q_det) / static_cast<double>(n));
  CHECK(std::abs(q_hat - g.q_det) < 4.0 * sigma);
}

TEST_CASE("gain at the 50 km room-temperature point") {
  ChannelConfig c;
  const double eta_sys = transmittance(c) * 0.25;
  CHECK(eta_sys == doctest::Approx(0.024431).epsilon(2e-5));
  const GainResult g = gain_total(0.42, eta_sys, room_temp_op());
  CHECK(g.q_det == doctest::Approx(0.010326).epsilon(1e-4));
  CHECK(g.q_tot == doctest::Approx(0.010615).epsilon(1e-4));
}

TEST_CASE("qber limits") {
  DetectorOperatingPoint op;
  op.dark_count_prob = 0.0;
  op.afterpulse_prob = 0.0;
  CHECK(qber(0.5, 0.1, op, 0.0, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  op.dark_count_prob = 1e-4;
  CHECK(qber(0.5, 0.0, op, 0.01, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  op.dark_count_prob = 0.0;
  CHECK_THROWS_AS(qber(0.0, 0.0, op, 0.0, 0.5), std::domain_error);
}

TEST_CASE("qber at the 50 km point with random-error afterpulses") {
  // with afterpulse errors at weight 1/2 the closed form gives ~2.88%
  ChannelConfig c;
  const double eta_sys = transmittance(c) * 0.25;
  const double e = qber(0.42, eta_sys, room_temp_op(), 0.01, 0.5);
  CHECK(e == doctest::Approx(0.0288).epsilon(2e-3));
}

TEST_CASE("afterpulse inflation is exactly multiplicative") {
  DetectorOperatingPoint op = room_temp_op();
  for (double pa : {0.0, 0.01, 0.05}) {
    op.afterpulse_prob = pa;
    const GainResult g = gain_total(0.42, 0.02, op);
    CHECK(g.q_tot == doctest::Approx(g.q_det * (1.0 + pa)).epsilon(1e-15));
  }
}

TEST_CASE("gain is monotone in mu, eta and dark counts") {
  DetectorOperatingPoint op = room_temp_op();
  double prev = -1.0;
  for (double mu = 0.0; mu <= 1.0; mu += 0.05) {
    const double q = gain_total(mu, 0.02, op).q_det;
    CHECK(q >= prev);
    prev = q;
  }
  prev = -1.0;
  for (double eta = 0.0; eta <= 0.3; eta += 0.02) {
    const double q = gain_total(0.42, eta, op).q_det;
    CHECK(q >= prev);
    prev = q;
  }
  prev = -1.0;
  for (double pd = 0.0; pd <= 0.01; pd += 5e-4) {
    op.dark_count_prob = pd;
    const double q = gain_total(0.42, 0.02, op).q_det;
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("qber stays in [0, 1/2] over the default parameter ranges") {
  DetectorOperatingPoint op;
  for (double pd : {1e-6, 5.9e-5, 1e-3})
    for (double pa : {0.0, 0.028, 0.0389})
      for (double ed : {0.0, 0.04, 0.11})
        for (double w : {0.2, 0.5})
          for (double eta : {1e-4, 0.0244, 0.24}) {
            op.dark_count_prob = pd;
            op.afterpulse_prob = pa;
            for (double mu : {0.0007, 0.042, 0.42}) {
              const double e = qber(mu, eta, op, ed, w);
              CHECK(e >= 0.0);
              CHECK(e <= 0.5);
            }
          }
}

TEST_CASE("effective Poissonian yield structure") {
  // the session gains must equal sum_n Poisson(n; mu) * Y_n^eff with the
  // affine effective yields Y_n^eff = (1 - s_bar)(1 - (1-Y0)(1-eta)^n) + s_bar,
  // truncated at 1 - 1e-12 Poisson mass
  DetectorOperatingPoint op = room_temp_op();
  ProtocolConfig p;
  const double eta = 0.024431;
  const SessionClickModel m = session_click_model(p, eta, op);
  for (int k = 0; k < 3; ++k) {
    const double mu = p.intensities[static_cast<std::size_t>(k)];
    double sum = 0.0, pois = std::exp(-mu), mass = 0.0;
    for (int n = 0; mass < 1.0 - 1e-12; ++n) {
      const double yn = 1.0 - (1.0 - m.y0) * std::pow(1.0 - eta, n);
      sum += pois * (yn + m.s_bar * (1.0 - yn));
      mass += pois;
      pois *= mu / (n + 1);
    }
    CHECK(sum == doctest::Approx(m.q_tot[static_cast<std::size_t>(k)]).epsilon(1e-6));
  }
}

TEST_CASE("session click model invariants") {
  DetectorOperatingPoint op = room_temp_op();
  ProtocolConfig p;
  const double eta = 0.024431;
  const SessionClickModel m = session_click_model(p, eta, op);
  // the background solves s_bar = P_a * (average click rate)
  double q_bar = 0.0;
  for (int k = 0; k < 3; ++k)
    q_bar += p.send_probs[static_cast<std::size_t>(k)] * m.q_tot[static_cast<std::size_t>(k)];
  CHECK(m.s_bar == doctest::Approx(op.afterpulse_prob * q_bar).epsilon(1e-12));
  // aggregate inflation approaches the integrated afterpulse ratio
  double q_det_bar = 0.0;
  for (int k = 0; k < 3; ++k)
    q_det_bar += p.send_probs[static_cast<std::size_t>(k)] * m.q_det[static_cast<std::size_t>(k)];
  CHECK(q_bar / q_det_bar ==
        doctest::Approx(1.0 + op.afterpulse_prob).epsilon(2.0 * op.afterpulse_prob));
  // with no afterpulsing the session gains reduce to the bare gains
  op.afterpulse_prob = 0.0;
  const SessionClickModel bare = session_click_model(p, eta, op);
  CHECK(bare.s_bar == 0.0);
  for (int k = 0; k < 3; ++k)
    CHECK(bare.q_tot[static_cast<std::size_t>(k)] ==
          doctest::Approx(bare.q_det[static_cast<std::size_t>(k)]).epsilon(1e-15));
}

TEST_CASE("expected session counts reproduce the paper-scale numbers") {
  ProtocolConfig p;
  ChannelConfig c;
  const DetectorOperatingPoint op = room_temp_op();
  const SessionStatistics stats = expected_session_counts(p, c, op);
  CHECK(stats.total_pulses == doctest::Approx(1.2e12).epsilon(1e-12));
  const double sent_vacuum = stats.cell(Intensity::vacuum, Basis::z).sent +
                             stats.cell(Intensity::vacuum, Basis::x).sent;
  // all vacuum pulses, including the basis-mismatched ones
  CHECK(sent_vacuum / (p.p_z * p.p_z + p.p_x() * p.p_x()) ==
        doctest::Approx(4.68e9).epsilon(1e-9));
  CHECK(stats.cell(Intensity::signal, Basis::z).detected ==
        doctest::Approx(1.107e10).epsilon(2e-3));
}

TEST_CASE("expected counts scale linearly in session and clock") {
  ProtocolConfig p;
  ChannelConfig c;
  const DetectorOperatingPoint op = room_temp_op();
  const SessionStatistics base = expected_session_counts(p, c, op);
  p.session_s *= 3.0;
  const SessionStatistics longer = expected_session_counts(p, c, op);
  p.session_s /= 3.0;
  p.clock_hz *= 2.0;
  const SessionStatistics faster = expected_session_counts(p, c, op);
  for (Intensity k : {Intensity::signal, Intensity::decoy, Intensity::vacuum})
    for (Basis b : {Basis::z, Basis::x}) {
      CHECK(longer.cell(k, b).detected ==
            doctest::Approx(3.0 * base.cell(k, b).detected).epsilon(1e-12));
      CHECK(faster.cell(k, b).detected ==
            doctest::Approx(2.0 * base.cell(k, b).detected).epsilon(1e-12));
    }
}

TEST_CASE("protocol validation rejects bad parameter sets") {
  ProtocolConfig p;
  p.send_probs = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolConfig{};
  p.intensities = {0.042, 0.42, 0.0007};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolConfig{};
  p.epsilon = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = ProtocolConfig{};
  p.ec_efficiency_f = 0.9;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("session statistics invariants") {
  SessionStatistics s;
  s.cell(Intensity::signal, Basis::z) = {100.0, 10.0, 2.0};
  s.validate();
  s.cell(Intensity::signal, Basis::z) = {100.0, 10.0, 11.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.cell(Intensity::signal, Basis::z) = {10.0, 100.0, 1.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
