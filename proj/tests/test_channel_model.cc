#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "fdhybf/channel_model.hpp"

using namespace fdhybf;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("ula response") {
  const ComplexVector b = ula_response(0.0, 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(b(i) - cd(1.0, 0.0)) < 1e-15);

  const ComplexVector e = ula_response(kPi / 2.0, 2);
  CHECK(std::abs(e(1) - cd(-1.0, 0.0)) < 1e-12);

  const ComplexVector s = ula_response(kPi / 6.0, 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(s(i) - std::polar(1.0, kPi * i / 2.0)) < 1e-12);
}

TEST_CASE("single broadside ray") {
  const ArrayGeometry a{2, 0.5};
  const ComplexMatrix h = cluster_channel_from_rays(a, a, {Ray{cd(1.0, 0.0), 0.0, 0.0}});
  CHECK(h.rows() == 2);
  CHECK(h.cols() == 2);
  for (Eigen::Index i = 0; i < h.size(); ++i) CHECK(std::abs(h(i) - cd(2.0, 0.0)) < 1e-12);
}

TEST_CASE("cluster channel rank and power") {
  ClusterParams p;
  p.clusters = 2;
  p.rays = 2;
  Rng rng(42);
  const ArrayGeometry tx{8, 0.5}, rx{8, 0.5};
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix h = cluster_channel(tx, rx, p, rng);
    Eigen::JacobiSVD<ComplexMatrix> svd(h);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
    CHECK(rank <= 4);
  }

  ClusterParams q;
  Rng rng2(9);
  const ArrayGeometry a4{4, 0.5};
  double acc = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) acc += cluster_channel(a4, a4, q, rng2).squaredNorm();
  // each entry is sqrt(16 / L) times a sum of L unit-power terms
  CHECK(acc / draws == doctest::Approx(256.0).epsilon(0.05));
}

TEST_CASE("self-interference geometry") {
  SiGeometry g;
  g.theta = kPi / 2.0;
  const double d = g.distance, lam = g.wavelength;
  CHECK(si_distance(1, 1, g) == doctest::Approx(d));
  CHECK(si_distance(1, 2, g) == doctest::Approx(std::sqrt(lam * lam / 4.0 + d * d)));
  CHECK(si_distance(2, 1, g) == doctest::Approx(d + lam / 2.0));

  g.theta = kPi / 3.0;
  const ComplexMatrix los = si_los(g, 6, 10);
  CHECK(los.squaredNorm() == doctest::Approx(60.0).epsilon(1e-10));

  ClusterParams p;
  g.kappa_db = 1000.0;
  Rng r1(3);
  CHECK((si_channel(g, p, 6, 10, r1) - los).norm() <= 1e-8 * los.norm());

  g.kappa_db = -1000.0;
  Rng r2(3), r3(3);
  const ComplexMatrix ref = si_channel(g, p, 6, 10, r2);
  g.kappa_db = -200.0;
  CHECK((si_channel(g, p, 6, 10, r3) - ref).norm() <= 1e-8 * ref.norm());
  // the reflected part carries no line-of-sight component
  CHECK(std::abs((ref.adjoint() * los).trace()) < 0.9 * ref.norm() * los.norm());
}

TEST_CASE("channel generation") {
  SystemConfig cfg = desk_profile();
  const ChannelSet a = generate_channels(cfg, channel_seed(1, 0));
  const ChannelSet b = generate_channels(cfg, channel_seed(1, 0));
  const ChannelSet c = generate_channels(cfg, channel_seed(1, 1));
  CHECK(a.h_si == b.h_si);
  for (std::size_t k = 0; k < a.h_ul.size(); ++k) CHECK(a.h_ul[k] == b.h_ul[k]);
  for (std::size_t j = 0; j < a.h_dl.size(); ++j) CHECK(a.h_dl[j] == b.h_dl[j]);
  CHECK((a.h_si - c.h_si).norm() > 0.0);
  CHECK((a.h_ul[0] - c.h_ul[0]).norm() > 0.0);

  const SystemConfig paper = paper_profile();
  const ChannelSet p = generate_channels(paper, 5);
  CHECK(p.h_si.rows() == 50);
  CHECK(p.h_si.cols() == 100);
  REQUIRE(p.h_ul.size() == 2);
  REQUIRE(p.h_dl.size() == 2);
  for (const auto& h : p.h_ul) CHECK((h.rows() == 50 && h.cols() == 5));
  for (const auto& h : p.h_dl) CHECK((h.rows() == 5 && h.cols() == 100));
  for (const auto& row : p.h_cross)
    for (const auto& h : row) CHECK((h.rows() == 5 && h.cols() == 5));
}

TEST_CASE("channel dump round trip") {
  const SystemConfig cfg = desk_profile();
  const ChannelSet a = generate_channels(cfg, 77);
  std::stringstream ss;
  dump_channels(a, ss);
  const ChannelSet b = load_channels(ss);
  CHECK(a.h_si == b.h_si);
  CHECK(a.h_cross[1][0] == b.h_cross[1][0]);
  CHECK(a.seed == b.seed);
}
