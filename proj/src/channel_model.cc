#include "fdhybf/channel_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fdhybf {

namespace {

enum Link : std::uint64_t { kUplink = 1, kDownlink = 2, kSelf = 3, kCross = 4 };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_matrix(std::ostream& os, const std::string& tag, const ComplexMatrix& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      os << fmt(m(r, c).real()) << ' ' << fmt(m(r, c).imag()) << '\n';
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw InputError("load_channels: bad number '" + s + "'");
  return v;
}

ComplexMatrix read_matrix(std::istream& is, const std::string& expect_tag) {
  std::string tag;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> tag >> rows >> cols) || tag != expect_tag || rows < 1 || cols < 1)
    throw InputError("load_channels: expected matrix header " + expect_tag);
  ComplexMatrix m(rows, cols);
  std::string re, im;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(is >> re >> im)) throw InputError("load_channels: truncated matrix " + expect_tag);
      m(r, c) = cd(parse_double(re), parse_double(im));
    }
  return m;
}

}  // namespace

double Rng::uniform() {
  // 53 high bits -> [0, 1).
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

cd Rng::complex_normal() {
  const double s = std::sqrt(0.5);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ a);
  h = splitmix(h ^ (b + 0x632be59bd9b4e019ULL));
  h = splitmix(h ^ (c + 0x85157af5a3ed8c3dULL));
  return h;
}

ComplexVector ula_response(double angle, int n) {
  if (n < 1) throw InputError("ula_response: n must be >= 1");
  ComplexVector a(n);
  const double s = std::sin(angle);
  for (int m = 0; m < n; ++m) a(m) = std::polar(1.0, std::numbers::pi * m * s);
  return a;
}

ComplexMatrix cluster_channel_from_rays(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                        const std::vector<Ray>& rays) {
  if (tx.num_elements < 1 || rx.num_elements < 1)
    throw InputError("cluster_channel: arrays need at least one element");
  if (rays.empty()) throw InputError("cluster_channel: no rays");
  ComplexMatrix h = ComplexMatrix::Zero(rx.num_elements, tx.num_elements);
  for (const Ray& r : rays)
    h += r.gain * ula_response(r.aoa, rx.num_elements) *
         ula_response(r.aod, tx.num_elements).transpose();
  const double scale = std::sqrt(static_cast<double>(rx.num_elements) * tx.num_elements /
                                 static_cast<double>(rays.size()));
  return h * scale;
}

ComplexMatrix cluster_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                              const ClusterParams& params, Rng& rng) {
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(params.clusters * params.rays));
  for (int c = 0; c < params.clusters; ++c)
    for (int p = 0; p < params.rays; ++p) {
      Ray r;
      r.gain = rng.complex_normal();
      r.aoa = rng.uniform(params.aoa_min, params.aoa_max);
      r.aod = rng.uniform(params.aod_min, params.aod_max);
      rays.push_back(r);
    }
  return cluster_channel_from_rays(tx, rx, rays);
}

double si_distance(int m, int n, const SiGeometry& geo) {
  if (m < 1 || n < 1) throw InputError("si_distance: indices are 1-based");
  const double half = geo.wavelength / 2.0;
  const double a = geo.distance / std::tan(geo.theta) + (n - 1) * half;
  const double b = geo.distance / std::sin(geo.theta) + (m - 1) * half;
  const double z = 2.0 * a * b * std::cos(geo.theta);
  const double r2 = a * a + b * b - z;
  if (!(r2 >= 0.0)) throw GeometryError("si_distance: negative radicand");
  return std::sqrt(r2);
}

ComplexMatrix si_los(const SiGeometry& geo, int n0, int m0) {
  if (n0 < 1 || m0 < 1) throw InputError("si_los: empty array");
  ComplexMatrix h(n0, m0);
  double inv_r2 = 0.0;
  for (int m = 1; m <= n0; ++m)
    for (int n = 1; n <= m0; ++n) {
      const double r = si_distance(m, n, geo);
      if (!(r > 0.0)) throw GeometryError("si_los: coincident elements");
      inv_r2 += 1.0 / (r * r);
      h(m - 1, n - 1) = std::polar(1.0 / r, -2.0 * std::numbers::pi * r / geo.wavelength);
    }
  const double rho = std::sqrt(static_cast<double>(n0) * m0 / inv_r2);
  return h * rho;
}

ComplexMatrix si_channel(const SiGeometry& geo, const ClusterParams& params, int n0, int m0,
                         Rng& rng) {
  const double kdb = std::clamp(geo.kappa_db, -200.0, 200.0);
  const double kappa = db_to_linear(kdb);
  const ComplexMatrix los = si_los(geo, n0, m0);
  const ComplexMatrix ref = cluster_channel({m0, 0.5}, {n0, 0.5}, params, rng);
  return std::sqrt(kappa / (kappa + 1.0)) * los + std::sqrt(1.0 / (kappa + 1.0)) * ref;
}

std::uint64_t channel_seed(std::uint64_t master, int realization) {
  return mix_seed(master, 0x5eedULL, static_cast<std::uint64_t>(realization));
}

ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ChannelSet ch;
  ch.seed = seed;
  ch.sigma0_sq = cfg.sigma0_sq();
  ch.sigmaj_sq = cfg.sigmaj_sq();
  const double g = std::sqrt(cfg.link_gain);
  const ArrayGeometry bs_tx{cfg.M0, 0.5};
  const ArrayGeometry bs_rx{cfg.N0, 0.5};
  for (int k = 0; k < cfg.K; ++k) {
    Rng rng(mix_seed(seed, kUplink, static_cast<std::uint64_t>(k)));
    ch.h_ul.push_back(g * cluster_channel({cfg.Mk[static_cast<std::size_t>(k)], 0.5}, bs_rx,
                                          cfg.clusters, rng));
  }
  for (int j = 0; j < cfg.J; ++j) {
    Rng rng(mix_seed(seed, kDownlink, static_cast<std::uint64_t>(j)));
    ch.h_dl.push_back(g * cluster_channel(bs_tx, {cfg.Nj[static_cast<std::size_t>(j)], 0.5},
                                          cfg.clusters, rng));
  }
  {
    Rng rng(mix_seed(seed, kSelf));
    ch.h_si = si_channel(cfg.si, cfg.clusters, cfg.N0, cfg.M0, rng);
  }
  ch.h_cross.resize(static_cast<std::size_t>(cfg.J));
  for (int j = 0; j < cfg.J; ++j)
    for (int k = 0; k < cfg.K; ++k) {
      Rng rng(mix_seed(seed, kCross, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)));
      ch.h_cross[static_cast<std::size_t>(j)].push_back(
          g * cluster_channel({cfg.Mk[static_cast<std::size_t>(k)], 0.5},
                              {cfg.Nj[static_cast<std::size_t>(j)], 0.5}, cfg.clusters, rng));
    }
  return ch;
}

void dump_channels(const ChannelSet& ch, std::ostream& os) {
  os << "fdhybf-channels 1\n";
  os << "seed " << ch.seed << '\n';
  os << "noise " << fmt(ch.sigma0_sq) << ' ' << fmt(ch.sigmaj_sq) << '\n';
  os << "users " << ch.h_ul.size() << ' ' << ch.h_dl.size() << '\n';
  for (const auto& h : ch.h_ul) write_matrix(os, "H_UL", h);
  for (const auto& h : ch.h_dl) write_matrix(os, "H_DL", h);
  write_matrix(os, "H_SI", ch.h_si);
  for (const auto& row : ch.h_cross)
    for (const auto& h : row) write_matrix(os, "H_CROSS", h);
}

ChannelSet load_channels(std::istream& is) {
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "fdhybf-channels" || version != 1)
    throw InputError("load_channels: bad header");
  ChannelSet ch;
  std::string s0, sj;
  std::size_t k = 0, j = 0;
  if (!(is >> word >> ch.seed) || word != "seed") throw InputError("load_channels: missing seed");
  if (!(is >> word >> s0 >> sj) || word != "noise") throw InputError("load_channels: missing noise");
  ch.sigma0_sq = parse_double(s0);
  ch.sigmaj_sq = parse_double(sj);
  if (!(is >> word >> k >> j) || word != "users") throw InputError("load_channels: missing users");
  for (std::size_t i = 0; i < k; ++i) ch.h_ul.push_back(read_matrix(is, "H_UL"));
  for (std::size_t i = 0; i < j; ++i) ch.h_dl.push_back(read_matrix(is, "H_DL"));
  ch.h_si = read_matrix(is, "H_SI");
  ch.h_cross.resize(j);
  for (std::size_t a = 0; a < j; ++a)
    for (std::size_t b = 0; b < k; ++b) ch.h_cross[a].push_back(read_matrix(is, "H_CROSS"));
  return ch;
}

}  // namespace fdhybf
