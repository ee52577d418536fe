#ifndef FDHYBF_CHANNEL_MODEL_HPP
#define FDHYBF_CHANNEL_MODEL_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdhybf/config.hpp"
#include "fdhybf/matrix_kernels.hpp"

namespace fdhybf {

class GeometryError : public std::domain_error {
 public:
  explicit GeometryError(const std::string& what) : std::domain_error(what) {}
};

/// Seeded generator with platform-stable uniform and Gaussian draws
/// (std distributions are implementation-defined, mt19937_64 is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Circularly-symmetric CN(0, 1).
  cd complex_normal();
  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic 64-bit mixing of a seed with stream identifiers.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

struct ArrayGeometry {
  int num_elements = 1;
  double spacing = 0.5;  // wavelengths
};

struct Ray {
  cd gain;
  double aoa;  // rad, receive side
  double aod;  // rad, transmit side
};

ComplexVector ula_response(double angle, int n);

/// sqrt(Nr Nt / #rays) * sum_i gain_i a_r(aoa_i) a_t(aod_i)^T with unit-modulus
/// responses, so E||H||_F^2 = (Nr Nt)^2.
ComplexMatrix cluster_channel_from_rays(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                        const std::vector<Ray>& rays);
ComplexMatrix cluster_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                              const ClusterParams& params, Rng& rng);

/// Distance between transmit element n and receive element m (1-based).
double si_distance(int m, int n, const SiGeometry& geo);
/// Near-field line-of-sight SI matrix (n0 x m0), normalized to ||H||_F^2 = m0 n0.
ComplexMatrix si_los(const SiGeometry& geo, int n0, int m0);
ComplexMatrix si_channel(const SiGeometry& geo, const ClusterParams& params, int n0, int m0,
                         Rng& rng);

struct ChannelSet {
  std::vector<ComplexMatrix> h_ul;                  // H_k: N0 x Mk
  std::vector<ComplexMatrix> h_dl;                  // H_j: Nj x M0
  ComplexMatrix h_si;                               // H_0: N0 x M0
  std::vector<std::vector<ComplexMatrix>> h_cross;  // H_{j,k}: Nj x Mk, indexed [j][k]
  double sigma0_sq = 0.0;
  double sigmaj_sq = 0.0;
  std::uint64_t seed = 0;  // channel seed actually used
};

/// Channel seed for realization r under a master seed.
std::uint64_t channel_seed(std::uint64_t master, int realization);

/// One realization. Every matrix draws from its own stream keyed by
/// (seed, link, indices), so adding users leaves other links untouched.
ChannelSet generate_channels(const SystemConfig& cfg, std::uint64_t seed);

/// Text dump: "fdhybf-channels 1", "seed S", "noise s0 sj", "users K J", then per matrix a line
/// "<name> <rows> <cols>" followed by rows*cols lines "re im", row-major.
void dump_channels(const ChannelSet& ch, std::ostream& os);
ChannelSet load_channels(std::istream& is);

}  // namespace fdhybf

#endif  // FDHYBF_CHANNEL_MODEL_HPP
