#ifndef FDHYBF_CONFIG_HPP
#define FDHYBF_CONFIG_HPP

#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdhybf {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimensionally inconsistent or out-of-range configuration.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(const std::string& what) : ConfigError(what) {}
};

double db_to_linear(double db);
double dbm_to_watts(double dbm);
/// Linear LDR coefficient; -inf dB (or anything at or below -400 dB) maps to 0.
double ldr_from_db(double db);

struct ClusterParams {
  int clusters = 3;
  int rays = 3;
  double aoa_min = -std::numbers::pi / 6.0;
  double aoa_max = std::numbers::pi / 6.0;
  double aod_min = -std::numbers::pi / 6.0;
  double aod_max = std::numbers::pi / 6.0;
};

struct SiGeometry {
  double distance = 0.20;                  // m, transmit/receive array separation
  double theta = std::numbers::pi / 2.0;   // rad, angle between the arrays
  double kappa_db = 50.0;                  // Rician factor
  double wavelength = 299792458.0 / 28e9;  // m
};

/// Every scalar of the system: dimensions, streams, hardware and budgets.
/// Defaults reproduce the full-scale simulation table (32 RF chains,
/// SNR -10 dB, base station LDR at -60 dB).
struct SystemConfig {
  int M0 = 100;  // BS transmit antennas
  int N0 = 50;   // BS receive antennas
  int Mt = 32;   // BS transmit RF chains
  int Nr = 32;   // BS receive RF chains
  int K = 2;     // uplink users
  int J = 2;     // downlink users
  std::vector<int> Mk{5, 5};  // uplink user antennas
  std::vector<int> Nj{5, 5};  // downlink user antennas
  std::vector<int> uk{2, 2};  // uplink streams
  std::vector<int> vj{2, 2};  // downlink streams

  // LDR coefficients, linear.
  double k0 = 1e-6;
  double beta0 = 1e-6;
  std::vector<double> kk{1e-6, 1e-6};
  std::vector<double> betaj{1e-6, 1e-6};

  double alpha0 = 0.0;  // W, filled by finalize() from alpha0_dbm when <= 0
  double alphak = 0.0;  // W
  double alpha0_dbm = 23.0;
  double alphak_dbm = 23.0;
  std::vector<double> lambda0;               // per-antenna caps, W (default alpha0 / M0)
  std::vector<std::vector<double>> lambdak;  // per user (default alphak / Mk)

  std::vector<double> wk{1.0, 1.0};
  std::vector<double> wj{1.0, 1.0};
  int n_ps = 4096;  // phase-shifter levels
  double snr_db = -10.0;

  SiGeometry si;
  ClusterParams clusters;
  double link_gain = 1.0;           // linear gain applied to every non-SI link
  double hd_uplink_fraction = 0.5;  // TDD share of the half-duplex baseline

  double snr_linear() const { return db_to_linear(snr_db); }
  /// Thermal noise variance at the base station, alpha0 / SNR.
  double sigma0_sq() const { return alpha0 / snr_linear(); }
  /// Thermal noise variance at the downlink users, alphak / SNR.
  double sigmaj_sq() const { return alphak / snr_linear(); }

  /// Resize per-user vectors to K/J (repeating the first entry), fill power
  /// budgets and caps from dBm values, then validate.
  void finalize();
  /// Throws ValidationError on any invariant breach.
  void validate() const;

  void set_rf_chains(int n) { Mt = n; Nr = n; }
  void set_bs_ldr_db(double db) { k0 = ldr_from_db(db); beta0 = k0; }
  void set_user_ldr_db(double db);
  void set_users(int k, int j, int user_antennas, int streams);
  void make_ideal();
};

SystemConfig paper_profile();
SystemConfig desk_profile();

}  // namespace fdhybf

#endif  // FDHYBF_CONFIG_HPP
