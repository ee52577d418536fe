#include "fdhybf/config.hpp"

#include <cmath>
#include <limits>
#include <algorithm>

namespace fdhybf {

namespace {

template <typename T>
void fit(std::vector<T>& v, int n, T fallback) {
  const T first = v.empty() ? fallback : v.front();
  v.resize(static_cast<std::size_t>(n), first);
}

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double ldr_from_db(double db) {
  if (std::isnan(db)) throw ValidationError("LDR level is NaN");
  if (db <= -400.0) return 0.0;
  return db_to_linear(db);
}

void SystemConfig::set_user_ldr_db(double db) {
  const double v = ldr_from_db(db);
  kk.assign(kk.size(), v);
  betaj.assign(betaj.size(), v);
}

void SystemConfig::set_users(int k, int j, int user_antennas, int streams) {
  K = k;
  J = j;
  Mk.assign(static_cast<std::size_t>(k), user_antennas);
  Nj.assign(static_cast<std::size_t>(j), user_antennas);
  uk.assign(static_cast<std::size_t>(k), streams);
  vj.assign(static_cast<std::size_t>(j), streams);
}

void SystemConfig::make_ideal() {
  k0 = 0.0;
  beta0 = 0.0;
  kk.assign(kk.size(), 0.0);
  betaj.assign(betaj.size(), 0.0);
}

void SystemConfig::finalize() {
  if (K < 0 || J < 0) fail("K and J must be >= 0");
  fit(Mk, K, 5);
  fit(uk, K, 2);
  fit(kk, K, 1e-6);
  fit(wk, K, 1.0);
  fit(Nj, J, 5);
  fit(vj, J, 2);
  fit(betaj, J, 1e-6);
  fit(wj, J, 1.0);
  alpha0 = dbm_to_watts(alpha0_dbm);
  alphak = dbm_to_watts(alphak_dbm);
  if (M0 >= 1 && static_cast<int>(lambda0.size()) != M0)
    lambda0.assign(static_cast<std::size_t>(M0), alpha0 / M0);
  lambdak.resize(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    auto& caps = lambdak[static_cast<std::size_t>(k)];
    const int m = Mk[static_cast<std::size_t>(k)];
    if (m >= 1 && static_cast<int>(caps.size()) != m)
      caps.assign(static_cast<std::size_t>(m), alphak / m);
  }
  validate();
}

void SystemConfig::validate() const {
  if (M0 < 1 || N0 < 1) fail("M0 and N0 must be >= 1");
  if (Mt < 1 || Nr < 1) fail("Mt and Nr must be >= 1");
  if (Mt > M0) fail("Mt exceeds M0");
  if (Nr > N0) fail("Nr exceeds N0");
  if (static_cast<int>(Mk.size()) != K || static_cast<int>(uk.size()) != K ||
      static_cast<int>(kk.size()) != K || static_cast<int>(wk.size()) != K ||
      static_cast<int>(lambdak.size()) != K)
    fail("uplink per-user lists must have K entries");
  if (static_cast<int>(Nj.size()) != J || static_cast<int>(vj.size()) != J ||
      static_cast<int>(betaj.size()) != J || static_cast<int>(wj.size()) != J)
    fail("downlink per-user lists must have J entries");
  int ul_streams = 0;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (Mk[i] < 1) fail("Mk must be >= 1");
    if (uk[i] < 1 || uk[i] > std::min(Mk[i], Mt))
      fail("uk[" + std::to_string(k) + "] must lie in [1, min(Mk, Mt)]");
    if (static_cast<int>(lambdak[i].size()) != Mk[i]) fail("lambdak size must equal Mk");
    for (double c : lambdak[i])
      if (!(c > 0.0)) fail("per-antenna caps must be > 0");
    if (!(kk[i] >= 0.0 && kk[i] <= 1.0)) fail("kk must lie in [0, 1]");
    if (!(wk[i] >= 0.0)) fail("weights must be >= 0");
    ul_streams += uk[i];
  }
  int dl_streams = 0;
  for (int j = 0; j < J; ++j) {
    const auto i = static_cast<std::size_t>(j);
    if (Nj[i] < 1) fail("Nj must be >= 1");
    if (vj[i] < 1 || vj[i] > std::min(Nj[i], Mt))
      fail("vj[" + std::to_string(j) + "] must lie in [1, min(Nj, Mt)]");
    if (!(betaj[i] >= 0.0 && betaj[i] <= 1.0)) fail("betaj must lie in [0, 1]");
    if (!(wj[i] >= 0.0)) fail("weights must be >= 0");
    dl_streams += vj[i];
  }
  if (ul_streams > Nr) fail("total uplink streams exceed Nr");
  if (dl_streams > Mt) fail("total downlink streams exceed Mt");
  if (!(k0 >= 0.0 && k0 <= 1.0) || !(beta0 >= 0.0 && beta0 <= 1.0))
    fail("k0 and beta0 must lie in [0, 1]");
  if (!(alpha0 > 0.0) || !(alphak > 0.0)) fail("power budgets must be > 0");
  if (static_cast<int>(lambda0.size()) != M0) fail("lambda0 size must equal M0");
  for (double c : lambda0)
    if (!(c > 0.0)) fail("per-antenna caps must be > 0");
  if (n_ps < 2 || (n_ps & (n_ps - 1)) != 0) fail("n_ps must be a power of two >= 2");
  if (!std::isfinite(snr_db)) fail("snr_db must be finite");
  if (!(si.distance > 0.0)) fail("SI distance must be > 0");
  if (!(si.theta > 0.0 && si.theta <= std::numbers::pi / 2.0 + 1e-12))
    fail("SI angle must lie in (0, pi/2]");
  if (!(si.wavelength > 0.0)) fail("wavelength must be > 0");
  if (clusters.clusters < 1 || clusters.rays < 1) fail("cluster and ray counts must be >= 1");
  const double half = std::numbers::pi / 2.0;
  if (!(clusters.aoa_min > -half && clusters.aoa_max < half && clusters.aoa_min <= clusters.aoa_max &&
        clusters.aod_min > -half && clusters.aod_max < half && clusters.aod_min <= clusters.aod_max))
    fail("angle ranges must lie within (-pi/2, pi/2)");
  if (!(link_gain > 0.0)) fail("link_gain must be > 0");
  if (!(hd_uplink_fraction >= 0.0 && hd_uplink_fraction <= 1.0))
    fail("hd_uplink_fraction must lie in [0, 1]");
}

SystemConfig paper_profile() {
  SystemConfig c;
  c.finalize();
  return c;
}

SystemConfig desk_profile() {
  SystemConfig c;
  c.M0 = 16;
  c.N0 = 8;
  c.set_rf_chains(4);
  c.set_users(2, 2, 2, 1);
  c.lambda0.clear();
  c.lambdak.clear();
  c.finalize();
  return c;
}

}  // namespace fdhybf
