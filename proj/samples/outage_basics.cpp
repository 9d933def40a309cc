// Evaluate best-port outage for one receiver and a full two-user NOMA pair.
// Shows how port count and aperture trade off at a fixed power budget.
#include <cstdio>

#include "fasfair/outage.hpp"

using namespace fasfair;

int main() {
  SystemParams params;  // defaults: 5 dBm, -80 dBm noise, 400 m / 600 m users
  params.validate();

  // A single receiver: outage of the best of N fluid-antenna ports against
  // the SNR threshold implied by a 1 bps/Hz target on the center user.
  double phi = (std::exp2(params.r1) - 1.0) * params.noise_mw() / params.p_mw();
  std::printf("single side, aperture 5 wavelengths, threshold phi=%.3e\n", phi);
  std::printf("%6s %14s\n", "ports", "outage");
  for (int n : {1, 2, 4, 8, 16}) {
    FasSide side = make_side(n, 5.0, params.d_c, params.theta);
    std::printf("%6d %14.6e\n", n, outage_probability(side, phi));
  }

  // Full downlink pair: center user decodes both messages, edge user its own.
  // The power split alpha moves outage between the two users.
  Scenario sc = make_scenario(params, 4, 5.0, 4, 5.0);
  std::printf("\ntwo-user pair, 4 ports each side\n");
  std::printf("%8s %12s %12s\n", "alpha", "p_center", "p_edge");
  for (double alpha : {0.10, 0.19, 0.30, 0.45}) {
    OutagePair p = noma_outage_pair(sc, alpha);
    std::printf("%8.2f %12.6f %12.6f\n", alpha, p.p_cu, p.p_eu);
  }
  return 0;
}
