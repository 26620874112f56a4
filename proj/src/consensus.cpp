#include "spx/consensus.hpp"

#include <memory>

namespace spx {

void gossip_round(std::span<const ParamVector> base, std::span<const ParamVector> msgs,
                  std::span<const double> u, const MixingMatrix& w,
                  std::vector<ParamVector>& x_out, std::vector<double>& u_out) {
  const std::size_t n = w.node_count();
  check_arg(base.size() == n && msgs.size() == n && u.size() == n,
            "gossip_round: state count does not match matrix");
  const std::size_t dim = base[0].size();
  for (std::size_t i = 0; i < n; ++i)
    check_arg(base[i].size() == dim && msgs[i].size() == dim,
              "gossip_round: dimension mismatch");

  // x_out/u_out must not alias base/msgs/u.
  x_out.assign(n, ParamVector());
  u_out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ParamVector acc(base[i].begin(), base[i].end());
    double uacc = u[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double coeff = w(i, j) - (i == j ? 1.0 : 0.0);
      if (coeff == 0.0) continue;
      const ParamVector& m = msgs[j];
      for (std::size_t k = 0; k < dim; ++k) acc[k] += coeff * m[k];
      uacc += coeff * u[j];
    }
    x_out[i] = std::move(acc);
    u_out[i] = uacc;
  }
}

ParamVector debias(const PushSumState& s) {
  if (!(s.u > kBiasUnderflow))
    throw NumericalError("debias: bias weight underflow (u <= 1e-12)");
  ParamVector z(s.x.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = s.x[k] / s.u;
  return z;
}

std::vector<ParamVector> gossip_average(const std::vector<ParamVector>& initial,
                                        const GraphSchedule& schedule, double eta,
                                        std::size_t rounds) {
  check_arg(!initial.empty(), "gossip_average: no nodes");
  check_arg(initial.size() == schedule.node_count(),
            "gossip_average: node count does not match schedule");

  std::vector<ParamVector> x = initial;
  std::vector<double> u(x.size(), 1.0);
  std::vector<ParamVector> xn;
  std::vector<double> un;
  std::vector<std::unique_ptr<MixingMatrix>> cache(schedule.size());
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::size_t slot = schedule.index_at(r);
    if (!cache[slot])
      cache[slot] = std::make_unique<MixingMatrix>(
          effective_mixing_matrix(schedule.topology(slot), eta));
    gossip_round(x, x, u, *cache[slot], xn, un);
    x.swap(xn);
    u.swap(un);
  }

  std::vector<ParamVector> z;
  z.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    z.push_back(debias({std::move(x[i]), u[i], {}}));
  return z;
}

}  // namespace spx
