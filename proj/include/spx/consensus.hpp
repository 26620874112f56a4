#ifndef SPX_CONSENSUS_HPP
#define SPX_CONSENSUS_HPP

#include <span>
#include <vector>

#include "spx/common.hpp"
#include "spx/topology.hpp"

namespace spx {

/// Per-node push-sum state: biased estimate x, positive bias weight u, and
/// the de-biased estimate z = x/u.
struct PushSumState {
  ParamVector x;
  double u = 1.0;
  ParamVector z;
};

/// Bias weights below this signal a broken schedule (e.g. not strongly
/// connected) and abort rather than divide.
constexpr double kBiasUnderflow = 1e-12;

/// One synchronous gossip round.
///
/// base[i] is what node i keeps locally (x-hat), msgs[j] is what node j
/// transmitted this round; they differ under compression. Per node i:
///   x_out[i] = base[i] + sum_j (W(i,j) - I(i,j)) * msgs[j]
///   u_out[i] = u[i]    + sum_j (W(i,j) - I(i,j)) * u[j]
/// The in-neighbour reduction runs in ascending node order, so results are
/// independent of any caller-side parallelism. Column stochasticity makes
/// sum_i x and sum_i u invariant.
void gossip_round(std::span<const ParamVector> base, std::span<const ParamVector> msgs,
                  std::span<const double> u, const MixingMatrix& w,
                  std::vector<ParamVector>& x_out, std::vector<double>& u_out);

/// z = x/u. Throws NumericalError when u underflows.
ParamVector debias(const PushSumState& s);

/// Plain average consensus: `rounds` uncompressed gossip rounds (u starts at
/// 1 everywhere), schedule advanced one epoch per round, then de-bias.
/// Converges to the arithmetic mean of the initial vectors on any strongly
/// connected schedule, asymmetric mixing included.
std::vector<ParamVector> gossip_average(const std::vector<ParamVector>& initial,
                                        const GraphSchedule& schedule, double eta,
                                        std::size_t rounds);

}  // namespace spx

#endif
