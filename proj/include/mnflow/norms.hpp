#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mnflow/field.hpp"
#include "mnflow/params.hpp"

namespace mnflow {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// L_q norms over the domain (box: uniform h^3 weights; shell: trapezoid
// with 4 pi r^2 dr).  q = kInf gives the sup norm; q >= 1 otherwise.
// Vector and matrix fields reduce pointwise to the Euclidean/Frobenius
// magnitude before the L_q integral.
double lq_norm(const Scalar& f, const DomainSpec& d, double q);
double lq_norm(const Vec& u, const DomainSpec& d, double q);
double lq_norm(const Mat& m, const DomainSpec& d, double q);

// Pair norm ||(theta, v)||_{L_q} = ||theta||_q + ||v||_q.
double lq_norm_pair(const FieldState& s, const DomainSpec& d, double q);

// ||f||_{H^m_q}: sum of L_q norms of pointwise derivative magnitudes up to
// order m (box derivatives spectral; shell supports order <= 1 for theta
// and the radial stencils otherwise).
double sobolev_norm(const Scalar& f, const DomainSpec& d, double q, int order);
double sobolev_norm(const Vec& u, const DomainSpec& d, double q, int order);

// ||(theta, v)||_{H^{lt,lv}_q} = ||theta||_{H^lt_q} + ||v||_{H^lv_q}.
double pair_sobolev(const FieldState& s, const DomainSpec& d, double q,
                    int theta_order, int vel_order);

// ( integral (  <t>^b x(t) )^p dt )^{1/p} by trapezoid on the sample times;
// p = kInf takes the sup of the weighted samples.  <t> = sqrt(1+t^2).
double weighted_time_norm(const std::vector<double>& times,
                          const std::vector<double>& values, double p,
                          double b);

struct EnergyComponent {
  std::string label;
  double value = 0.0;
};

// Weighted space-time energy of a trajectory.  total is the sum of the
// component values; small <=> total <= threshold.
struct EnergyReport {
  std::vector<EnergyComponent> components;
  double total = 0.0;
  double threshold = 0.0;
  bool small = false;
};

// Full solution energy over [0,T]: the sup/L_p-in-time component family
// with weight <t>^b; requires dt_states.
EnergyReport energy_ET(const TrajectoryRecord& traj, const DomainSpec& d,
                       const ModelParams& params, double threshold);

// Initial-data size: H^1_q of theta0 for q in {2, 2+sigma, 6}; for v0 an
// interpolation surrogate ||v||_q^{1/p} ||v||_{H^2_q}^{1-1/p} standing in
// for the sharp trace-space seminorm (labeled as a surrogate in outputs);
// plus the pair H^{1,0}_r norm.
struct InitialDataNorm {
  std::vector<EnergyComponent> components;
  double total = 0.0;
};
InitialDataNorm initial_norm(const FieldState& s0, const DomainSpec& d,
                             const ModelParams& params);

// Iterate-strength sample [[ (theta,v)(t) ]]: pair H^{1,0}_r plus, for
// q in {2, 2+sigma, 6}, pair H^{1,2}_q of the state and pair H^{1,0}_q of
// its time derivative.
double iterate_strength(const FieldState& s, const FieldState& dt_s,
                        const DomainSpec& d, const ModelParams& params);

}  // namespace mnflow
