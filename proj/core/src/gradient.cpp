#include "qrnn/gradient.hpp"

#include <cmath>
#include <numeric>

namespace qrnn {

namespace {

void rotate_raw(std::span<double> amps, std::uint32_t target, double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Word bit = Word{1} << target;
    for (Word i = 0; i < amps.size(); ++i) {
        if (i & bit)
            continue;
        const double a0 = amps[i];
        const double a1 = amps[i | bit];
        amps[i] = c * a0 - s * a1;
        amps[i | bit] = s * a0 + c * a1;
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

double pow2k(double value, std::uint32_t order) {
    double v = value;
    for (std::uint32_t i = 0; i < order; ++i)
        v *= v;
    return v;
}

double powi(double value, std::uint32_t exponent) {
    double result = 1.0;
    double base = value;
    while (exponent) {
        if (exponent & 1)
            result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

} // namespace

Tape::Tape(StateVector initial, std::span<const double> params)
    : state_(initial), initial_(std::move(initial)), params_(params),
      num_params_(params.size()) {}

double Tape::resolve(std::size_t slot) const {
    if (slot >= num_params_)
        throw RecordingError("parameter slot " + std::to_string(slot) +
                             " is not registered (registry size " +
                             std::to_string(num_params_) + ")");
    return params_[slot];
}

void Tape::rotation(std::uint32_t target, std::size_t slot) {
    const double theta = resolve(slot);
    state_.apply_rotation(target, theta);
    ops_.push_back(RotationOp{target, slot, theta});
}

void Tape::rotation_const(std::uint32_t target, double angle) {
    state_.apply_rotation(target, angle);
    ops_.push_back(RotationOp{target, kNoSlot, angle});
}

void Tape::bitflip(std::uint32_t target) {
    state_.apply_bitflip(target);
    ops_.push_back(BitflipOp{target});
}

double Tape::neuron(const NeuronShape& shape, std::size_t theta_base) {
    const std::size_t count = param_count(shape.controls.size(), shape.degree);
    if (count > 0)
        resolve(theta_base + count - 1); // validates the whole slot range
    std::vector<double> theta(params_.begin() + theta_base,
                              params_.begin() + theta_base + count);
    auto masks = monomial_masks(shape.controls.size(), shape.degree);
    NeuronOp op{shape,        std::move(masks), theta_base, std::move(theta),
                state_,       0.0,              num_probabilities_++};
    const auto table = neuron_branch_table(op.theta, op.masks,
                                           shape.controls.size(), shape.order);
    state_.apply_rotation_table(shape.target, shape.controls, table);
    op.probability = state_.renormalize();
    const double p = op.probability;
    ops_.push_back(std::move(op));
    return p;
}

double Tape::project(const LaneSet& lanes, Word outcome) {
    ProjectOp op{lanes, outcome, state_, 0.0, num_probabilities_++};
    op.probability = state_.project(lanes, outcome);
    const double p = op.probability;
    ops_.push_back(std::move(op));
    return p;
}

std::vector<double> Tape::marginal(const LaneSet& lanes) {
    ops_.push_back(MarginalOp{lanes, num_marginals_++});
    return state_.marginal(lanes);
}

void Tape::reset_lanes(const LaneSet& lanes, Word known) {
    state_.reset_lanes(lanes, known);
    ops_.push_back(ResetOp{lanes, known});
}

StateVector Tape::replay() const {
    StateVector state = initial_;
    for (const Op& op : ops_) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, RotationOp>) {
                    state.apply_rotation(o.target, o.theta);
                } else if constexpr (std::is_same_v<T, BitflipOp>) {
                    state.apply_bitflip(o.target);
                } else if constexpr (std::is_same_v<T, NeuronOp>) {
                    const auto table = neuron_branch_table(
                        o.theta, o.masks, o.shape.controls.size(),
                        o.shape.order);
                    state.apply_rotation_table(o.shape.target,
                                               o.shape.controls, table);
                    state.renormalize();
                } else if constexpr (std::is_same_v<T, ProjectOp>) {
                    state.project(o.lanes, o.outcome);
                } else if constexpr (std::is_same_v<T, MarginalOp>) {
                    // No state change.
                } else if constexpr (std::is_same_v<T, ResetOp>) {
                    state.reset_lanes(o.lanes, o.known);
                }
            },
            op);
    }
    return state;
}

GradientVector Tape::backward(const BackwardSeeds& seeds) const {
    const std::size_t dim = state_.dimension();
    if (seeds.marginals.size() > num_marginals_ ||
        seeds.probabilities.size() > num_probabilities_)
        throw Error("backward seeds refer to more outputs than recorded");
    if (!seeds.final_state.empty() && seeds.final_state.size() != dim)
        throw Error("final-state seed has wrong dimension");

    GradientVector grad(num_params_, 0.0);
    std::vector<double> g(dim, 0.0);
    if (!seeds.final_state.empty())
        g = seeds.final_state;
    StateVector cur = state_;

    std::vector<double> scratch(dim);
    const auto prob_seed = [&](std::size_t index) {
        return index < seeds.probabilities.size() ? seeds.probabilities[index]
                                                  : 0.0;
    };

    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
        std::visit(
            [&](const auto& o) {
                using T = std::decay_t<decltype(o)>;
                if constexpr (std::is_same_v<T, RotationOp>) {
                    // Reconstruct the input state, then
                    // d/dtheta = <g, R(theta + pi/2) input>.
                    cur.apply_rotation(o.target, -o.theta);
                    if (o.slot != kNoSlot) {
                        const double c = std::cos(o.theta);
                        const double s = std::sin(o.theta);
                        const Word bit = Word{1} << o.target;
                        const auto a = cur.amplitudes();
                        double acc = 0.0;
                        for (Word i = 0; i < a.size(); ++i) {
                            if (i & bit)
                                continue;
                            const double a0 = a[i];
                            const double a1 = a[i | bit];
                            acc += g[i] * (-s * a0 - c * a1) +
                                   g[i | bit] * (c * a0 - s * a1);
                        }
                        grad[o.slot] += acc;
                    }
                    rotate_raw(g, o.target, -o.theta);
                } else if constexpr (std::is_same_v<T, BitflipOp>) {
                    cur.apply_bitflip(o.target);
                    const Word bit = Word{1} << o.target;
                    for (Word i = 0; i < g.size(); ++i)
                        if (!(i & bit))
                            std::swap(g[i], g[i | bit]);
                } else if constexpr (std::is_same_v<T, NeuronOp>) {
                    const double p = o.probability;
                    const double sqrtp = std::sqrt(p);
                    const double pbar = prob_seed(o.prob_index);
                    const auto post = cur.amplitudes();
                    const double gdot = dot(g, post);
                    // ubar: gradient w.r.t. the unnormalized mapped state.
                    std::vector<double>& ubar = scratch;
                    for (std::size_t i = 0; i < dim; ++i)
                        ubar[i] = (g[i] - gdot * post[i]) / sqrtp +
                                  2.0 * pbar * sqrtp * post[i];
                    // Branch tables with their eta-derivatives.
                    const std::uint32_t k_exp = 1u << o.shape.order;
                    const double k = static_cast<double>(k_exp);
                    const std::size_t branches =
                        std::size_t{1} << o.shape.controls.size();
                    std::vector<double> ck(branches), sk(branches),
                        dck(branches), dsk(branches);
                    for (Word x = 0; x < branches; ++x) {
                        const double e = eta(o.theta, o.masks, x);
                        const double c = std::cos(e);
                        const double s = std::sin(e);
                        ck[x] = pow2k(c, o.shape.order);
                        sk[x] = pow2k(s, o.shape.order);
                        dck[x] = -k * powi(c, k_exp - 1) * s;
                        dsk[x] = k * powi(s, k_exp - 1) * c;
                    }
                    const auto in = o.before.amplitudes();
                    std::vector<double> branch_acc(branches, 0.0);
                    const Word bit = Word{1} << o.shape.target;
                    for (Word i = 0; i < dim; ++i) {
                        if (i & bit)
                            continue;
                        const Word x = o.shape.controls.gather(i);
                        const double a0 = in[i];
                        const double a1 = in[i | bit];
                        const double u0 = ubar[i];
                        const double u1 = ubar[i | bit];
                        branch_acc[x] += u0 * (dck[x] * a0 - dsk[x] * a1) +
                                         u1 * (dsk[x] * a0 + dck[x] * a1);
                        // g_in = B^T ubar, per-branch transpose of
                        // [[ck, -sk], [sk, ck]].
                        g[i] = ck[x] * u0 + sk[x] * u1;
                        g[i | bit] = -sk[x] * u0 + ck[x] * u1;
                    }
                    for (Word x = 0; x < branches; ++x)
                        for (std::size_t j = 0; j < o.masks.size(); ++j)
                            if ((x & o.masks[j]) == o.masks[j])
                                grad[o.theta_base + j] += branch_acc[x];
                    cur = o.before;
                } else if constexpr (std::is_same_v<T, ProjectOp>) {
                    const double p = o.probability;
                    const double sqrtp = std::sqrt(p);
                    const double pbar = prob_seed(o.prob_index);
                    const auto post = cur.amplitudes();
                    const double gdot = dot(g, post);
                    const Word mask = o.lanes.mask();
                    const Word pattern = o.lanes.scatter(o.outcome);
                    for (Word i = 0; i < dim; ++i)
                        g[i] = ((i & mask) == pattern)
                                   ? (g[i] - gdot * post[i]) / sqrtp +
                                         2.0 * pbar * sqrtp * post[i]
                                   : 0.0;
                    cur = o.before;
                } else if constexpr (std::is_same_v<T, MarginalOp>) {
                    if (o.index < seeds.marginals.size() &&
                        !seeds.marginals[o.index].empty()) {
                        const auto& seed = seeds.marginals[o.index];
                        if (seed.size() !=
                            std::size_t{1} << o.lanes.size())
                            throw Error("marginal seed has wrong length");
                        const auto a = cur.amplitudes();
                        for (Word i = 0; i < dim; ++i)
                            g[i] += 2.0 * a[i] * seed[o.lanes.gather(i)];
                    }
                } else if constexpr (std::is_same_v<T, ResetOp>) {
                    const Word mask = o.lanes.mask();
                    const Word pattern = o.lanes.scatter(o.known);
                    if (pattern != 0) {
                        std::vector<double>& gin = scratch;
                        const auto a = cur.amplitudes();
                        std::vector<double> ain(dim, 0.0);
                        for (Word i = 0; i < dim; ++i) {
                            if ((i & mask) == pattern) {
                                gin[i] = g[i & ~mask];
                                ain[i] = a[i & ~mask];
                            } else {
                                gin[i] = 0.0;
                            }
                        }
                        g = gin;
                        StateVector rebuilt =
                            StateVector::zero(cur.num_lanes());
                        std::copy(ain.begin(), ain.end(),
                                  rebuilt.raw().begin());
                        cur = std::move(rebuilt);
                    }
                }
            },
            *it);
    }
    return grad;
}

FiniteDifferenceReport finite_difference_check(
    std::span<const double> params,
    const std::function<double(std::span<const double>)>& loss,
    const std::function<GradientVector(std::span<const double>)>& gradient,
    double step, double tolerance) {
    FiniteDifferenceReport report;
    if (params.empty())
        return report;
    report.analytic = gradient(params);
    report.numeric.resize(params.size());
    std::vector<double> perturbed(params.begin(), params.end());
    for (std::size_t i = 0; i < params.size(); ++i) {
        perturbed[i] = params[i] + step;
        const double up = loss(perturbed);
        perturbed[i] = params[i] - step;
        const double down = loss(perturbed);
        perturbed[i] = params[i];
        report.numeric[i] = (up - down) / (2.0 * step);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double abs_dev = std::abs(report.analytic[i] - report.numeric[i]);
        // Normalized relative deviation; stays meaningful near zero.
        const double rel_dev =
            abs_dev / (1.0 + std::max(std::abs(report.analytic[i]),
                                      std::abs(report.numeric[i])));
        if (abs_dev > report.max_abs_deviation) {
            report.max_abs_deviation = abs_dev;
            report.worst_parameter = i;
        }
        report.max_rel_deviation = std::max(report.max_rel_deviation, rel_dev);
        if (abs_dev > tolerance * (1.0 + std::abs(report.numeric[i])))
            report.passed = false;
    }
    return report;
}

} // namespace qrnn
