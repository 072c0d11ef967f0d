#include "qrnn/statevector.hpp"

#include <algorithm>
#include <cmath>

namespace qrnn {

LaneSet::LaneSet(std::initializer_list<std::uint32_t> lanes)
    : LaneSet(std::vector<std::uint32_t>(lanes)) {}

LaneSet::LaneSet(std::vector<std::uint32_t> lanes) : lanes_(std::move(lanes)) {
    for (std::uint32_t lane : lanes_) {
        const Word bit = Word{1} << lane;
        if (mask_ & bit)
            throw LaneError("duplicate lane " + std::to_string(lane) +
                            " in lane set");
        mask_ |= bit;
    }
}

LaneSet LaneSet::range(std::uint32_t first, std::uint32_t count) {
    std::vector<std::uint32_t> lanes(count);
    for (std::uint32_t i = 0; i < count; ++i)
        lanes[i] = first + i;
    return LaneSet(std::move(lanes));
}

bool LaneSet::contains(std::uint32_t lane) const {
    return lane < 64 && (mask_ & (Word{1} << lane));
}

Word LaneSet::gather(Word index) const {
    Word word = 0;
    for (std::size_t b = 0; b < lanes_.size(); ++b)
        word |= ((index >> lanes_[b]) & 1) << b;
    return word;
}

Word LaneSet::scatter(Word word) const {
    Word index = 0;
    for (std::size_t b = 0; b < lanes_.size(); ++b)
        index |= ((word >> b) & 1) << lanes_[b];
    return index;
}

void LaneSet::check_within(std::uint32_t num_lanes) const {
    for (std::uint32_t lane : lanes_)
        if (lane >= num_lanes)
            throw LaneError("lane " + std::to_string(lane) +
                            " out of range for " + std::to_string(num_lanes) +
                            "-lane state");
}

StateVector StateVector::basis(std::uint32_t num_lanes, Word bits) {
    if (num_lanes == 0 || num_lanes > kMaxLanes)
        throw CapacityError("lane count " + std::to_string(num_lanes) +
                            " outside supported range [1, " +
                            std::to_string(kMaxLanes) + "]");
    std::vector<double> amps(std::size_t{1} << num_lanes, 0.0);
    amps[bits & (amps.size() - 1)] = 1.0;
    return StateVector(num_lanes, std::move(amps));
}

StateVector StateVector::zero(std::uint32_t num_lanes) {
    return basis(num_lanes, 0);
}

double StateVector::norm() const {
    double sq = 0.0;
    for (double a : amps_)
        sq += a * a;
    return std::sqrt(sq);
}

void StateVector::check_lane(std::uint32_t lane) const {
    if (lane >= num_lanes_)
        throw LaneError("lane " + std::to_string(lane) +
                        " out of range for " + std::to_string(num_lanes_) +
                        "-lane state");
}

void StateVector::apply_rotation(std::uint32_t target, double theta) {
    check_lane(target);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Word bit = Word{1} << target;
    const Word n = amps_.size();
    for (Word i = 0; i < n; ++i) {
        if (i & bit)
            continue;
        const double a0 = amps_[i];
        const double a1 = amps_[i | bit];
        amps_[i] = c * a0 - s * a1;
        amps_[i | bit] = s * a0 + c * a1;
    }
}

void StateVector::apply_bitflip(std::uint32_t target) {
    check_lane(target);
    const Word bit = Word{1} << target;
    const Word n = amps_.size();
    for (Word i = 0; i < n; ++i)
        if (!(i & bit))
            std::swap(amps_[i], amps_[i | bit]);
}

void StateVector::apply_branchwise_rotation(
    std::uint32_t target, const LaneSet& controls,
    const std::function<BranchRotation(Word)>& branch_map) {
    std::vector<RotationCoeffs> table(std::size_t{1} << controls.size());
    for (Word x = 0; x < table.size(); ++x) {
        const BranchRotation br = branch_map(x);
        if (br.scale < 0.0)
            throw Error("negative branch scale");
        table[x] = {br.scale * std::cos(br.angle),
                    br.scale * std::sin(br.angle)};
    }
    apply_rotation_table(target, controls, table);
}

void StateVector::apply_rotation_table(std::uint32_t target,
                                       const LaneSet& controls,
                                       std::span<const RotationCoeffs> table) {
    check_lane(target);
    controls.check_within(num_lanes_);
    if (controls.contains(target))
        throw LaneError("target lane " + std::to_string(target) +
                        " listed among controls");
    const Word bit = Word{1} << target;
    const Word n = amps_.size();
    for (Word i = 0; i < n; ++i) {
        if (i & bit)
            continue;
        const RotationCoeffs& rc = table[controls.gather(i)];
        const double a0 = amps_[i];
        const double a1 = amps_[i | bit];
        amps_[i] = rc.c * a0 - rc.s * a1;
        amps_[i | bit] = rc.s * a0 + rc.c * a1;
    }
}

double StateVector::project(const LaneSet& lanes, Word outcome, double floor) {
    lanes.check_within(num_lanes_);
    const Word mask = lanes.mask();
    const Word pattern = lanes.scatter(outcome);
    double p = 0.0;
    const Word n = amps_.size();
    for (Word i = 0; i < n; ++i)
        if ((i & mask) == pattern)
            p += amps_[i] * amps_[i];
    if (p < floor)
        throw ImpossibleOutcomeError(
            "projection probability " + std::to_string(p) +
            " below floor; outcome " + std::to_string(outcome) +
            " is impossible for this state");
    const double inv = 1.0 / std::sqrt(p);
    for (Word i = 0; i < n; ++i)
        amps_[i] = ((i & mask) == pattern) ? amps_[i] * inv : 0.0;
    return p;
}

std::vector<double> StateVector::marginal(const LaneSet& lanes) const {
    lanes.check_within(num_lanes_);
    std::vector<double> probs(std::size_t{1} << lanes.size(), 0.0);
    const Word n = amps_.size();
    for (Word i = 0; i < n; ++i)
        probs[lanes.gather(i)] += amps_[i] * amps_[i];
    return probs;
}

void StateVector::reset_lanes(const LaneSet& lanes, Word known) {
    lanes.check_within(num_lanes_);
    const Word mask = lanes.mask();
    const Word pattern = lanes.scatter(known);
    const Word n = amps_.size();
    double off_branch = 0.0;
    for (Word i = 0; i < n; ++i)
        if ((i & mask) != pattern)
            off_branch += amps_[i] * amps_[i];
    if (off_branch > 1e-9)
        throw EntangledLanesError(
            "reset_lanes: lanes carry weight " + std::to_string(off_branch) +
            " outside |" + std::to_string(known) + "⟩");
    if (pattern == 0)
        return;
    for (Word i = 0; i < n; ++i) {
        if ((i & mask) == pattern)
            amps_[i & ~mask] = amps_[i];
        if ((i & mask) != 0)
            amps_[i] = 0.0;
    }
}

double StateVector::renormalize() {
    double sq = 0.0;
    for (double a : amps_)
        sq += a * a;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& a : amps_)
        a *= inv;
    return sq;
}

} // namespace qrnn
