#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrnn {

/// Bit word over a set of lanes. Bit b of the word belongs to the b-th lane
/// listed (the first lane is the least significant bit).
using Word = std::uint64_t;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Lane count of zero, or one too large to address.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Lane index out of range, duplicate lanes, or a target listed as a control.
class LaneError : public Error {
  public:
    using Error::Error;
};

/// Projection onto an outcome whose probability is below the floor.
class ImpossibleOutcomeError : public Error {
  public:
    using Error::Error;
};

/// reset_lanes() called on lanes that are not deterministically in the
/// claimed basis word.
class EntangledLanesError : public Error {
  public:
    using Error::Error;
};

/// Largest supported register; 2^24 doubles is the densest state we simulate.
inline constexpr std::uint32_t kMaxLanes = 24;

/// Probabilities below this floor are treated as impossible outcomes rather
/// than as legitimate branches.
inline constexpr double kProbabilityFloor = 1e-12;

/// Ordered list of distinct lane indices. The order fixes bit significance
/// of outcome words: lanes()[0] is the least significant bit.
class LaneSet {
  public:
    LaneSet() = default;
    LaneSet(std::initializer_list<std::uint32_t> lanes);
    explicit LaneSet(std::vector<std::uint32_t> lanes);

    /// Consecutive lanes [first, first + count).
    static LaneSet range(std::uint32_t first, std::uint32_t count);

    std::size_t size() const { return lanes_.size(); }
    bool empty() const { return lanes_.empty(); }
    std::uint32_t operator[](std::size_t i) const { return lanes_[i]; }
    bool contains(std::uint32_t lane) const;

    auto begin() const { return lanes_.begin(); }
    auto end() const { return lanes_.end(); }

    /// Extract this set's bits from a full basis index into a packed word.
    Word gather(Word index) const;
    /// Spread a packed word onto this set's bit positions of a basis index.
    Word scatter(Word word) const;
    /// Union of the single-lane masks.
    Word mask() const { return mask_; }

    void check_within(std::uint32_t num_lanes) const;

  private:
    std::vector<std::uint32_t> lanes_;
    Word mask_ = 0;
};

/// One branch of a multiplexed rotation: the target-lane map is
/// scale * R(angle) for the branch's control assignment.
struct BranchRotation {
    double scale = 1.0;
    double angle = 0.0;
};

/// Coefficient pair (c, s) of a scaled rotation [[c, -s], [s, c]].
struct RotationCoeffs {
    double c = 1.0;
    double s = 0.0;
};

/// Real-amplitude state over a register of qubit lanes.
///
/// Index i of the amplitude array is the computational basis state whose
/// lane-b bit is bit b of i (lane 0 = least significant). All gates used in
/// this project are real orthogonal, so amplitudes stay real throughout.
/// A StateVector is an exclusive-access value: operations mutate in place;
/// copy first if the previous state is still needed.
class StateVector {
  public:
    /// |bits⟩, a computational basis state.
    static StateVector basis(std::uint32_t num_lanes, Word bits);
    /// |0...0⟩.
    static StateVector zero(std::uint32_t num_lanes);

    std::uint32_t num_lanes() const { return num_lanes_; }
    std::size_t dimension() const { return amps_.size(); }
    std::span<const double> amplitudes() const { return amps_; }
    double amplitude(Word index) const { return amps_[index]; }
    double norm() const;

    /// Single-lane rotation with R(theta)|0⟩ = cos(theta)|0⟩ + sin(theta)|1⟩.
    void apply_rotation(std::uint32_t target, double theta);

    /// Swap the two branches of the target lane (X gate).
    void apply_bitflip(std::uint32_t target);

    /// Apply scale(x) * R(angle(x)) to the target lane on every control
    /// branch x. Not renormalized; norm-preserving iff every scale is 1.
    void apply_branchwise_rotation(
        std::uint32_t target, const LaneSet& controls,
        const std::function<BranchRotation(Word)>& branch_map);

    /// Same, with coefficients precomputed per branch word (table size
    /// 2^|controls|). This is the hot path used by neuron application.
    void apply_rotation_table(std::uint32_t target, const LaneSet& controls,
                              std::span<const RotationCoeffs> table);

    /// Project the lanes onto |outcome⟩ and renormalize. Returns the
    /// pre-renormalization probability of the outcome.
    double project(const LaneSet& lanes, Word outcome,
                   double floor = kProbabilityFloor);

    /// Probability vector over the 2^|lanes| outcome words of the lanes.
    std::vector<double> marginal(const LaneSet& lanes) const;

    /// Relabel lanes known to hold |known⟩ back to |0...0⟩.
    void reset_lanes(const LaneSet& lanes, Word known);

    /// Scale to unit norm; returns the squared norm before scaling.
    double renormalize();

    std::span<double> raw() { return amps_; }

  private:
    StateVector(std::uint32_t num_lanes, std::vector<double> amps)
        : num_lanes_(num_lanes), amps_(std::move(amps)) {}

    void check_lane(std::uint32_t lane) const;

    std::uint32_t num_lanes_ = 0;
    std::vector<double> amps_;
};

} // namespace qrnn
