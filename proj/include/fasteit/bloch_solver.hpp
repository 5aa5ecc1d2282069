#pragma once

#include "fasteit/atomic_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace fasteit {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Superoperator = Eigen::Matrix<Complex, 16, 16>;

// Column-stacked density matrix:
// [rho11, rho21, rho31, rho41, rho12, rho22, ..., rho44].
// Levels are 1-based in the accessors to match |1>..|4>.
struct AtomicState {
    std::array<Complex, 16> theta{};

    static constexpr std::size_t index(int row, int col) { return static_cast<std::size_t>((row - 1) + 4 * (col - 1)); }

    Complex& rho(int row, int col) { return theta[index(row, col)]; }
    const Complex& rho(int row, int col) const { return theta[index(row, col)]; }

    // rho11 = 1.
    static AtomicState ground();
    // Equal incoherent mixture of F=1 and F=2.
    static AtomicState ground_mixture();
    static AtomicState from_matrix(const Matrix4c& rho);

    Matrix4c matrix() const;
    Complex trace() const;
    // max |rho_ij - conj(rho_ji)|
    double hermiticity_defect() const;
};

enum class InitialState : std::uint8_t { GroundF1, GroundMixture };

AtomicState initial_state(InitialState kind);

struct DrivingFields {
    Complex probe{0.0, 0.0};    // a
    Complex control{0.0, 0.0};  // b
    double delta_p = 0.0;       // rad/s
    double delta_c = 0.0;       // rad/s
    double omega43 = kTwoPi * 816.65630e6;
};

// Dimensionless control amplitude b such that g_C1 b = d21 E / hbar.
double control_amplitude_from_field(double field_V_per_m, const Couplings& g, const RbD1Constants& rb);
// Same for a control Rabi coupling already expressed in rad/s (g_C1 b = rabi).
double control_amplitude_from_rabi(double rabi_rad_s, const Couplings& g);

// H / hbar in rad/s.
Matrix4c build_hamiltonian(const DrivingFields& fields, const Couplings& g);

// Vectorized Liouvillian: L vec(rho) = vec(-i [H, rho] + sum_nm Gamma_nm D_nm[rho]).
// Throws ContractError when H is not Hermitian to 1e-12 (relative to its norm).
Superoperator build_generator(const Matrix4c& hamiltonian, const RbD1Constants& rb);

// Forward Euler: theta + dt L theta.
AtomicState step_state(const AtomicState& state, const Superoperator& generator, double dt);

// Nonzero entries of a superoperator, applied as a sparse matrix-vector product.
class SparseSuperoperator {
public:
    SparseSuperoperator() = default;
    explicit SparseSuperoperator(const Superoperator& dense);

    // out += scale * (L theta)
    void accumulate(const std::array<Complex, 16>& theta, Complex scale, std::array<Complex, 16>& out) const;
    std::size_t nonzeros() const { return entries_.size(); }

private:
    struct Entry {
        std::uint8_t row;
        std::uint8_t col;
        Complex value;
    };
    std::vector<Entry> entries_;
};

// Generator for a fixed atom/control configuration as an affine function of the
// local probe amplitude: L(a) = L0 + a La + conj(a) Lb.
class ProbeDrivenGenerator {
public:
    ProbeDrivenGenerator(const DrivingFields& static_fields, const Couplings& g, const RbD1Constants& rb);

    Superoperator dense(Complex probe) const;

    // out = theta + dt (a La + conj(a) Lb) theta, without the probe-free part.
    void probe_kick(const std::array<Complex, 16>& theta, Complex probe, double dt, std::array<Complex, 16>& out) const;

    // In place forward Euler step driven by the local probe amplitude.
    void step(AtomicState& state, Complex probe, double dt) const;

    const Superoperator& base() const { return base_dense_; }

private:
    SparseSuperoperator base_;
    SparseSuperoperator probe_;
    SparseSuperoperator probe_conj_;
    Superoperator base_dense_;
    Superoperator probe_dense_;
    Superoperator probe_conj_dense_;
};

// Lie splitting: theta' = exp(L0 dt) (theta + dt (a La + conj(a) Lb) theta).
// Exact for the probe-free dynamics; first order in the (weak) probe coupling.
class ExponentialStepper {
public:
    ExponentialStepper(const ProbeDrivenGenerator& generator, double dt);
    void step(AtomicState& state, Complex probe) const;

private:
    const ProbeDrivenGenerator* generator_;
    double dt_;
    Superoperator propagator_;
};

}  // namespace fasteit
