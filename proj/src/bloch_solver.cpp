#include "fasteit/bloch_solver.hpp"

#include "fasteit/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace fasteit {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

// -i (X rho - rho X) as a superoperator on column-stacked rho.
Superoperator commutator_superoperator(const Matrix4c& x)
{
    Superoperator s = Superoperator::Zero();
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                s(i + 4 * j, k + 4 * j) += kMinusI * x(i, k);  // X rho
                s(i + 4 * j, i + 4 * k) -= kMinusI * x(k, j);  // rho X
            }
    return s;
}

Superoperator dissipator(const RbD1Constants& rb)
{
    Superoperator s = Superoperator::Zero();
    for (int n = 3; n <= 4; ++n)
        for (int m = 1; m <= 2; ++m) {
            const double g = rb.decay(n, m);
            const int nn = n - 1;
            const int mm = m - 1;
            // 2 sigma_mn rho sigma_nm = 2 rho_nn |m><m|
            s(mm + 4 * mm, nn + 4 * nn) += 2.0 * g;
            // -sigma_nn rho - rho sigma_nn
            for (int c = 0; c < 4; ++c) {
                s(nn + 4 * c, nn + 4 * c) -= g;
                s(c + 4 * nn, c + 4 * nn) -= g;
            }
        }
    return s;
}

}  // namespace

AtomicState AtomicState::ground()
{
    AtomicState s;
    s.rho(1, 1) = 1.0;
    return s;
}

AtomicState AtomicState::ground_mixture()
{
    AtomicState s;
    s.rho(1, 1) = 0.5;
    s.rho(2, 2) = 0.5;
    return s;
}

AtomicState AtomicState::from_matrix(const Matrix4c& rho)
{
    AtomicState s;
    for (int j = 1; j <= 4; ++j)
        for (int i = 1; i <= 4; ++i) s.rho(i, j) = rho(i - 1, j - 1);
    return s;
}

Matrix4c AtomicState::matrix() const
{
    Matrix4c m;
    for (int j = 1; j <= 4; ++j)
        for (int i = 1; i <= 4; ++i) m(i - 1, j - 1) = rho(i, j);
    return m;
}

Complex AtomicState::trace() const
{
    return rho(1, 1) + rho(2, 2) + rho(3, 3) + rho(4, 4);
}

double AtomicState::hermiticity_defect() const
{
    double worst = 0.0;
    for (int i = 1; i <= 4; ++i)
        for (int j = i; j <= 4; ++j) worst = std::max(worst, std::abs(rho(i, j) - std::conj(rho(j, i))));
    return worst;
}

AtomicState initial_state(InitialState kind)
{
    return kind == InitialState::GroundMixture ? AtomicState::ground_mixture() : AtomicState::ground();
}

double control_amplitude_from_field(double field, const Couplings& g, const RbD1Constants& rb)
{
    return control_amplitude_from_rabi(rb.d21 * field / constants::hbar, g);
}

double control_amplitude_from_rabi(double rabi, const Couplings& g)
{
    if (rabi == 0.0) return 0.0;
    if (!(g.control1 > 0.0)) throw ConfigError("control coupling must be positive to map a control field");
    return rabi / g.control1;
}

Matrix4c build_hamiltonian(const DrivingFields& f, const Couplings& g)
{
    Matrix4c h = Matrix4c::Zero();
    h(1, 1) = f.delta_c - f.delta_p;
    h(2, 2) = -f.delta_p;
    h(3, 3) = f.omega43 - f.delta_p;
    h(2, 0) = g.probe1 * f.probe;
    h(3, 0) = g.probe2 * f.probe;
    h(2, 1) = g.control1 * f.control;
    h(3, 1) = g.control2 * f.control;
    h(0, 2) = std::conj(h(2, 0));
    h(0, 3) = std::conj(h(3, 0));
    h(1, 2) = std::conj(h(2, 1));
    h(1, 3) = std::conj(h(3, 1));
    return h;
}

Superoperator build_generator(const Matrix4c& h, const RbD1Constants& rb)
{
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    const double defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * scale)
        throw ContractError("build_generator: Hamiltonian is not Hermitian (defect " + std::to_string(defect) + ")");
    return commutator_superoperator(h) + dissipator(rb);
}

AtomicState step_state(const AtomicState& state, const Superoperator& generator, double dt)
{
    Eigen::Map<const Eigen::Matrix<Complex, 16, 1>> theta(state.theta.data());
    AtomicState next = state;
    Eigen::Map<Eigen::Matrix<Complex, 16, 1>> out(next.theta.data());
    out.noalias() += dt * (generator * theta);
    return next;
}

SparseSuperoperator::SparseSuperoperator(const Superoperator& dense)
{
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            if (dense(r, c) != Complex{0.0, 0.0})
                entries_.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(c), dense(r, c)});
}

void SparseSuperoperator::accumulate(const std::array<Complex, 16>& theta, Complex scale,
                                     std::array<Complex, 16>& out) const
{
    for (const Entry& e : entries_) out[e.row] += scale * (e.value * theta[e.col]);
}

ProbeDrivenGenerator::ProbeDrivenGenerator(const DrivingFields& fields, const Couplings& g, const RbD1Constants& rb)
{
    DrivingFields without_probe = fields;
    without_probe.probe = 0.0;
    base_dense_ = build_generator(build_hamiltonian(without_probe, g), rb);

    Matrix4c p = Matrix4c::Zero();
    p(2, 0) = g.probe1;
    p(3, 0) = g.probe2;
    probe_dense_ = commutator_superoperator(p);
    probe_conj_dense_ = commutator_superoperator(p.adjoint());

    base_ = SparseSuperoperator(base_dense_);
    probe_ = SparseSuperoperator(probe_dense_);
    probe_conj_ = SparseSuperoperator(probe_conj_dense_);
}

Superoperator ProbeDrivenGenerator::dense(Complex probe) const
{
    return base_dense_ + probe * probe_dense_ + std::conj(probe) * probe_conj_dense_;
}

void ProbeDrivenGenerator::step(AtomicState& state, Complex probe, double dt) const
{
    std::array<Complex, 16> next = state.theta;
    base_.accumulate(state.theta, dt, next);
    if (probe != Complex{0.0, 0.0}) {
        probe_.accumulate(state.theta, dt * probe, next);
        probe_conj_.accumulate(state.theta, dt * std::conj(probe), next);
    }
    state.theta = next;
}

void ProbeDrivenGenerator::probe_kick(const std::array<Complex, 16>& theta, Complex probe, double dt,
                                      std::array<Complex, 16>& out) const
{
    out = theta;
    if (probe == Complex{0.0, 0.0}) return;
    probe_.accumulate(theta, dt * probe, out);
    probe_conj_.accumulate(theta, dt * std::conj(probe), out);
}

ExponentialStepper::ExponentialStepper(const ProbeDrivenGenerator& generator, double dt)
    : generator_(&generator), dt_(dt)
{
    const Superoperator scaled = generator.base() * Complex{dt, 0.0};
    propagator_ = scaled.exp();
}

void ExponentialStepper::step(AtomicState& state, Complex probe) const
{
    std::array<Complex, 16> kicked;
    generator_->probe_kick(state.theta, probe, dt_, kicked);
    Eigen::Map<const Eigen::Matrix<Complex, 16, 1>> in(kicked.data());
    Eigen::Map<Eigen::Matrix<Complex, 16, 1>> out(state.theta.data());
    out.noalias() = propagator_ * in;
}

}  // namespace fasteit
