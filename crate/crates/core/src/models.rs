//! Example-state generators and independent closed forms: isotropic states
//! and their exact concurrence, the two-copy closed forms for the isotropic
//! family, the decaying two-qutrit model, maximally entangled and GHZ/W
//! states, and the two-qubit closed-form concurrence used as an oracle.

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{kron, CMat, CVec, DensityOperator, HilbertSpace, PureState, C_ONE};

/// Isotropic family parameters: fidelity F with the maximally entangled
/// state and the derived mixing coefficients g, h with
/// rho_F = g I + h |phi+><phi+|.
#[derive(Debug, Clone, Copy)]
pub struct IsotropicParams {
    pub d: usize,
    pub f: f64,
}

impl IsotropicParams {
    pub fn new(d: usize, f: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
        }
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidArgument(format!(
                "fidelity must lie in [0, 1], got {f}"
            )));
        }
        Ok(Self { d, f })
    }

    pub fn g(&self) -> f64 {
        let d2 = (self.d * self.d) as f64;
        (1.0 - self.f) / (d2 - 1.0)
    }

    pub fn h(&self) -> f64 {
        let d2 = (self.d * self.d) as f64;
        (self.f * d2 - 1.0) / (d2 - 1.0)
    }
}

/// |phi+> = sum_i |ii> / sqrt(d) on a d x d space.
pub fn max_entangled_state(d: usize) -> Result<PureState> {
    let space = HilbertSpace::bipartite(d, d)?;
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = CVec::zeros(d * d);
    for i in 0..d {
        amps[i * d + i] = w;
    }
    PureState::new(space, amps)
}

/// rho_F = g I + h |phi+><phi+|.
pub fn isotropic_state(d: usize, f: f64) -> Result<DensityOperator> {
    let params = IsotropicParams::new(d, f)?;
    let phi = max_entangled_state(d)?;
    let dim = d * d;
    let g = Complex64::new(params.g(), 0.0);
    let h = Complex64::new(params.h(), 0.0);
    let matrix = CMat::identity(dim, dim) * g + phi.projector() * h;
    DensityOperator::new(phi.space().clone(), matrix)
}

/// Exact isotropic concurrence: max{0, sqrt(2d/(d-1)) (F - 1/d)}.
pub fn isotropic_exact_concurrence(d: usize, f: f64) -> f64 {
    let d_f = d as f64;
    (2.0 * d_f / (d_f - 1.0)).sqrt() * (f - 1.0 / d_f).max(0.0)
}

/// tr(rho_F (x) rho_F V_(i)) = 2d(d-1) [h^2/d^2 - d g^2 - (2/d) g h].
pub fn isotropic_vi_closed_form(d: usize, f: f64) -> f64 {
    let p = IsotropicParams { d, f };
    let (g, h, d_f) = (p.g(), p.h(), d as f64);
    2.0 * d_f * (d_f - 1.0) * (h * h / (d_f * d_f) - d_f * g * g - 2.0 / d_f * g * h)
}

/// Selective V_alpha sum on the isotropic family:
/// 2d(d-1) [h^2/d^2 - 2 g^2 - (2/d) g h].
pub fn isotropic_valpha_sum_closed_form(d: usize, f: f64) -> f64 {
    let p = IsotropicParams { d, f };
    let (g, h, d_f) = (p.g(), p.h(), d as f64);
    2.0 * d_f * (d_f - 1.0) * (h * h / (d_f * d_f) - 2.0 * g * g - 2.0 / d_f * g * h)
}

/// sqrt(l0)|01> + sqrt(l1)|12> + sqrt(l2)|20> on two qutrits.
pub fn qutrit_initial_state(lambdas: (f64, f64, f64)) -> Result<PureState> {
    let (l0, l1, l2) = lambdas;
    if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 || (l0 + l1 + l2 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "lambdas must be a probability simplex point, got ({l0}, {l1}, {l2})"
        )));
    }
    let space = HilbertSpace::bipartite(3, 3)?;
    let mut amps = CVec::zeros(9);
    amps[1] = Complex64::new(l0.sqrt(), 0.0); // |01>
    amps[5] = Complex64::new(l1.sqrt(), 0.0); // |12>
    amps[6] = Complex64::new(l2.sqrt(), 0.0); // |20>
    PureState::new(space, amps)
}

/// The maximally entangled member of the qutrit family,
/// (|01> + |12> + |20>) / sqrt(3).
pub fn phi_me() -> PureState {
    qutrit_initial_state((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)).expect("valid simplex point")
}

/// GHZ state on n qubits.
pub fn ghz_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument("GHZ needs at least 2 qubits".into()));
    }
    let space = HilbertSpace::new(&vec![2; n])?;
    let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = CVec::zeros(1 << n);
    amps[0] = w;
    amps[(1 << n) - 1] = w;
    PureState::new(space, amps)
}

/// W state on n qubits.
pub fn w_state(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::InvalidArgument("W needs at least 2 qubits".into()));
    }
    let space = HilbertSpace::new(&vec![2; n])?;
    let w = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut amps = CVec::zeros(1 << n);
    for k in 0..n {
        amps[1 << (n - 1 - k)] = w;
    }
    PureState::new(space, amps)
}

/// Local spontaneous-decay model for a pair of qutrits: each site evolves
/// under (Gamma/2)(2 g rho g^dag - rho g^dag g - g^dag g rho) with the
/// three-level lowering matrix g.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    gamma_rate: f64,
    // Precomputed joint-space jump operators g (x) I and I (x) g and the
    // corresponding g^dag g factors.
    jump: [CMat; 2],
    damp: [CMat; 2],
}

impl LindbladModel {
    pub fn new(gamma_rate: f64) -> Result<Self> {
        if gamma_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "decay rate must be positive, got {gamma_rate}"
            )));
        }
        let g = Self::coupling();
        let id3 = CMat::identity(3, 3);
        let jump = [kron(&g, &id3), kron(&id3, &g)];
        let damp = [
            jump[0].adjoint() * &jump[0],
            jump[1].adjoint() * &jump[1],
        ];
        Ok(Self {
            gamma_rate,
            jump,
            damp,
        })
    }

    pub fn gamma_rate(&self) -> f64 {
        self.gamma_rate
    }

    /// The 3x3 lowering matrix with entries sqrt(2) and 1 on the lower
    /// subdiagonal; nilpotent with kernel spanned by the top level.
    pub fn coupling() -> CMat {
        let mut g = CMat::zeros(3, 3);
        g[(1, 0)] = Complex64::new(2.0_f64.sqrt(), 0.0);
        g[(2, 1)] = C_ONE;
        g
    }

    /// Right-hand side of the master equation on the joint 9x9 matrix.
    pub fn rhs(&self, rho: &CMat) -> CMat {
        let half = Complex64::new(self.gamma_rate / 2.0, 0.0);
        let mut out = CMat::zeros(9, 9);
        for site in 0..2 {
            let j = &self.jump[site];
            let d = &self.damp[site];
            out += (j * rho * j.adjoint() * Complex64::new(2.0, 0.0) - rho * d - d * rho) * half;
        }
        out
    }
}

/// Free-function form of the master-equation right-hand side.
pub fn lindblad_rhs(model: &LindbladModel, rho: &CMat) -> CMat {
    model.rhs(rho)
}

/// Fixed-step RK4 trajectory of the decay model. Returns (t, rho(t)) at
/// every accepted step, including t = 0.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityOperator,
    t_max: f64,
    dt: f64,
) -> Result<Vec<(f64, DensityOperator)>> {
    if rho0.space().factor_dims() != [3, 3] {
        return Err(Error::InvalidArgument(
            "the decay model acts on a pair of qutrits".into(),
        ));
    }
    if dt <= 0.0 || t_max < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need dt > 0 and t_max >= 0, got dt = {dt}, t_max = {t_max}"
        )));
    }
    let n_steps = (t_max / dt).round() as usize;
    let space = rho0.space().clone();
    let mut rho = rho0.matrix().clone();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push((0.0, rho0.clone()));
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    for step in 1..=n_steps {
        let k1 = model.rhs(&rho);
        let k2 = model.rhs(&(&rho + &k1 * half));
        let k3 = model.rhs(&(&rho + &k2 * half));
        let k4 = model.rhs(&(&rho + &k3 * full));
        rho += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * sixth;
        let t = step as f64 * dt;
        let drift = (rho.trace().re - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::Validation(format!(
                "trace drift {drift:.3e} at t = {t}; reduce dt"
            )));
        }
        let snapshot = DensityOperator::new_with_clamp(space.clone(), rho.clone(), 1e-8).map_err(|e| {
            Error::Validation(format!("integration produced an invalid state at t = {t}: {e}"))
        })?;
        out.push((t, snapshot));
    }
    Ok(out)
}

/// Exact two-qubit concurrence: max{0, l1 - l2 - l3 - l4} with l_i the
/// decreasing square roots of the eigenvalues of
/// sqrt(rho) (sy (x) sy) rho* (sy (x) sy) sqrt(rho).
pub fn wootters_concurrence(rho: &DensityOperator) -> Result<f64> {
    if rho.space().factor_dims() != [2, 2] {
        return Err(Error::InvalidArgument(
            "the closed-form concurrence needs a two-qubit state".into(),
        ));
    }
    let m = rho.matrix();
    // sy (x) sy has a single nonzero anti-diagonal with signs (-1, 1, 1, -1).
    let mut yy = CMat::zeros(4, 4);
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = C_ONE;
    yy[(2, 1)] = C_ONE;
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    // The four characteristic values are the square roots of the eigenvalues
    // of rho * (yy rho^* yy).  Computing them as the singular values of the
    // symmetric matrix tau_ij = phi_i^T yy phi_j, where phi_k are the
    // subnormalized eigenvectors of rho, gives the same spectrum without the
    // matrix square root, whose noise floor on rank-deficient inputs is of
    // order sqrt(machine epsilon).
    let eig = SymmetricEigen::new(m.clone());
    let mut phi = CMat::zeros(4, 4);
    for k in 0..4 {
        let w = eig.eigenvalues[k].max(0.0).sqrt();
        for i in 0..4 {
            phi[(i, k)] = eig.eigenvectors[(i, k)] * w;
        }
    }
    let tau = phi.transpose() * &yy * &phi;
    let svd = tau.svd(false, false);
    let mut lams: Vec<f64> = svd.singular_values.iter().copied().collect();
    lams.sort_by(|a, b| b.total_cmp(a));
    Ok((lams[0] - lams[1] - lams[2] - lams[3]).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{pure_concurrence, two_copy_bound_valpha_sum, two_copy_bound_vi};
    use crate::twocopy::VWeights;
    use approx::assert_abs_diff_eq;

    #[test]
    fn isotropic_fidelity_matches() {
        for d in [2, 3, 4] {
            for f in [0.0, 0.3, 1.0 / (d * d) as f64, 0.9, 1.0] {
                let rho = isotropic_state(d, f).unwrap();
                let phi = max_entangled_state(d).unwrap();
                let fid = (phi.amplitudes().adjoint() * rho.matrix() * phi.amplitudes())[(0, 0)];
                assert_abs_diff_eq!(fid.re, f, epsilon = 1e-12);
                assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn isotropic_uniform_at_inverse_d_squared() {
        let rho = isotropic_state(3, 1.0 / 9.0).unwrap();
        let uniform = DensityOperator::maximally_mixed(rho.space().clone());
        let err = (rho.matrix() - uniform.matrix()).map(|z| z.norm()).max();
        assert!(err < 1e-14);
    }

    #[test]
    fn isotropic_pure_at_f_one() {
        let rho = isotropic_state(4, 1.0).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn isotropic_spectrum_at_half() {
        let rho = isotropic_state(4, 0.5).unwrap();
        let dec = rho.eigen_decomposition(1e-12);
        let mut weights: Vec<f64> = dec.states().iter().map(|s| s.norm_sq()).collect();
        weights.sort_by(|a, b| b.total_cmp(a));
        assert_abs_diff_eq!(weights[0], 0.5, epsilon = 1e-12);
        for w in &weights[1..] {
            assert_abs_diff_eq!(*w, 0.5 / 15.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_concurrence_values() {
        assert_abs_diff_eq!(
            isotropic_exact_concurrence(4, 1.0),
            1.5_f64.sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(isotropic_exact_concurrence(3, 1.0 / 3.0), 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(isotropic_exact_concurrence(2, 1.0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_forms_match_matrix_traces() {
        for d in [2usize, 3, 4] {
            for step in 0..=20 {
                let f = step as f64 / 20.0;
                let rho = isotropic_state(d, f).unwrap();
                let vi = two_copy_bound_vi(&rho, 1).unwrap();
                assert_abs_diff_eq!(
                    vi.raw_value,
                    isotropic_vi_closed_form(d, f),
                    epsilon = 1e-10
                );
                let va = two_copy_bound_valpha_sum(&rho, VWeights::even()).unwrap();
                let closed = isotropic_valpha_sum_closed_form(d, f);
                if closed >= 0.0 {
                    assert_abs_diff_eq!(va.raw_value, closed, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn closed_forms_coincide_for_qubits_and_split_for_larger_d() {
        for step in 0..=10 {
            let f = step as f64 / 10.0;
            assert_abs_diff_eq!(
                isotropic_vi_closed_form(2, f),
                isotropic_valpha_sum_closed_form(2, f),
                epsilon = 1e-13
            );
        }
        assert!(isotropic_valpha_sum_closed_form(4, 0.6) > isotropic_vi_closed_form(4, 0.6));
    }

    #[test]
    fn qutrit_state_family() {
        let me = qutrit_initial_state((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)).unwrap();
        assert_abs_diff_eq!(
            pure_concurrence(&me).unwrap(),
            2.0 / 3.0_f64.sqrt(),
            epsilon = 1e-13
        );
        let product = qutrit_initial_state((1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(pure_concurrence(&product).unwrap(), 0.0, epsilon = 1e-13);
        // C = 2 sqrt(l0 l1 + l1 l2 + l2 l0) from the Schmidt coefficients.
        let (l0, l1, l2) = (1.0 / 12.0, 5.0 / 6.0, 1.0 / 12.0);
        let psi = qutrit_initial_state((l0, l1, l2)).unwrap();
        let expect = 2.0 * (l0 * l1 + l1 * l2 + l2 * l0).sqrt();
        assert_abs_diff_eq!(pure_concurrence(&psi).unwrap(), expect, epsilon = 1e-12);
        assert!(qutrit_initial_state((0.5, 0.2, 0.2)).is_err());
    }

    #[test]
    fn coupling_is_nilpotent() {
        let g = LindbladModel::coupling();
        let g3 = &g * &g * &g;
        assert!(g3.map(|z| z.norm()).max() < 1e-15);
        // Level 0 decays: g e0 = sqrt(2) e1.
        assert_abs_diff_eq!(g[(1, 0)].re, 2.0_f64.sqrt(), epsilon = 0.0);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let model = LindbladModel::new(1.0).unwrap();
        let rho = DensityOperator::maximally_mixed(HilbertSpace::bipartite(3, 3).unwrap());
        let r = model.rhs(rho.matrix());
        assert!(r.trace().norm() < 1e-12);
        assert!(crate::qstate::hermiticity_deviation(&r) < 1e-13);

        // |00><00| is not stationary: level 0 decays downward in the chain.
        let psi = PureState::basis_state(HilbertSpace::bipartite(3, 3).unwrap(), 0).unwrap();
        let r = model.rhs(&psi.projector());
        assert!(r.map(|z| z.norm()).max() > 0.1);
        assert!(r.trace().norm() < 1e-12);
    }

    #[test]
    fn evolution_reaches_the_dark_product_state() {
        let model = LindbladModel::new(1.0).unwrap();
        let rho0 = phi_me().to_density();
        let traj = evolve(&model, &rho0, 10.0, 1e-2).unwrap();
        let (_, last) = traj.last().unwrap();
        // The decay chain ends in the |22> product state, joint index 8.
        assert!(last.matrix()[(8, 8)].re > 0.99);
        let residual = model.rhs(last.matrix()).map(|z| z.norm()).max();
        assert!(residual < 1e-3);
        // First snapshot is exactly rho0.
        assert_eq!(traj[0].1.matrix(), rho0.matrix());
    }

    #[test]
    fn evolution_trace_and_purity() {
        let model = LindbladModel::new(1.0).unwrap();
        let rho0 = phi_me().to_density();
        let traj = evolve(&model, &rho0, 1.0, 1e-3).unwrap();
        for (_, rho) in &traj {
            assert!((rho.trace() - 1.0).abs() < 1e-8);
        }
        let (_, at_one) = traj.last().unwrap();
        assert!(at_one.purity() < 1.0 - 1e-3);
    }

    #[test]
    fn wootters_known_values() {
        let bell = max_entangled_state(2).unwrap().to_density();
        assert_abs_diff_eq!(wootters_concurrence(&bell).unwrap(), 1.0, epsilon = 1e-12);
        let mixed = DensityOperator::maximally_mixed(HilbertSpace::bipartite(2, 2).unwrap());
        assert_abs_diff_eq!(wootters_concurrence(&mixed).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn wootters_matches_isotropic_closed_form() {
        for step in 0..=20 {
            let f = step as f64 / 20.0;
            let rho = isotropic_state(2, f).unwrap();
            assert_abs_diff_eq!(
                wootters_concurrence(&rho).unwrap(),
                isotropic_exact_concurrence(2, f),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn ghz_and_w_shapes() {
        let ghz = ghz_state(3).unwrap();
        assert_abs_diff_eq!(ghz.norm_sq(), 1.0, epsilon = 1e-15);
        let w = w_state(3).unwrap();
        assert_abs_diff_eq!(w.norm_sq(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.amplitudes()[1].re, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-15);
    }
}
