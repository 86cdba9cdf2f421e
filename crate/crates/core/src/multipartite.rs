//! Multipartite concurrence as an aggregate over bipartitions, plus the
//! matching algebraic, two-copy, and witness bounds. Every bipartition is
//! treated through the bipartite machinery on its induced two-factor space,
//! with the state permuted into (left, right) order once per cut.

use crate::bounds::{
    algebraic_lower_bound, pure_concurrence_sq_from_amplitudes, t_matrix_from_vector, AlphaTerm,
    BoundKind, BoundReport, TauVector, TRACE_IMAG_TOL,
};
use crate::error::{Error, Result};
use crate::qstate::{
    kron, CMat, CVec, DensityOperator, HilbertSpace, PureState, DEFAULT_EIGEN_CUTOFF,
};
use crate::twocopy::{
    build_v_alpha, enumerate_chi, trace_product, ChiVector, VWeights, MAX_TWO_COPY_DIM,
};
use crate::witness::{build_witness_sigma_alpha, WitnessOperator};

/// 2^{1-N/2}, the amplitude-level prefactor of the aggregate concurrence.
pub fn amplitude_prefactor(n_factors: usize) -> f64 {
    2.0_f64.powf(1.0 - n_factors as f64 / 2.0)
}

/// 2^{2-N}, the squared prefactor.
pub fn squared_prefactor(n_factors: usize) -> f64 {
    2.0_f64.powi(2 - n_factors as i32)
}

/// A split of the factors into a left set (canonically containing factor 0)
/// and its complement.
#[derive(Debug, Clone)]
pub struct Bipartition {
    mask: u64,
    left: Vec<usize>,
    right: Vec<usize>,
    left_dim: usize,
    right_dim: usize,
    /// full-space basis index -> left_idx * right_dim + right_idx
    index_map: Vec<usize>,
}

impl Bipartition {
    /// Build the cut whose left set is the given bitmask over factor
    /// indices. The mask must contain factor 0 and be a proper subset.
    pub fn new(space: &HilbertSpace, mask: u64) -> Result<Self> {
        let n = space.n_factors();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "bipartitions need at least two factors".into(),
            ));
        }
        let full = (1u64 << n) - 1;
        if mask & 1 == 0 || mask == 0 || mask >= full {
            return Err(Error::InvalidArgument(format!(
                "bipartition mask {mask:#b} must contain factor 0 and be a proper subset of {n} factors"
            )));
        }
        let dims = space.factor_dims();
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for i in 0..n {
            if mask >> i & 1 == 1 {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        let left_dim: usize = left.iter().map(|&i| dims[i]).product();
        let right_dim: usize = right.iter().map(|&i| dims[i]).product();

        let total = space.total_dim();
        let mut index_map = vec![0usize; total];
        let mut digits = vec![0usize; n];
        for (i, slot) in index_map.iter_mut().enumerate() {
            let mut rem = i;
            for k in (0..n).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            let mut l = 0usize;
            for &k in &left {
                l = l * dims[k] + digits[k];
            }
            let mut r = 0usize;
            for &k in &right {
                r = r * dims[k] + digits[k];
            }
            *slot = l * right_dim + r;
        }
        Ok(Self {
            mask,
            left,
            right,
            left_dim,
            right_dim,
            index_map,
        })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn left_dim(&self) -> usize {
        self.left_dim
    }

    pub fn right_dim(&self) -> usize {
        self.right_dim
    }

    /// The two-factor space with composite local dimensions.
    pub fn induced_space(&self) -> Result<HilbertSpace> {
        HilbertSpace::bipartite(self.left_dim, self.right_dim)
    }

    /// Reorder a full-space vector into (left, right) row-major order.
    pub fn permute_vector(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(v.len());
        for (i, &j) in self.index_map.iter().enumerate() {
            out[j] = v[i];
        }
        out
    }

    /// Conjugate a full-space matrix into (left, right) row-major order.
    pub fn permute_matrix(&self, m: &CMat) -> CMat {
        let n = m.nrows();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            let pi = self.index_map[i];
            for j in 0..n {
                out[(pi, self.index_map[j])] = m[(i, j)];
            }
        }
        out
    }
}

/// All cuts, ordered by ascending left-set bitmask. There are 2^{N-1} - 1.
pub fn enumerate_bipartitions(space: &HilbertSpace) -> Result<Vec<Bipartition>> {
    let n = space.n_factors();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "bipartitions need at least two factors".into(),
        ));
    }
    let full = (1u64 << n) - 1;
    let mut out = Vec::with_capacity((1usize << (n - 1)) - 1);
    for mask in (1..full).step_by(2) {
        out.push(Bipartition::new(space, mask)?);
    }
    Ok(out)
}

/// One element of the collective index: a cut together with a chi vector on
/// its induced bipartite space.
#[derive(Debug, Clone)]
pub struct ChiGamma {
    pub bipartition: Bipartition,
    pub chi: ChiVector,
}

impl ChiGamma {
    /// The chi vector re-expressed on the two-copy space of the full
    /// (unpermuted) system.
    pub fn full_two_copy_vector(&self) -> CVec {
        let map = &self.bipartition.index_map;
        let d = map.len();
        let chi = self.chi.vector();
        CVec::from_fn(d * d, |i, _| {
            let (i1, i2) = (i / d, i % d);
            chi[map[i1] * d + map[i2]]
        })
    }
}

fn check_cap(space: &HilbertSpace) -> Result<()> {
    let d = space.total_dim();
    if d * d > MAX_TWO_COPY_DIM {
        return Err(Error::InvalidArgument(format!(
            "two-copy dimension {} exceeds the dense-matrix cap {MAX_TWO_COPY_DIM}",
            d * d
        )));
    }
    Ok(())
}

/// Every (cut, chi) pair, cuts in mask order, chi lexicographic within each.
pub fn enumerate_chi_gamma(space: &HilbertSpace) -> Result<Vec<ChiGamma>> {
    check_cap(space)?;
    let mut out = Vec::new();
    for bip in enumerate_bipartitions(space)? {
        let induced = bip.induced_space()?;
        for chi in enumerate_chi(&induced)? {
            out.push(ChiGamma {
                bipartition: bip.clone(),
                chi,
            });
        }
    }
    Ok(out)
}

/// 2^{1-N/2} sqrt(sum over cuts of C_l^2) for a pure state.
pub fn multipartite_pure_concurrence(psi: &PureState) -> Result<f64> {
    let space = psi.space();
    let mut sum_sq = 0.0;
    for bip in enumerate_bipartitions(space)? {
        let amps = bip.permute_vector(psi.amplitudes());
        sum_sq += pure_concurrence_sq_from_amplitudes(&amps, bip.left_dim(), bip.right_dim());
    }
    Ok(amplitude_prefactor(space.n_factors()) * sum_sq.sqrt())
}

/// The always-computable bound from a normalized combination over gamma:
/// 2^{1-N/2} max{0, S_1 - sum_{l>1} S_l} of the matrix built from
/// |tau> = sum z*_gamma |chi_gamma>.
pub fn multipartite_lb_tau(rho: &DensityOperator, z: &TauVector) -> Result<BoundReport> {
    let gammas = enumerate_chi_gamma(rho.space())?;
    if gammas.len() != z.coefficients().len() {
        return Err(Error::InvalidArgument(format!(
            "tau has {} coefficients but the space has {} gamma vectors",
            z.coefficients().len(),
            gammas.len()
        )));
    }
    let d = rho.space().total_dim();
    let mut tau = CVec::zeros(d * d);
    for (coeff, gamma) in z.coefficients().iter().zip(&gammas) {
        tau += gamma.full_two_copy_vector() * coeff.conj();
    }
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let (value, raw) = t_matrix_from_vector(&dec, &tau)?.algebraic_bound();
    let pref = amplitude_prefactor(rho.space().n_factors());
    Ok(BoundReport {
        kind: BoundKind::MultipartiteLbTau,
        value: pref * value,
        raw_value: pref * raw,
        per_alpha: Vec::new(),
    })
}

/// 2^{1-N/2} sqrt(sum_gamma ALB_gamma(rho)^2).
pub fn multipartite_sum_sq_bound(rho: &DensityOperator) -> Result<BoundReport> {
    check_cap(rho.space())?;
    let pref_sq = squared_prefactor(rho.space().n_factors());
    let mut per_alpha = Vec::new();
    let mut sum_sq = 0.0;
    for bip in enumerate_bipartitions(rho.space())? {
        let induced = bip.induced_space()?;
        let rho_bi =
            DensityOperator::new_unchecked(induced.clone(), bip.permute_matrix(rho.matrix()));
        for chi in enumerate_chi(&induced)? {
            let report = algebraic_lower_bound(&rho_bi, &chi)?;
            sum_sq += report.value * report.value;
            per_alpha.push(AlphaTerm {
                mask: bip.mask(),
                index: chi.index(),
                raw: report.raw_value,
            });
        }
    }
    let scaled = pref_sq * sum_sq;
    Ok(BoundReport {
        kind: BoundKind::MultipartiteSumSq,
        value: scaled.sqrt(),
        raw_value: scaled,
        per_alpha,
    })
}

/// sqrt(2^{2-N} sum over gamma with nonnegative raw of tr(rho (x) rho V_gamma)).
pub fn multipartite_two_copy_bound(
    rho: &DensityOperator,
    weights: VWeights,
) -> Result<BoundReport> {
    check_cap(rho.space())?;
    let mut per_alpha = Vec::new();
    let mut kept = 0.0;
    for bip in enumerate_bipartitions(rho.space())? {
        let induced = bip.induced_space()?;
        let rho_bi = bip.permute_matrix(rho.matrix());
        let joint = kron(&rho_bi, &rho_bi);
        for chi in enumerate_chi(&induced)? {
            let v = build_v_alpha(&induced, chi.index(), weights)?;
            let tr = trace_product(&joint, v.matrix());
            if tr.im.abs() > TRACE_IMAG_TOL {
                return Err(Error::Internal(format!(
                    "two-copy expectation has imaginary residue {:.3e}",
                    tr.im
                )));
            }
            if tr.re >= 0.0 {
                kept += tr.re;
            }
            per_alpha.push(AlphaTerm {
                mask: bip.mask(),
                index: chi.index(),
                raw: tr.re,
            });
        }
    }
    let scaled = squared_prefactor(rho.space().n_factors()) * kept;
    Ok(BoundReport {
        kind: BoundKind::MultipartiteTwoCopy,
        value: scaled.sqrt(),
        raw_value: scaled,
        per_alpha,
    })
}

/// Per-gamma witnesses W_sigma_gamma = -2^{2-N} tr_2(I (x) sigma V_gamma) /
/// ALB_gamma(sigma) for every usable gamma, paired with their cuts.
pub fn build_multipartite_witnesses(
    sigma: &DensityOperator,
    weights: VWeights,
) -> Result<Vec<(Bipartition, WitnessOperator)>> {
    check_cap(sigma.space())?;
    let mut out = Vec::new();
    for bip in enumerate_bipartitions(sigma.space())? {
        let induced = bip.induced_space()?;
        let sigma_bi =
            DensityOperator::new_unchecked(induced.clone(), bip.permute_matrix(sigma.matrix()));
        for chi in enumerate_chi(&induced)? {
            match build_witness_sigma_alpha(&sigma_bi, chi.index(), weights) {
                Ok(w) => out.push((bip.clone(), w)),
                Err(Error::UnusableWitness(_)) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    if out.is_empty() {
        return Err(Error::UnusableWitness(
            "no gamma has a positive algebraic bound for sigma".into(),
        ));
    }
    Ok(out)
}

/// sqrt(sum over gamma with nonpositive expectation of tr(rho W_sigma_gamma)^2),
/// with the 2^{2-N} prefactor folded into each expectation.
pub fn multipartite_witness_bound(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    weights: VWeights,
) -> Result<BoundReport> {
    if rho.space() != sigma.space() {
        return Err(Error::InvalidArgument(
            "rho and sigma must live on the same space".into(),
        ));
    }
    let pref = squared_prefactor(rho.space().n_factors());
    let witnesses = build_multipartite_witnesses(sigma, weights)?;
    let mut per_alpha = Vec::new();
    let mut sum_sq = 0.0;
    for (bip, w) in &witnesses {
        let rho_bi = DensityOperator::new_unchecked(
            w.space().clone(),
            bip.permute_matrix(rho.matrix()),
        );
        let e = pref * w.expectation(&rho_bi)?;
        if e <= 0.0 {
            sum_sq += e * e;
        }
        per_alpha.push(AlphaTerm {
            mask: bip.mask(),
            index: w.alpha().expect("per-gamma witness carries its index"),
            raw: e,
        });
    }
    Ok(BoundReport {
        kind: BoundKind::MultipartiteWitness,
        value: sum_sq.sqrt(),
        raw_value: sum_sq,
        per_alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use crate::bounds::{pure_concurrence, sum_sq_algebraic_bound, two_copy_bound_valpha_sum};
    use crate::models::{ghz_state, phi_me, w_state};
    use crate::witness::{build_all_witnesses_alpha, witness_sq_sum_bound};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three_qubits() -> HilbertSpace {
        HilbertSpace::new(&[2, 2, 2]).unwrap()
    }

    #[test]
    fn bipartition_counts() {
        assert_eq!(
            enumerate_bipartitions(&HilbertSpace::bipartite(2, 3).unwrap())
                .unwrap()
                .len(),
            1
        );
        assert_eq!(enumerate_bipartitions(&three_qubits()).unwrap().len(), 3);
        assert_eq!(
            enumerate_bipartitions(&HilbertSpace::new(&[2, 2, 2, 2]).unwrap())
                .unwrap()
                .len(),
            7
        );
    }

    #[test]
    fn bipartition_masks_are_canonical() {
        let bips = enumerate_bipartitions(&three_qubits()).unwrap();
        let masks: Vec<u64> = bips.iter().map(|b| b.mask()).collect();
        assert_eq!(masks, vec![0b001, 0b011, 0b101]);
        for b in &bips {
            assert!(b.left().contains(&0));
            assert_eq!(b.left().len() + b.right().len(), 3);
        }
        assert!(Bipartition::new(&three_qubits(), 0b010).is_err());
        assert!(Bipartition::new(&three_qubits(), 0b111).is_err());
    }

    #[test]
    fn permutation_round_trips_against_reference() {
        // Permuting |i_0 i_1 i_2> of a 2x3x2 space under the cut {0,2}|{1}
        // must send digits (a, b, c) to left index a*2+c, right index b.
        let space = HilbertSpace::new(&[2, 3, 2]).unwrap();
        let bip = Bipartition::new(&space, 0b101).unwrap();
        assert_eq!(bip.left_dim(), 4);
        assert_eq!(bip.right_dim(), 3);
        let mut v = CVec::zeros(12);
        // |a=1, b=2, c=0> is full index 1*6 + 2*2 + 0 = 10.
        v[10] = Complex64::new(1.0, 0.0);
        let out = bip.permute_vector(&v);
        // left = 1*2+0 = 2, right = 2 -> 2*3+2 = 8.
        assert_eq!(out[8], Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn pure_concurrence_matches_known_states() {
        let ghz = ghz_state(3).unwrap();
        assert_abs_diff_eq!(
            multipartite_pure_concurrence(&ghz).unwrap(),
            (3.0_f64 / 2.0).sqrt(),
            epsilon = 1e-12
        );
        let w = w_state(3).unwrap();
        assert_abs_diff_eq!(
            multipartite_pure_concurrence(&w).unwrap(),
            (8.0_f64 / 6.0).sqrt(),
            epsilon = 1e-12
        );
        let product = PureState::basis_state(three_qubits(), 0).unwrap();
        assert_abs_diff_eq!(
            multipartite_pure_concurrence(&product).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn reduces_to_bipartite_concurrence_for_two_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = HilbertSpace::bipartite(3, 4).unwrap();
        for _ in 0..20 {
            let psi = crate::oracle::random_pure(&mut rng, &space);
            assert_abs_diff_eq!(
                multipartite_pure_concurrence(&psi).unwrap(),
                pure_concurrence(&psi).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn collective_index_identity_on_random_states() {
        // 2^{2-N} sum_gamma |<chi_gamma|Psi Psi>|^2 = C^2(Psi).
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for dims in [vec![2usize, 2, 2], vec![2, 2, 3]] {
            let space = HilbertSpace::new(&dims).unwrap();
            let gammas = enumerate_chi_gamma(&space).unwrap();
            for _ in 0..100 {
                let psi = crate::oracle::random_pure(&mut rng, &space);
                let mut sum = 0.0;
                for g in &gammas {
                    let psi_bi = g.bipartition.permute_vector(psi.amplitudes());
                    sum += g.chi.overlap(&psi_bi, &psi_bi).norm_sqr();
                }
                let c = multipartite_pure_concurrence(&psi).unwrap();
                assert_abs_diff_eq!(
                    squared_prefactor(dims.len()) * sum,
                    c * c,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn full_two_copy_embedding_agrees_with_permutation() {
        let space = HilbertSpace::new(&[2, 2, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for g in enumerate_chi_gamma(&space).unwrap() {
            let psi = crate::oracle::random_pure(&mut rng, &space);
            let psi_bi = g.bipartition.permute_vector(psi.amplitudes());
            let direct = g.chi.overlap(&psi_bi, &psi_bi);
            let full = g.full_two_copy_vector();
            let joint = crate::qstate::kron_vec(psi.amplitudes(), psi.amplitudes());
            let embedded = full.dotc(&joint);
            assert_abs_diff_eq!(direct.re, embedded.re, epsilon = 1e-12);
            assert_abs_diff_eq!(direct.im, embedded.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn lb_tau_reduces_to_bipartite_alb() {
        let space = HilbertSpace::bipartite(3, 3).unwrap();
        let rho = phi_me().to_density();
        let gammas = enumerate_chi_gamma(&space).unwrap();
        let target = crate::twocopy::ChiIndex::new(0, 1, 1, 2).unwrap();
        let pos = gammas
            .iter()
            .position(|g| g.chi.index() == target)
            .unwrap();
        let mut z = vec![Complex64::new(0.0, 0.0); gammas.len()];
        z[pos] = Complex64::new(1.0, 0.0);
        let report = multipartite_lb_tau(&rho, &TauVector::new(z).unwrap()).unwrap();
        let chi = ChiVector::new(&space, target).unwrap();
        let bipartite = algebraic_lower_bound(&rho, &chi).unwrap();
        assert_abs_diff_eq!(report.value, bipartite.value, epsilon = 1e-12);
        assert_abs_diff_eq!(report.value, 2.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn lb_tau_on_ghz_cut() {
        let rho = ghz_state(3).unwrap().to_density();
        let gammas = enumerate_chi_gamma(&three_qubits()).unwrap();
        // Cut 1|23: left mask 0b001, qubit-1 pair (0,1), composite (0,3).
        let target = crate::twocopy::ChiIndex::new(0, 1, 0, 3).unwrap();
        let pos = gammas
            .iter()
            .position(|g| g.bipartition.mask() == 0b001 && g.chi.index() == target)
            .unwrap();
        let mut z = vec![Complex64::new(0.0, 0.0); gammas.len()];
        z[pos] = Complex64::new(1.0, 0.0);
        let report = multipartite_lb_tau(&rho, &TauVector::new(z).unwrap()).unwrap();
        let c = multipartite_pure_concurrence(&ghz_state(3).unwrap()).unwrap();
        assert!(report.value > 0.0);
        assert!(report.value <= c + 1e-10);
        // Brute-force oracle: single eigenvector decomposition, so the
        // T matrix is 1x1 with entry <chi_gamma|Psi Psi> and the bound is
        // 2^{-1/2} |<chi_gamma|Psi Psi>| = 2^{-1/2} * 1.
        assert_abs_diff_eq!(report.value, 1.0 / 2.0_f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn lb_tau_vanishes_on_separable_mixtures() {
        let space = three_qubits();
        let rho = DensityOperator::maximally_mixed(space.clone());
        let gammas = enumerate_chi_gamma(&space).unwrap();
        let n = gammas.len();
        let z = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        let report = multipartite_lb_tau(&rho, &TauVector::new(z).unwrap()).unwrap();
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn sum_sq_reduces_to_bipartite() {
        let rho = phi_me().to_density();
        let multi = multipartite_sum_sq_bound(&rho).unwrap();
        let bi = sum_sq_algebraic_bound(&rho).unwrap();
        assert_abs_diff_eq!(multi.value, bi.value, epsilon = 1e-12);
    }

    #[test]
    fn sum_sq_on_noisy_ghz() {
        let ghz = ghz_state(3).unwrap();
        let c = multipartite_pure_concurrence(&ghz).unwrap();
        let pure = ghz.to_density();
        let report = multipartite_sum_sq_bound(&pure).unwrap();
        assert!(report.value > 0.0);
        assert!(report.value <= c + 1e-10);
        assert_eq!(report.per_alpha.len(), 18); // 3 cuts x (1 left pair x 6 right pairs)
        let mixed = DensityOperator::maximally_mixed(three_qubits());
        assert_eq!(multipartite_sum_sq_bound(&mixed).unwrap().value, 0.0);
    }

    #[test]
    fn gamma_count_for_three_qubits() {
        // Each cut is 2 x 4: 1 pair on the qubit side, 6 on the composite
        // side, so 3 cuts x 6 = 18 gamma terms.
        let gammas = enumerate_chi_gamma(&three_qubits()).unwrap();
        assert_eq!(gammas.len(), 18);
    }

    #[test]
    fn two_copy_reduces_to_bipartite() {
        let rho = crate::models::isotropic_state(3, 0.9).unwrap();
        let multi = multipartite_two_copy_bound(&rho, VWeights::v2()).unwrap();
        let bi = two_copy_bound_valpha_sum(&rho, VWeights::v2()).unwrap();
        assert_abs_diff_eq!(multi.value, bi.value, epsilon = 1e-12);
        assert_abs_diff_eq!(multi.raw_value, bi.raw_value, epsilon = 1e-12);
    }

    #[test]
    fn two_copy_on_ghz() {
        let ghz = ghz_state(3).unwrap();
        let c = multipartite_pure_concurrence(&ghz).unwrap();
        let report = multipartite_two_copy_bound(&ghz.to_density(), VWeights::even()).unwrap();
        assert!(report.value > 0.0);
        assert!(report.value <= c + 1e-10);
        let mixed = DensityOperator::maximally_mixed(three_qubits());
        assert_eq!(
            multipartite_two_copy_bound(&mixed, VWeights::even())
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn witness_reduces_to_bipartite() {
        let sigma = phi_me().to_density();
        let rho = crate::models::isotropic_state(3, 0.8).unwrap();
        let multi = multipartite_witness_bound(&rho, &sigma, VWeights::v2()).unwrap();
        let witnesses = build_all_witnesses_alpha(&sigma, VWeights::v2()).unwrap();
        let bi = witness_sq_sum_bound(&rho, &witnesses).unwrap();
        assert_abs_diff_eq!(multi.value, bi.value, epsilon = 1e-12);
    }

    #[test]
    fn witness_on_ghz() {
        let ghz = ghz_state(3).unwrap().to_density();
        let c = multipartite_pure_concurrence(&ghz_state(3).unwrap()).unwrap();
        let report = multipartite_witness_bound(&ghz, &ghz, VWeights::even()).unwrap();
        assert!(report.value > 0.0);
        assert!(report.value <= c + 1e-10);
        let separable = PureState::basis_state(three_qubits(), 5)
            .unwrap()
            .to_density();
        let r = multipartite_witness_bound(&separable, &ghz, VWeights::even()).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn witness_requires_usable_gamma() {
        let sigma = PureState::basis_state(three_qubits(), 0)
            .unwrap()
            .to_density();
        let rho = DensityOperator::maximally_mixed(three_qubits());
        assert!(matches!(
            multipartite_witness_bound(&rho, &sigma, VWeights::even()),
            Err(Error::UnusableWitness(_))
        ));
    }

    #[test]
    fn all_bounds_stay_below_pure_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let space = three_qubits();
        for _ in 0..15 {
            let psi = crate::oracle::random_pure(&mut rng, &space);
            let c = multipartite_pure_concurrence(&psi).unwrap();
            let rho = psi.to_density();
            let sq = multipartite_sum_sq_bound(&rho).unwrap().value;
            let tc = multipartite_two_copy_bound(&rho, VWeights::even())
                .unwrap()
                .value;
            assert!(sq <= c + 1e-10, "sum-sq {sq} > C {c}");
            assert!(tc <= c + 1e-10, "two-copy {tc} > C {c}");
            match multipartite_witness_bound(&rho, &rho, VWeights::even()) {
                Ok(r) => assert!(r.value <= c + 1e-10, "witness {} > C {c}", r.value),
                Err(Error::UnusableWitness(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let space = HilbertSpace::new(&[3, 3, 3, 3]).unwrap();
        let rho = DensityOperator::maximally_mixed(space);
        assert!(matches!(
            multipartite_sum_sq_bound(&rho),
            Err(Error::InvalidArgument(_))
        ));
    }
}
