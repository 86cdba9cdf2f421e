//! Two-copy operators on H_A (x) H_B (x) H_A (x) H_B: symmetric and
//! antisymmetric projectors, the antisymmetric-subspace observable used to
//! express pure-state concurrence, the chi basis of its decomposition, the
//! measurable operators V_(1) and V_(2), masked V_alpha variants, and the
//! rank-two masking projectors.
//!
//! The canonical factor order for everything in this module is
//! (A1, B1, A2, B2), flattened row-major; constructions that are natural in
//! (A1, A2, B1, B2) order are permuted into the canonical order once, here.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{kron, permute_factors, CMat, CVec, HilbertSpace, C_ONE, C_ZERO};

/// Largest supported two-copy dimension (single-copy dimension squared).
pub const MAX_TWO_COPY_DIM: usize = 4096;

/// The label (x, y, p, q) of one chi basis vector: x < y index the A-side
/// antisymmetric pair, p < q the B-side pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChiIndex {
    pub x: usize,
    pub y: usize,
    pub p: usize,
    pub q: usize,
}

impl ChiIndex {
    pub fn new(x: usize, y: usize, p: usize, q: usize) -> Result<Self> {
        if x >= y || p >= q {
            return Err(Error::InvalidArgument(format!(
                "chi index needs x < y and p < q, got ({x},{y},{p},{q})"
            )));
        }
        Ok(Self { x, y, p, q })
    }

    pub fn checked_for(self, space: &HilbertSpace) -> Result<Self> {
        let (d_a, d_b) = bipartite_dims(space)?;
        if self.y >= d_a || self.q >= d_b {
            return Err(Error::InvalidArgument(format!(
                "chi index ({},{},{},{}) out of range for {}x{}",
                self.x, self.y, self.p, self.q, d_a, d_b
            )));
        }
        Ok(self)
    }

    /// Stable label used in CSV headers and witness file names.
    pub fn label(&self) -> String {
        format!("x{}y{}p{}q{}", self.x, self.y, self.p, self.q)
    }
}

/// One chi basis vector: (|xy> - |yx>)_A (|pq> - |qp>)_B on the two-copy
/// space in canonical (A1, B1, A2, B2) order. Squared norm is 4.
#[derive(Debug, Clone)]
pub struct ChiVector {
    index: ChiIndex,
    space: HilbertSpace,
    vector: CVec,
}

impl ChiVector {
    pub fn new(space: &HilbertSpace, index: ChiIndex) -> Result<Self> {
        let index = index.checked_for(space)?;
        let (d_a, d_b) = bipartite_dims(space)?;
        let d = d_a * d_b;
        let flat = |a1: usize, b1: usize, a2: usize, b2: usize| -> usize {
            (a1 * d_b + b1) * d + (a2 * d_b + b2)
        };
        let mut v = CVec::zeros(d * d);
        let ChiIndex { x, y, p, q } = index;
        v[flat(x, p, y, q)] += C_ONE;
        v[flat(x, q, y, p)] -= C_ONE;
        v[flat(y, p, x, q)] -= C_ONE;
        v[flat(y, q, x, p)] += C_ONE;
        Ok(Self {
            index,
            space: space.clone(),
            vector: v,
        })
    }

    pub fn index(&self) -> ChiIndex {
        self.index
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    /// <chi | psi (x) phi> for single-copy vectors psi, phi.
    pub fn overlap(&self, psi: &CVec, phi: &CVec) -> Complex64 {
        let d = psi.len();
        debug_assert_eq!(phi.len(), d);
        debug_assert_eq!(self.vector.len(), d * d);
        let mut acc = C_ZERO;
        for i in 0..d {
            for j in 0..d {
                let c = self.vector[i * d + j];
                if c != C_ZERO {
                    acc += c.conj() * psi[i] * phi[j];
                }
            }
        }
        acc
    }
}

/// Hermitian operator on two copies of a joint space, canonical factor order
/// (A1, B1, A2, B2) flattened row-major.
#[derive(Debug, Clone)]
pub struct TwoCopyOperator {
    joint_space: HilbertSpace,
    matrix: CMat,
}

impl TwoCopyOperator {
    pub fn joint_space(&self) -> &HilbertSpace {
        &self.joint_space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Factor list of the two-copy space: the single-copy factors twice.
    pub fn two_copy_space(&self) -> HilbertSpace {
        self.joint_space.tensor(&self.joint_space)
    }

    /// tr(rho (x) sigma O) with the imaginary residue returned alongside.
    pub fn expectation(&self, rho: &CMat, sigma: &CMat) -> Complex64 {
        trace_product(&kron(rho, sigma), &self.matrix)
    }
}

pub(crate) fn bipartite_dims(space: &HilbertSpace) -> Result<(usize, usize)> {
    if !space.is_bipartite() {
        return Err(Error::InvalidArgument(format!(
            "expected a bipartite space, got {} factors",
            space.n_factors()
        )));
    }
    Ok((space.factor_dims()[0], space.factor_dims()[1]))
}

fn check_two_copy_cap(space: &HilbertSpace) -> Result<()> {
    let d = space.total_dim();
    if d * d > MAX_TWO_COPY_DIM {
        return Err(Error::InvalidArgument(format!(
            "two-copy dimension {} exceeds the desk-scale cap {MAX_TWO_COPY_DIM}",
            d * d
        )));
    }
    Ok(())
}

/// tr(A B) without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = C_ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Swap operator S|ij> = |ji> on d (x) d.
fn swap_operator(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = C_ONE;
        }
    }
    s
}

/// Projector onto the antisymmetric (sign < 0) or symmetric (sign > 0)
/// subspace of two copies of a d-dimensional factor.
pub fn projector_sym_antisym(d: usize, sign: i8) -> CMat {
    let s = swap_operator(d);
    let id = CMat::identity(d * d, d * d);
    let half = Complex64::new(0.5, 0.0);
    if sign < 0 {
        (id - s) * half
    } else {
        (id + s) * half
    }
}

/// Permutation from construction order (A1, A2, B1, B2) into the canonical
/// (A1, B1, A2, B2) order.
fn canonicalize(m: CMat, d_a: usize, d_b: usize) -> CMat {
    permute_factors(&m, &[d_a, d_a, d_b, d_b], &[0, 2, 1, 3])
}

/// 4 P-^A (x) P-^B: the two-copy observable whose pure-state expectation is
/// the squared concurrence.
pub fn build_a(space: &HilbertSpace) -> Result<TwoCopyOperator> {
    let (d_a, d_b) = bipartite_dims(space)?;
    check_two_copy_cap(space)?;
    let pa = projector_sym_antisym(d_a, -1);
    let pb = projector_sym_antisym(d_b, -1);
    let m = canonicalize(kron(&pa, &pb) * Complex64::new(4.0, 0.0), d_a, d_b);
    Ok(TwoCopyOperator {
        joint_space: space.clone(),
        matrix: m,
    })
}

/// All chi vectors in lexicographic (x, y, p, q) order.
pub fn enumerate_chi(space: &HilbertSpace) -> Result<Vec<ChiVector>> {
    let (d_a, d_b) = bipartite_dims(space)?;
    check_two_copy_cap(space)?;
    let mut out = Vec::with_capacity(d_a * (d_a - 1) / 2 * d_b * (d_b - 1) / 2);
    for x in 0..d_a {
        for y in x + 1..d_a {
            for p in 0..d_b {
                for q in p + 1..d_b {
                    out.push(ChiVector::new(space, ChiIndex { x, y, p, q })?);
                }
            }
        }
    }
    Ok(out)
}

/// V_(1) = 4 (P-^A - P+^A) (x) P-^B or V_(2) = 4 P-^A (x) (P-^B - P+^B).
pub fn build_v(space: &HilbertSpace, which: u8) -> Result<TwoCopyOperator> {
    let (d_a, d_b) = bipartite_dims(space)?;
    check_two_copy_cap(space)?;
    let m = match which {
        1 => {
            let diff = projector_sym_antisym(d_a, -1) - projector_sym_antisym(d_a, 1);
            kron(&diff, &projector_sym_antisym(d_b, -1))
        }
        2 => {
            let diff = projector_sym_antisym(d_b, -1) - projector_sym_antisym(d_b, 1);
            kron(&projector_sym_antisym(d_a, -1), &diff)
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "V index must be 1 or 2, got {other}"
            )))
        }
    };
    Ok(TwoCopyOperator {
        joint_space: space.clone(),
        matrix: canonicalize(m * Complex64::new(4.0, 0.0), d_a, d_b),
    })
}

/// Convex weights (c1, c2) selecting between the masked V_(1) and V_(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VWeights {
    c1: f64,
    c2: f64,
}

impl VWeights {
    pub fn v1() -> Self {
        Self { c1: 1.0, c2: 0.0 }
    }

    pub fn v2() -> Self {
        Self { c1: 0.0, c2: 1.0 }
    }

    /// Even mix; the default weighting.
    pub fn even() -> Self {
        Self { c1: 0.5, c2: 0.5 }
    }

    pub fn mix(c1: f64, c2: f64) -> Result<Self> {
        if c1 < 0.0 || c2 < 0.0 || (c1 + c2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights must be nonnegative and sum to 1, got ({c1}, {c2})"
            )));
        }
        Ok(Self { c1, c2 })
    }

    pub fn which(which: u8) -> Result<Self> {
        match which {
            1 => Ok(Self::v1()),
            2 => Ok(Self::v2()),
            other => Err(Error::InvalidArgument(format!(
                "V index must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn label(&self) -> String {
        if self.c1 == 1.0 {
            "V1".into()
        } else if self.c2 == 1.0 {
            "V2".into()
        } else {
            format!("c1={};c2={}", self.c1, self.c2)
        }
    }
}

/// The rank-two masking projectors (M_A, M_B) for a chi index.
pub fn mask_projector(space: &HilbertSpace, index: ChiIndex) -> Result<(CMat, CMat)> {
    let index = index.checked_for(space)?;
    let (d_a, d_b) = bipartite_dims(space)?;
    let mut ma = CMat::zeros(d_a, d_a);
    ma[(index.x, index.x)] = C_ONE;
    ma[(index.y, index.y)] = C_ONE;
    let mut mb = CMat::zeros(d_b, d_b);
    mb[(index.p, index.p)] = C_ONE;
    mb[(index.q, index.q)] = C_ONE;
    Ok((ma, mb))
}

/// Diagonal of the two-copy mask M_A (x) M_B (x) M_A (x) M_B in canonical
/// order. The masks are diagonal projectors, so conjugation by the mask is an
/// elementwise operation on matrix entries.
pub(crate) fn mask_diagonal(space: &HilbertSpace, index: ChiIndex) -> Result<Vec<f64>> {
    let (ma, mb) = mask_projector(space, index)?;
    let (d_a, d_b) = bipartite_dims(space)?;
    let d = d_a * d_b;
    let single: Vec<f64> = (0..d)
        .map(|i| ma[(i / d_b, i / d_b)].re * mb[(i % d_b, i % d_b)].re)
        .collect();
    let mut diag = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            diag[i * d + j] = single[i] * single[j];
        }
    }
    Ok(diag)
}

pub(crate) fn apply_mask(m: &CMat, diag: &[f64]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (diag[i] * diag[j]))
}

/// V_alpha = c1 M V_(1) M + c2 M V_(2) M for the mask M of a chi index.
pub fn build_v_alpha(
    space: &HilbertSpace,
    index: ChiIndex,
    weights: VWeights,
) -> Result<TwoCopyOperator> {
    let diag = mask_diagonal(space, index)?;
    let v1 = build_v(space, 1)?;
    let v2 = build_v(space, 2)?;
    let m = apply_mask(v1.matrix(), &diag) * Complex64::new(weights.c1, 0.0)
        + apply_mask(v2.matrix(), &diag) * Complex64::new(weights.c2, 0.0);
    Ok(TwoCopyOperator {
        joint_space: space.clone(),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{kron_vec, PureState};
    use approx::assert_abs_diff_eq;

    fn space(d_a: usize, d_b: usize) -> HilbertSpace {
        HilbertSpace::bipartite(d_a, d_b).unwrap()
    }

    fn bell_vec() -> CVec {
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        CVec::from_vec(vec![s, C_ZERO, C_ZERO, s])
    }

    #[test]
    fn projector_traces() {
        for d in 2..=4 {
            let p_minus = projector_sym_antisym(d, -1);
            let p_plus = projector_sym_antisym(d, 1);
            assert_abs_diff_eq!(
                p_minus.trace().re,
                (d * (d - 1) / 2) as f64,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                p_plus.trace().re,
                (d * (d + 1) / 2) as f64,
                epsilon = 1e-12
            );
            // Idempotent, mutually orthogonal, complete.
            let err = (&p_minus * &p_minus - &p_minus).map(|z| z.norm()).max();
            assert!(err < 1e-13);
            let cross = (&p_plus * &p_minus).map(|z| z.norm()).max();
            assert!(cross < 1e-13);
            let sum = (&p_plus + &p_minus - CMat::identity(d * d, d * d))
                .map(|z| z.norm())
                .max();
            assert!(sum < 1e-13);
        }
    }

    #[test]
    fn singlet_projector_for_qubits() {
        let p_minus = projector_sym_antisym(2, -1);
        assert_abs_diff_eq!(p_minus.trace().re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn chi_count_per_dimension() {
        assert_eq!(enumerate_chi(&space(2, 2)).unwrap().len(), 1);
        assert_eq!(enumerate_chi(&space(3, 3)).unwrap().len(), 9);
        let chis = enumerate_chi(&space(4, 4)).unwrap();
        assert_eq!(chis.len(), 36);
        let diagonal = chis
            .iter()
            .filter(|c| c.index().x == c.index().p && c.index().y == c.index().q)
            .count();
        assert_eq!(diagonal, 6);
    }

    #[test]
    fn chi_vectors_norm_and_orthogonality() {
        let chis = enumerate_chi(&space(3, 3)).unwrap();
        for (i, a) in chis.iter().enumerate() {
            assert_abs_diff_eq!(a.vector().norm_squared(), 4.0, epsilon = 1e-13);
            for b in chis.iter().skip(i + 1) {
                assert_abs_diff_eq!(a.vector().dotc(b.vector()).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn chi_sum_reconstructs_a() {
        for (da, db) in [(2, 2), (2, 3), (3, 3)] {
            let sp = space(da, db);
            let a = build_a(&sp).unwrap();
            let d2 = sp.total_dim() * sp.total_dim();
            let mut acc = CMat::zeros(d2, d2);
            for chi in enumerate_chi(&sp).unwrap() {
                let v = chi.vector();
                acc += CMat::from_fn(d2, d2, |i, j| v[i] * v[j].conj());
            }
            let err = (acc - a.matrix()).map(|z| z.norm()).max();
            assert!(err < 1e-12, "A != sum chi chi^dag for {da}x{db}: {err:.3e}");
        }
    }

    #[test]
    fn a_expectation_on_bell_and_product() {
        let sp = space(2, 2);
        let a = build_a(&sp).unwrap();
        let bell = bell_vec();
        let two = kron_vec(&bell, &bell);
        let val = (two.adjoint() * a.matrix() * &two)[(0, 0)];
        assert_abs_diff_eq!(val.re, 1.0, epsilon = 1e-13);
        let prod = PureState::basis_state(sp, 0).unwrap();
        let two = kron_vec(prod.amplitudes(), prod.amplitudes());
        let val = (two.adjoint() * a.matrix() * &two)[(0, 0)];
        assert_abs_diff_eq!(val.re, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn v_is_hermitian_and_matches_c2_on_pure_states() {
        use rand::{Rng, SeedableRng};
        let sp = space(3, 3);
        let v1 = build_v(&sp, 1).unwrap();
        let v2 = build_v(&sp, 2).unwrap();
        for v in [&v1, &v2] {
            assert!(crate::qstate::hermiticity_deviation(v.matrix()) < 1e-13);
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut amps = CVec::from_fn(9, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            amps /= Complex64::new(amps.norm(), 0.0);
            let two = kron_vec(&amps, &amps);
            let a = build_a(&sp).unwrap();
            let c2 = (two.adjoint() * a.matrix() * &two)[(0, 0)].re;
            for v in [&v1, &v2] {
                let val = (two.adjoint() * v.matrix() * &two)[(0, 0)].re;
                assert_abs_diff_eq!(val, c2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mask_is_rank_two_projector() {
        let sp = space(3, 3);
        let idx = ChiIndex::new(0, 2, 0, 1).unwrap();
        let (ma, mb) = mask_projector(&sp, idx).unwrap();
        assert_abs_diff_eq!(ma.trace().re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mb.trace().re, 2.0, epsilon = 1e-15);
        let err = (&ma * &ma - &ma).map(|z| z.norm()).max();
        assert!(err < 1e-15);
        assert_abs_diff_eq!(ma[(0, 0)].re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(ma[(1, 1)].re, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(ma[(2, 2)].re, 1.0, epsilon = 0.0);
    }

    #[test]
    fn mask_is_identity_for_qubits() {
        let sp = space(2, 2);
        let idx = ChiIndex::new(0, 1, 0, 1).unwrap();
        let (ma, mb) = mask_projector(&sp, idx).unwrap();
        assert_eq!(ma, CMat::identity(2, 2));
        assert_eq!(mb, CMat::identity(2, 2));
        // So for qubits V_alpha is V_(i) itself.
        let v1 = build_v(&sp, 1).unwrap();
        let va = build_v_alpha(&sp, idx, VWeights::v1()).unwrap();
        let err = (v1.matrix() - va.matrix()).map(|z| z.norm()).max();
        assert!(err < 1e-14);
    }

    #[test]
    fn masked_a_is_chi_projector() {
        let sp = space(3, 3);
        for chi in enumerate_chi(&sp).unwrap() {
            let a = build_a(&sp).unwrap();
            let diag = mask_diagonal(&sp, chi.index()).unwrap();
            let masked = apply_mask(a.matrix(), &diag);
            let v = chi.vector();
            let d2 = v.len();
            let proj = CMat::from_fn(d2, d2, |i, j| v[i] * v[j].conj());
            let err = (masked - proj).map(|z| z.norm()).max();
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn v_alpha_support_is_masked() {
        let sp = space(3, 3);
        let idx = ChiIndex::new(0, 1, 1, 2).unwrap();
        let va = build_v_alpha(&sp, idx, VWeights::even()).unwrap();
        let diag = mask_diagonal(&sp, idx).unwrap();
        let m = va.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if diag[i] * diag[j] == 0.0 {
                    assert_eq!(m[(i, j)], C_ZERO);
                }
            }
        }
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(VWeights::mix(0.7, 0.7).is_err());
        assert!(VWeights::mix(-0.1, 1.1).is_err());
        assert!(VWeights::mix(0.25, 0.75).is_ok());
    }

    #[test]
    fn cap_enforced() {
        let sp = HilbertSpace::bipartite(9, 9).unwrap();
        assert!(build_a(&sp).is_err());
    }
}
