//! Concurrence for pure bipartite states, the purely algebraic lower bounds
//! computed from singular values of the symmetric T-matrix, their
//! sum-of-squares aggregation, and the two-copy measurable bounds.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{
    kron, CMat, CVec, Decomposition, DensityOperator, PureState,
    DEFAULT_EIGEN_CUTOFF,
};
use crate::twocopy::{
    build_v, build_v_alpha, enumerate_chi, trace_product, ChiIndex, ChiVector, VWeights,
};

/// Imaginary residue allowed on traces of Hermitian observables before the
/// computation is declared internally inconsistent.
pub const TRACE_IMAG_TOL: f64 = 1e-10;

/// Which aggregation rule produced a bound value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    AlbAlpha,
    LbTau,
    SumSq,
    TwoCopyVi,
    TwoCopyValphaSum,
    Witness,
    WitnessSqSum,
    MultipartiteLbTau,
    MultipartiteSumSq,
    MultipartiteTwoCopy,
    MultipartiteWitness,
}

impl BoundKind {
    pub fn label(&self) -> &'static str {
        match self {
            BoundKind::AlbAlpha => "ALB_alpha",
            BoundKind::LbTau => "LB_tau",
            BoundKind::SumSq => "sum_sq_alb",
            BoundKind::TwoCopyVi => "two_copy_Vi",
            BoundKind::TwoCopyValphaSum => "two_copy_Valpha_sum",
            BoundKind::Witness => "witness",
            BoundKind::WitnessSqSum => "witness_sq_sum",
            BoundKind::MultipartiteLbTau => "multi_LB_tau",
            BoundKind::MultipartiteSumSq => "multi_sum_sq",
            BoundKind::MultipartiteTwoCopy => "multi_two_copy",
            BoundKind::MultipartiteWitness => "multi_witness",
        }
    }
}

/// One per-alpha raw term of a bound. `mask` is the bipartition bitmask for
/// multipartite bounds (1 for plain bipartite ones, where the left side is
/// factor 0).
#[derive(Debug, Clone, Copy)]
pub struct AlphaTerm {
    pub mask: u64,
    pub index: ChiIndex,
    pub raw: f64,
}

/// A concurrence lower bound with its pre-clamp raw value and, where
/// applicable, the per-alpha breakdown feeding the aggregation.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub raw_value: f64,
    pub per_alpha: Vec<AlphaTerm>,
}

/// C(psi) = sqrt(2 [<psi|psi>^2 - tr rho_r^2]) for a bipartite pure state,
/// subnormalized states included.
pub fn pure_concurrence(psi: &PureState) -> Result<f64> {
    let dims = psi.space().factor_dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "pure_concurrence needs a bipartite state, got {} factors",
            dims.len()
        )));
    }
    Ok(pure_concurrence_sq_from_amplitudes(psi.amplitudes(), dims[0], dims[1]).max(0.0).sqrt())
}

/// Squared concurrence from raw amplitudes reshaped d_a x d_b; shared with
/// the decomposition searches where the allocation overhead matters.
pub(crate) fn pure_concurrence_sq_from_amplitudes(amps: &CVec, d_a: usize, d_b: usize) -> f64 {
    let n2: f64 = amps.norm_squared();
    // tr rho_r^2 = ||A A^dag||_F^2 for A = reshape(psi, d_a x d_b).
    let mut purity = 0.0;
    for i in 0..d_a {
        for k in 0..d_a {
            let mut entry = Complex64::new(0.0, 0.0);
            for j in 0..d_b {
                entry += amps[i * d_b + j] * amps[k * d_b + j].conj();
            }
            purity += entry.norm_sqr();
        }
    }
    2.0 * (n2 * n2 - purity)
}

/// The complex symmetric matrix T_jk = <chi | phi_j (x) phi_k> of a
/// decomposition, or its tau-weighted combination.
#[derive(Debug, Clone)]
pub struct TMatrix {
    entries: CMat,
}

impl TMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        let n = entries.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                dev = dev.max((entries[(i, j)] - entries[(j, i)]).norm());
            }
        }
        if dev > 1e-10 {
            return Err(Error::Internal(format!(
                "T-matrix is not symmetric (deviation {dev:.3e})"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.nrows()
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<f64> {
        let svd = SVD::new(self.entries.clone(), false, false);
        let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// max{0, S_1 - sum_{l>1} S_l} together with the unclamped value.
    pub fn algebraic_bound(&self) -> (f64, f64) {
        let s = self.singular_values();
        let raw = match s.split_first() {
            Some((first, rest)) => first - rest.iter().sum::<f64>(),
            None => 0.0,
        };
        (raw.max(0.0), raw)
    }
}

/// T_jk = <tau | phi_j (x) phi_k> for a two-copy vector `tau` (a chi vector
/// or any normalized combination of them).
pub fn t_matrix_from_vector(dec: &Decomposition, tau: &CVec) -> Result<TMatrix> {
    let d = dec.parent_space().total_dim();
    if tau.len() != d * d {
        return Err(Error::InvalidArgument(format!(
            "two-copy vector has length {}, expected {}",
            tau.len(),
            d * d
        )));
    }
    // <tau|phi_j phi_k> = phi_j^T X phi_k with X_ab = conj(tau[a*d+b]).
    let x = CMat::from_fn(d, d, |a, b| tau[a * d + b].conj());
    let phi = dec.state_matrix();
    let t = phi.transpose() * x * &phi;
    TMatrix::new(t)
}

pub fn t_matrix(dec: &Decomposition, chi: &ChiVector) -> Result<TMatrix> {
    t_matrix_from_vector(dec, chi.vector())
}

/// Normalized coefficients z_alpha over the lexicographic chi order.
#[derive(Debug, Clone)]
pub struct TauVector {
    coefficients: Vec<Complex64>,
}

impl TauVector {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        let n2: f64 = coefficients.iter().map(|z| z.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "tau coefficients must have unit norm, got |z|^2 = {n2}"
            )));
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// |tau> = sum_alpha z*_alpha |chi_alpha> over a chi list.
    pub fn vector(&self, chis: &[ChiVector]) -> Result<CVec> {
        if chis.len() != self.coefficients.len() {
            return Err(Error::InvalidArgument(format!(
                "tau has {} coefficients but the space has {} chi vectors",
                self.coefficients.len(),
                chis.len()
            )));
        }
        let mut v = CVec::zeros(chis[0].vector().len());
        for (z, chi) in self.coefficients.iter().zip(chis) {
            v += chi.vector() * z.conj();
        }
        Ok(v)
    }
}

/// ALB_alpha(rho): the purely algebraic bound for a single chi vector.
pub fn algebraic_lower_bound(rho: &DensityOperator, chi: &ChiVector) -> Result<BoundReport> {
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let (value, raw) = t_matrix(&dec, chi)?.algebraic_bound();
    Ok(BoundReport {
        kind: BoundKind::AlbAlpha,
        value,
        raw_value: raw,
        per_alpha: vec![AlphaTerm {
            mask: 1,
            index: chi.index(),
            raw,
        }],
    })
}

/// LB_tau(rho) for a normalized combination of chi vectors.
pub fn lb_tau(rho: &DensityOperator, tau: &TauVector) -> Result<BoundReport> {
    let chis = enumerate_chi(rho.space())?;
    let tau_vec = tau.vector(&chis)?;
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let (value, raw) = t_matrix_from_vector(&dec, &tau_vec)?.algebraic_bound();
    Ok(BoundReport {
        kind: BoundKind::LbTau,
        value,
        raw_value: raw,
        per_alpha: Vec::new(),
    })
}

/// sqrt(sum_alpha ALB_alpha(rho)^2), a lower bound on C(rho).
pub fn sum_sq_algebraic_bound(rho: &DensityOperator) -> Result<BoundReport> {
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let mut per_alpha = Vec::new();
    let mut sum_sq = 0.0;
    for chi in enumerate_chi(rho.space())? {
        let (value, raw) = t_matrix(&dec, &chi)?.algebraic_bound();
        sum_sq += value * value;
        per_alpha.push(AlphaTerm {
            mask: 1,
            index: chi.index(),
            raw,
        });
    }
    Ok(BoundReport {
        kind: BoundKind::SumSq,
        value: sum_sq.sqrt(),
        raw_value: sum_sq,
        per_alpha,
    })
}

fn real_trace(value: Complex64) -> Result<f64> {
    if value.im.abs() > TRACE_IMAG_TOL {
        return Err(Error::Internal(format!(
            "trace has imaginary residue {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// C^2(rho) >= tr(rho (x) rho V_(i)); reported as sqrt(max(0, raw)).
pub fn two_copy_bound_vi(rho: &DensityOperator, which: u8) -> Result<BoundReport> {
    let v = build_v(rho.space(), which)?;
    let raw = real_trace(v.expectation(rho.matrix(), rho.matrix()))?;
    Ok(BoundReport {
        kind: BoundKind::TwoCopyVi,
        value: raw.max(0.0).sqrt(),
        raw_value: raw,
        per_alpha: Vec::new(),
    })
}

/// Per-alpha expectations tr(rho (x) rho V_alpha); the bound keeps only the
/// nonnegative terms.
pub fn two_copy_bound_valpha_sum(
    rho: &DensityOperator,
    weights: VWeights,
) -> Result<BoundReport> {
    let joint = kron(rho.matrix(), rho.matrix());
    let mut per_alpha = Vec::new();
    let mut kept = 0.0;
    for chi in enumerate_chi(rho.space())? {
        let v = build_v_alpha(rho.space(), chi.index(), weights)?;
        let raw = real_trace(trace_product(&joint, v.matrix()))?;
        if raw >= 0.0 {
            kept += raw;
        }
        per_alpha.push(AlphaTerm {
            mask: 1,
            index: chi.index(),
            raw,
        });
    }
    Ok(BoundReport {
        kind: BoundKind::TwoCopyValphaSum,
        value: kept.sqrt(),
        raw_value: kept,
        per_alpha,
    })
}

/// tr(rho (x) sigma V_(i)), a lower bound on C(rho) C(sigma).
pub fn cross_expectation(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    which: u8,
) -> Result<f64> {
    if rho.space() != sigma.space() {
        return Err(Error::InvalidArgument(
            "cross expectation needs both states on the same space".into(),
        ));
    }
    let v = build_v(rho.space(), which)?;
    real_trace(v.expectation(rho.matrix(), sigma.matrix()))
}
