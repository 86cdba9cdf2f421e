//! One-copy witness operators built from a reference state sigma: the
//! concurrence witness normalized by C(sigma), the per-alpha witnesses
//! normalized by the always-computable algebraic bound, the squared-sum
//! aggregation, and the decomposition into local observables with a
//! measurement-setting count.

use num_complex::Complex64;

use crate::bounds::{
    algebraic_lower_bound, pure_concurrence, AlphaTerm, BoundKind, BoundReport, TRACE_IMAG_TOL,
};
use crate::error::{Error, Result};
use crate::qstate::{
    hermiticity_deviation, kron, partial_trace_matrix, CMat, DensityOperator, HilbertSpace,
    PureState,
};
use crate::twocopy::{
    bipartite_dims, build_v, build_v_alpha, enumerate_chi, trace_product, ChiIndex, ChiVector,
    VWeights,
};

/// Witness normalizers below this are treated as unusable.
const NORMALIZER_TOL: f64 = 1e-12;

/// A Hermitian single-copy operator whose negative expectation lower-bounds
/// the concurrence (or, per alpha, the algebraic bound).
#[derive(Debug, Clone)]
pub struct WitnessOperator {
    space: HilbertSpace,
    matrix: CMat,
    normalizer: f64,
    alpha: Option<ChiIndex>,
    weights: VWeights,
    sigma_desc: String,
}

impl WitnessOperator {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn alpha(&self) -> Option<ChiIndex> {
        self.alpha
    }

    /// The weights of the two-copy operator this witness was reduced from.
    pub fn weights(&self) -> VWeights {
        self.weights
    }

    pub fn sigma_desc(&self) -> &str {
        &self.sigma_desc
    }

    /// CSV/file name for the witness: `Ws` for the aggregate witness,
    /// `Wsa_x{x}y{y}p{p}q{q}` for per-alpha ones.
    pub fn name(&self) -> String {
        match self.alpha {
            Some(idx) => format!("Wsa_{}", idx.label()),
            None => "Ws".into(),
        }
    }

    /// tr(rho W); the bound is on the negative of this.
    pub fn expectation(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.space() != &self.space {
            return Err(Error::InvalidArgument(
                "state and witness live on different spaces".into(),
            ));
        }
        let tr = trace_product(rho.matrix(), &self.matrix);
        if tr.im.abs() > TRACE_IMAG_TOL {
            return Err(Error::Internal(format!(
                "witness expectation has imaginary residue {:.3e}",
                tr.im
            )));
        }
        Ok(tr.re)
    }
}

/// -tr_2(I (x) sigma V) / normalizer on the single-copy space; the partial
/// trace runs over the second copy (factors 2 and 3 of the canonical order).
fn witness_matrix(
    space: &HilbertSpace,
    sigma: &CMat,
    v: &CMat,
    normalizer: f64,
    prefactor: f64,
) -> Result<CMat> {
    let d = space.total_dim();
    let i_sigma = kron(&CMat::identity(d, d), sigma);
    let product = i_sigma * v;
    let dims = [
        space.factor_dims(),
        space.factor_dims(),
    ]
    .concat();
    let reduced = partial_trace_matrix(&product, &dims, &[0, 1])?;
    let scale = Complex64::new(-prefactor / normalizer, 0.0);
    let w = reduced * scale;
    let dev = hermiticity_deviation(&w);
    if dev > 1e-11 {
        return Err(Error::Internal(format!(
            "witness matrix is not Hermitian (deviation {dev:.3e})"
        )));
    }
    Ok(w)
}

/// W_sigma for a pure reference state; the normalizer is the exact pure
/// concurrence C(sigma).
pub fn build_witness_sigma(sigma: &PureState, which: u8) -> Result<WitnessOperator> {
    let c = pure_concurrence(sigma)?;
    if c <= NORMALIZER_TOL {
        return Err(Error::UnusableWitness(
            "sigma is a product state; C(sigma) = 0".into(),
        ));
    }
    build_witness_sigma_with_bound(&sigma.to_density(), which, c)
}

/// W_sigma for an arbitrary sigma with a caller-supplied (upper bound on
/// the) concurrence. For mixed sigma the exact value is not computable, so
/// the caller must decide which bound to normalize with.
pub fn build_witness_sigma_with_bound(
    sigma: &DensityOperator,
    which: u8,
    c_sigma: f64,
) -> Result<WitnessOperator> {
    if c_sigma <= NORMALIZER_TOL {
        return Err(Error::UnusableWitness(format!(
            "concurrence bound for sigma must be positive, got {c_sigma}"
        )));
    }
    let v = build_v(sigma.space(), which)?;
    let matrix = witness_matrix(sigma.space(), sigma.matrix(), v.matrix(), c_sigma, 1.0)?;
    Ok(WitnessOperator {
        space: sigma.space().clone(),
        matrix,
        normalizer: c_sigma,
        alpha: None,
        weights: VWeights::which(which)?,
        sigma_desc: format!("sigma on {:?}", sigma.space().factor_dims()),
    })
}

/// W_sigma_alpha = -tr_2(I (x) sigma V_alpha) / ALB_alpha(sigma). The
/// normalizer is always computable; sigma may be mixed.
pub fn build_witness_sigma_alpha(
    sigma: &DensityOperator,
    alpha: ChiIndex,
    weights: VWeights,
) -> Result<WitnessOperator> {
    let chi = ChiVector::new(sigma.space(), alpha)?;
    let alb = algebraic_lower_bound(sigma, &chi)?.value;
    if alb <= NORMALIZER_TOL {
        return Err(Error::UnusableWitness(format!(
            "ALB_alpha(sigma) = 0 for alpha = {}",
            alpha.label()
        )));
    }
    let v = build_v_alpha(sigma.space(), alpha, weights)?;
    let matrix = witness_matrix(sigma.space(), sigma.matrix(), v.matrix(), alb, 1.0)?;
    Ok(WitnessOperator {
        space: sigma.space().clone(),
        matrix,
        normalizer: alb,
        alpha: Some(alpha),
        weights,
        sigma_desc: format!("sigma on {:?}", sigma.space().factor_dims()),
    })
}

/// Every usable per-alpha witness for sigma, in lexicographic alpha order.
/// Errors only when no alpha has a positive normalizer.
pub fn build_all_witnesses_alpha(
    sigma: &DensityOperator,
    weights: VWeights,
) -> Result<Vec<WitnessOperator>> {
    let mut out = Vec::new();
    for chi in enumerate_chi(sigma.space())? {
        match build_witness_sigma_alpha(sigma, chi.index(), weights) {
            Ok(w) => out.push(w),
            Err(Error::UnusableWitness(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::UnusableWitness(
            "no alpha has a positive algebraic bound for sigma".into(),
        ));
    }
    Ok(out)
}

/// C(rho) >= -tr(rho W_sigma), clamped at zero.
pub fn witness_bound(rho: &DensityOperator, w: &WitnessOperator) -> Result<BoundReport> {
    let raw = w.expectation(rho)?;
    let per_alpha = match w.alpha {
        Some(index) => vec![AlphaTerm {
            mask: 1,
            index,
            raw,
        }],
        None => Vec::new(),
    };
    Ok(BoundReport {
        kind: BoundKind::Witness,
        value: (-raw).max(0.0),
        raw_value: raw,
        per_alpha,
    })
}

/// sqrt(sum over alpha with tr(rho W_sigma_alpha) <= 0 of the squared
/// expectations), a lower bound on C(rho).
pub fn witness_sq_sum_bound(
    rho: &DensityOperator,
    witnesses: &[WitnessOperator],
) -> Result<BoundReport> {
    let mut sum_sq = 0.0;
    let mut per_alpha = Vec::new();
    for w in witnesses {
        let index = w.alpha.ok_or_else(|| {
            Error::InvalidArgument("squared-sum bound needs per-alpha witnesses".into())
        })?;
        let raw = w.expectation(rho)?;
        if raw <= 0.0 {
            sum_sq += raw * raw;
        }
        per_alpha.push(AlphaTerm {
            mask: 1,
            index,
            raw,
        });
    }
    Ok(BoundReport {
        kind: BoundKind::WitnessSqSum,
        value: sum_sq.sqrt(),
        raw_value: sum_sq,
        per_alpha,
    })
}

/// A local observable on one factor, used in measurement schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalObs {
    /// |l><l| basis projector.
    Proj(usize),
    /// |a><b| + |b><a|.
    Sigma1(usize, usize),
    /// -i(|a><b| - |b><a|).
    Sigma2(usize, usize),
}

impl LocalObs {
    pub fn label(&self) -> String {
        match self {
            LocalObs::Proj(l) => format!("P{l}"),
            LocalObs::Sigma1(a, b) => format!("s1_{a}{b}"),
            LocalObs::Sigma2(a, b) => format!("s2_{a}{b}"),
        }
    }

    fn matrix(&self, d: usize) -> CMat {
        let mut m = CMat::zeros(d, d);
        match *self {
            LocalObs::Proj(l) => m[(l, l)] = Complex64::new(1.0, 0.0),
            LocalObs::Sigma1(a, b) => {
                m[(a, b)] = Complex64::new(1.0, 0.0);
                m[(b, a)] = Complex64::new(1.0, 0.0);
            }
            LocalObs::Sigma2(a, b) => {
                m[(a, b)] = Complex64::new(0.0, -1.0);
                m[(b, a)] = Complex64::new(0.0, 1.0);
            }
        }
        m
    }
}

/// One weighted product observable in a schedule.
#[derive(Debug, Clone)]
pub struct ScheduleTerm {
    pub term_id: usize,
    pub coefficient: f64,
    pub obs_a: LocalObs,
    pub obs_b: LocalObs,
    pub setting_group: usize,
}

/// A decomposition of a witness into local product observables. Group 0 is
/// the shared joint-basis setting containing every projector-projector term;
/// each other distinct product observable is its own setting.
#[derive(Debug, Clone)]
pub struct MeasurementSchedule {
    pub terms: Vec<ScheduleTerm>,
    pub n_observables: usize,
    pub n_settings: usize,
}

impl MeasurementSchedule {
    /// Rebuild the witness matrix from the schedule terms.
    pub fn reconstruct(&self, space: &HilbertSpace) -> Result<CMat> {
        let (d_a, d_b) = bipartite_dims(space)?;
        let d = d_a * d_b;
        let mut acc = CMat::zeros(d, d);
        for t in &self.terms {
            acc += kron(&t.obs_a.matrix(d_a), &t.obs_b.matrix(d_b))
                * Complex64::new(t.coefficient, 0.0);
        }
        Ok(acc)
    }
}

const COEFF_TOL: f64 = 1e-13;

/// Decompose a witness into local observables: joint-basis projectors plus
/// sigma1/sigma2 products on index pairs.
pub fn local_decomposition(w: &WitnessOperator) -> Result<MeasurementSchedule> {
    let (d_a, d_b) = bipartite_dims(&w.space)?;
    let m = &w.matrix;
    let mut raw_terms: Vec<(f64, LocalObs, LocalObs)> = Vec::new();

    for a in 0..d_a {
        for b in 0..d_b {
            let row = a * d_b + b;
            // Diagonal: joint projector.
            let diag = m[(row, row)];
            if diag.norm() > COEFF_TOL {
                raw_terms.push((diag.re, LocalObs::Proj(a), LocalObs::Proj(b)));
            }
            // B-local off-diagonal within the same A index.
            for d2 in b + 1..d_b {
                let e = m[(row, a * d_b + d2)];
                if e.norm() > COEFF_TOL {
                    raw_terms.push((e.re, LocalObs::Proj(a), LocalObs::Sigma1(b, d2)));
                    raw_terms.push((-e.im, LocalObs::Proj(a), LocalObs::Sigma2(b, d2)));
                }
            }
            for c in a + 1..d_a {
                // A-local off-diagonal within the same B index.
                let e = m[(row, c * d_b + b)];
                if e.norm() > COEFF_TOL {
                    raw_terms.push((e.re, LocalObs::Sigma1(a, c), LocalObs::Proj(b)));
                    raw_terms.push((-e.im, LocalObs::Sigma2(a, c), LocalObs::Proj(b)));
                }
                // Doubly off-diagonal entries come in pairs (ab|cd), (ad|cb)
                // spanning the four sigma_i (x) sigma_j products.
                for d2 in b + 1..d_b {
                    let e1 = m[(row, c * d_b + d2)];
                    let e2 = m[(a * d_b + d2, c * d_b + b)];
                    if e1.norm() <= COEFF_TOL && e2.norm() <= COEFF_TOL {
                        continue;
                    }
                    let s11 = (e1.re + e2.re) / 2.0;
                    let s22 = (e2.re - e1.re) / 2.0;
                    let s12 = (e2.im - e1.im) / 2.0;
                    let s21 = -(e1.im + e2.im) / 2.0;
                    for (coeff, oa, ob) in [
                        (s11, LocalObs::Sigma1(a, c), LocalObs::Sigma1(b, d2)),
                        (s22, LocalObs::Sigma2(a, c), LocalObs::Sigma2(b, d2)),
                        (s12, LocalObs::Sigma1(a, c), LocalObs::Sigma2(b, d2)),
                        (s21, LocalObs::Sigma2(a, c), LocalObs::Sigma1(b, d2)),
                    ] {
                        raw_terms.push((coeff, oa, ob));
                    }
                }
            }
        }
    }

    raw_terms.retain(|(c, _, _)| c.abs() > COEFF_TOL);

    let mut terms = Vec::with_capacity(raw_terms.len());
    let mut groups: Vec<(LocalObs, LocalObs)> = Vec::new();
    for (term_id, (coefficient, obs_a, obs_b)) in raw_terms.into_iter().enumerate() {
        let setting_group = if matches!((obs_a, obs_b), (LocalObs::Proj(_), LocalObs::Proj(_))) {
            0
        } else {
            match groups.iter().position(|&g| g == (obs_a, obs_b)) {
                Some(k) => k + 1,
                None => {
                    groups.push((obs_a, obs_b));
                    groups.len()
                }
            }
        };
        terms.push(ScheduleTerm {
            term_id,
            coefficient,
            obs_a,
            obs_b,
            setting_group,
        });
    }

    let has_projector_group = terms.iter().any(|t| t.setting_group == 0);
    let n_settings = groups.len() + usize::from(has_projector_group);
    Ok(MeasurementSchedule {
        n_observables: terms.len(),
        n_settings,
        terms,
    })
}

/// Distinct observable and setting counts across a family of witnesses
/// measured together (projector terms of all members share one setting).
pub fn combined_counts(schedules: &[MeasurementSchedule]) -> (usize, usize) {
    use std::collections::HashSet;
    let mut observables: HashSet<(LocalObs, LocalObs)> = HashSet::new();
    let mut has_projectors = false;
    let mut settings: HashSet<(LocalObs, LocalObs)> = HashSet::new();
    for s in schedules {
        for t in &s.terms {
            observables.insert((t.obs_a, t.obs_b));
            if matches!((t.obs_a, t.obs_b), (LocalObs::Proj(_), LocalObs::Proj(_))) {
                has_projectors = true;
            } else {
                settings.insert((t.obs_a, t.obs_b));
            }
        }
    }
    (observables.len(), settings.len() + usize::from(has_projectors))
}
