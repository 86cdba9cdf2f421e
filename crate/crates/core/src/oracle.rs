//! Independent brute-force verifiers: randomized decomposition searches that
//! upper-bound the concurrence (and confirm the closed-form algebraic bound
//! is a true minimum), Monte-Carlo checks of the two-copy inequality chain,
//! and seeded corpus generators for property tests.

use nalgebra::linalg::QR;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bounds::{
    pure_concurrence_sq_from_amplitudes, sum_sq_algebraic_bound, t_matrix, BoundKind,
};
use crate::error::Result;
use crate::multipartite::{amplitude_prefactor, enumerate_bipartitions, Bipartition};
use crate::qstate::{CMat, CVec, DensityOperator, HilbertSpace, PureState, DEFAULT_EIGEN_CUTOFF};
use crate::twocopy::{build_v_alpha, ChiIndex, ChiVector, VWeights};

/// Parameters of the randomized minimization searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    pub n_restarts: usize,
    pub n_iterations: usize,
    /// Number of decomposition members m; defaults to rank + 2.
    pub decomposition_size: Option<usize>,
    pub perturbation_scale: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_restarts: 8,
            n_iterations: 600,
            decomposition_size: None,
            perturbation_scale: 0.3,
        }
    }
}

impl SearchConfig {
    /// A lighter configuration for large seeded corpora.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            n_restarts: 4,
            n_iterations: 300,
            ..Self::default()
        }
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed m x r matrix with orthonormal columns (QR of a complex
/// Gaussian matrix, with the R-diagonal phases absorbed).
pub fn haar_isometry<R: Rng>(rng: &mut R, m: usize, r: usize) -> CMat {
    assert!(m >= r, "isometry needs m >= r");
    let g = CMat::from_fn(m, r, |_, _| gaussian(rng));
    orthonormalize(&g)
}

/// Haar-distributed d x d unitary.
pub fn haar_unitary<R: Rng>(rng: &mut R, d: usize) -> CMat {
    haar_isometry(rng, d, d)
}

/// Project an m x r matrix onto the nearest orthonormal-column frame via QR,
/// fixing the column phases so the map is deterministic.
fn orthonormalize(a: &CMat) -> CMat {
    let r = a.ncols();
    let qr = QR::new(a.clone());
    let mut q = qr.q();
    let rmat = qr.r();
    for k in 0..r {
        let rkk = rmat[(k, k)];
        if rkk.norm() > 1e-300 {
            let phase = rkk / rkk.norm();
            for i in 0..q.nrows() {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

/// A unitary supported entirely on span{|a>, |b>}: zero outside the 2x2
/// block, Haar on it. Satisfies M u M = u and u u^dag = u^dag u = M for the
/// projector M onto the pair.
pub fn masked_unitary<R: Rng>(rng: &mut R, d: usize, a: usize, b: usize) -> CMat {
    assert!(a < b && b < d);
    let block = haar_unitary(rng, 2);
    let mut u = CMat::zeros(d, d);
    u[(a, a)] = block[(0, 0)];
    u[(a, b)] = block[(0, 1)];
    u[(b, a)] = block[(1, 0)];
    u[(b, b)] = block[(1, 1)];
    u
}

/// Random pure state with Haar-invariant direction.
pub fn random_pure<R: Rng>(rng: &mut R, space: &HilbertSpace) -> PureState {
    let d = space.total_dim();
    let mut v = CVec::from_fn(d, |_, _| gaussian(rng));
    v /= Complex64::new(v.norm(), 0.0);
    PureState::new(space.clone(), v).expect("normalized Gaussian vector is a valid state")
}

/// Random rank-`rank` density operator: a mixture of Haar-random pure states
/// with squared-Gaussian weights.
pub fn random_density<R: Rng>(rng: &mut R, space: &HilbertSpace, rank: usize) -> DensityOperator {
    let d = space.total_dim();
    let mut weights: Vec<f64> = (0..rank)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            x * x
        })
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut m = CMat::zeros(d, d);
    for w in weights {
        let psi = random_pure(rng, space);
        m += psi.projector() * Complex64::new(w, 0.0);
    }
    DensityOperator::new(space.clone(), m).expect("convex mixture of projectors is a state")
}

/// Concurrence of a possibly subnormalized pure vector, aggregated over all
/// bipartitions with the 2^{1-N/2} prefactor (for two factors this is the
/// plain bipartite formula).
fn subnormalized_concurrence(amps: &CVec, bips: &[Bipartition], prefactor: f64) -> f64 {
    let mut sum_sq = 0.0;
    for bip in bips {
        let permuted = bip.permute_vector(amps);
        sum_sq += pure_concurrence_sq_from_amplitudes(&permuted, bip.left_dim(), bip.right_dim())
            .max(0.0);
    }
    prefactor * sum_sq.sqrt()
}

/// Greedy randomized minimization over m x r isometries. Restarts run in
/// parallel, each with its own RNG stream, and merge deterministically.
fn randomized_min_search<F>(cfg: &SearchConfig, m: usize, r: usize, objective: F) -> f64
where
    F: Fn(&CMat) -> f64 + Sync,
{
    let best_per_restart: Vec<f64> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(restart as u64 + 1);
            let mut best_u = haar_isometry(&mut rng, m, r);
            let mut best = objective(&best_u);
            let mut scale = cfg.perturbation_scale;
            let mut stall = 0usize;
            for _ in 0..cfg.n_iterations {
                let noise = CMat::from_fn(m, r, |_, _| gaussian(&mut rng))
                    * Complex64::new(scale, 0.0);
                let candidate = orthonormalize(&(&best_u + noise));
                let value = objective(&candidate);
                if value < best - 1e-15 {
                    best = value;
                    best_u = candidate;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall % 50 == 0 {
                        scale *= 0.5;
                    }
                }
            }
            best
        })
        .collect();
    best_per_restart.into_iter().fold(f64::INFINITY, f64::min)
}

/// Randomized upper bound on C(rho): the best decomposition average found by
/// isometry search over eigendecomposition mixings.
pub fn min_search_concurrence(rho: &DensityOperator, cfg: &SearchConfig) -> Result<f64> {
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let r = dec.len();
    let bips = enumerate_bipartitions(rho.space())?;
    let prefactor = amplitude_prefactor(rho.space().n_factors());
    let phi = dec.state_matrix();
    let objective = |u: &CMat| -> f64 {
        // Column i of phi * u^T is the subnormalized member sum_j u[i,j] phi_j.
        let psi = &phi * u.transpose();
        (0..u.nrows())
            .map(|i| {
                let amps = CVec::from(psi.column(i).clone_owned());
                subnormalized_concurrence(&amps, &bips, prefactor)
            })
            .sum()
    };
    if r == 1 {
        // Any decomposition of a pure state averages to C(psi) exactly.
        return Ok(objective(&CMat::identity(1, 1)));
    }
    let m = cfg.decomposition_size.unwrap_or(r + 2).max(r);
    Ok(randomized_min_search(cfg, m, r, objective))
}

/// Randomized search of min_U sum_i |[U T U^T]_ii|, the quantity whose
/// closed-form minimum is the algebraic bound's singular-value expression.
pub fn min_search_alb(rho: &DensityOperator, chi: &ChiVector, cfg: &SearchConfig) -> Result<f64> {
    let dec = rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF);
    let t = t_matrix(&dec, chi)?;
    let r = dec.len();
    let entries = t.entries().clone();
    let objective = |u: &CMat| -> f64 {
        let rotated = u * &entries * u.transpose();
        (0..u.nrows()).map(|i| rotated[(i, i)].norm()).sum()
    };
    if r == 1 {
        return Ok(objective(&CMat::identity(1, 1)));
    }
    let m = cfg.decomposition_size.unwrap_or(r + 2).max(r);
    Ok(randomized_min_search(cfg, m, r, objective))
}

/// Margin of one Monte-Carlo case; nonnegative means the checked inequality
/// holds for that case.
#[derive(Debug, Clone)]
pub struct CaseMargin {
    pub label: String,
    pub case_index: usize,
    pub margin: f64,
}

/// Outcome of a verification suite over a seeded corpus.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: &'static str,
    pub tolerance: f64,
    pub margins: Vec<CaseMargin>,
}

impl OracleReport {
    pub fn n_cases(&self) -> usize {
        self.margins.len()
    }

    pub fn violations(&self) -> Vec<&CaseMargin> {
        self.margins
            .iter()
            .filter(|c| c.margin < -self.tolerance)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn worst_margin(&self) -> f64 {
        self.margins
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        format!(
            "{}: {} cases, {} violations, worst margin {:.6e} (tolerance {:.1e})",
            self.name,
            self.n_cases(),
            self.violations().len(),
            self.worst_margin(),
            self.tolerance
        )
    }

    /// Per-case margins as CSV (deterministic for a fixed seed).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,label,margin\n");
        for c in &self.margins {
            out.push_str(&format!("{},{},{:.12e}\n", c.case_index, c.label, c.margin));
        }
        out
    }
}

/// Amplitudes of the appendix chain for one (psi, phi, alpha) sample:
/// the expectation formula and the three intermediate inequalities that
/// lead from |<chi|psi psi>||<chi|phi phi>| down to the two-copy expectation.
struct ChainSample {
    expectation: f64,
    lhs: f64,
    aa: f64,
    bb: Complex64,
    cc: Complex64,
    /// The factored cross term whose real part equals aa/2.
    cross: Complex64,
    d_p: f64,
    d_q: f64,
}

fn chain_sample(psi: &CVec, phi: &CVec, d_b: usize, alpha: ChiIndex) -> ChainSample {
    let at = |v: &CVec, i: usize, j: usize| v[i * d_b + j];
    let (x, y, p, q) = (alpha.x, alpha.y, alpha.p, alpha.q);
    let (pxp, pxq, pyp, pyq) = (at(psi, x, p), at(psi, x, q), at(psi, y, p), at(psi, y, q));
    let (fxp, fxq, fyp, fyq) = (at(phi, x, p), at(phi, x, q), at(phi, y, p), at(phi, y, q));

    let d_q = (pxq * fyq - pyq * fxq).norm_sqr();
    let d_p = (pxp * fyp - pyp * fxp).norm_sqr();
    let aa = -2.0 * (pxp * fyq * pxq.conj() * fyp.conj()).re
        - 2.0 * (pyp * fxq * pyq.conj() * fxp.conj()).re
        + 2.0 * (pxp * fyq * pyq.conj() * fxp.conj()).re
        + 2.0 * (pxq * fyp * pyp.conj() * fxq.conj()).re;
    let bb = (pxp * pyq - pxq * pyp) * (fxp * fyq - fxq * fyp);
    let cc = (pxq * fyq - pyq * fxq) * (pxp * fyp - pyp * fxp);
    let cross = (pxp * fyq - pyp * fxq) * (pyq * fxp - pxq * fyp).conj();
    ChainSample {
        expectation: 2.0 * (-d_q - d_p + aa),
        lhs: 4.0 * bb.norm(),
        aa,
        bb,
        cc,
        cross,
        d_p,
        d_q,
    }
}

/// Monte-Carlo verification of the pointwise two-copy inequality
/// |<chi_a|psi psi>| |<chi_a|phi phi>| >= <psi phi|V_a|psi phi> for V_(1)a,
/// V_(2)a, and random convex mixes, together with the intermediate amplitude
/// inequalities of its proof. The recorded margin per case is the minimum
/// over all sub-checks.
pub fn verify_inequality_21(
    n_samples: usize,
    spaces: &[HilbertSpace],
    seed: u64,
) -> Result<OracleReport> {
    let mut margins = Vec::with_capacity(n_samples * spaces.len());
    for (space_idx, space) in spaces.iter().enumerate() {
        let dims = space.factor_dims();
        let (d_a, d_b) = (dims[0], dims[1]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(space_idx as u64);
        for case_index in 0..n_samples {
            let psi = random_pure(&mut rng, space);
            let phi = random_pure(&mut rng, space);
            let x = rng.gen_range(0..d_a - 1);
            let y = rng.gen_range(x + 1..d_a);
            let p = rng.gen_range(0..d_b - 1);
            let q = rng.gen_range(p + 1..d_b);
            let alpha = ChiIndex::new(x, y, p, q)?;
            let chi = ChiVector::new(space, alpha)?;
            let c1: f64 = rng.gen_range(0.0..=1.0);

            let lhs = chi.overlap(psi.amplitudes(), psi.amplitudes()).norm()
                * chi.overlap(phi.amplitudes(), phi.amplitudes()).norm();
            let mut checks: Vec<(String, f64)> = Vec::new();
            let joint = crate::qstate::kron_vec(psi.amplitudes(), phi.amplitudes());
            for weights in [VWeights::v1(), VWeights::v2(), VWeights::mix(c1, 1.0 - c1)?] {
                let v = build_v_alpha(space, alpha, weights)?;
                let rhs = (joint.adjoint() * v.matrix() * &joint)[(0, 0)].re;
                checks.push((weights.label(), lhs - rhs));
            }

            // Amplitude-level chain for the second-copy form: the closed
            // expectation formula, then the three nested inequalities.
            let s = chain_sample(psi.amplitudes(), phi.amplitudes(), d_b, alpha);
            let v2 = build_v_alpha(space, alpha, VWeights::v2())?;
            let direct = (joint.adjoint() * v2.matrix() * &joint)[(0, 0)].re;
            checks.push((
                "expectation-formula".into(),
                1e-12 - (direct - s.expectation).abs(),
            ));
            checks.push((
                "chain-final".into(),
                2.0 * s.bb.norm() + s.d_q + s.d_p - s.aa,
            ));
            checks.push((
                "chain-triangle".into(),
                2.0 * s.bb.norm() + 2.0 * s.cc.norm() - s.aa,
            ));
            // Final step: aa/2 is exactly the real part of the factored
            // cross term, so Re(z) <= |z| closes the chain.
            checks.push((
                "chain-re-z-identity".into(),
                1e-12 - (s.cross.re - s.aa / 2.0).abs(),
            ));
            checks.push(("chain-re-z".into(), s.cross.norm() - s.aa / 2.0));
            checks.push(("chain-lhs".into(), 1e-12 - (s.lhs - lhs).abs()));

            let (worst_label, worst) = checks
                .into_iter()
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("margins are finite"))
                .expect("at least one check per case");

            margins.push(CaseMargin {
                label: format!("{d_a}x{d_b}:{}:{}", alpha.label(), worst_label),
                case_index,
                margin: worst,
            });
        }
    }
    Ok(OracleReport {
        name: "inequality-two-copy-pointwise",
        tolerance: 1e-12,
        margins,
    })
}

/// Checks the squared-sum theorem on a corpus: the searched upper bound on
/// C(rho), squared, must dominate the sum of squared algebraic bounds.
pub fn verify_sum_sq_theorem(
    corpus: &[DensityOperator],
    cfg: &SearchConfig,
) -> Result<OracleReport> {
    let mut margins = Vec::with_capacity(corpus.len());
    for (case_index, rho) in corpus.iter().enumerate() {
        let upper = min_search_concurrence(rho, cfg)?;
        let report = sum_sq_algebraic_bound(rho)?;
        debug_assert_eq!(report.kind, BoundKind::SumSq);
        margins.push(CaseMargin {
            label: format!(
                "dims{:?}-rank{}",
                rho.space().factor_dims(),
                rho.eigen_decomposition(DEFAULT_EIGEN_CUTOFF).len()
            ),
            case_index,
            margin: upper * upper + 1e-6 - report.value * report.value,
        });
    }
    Ok(OracleReport {
        name: "sum-sq-vs-searched-concurrence",
        tolerance: 0.0,
        margins,
    })
}

/// Seeded mixed-state corpus across the given spaces, cycling ranks 2..=4.
pub fn seeded_corpus(spaces: &[HilbertSpace], per_space: usize, seed: u64) -> Vec<DensityOperator> {
    let mut out = Vec::with_capacity(spaces.len() * per_space);
    for (i, space) in spaces.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1000 + i as u64);
        for k in 0..per_space {
            out.push(random_density(&mut rng, space, 2 + k % 3));
        }
    }
    out
}
