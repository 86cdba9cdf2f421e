//! Core state representations: labeled multi-factor Hilbert spaces, pure
//! states (subnormalized states are first-class), density operators, and
//! decompositions into subnormalized pure states, plus tensor products,
//! partial traces, factor permutations, and the text state-file format.

use std::fs;
use std::path::Path;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Entrywise Hermiticity tolerance for density operators.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues in [-EIGENVALUE_CLAMP, 0) are clamped to zero during
/// validation; anything more negative is a hard error.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;
/// Max-norm tolerance for decomposition reconstruction checks.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Default cutoff below which eigenvalues are dropped from decompositions.
pub const DEFAULT_EIGEN_CUTOFF: f64 = 1e-12;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An ordered list of local dimensions d_{A_1}, ..., d_{A_N}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: &[usize]) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidArgument(
                "a Hilbert space needs at least one factor".into(),
            ));
        }
        if let Some(&d) = factor_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidArgument(format!(
                "every factor dimension must be >= 2, got {d}"
            )));
        }
        Ok(Self {
            factor_dims: factor_dims.to_vec(),
        })
    }

    pub fn bipartite(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(&[d_a, d_b])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn is_bipartite(&self) -> bool {
        self.factor_dims.len() == 2
    }

    /// Concatenation of the factor lists.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        Self { factor_dims: dims }
    }
}

/// Row-major strides for a factor-dimension list.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat index map realizing a factor permutation: output factor `k` is input
/// factor `perm[k]`. Returns `map` with `map[new_flat] = old_flat`.
pub(crate) fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), perm.len());
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let in_strides = strides(dims);
    let total: usize = dims.iter().product();
    let mut map = vec![0usize; total];
    for (new_flat, slot) in map.iter_mut().enumerate() {
        let mut rem = new_flat;
        let mut old_flat = 0usize;
        for (k, &d) in out_dims.iter().enumerate() {
            let tail: usize = out_dims[k + 1..].iter().product();
            let digit = rem / tail.max(1) % d;
            rem %= tail.max(1);
            old_flat += digit * in_strides[perm[k]];
        }
        *slot = old_flat;
    }
    map
}

/// Reorder the tensor factors of a matrix living on `dims` (row-major).
pub fn permute_factors(matrix: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let map = permutation_index_map(dims, perm);
    let n = map.len();
    CMat::from_fn(n, n, |i, j| matrix[(map[i], map[j])])
}

/// Reorder the tensor factors of a vector living on `dims` (row-major).
pub fn permute_factors_vec(vector: &CVec, dims: &[usize], perm: &[usize]) -> CVec {
    let map = permutation_index_map(dims, perm);
    CVec::from_fn(map.len(), |i, _| vector[map[i]])
}

/// Kronecker product in row-major factor order.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let (na, nb) = (a.len(), b.len());
    CVec::from_fn(na * nb, |i, _| a[i / nb] * b[i % nb])
}

/// Partial trace of a (not necessarily positive) matrix over the factors not
/// listed in `keep`. `keep` must be a nonempty set of valid factor indices.
pub fn partial_trace_matrix(matrix: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n_factors = dims.len();
    let total: usize = dims.iter().product();
    if matrix.nrows() != total || matrix.ncols() != total {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{} but dims {:?} give total {}",
            matrix.nrows(),
            matrix.ncols(),
            dims,
            total
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set must be nonempty".into()));
    }
    if keep.iter().any(|&k| k >= n_factors) {
        return Err(Error::InvalidArgument(format!(
            "keep set {keep:?} has an index out of range for {n_factors} factors"
        )));
    }
    let traced: Vec<usize> = (0..n_factors).filter(|f| !keep.contains(f)).collect();
    let st = strides(dims);

    // Flat offsets contributed by each subset of factors; a full index is the
    // sum of a keep offset and a trace offset.
    let offsets = |subset: &[usize]| -> Vec<usize> {
        let sub_dims: Vec<usize> = subset.iter().map(|&f| dims[f]).collect();
        let count: usize = sub_dims.iter().product();
        let mut out = vec![0usize; count.max(1)];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut off = 0usize;
            for (k, &d) in sub_dims.iter().enumerate() {
                let tail: usize = sub_dims[k + 1..].iter().product();
                let digit = rem / tail.max(1) % d;
                rem %= tail.max(1);
                off += digit * st[subset[k]];
            }
            *slot = off;
        }
        out
    };
    let keep_off = offsets(&keep);
    let trace_off = offsets(&traced);

    let m = keep_off.len();
    let mut out = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = C_ZERO;
            for &t in &trace_off {
                acc += matrix[(keep_off[i] + t, keep_off[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// A pure state with amplitudes in the computational basis, row-major over
/// the factors. Norm-squared may be below one (subnormalized states absorb
/// decomposition probabilities).
#[derive(Debug, Clone)]
pub struct PureState {
    space: HilbertSpace,
    amplitudes: CVec,
}

impl PureState {
    pub fn new(space: HilbertSpace, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::InvalidArgument(format!(
                "amplitude vector has length {} but space has dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        let n2 = amplitudes.norm_squared();
        if !(n2 > 0.0 && n2 <= 1.0 + 1e-12) {
            return Err(Error::Validation(format!(
                "norm squared must lie in (0, 1], got {n2}"
            )));
        }
        Ok(Self { space, amplitudes })
    }

    /// Skips the norm check; used where zero-norm members can appear
    /// legitimately (isometry rotations of decompositions).
    pub(crate) fn new_unchecked(space: HilbertSpace, amplitudes: CVec) -> Self {
        Self { space, amplitudes }
    }

    pub fn basis_state(space: HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.total_dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {}",
                space.total_dim()
            )));
        }
        let mut amps = CVec::zeros(space.total_dim());
        amps[index] = C_ONE;
        Ok(Self {
            space,
            amplitudes: amps,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            space: self.space.tensor(&other.space),
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    /// |psi><psi| as a raw matrix.
    pub fn projector(&self) -> CMat {
        let n = self.amplitudes.len();
        CMat::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator::new_unchecked(self.space.clone(), self.projector())
    }
}

/// A positive-semidefinite Hermitian matrix with trace at most one.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    space: HilbertSpace,
    matrix: CMat,
}

impl DensityOperator {
    pub fn new(space: HilbertSpace, matrix: CMat) -> Result<Self> {
        Self::new_with_clamp(space, matrix, EIGENVALUE_CLAMP)
    }

    /// Like [`DensityOperator::new`] but with a caller-chosen clamp window
    /// for roundoff-negative eigenvalues (numerical integrators accumulate
    /// slightly larger negative parts than exact constructions do).
    pub fn new_with_clamp(space: HilbertSpace, matrix: CMat, clamp: f64) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{} but space has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite matrix entry".into()));
        }
        let herm_dev = hermiticity_deviation(&matrix);
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian (max deviation {herm_dev:.3e})"
            )));
        }
        let tr = matrix.trace();
        if tr.im.abs() > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "trace has imaginary part {:.3e}",
                tr.im
            )));
        }
        if tr.re > 1.0 + EIGENVALUE_CLAMP || tr.re <= 0.0 {
            return Err(Error::Validation(format!(
                "trace must lie in (0, 1], got {}",
                tr.re
            )));
        }
        // Hermitize exactly, then clamp roundoff-negative eigenvalues.
        let herm = CMat::from_fn(d, d, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) * 0.5);
        let eig = SymmetricEigen::new(herm.clone());
        let min_eig = eig.eigenvalues.min();
        if min_eig < -clamp {
            return Err(Error::Validation(format!(
                "negative eigenvalue {min_eig:.3e} beyond clamp tolerance"
            )));
        }
        let matrix = if min_eig < 0.0 {
            let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
            let mut rebuilt = CMat::zeros(d, d);
            for (k, &v) in vals.iter().enumerate() {
                if v > 0.0 {
                    let col = eig.eigenvectors.column(k);
                    for i in 0..d {
                        for j in 0..d {
                            rebuilt[(i, j)] += col[i] * col[j].conj() * v;
                        }
                    }
                }
            }
            rebuilt
        } else {
            herm
        };
        Ok(Self { space, matrix })
    }

    /// Constructor for matrices that are valid by construction (pure-state
    /// projectors, tensor products of valid operators).
    pub(crate) fn new_unchecked(space: HilbertSpace, matrix: CMat) -> Self {
        Self { space, matrix }
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        let m = CMat::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self { space, matrix: m }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            space: self.space.tensor(&other.space),
            matrix: kron(&self.matrix, &other.matrix),
        }
    }

    /// Trace out every factor not in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let reduced = partial_trace_matrix(&self.matrix, self.space.factor_dims(), keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let dims: Vec<usize> = keep.iter().map(|&k| self.space.factor_dims()[k]).collect();
        Ok(Self::new_unchecked(HilbertSpace::new(&dims)?, reduced))
    }

    /// Spectral decomposition into subnormalized eigenvectors sqrt(l_j)|v_j>,
    /// sorted by decreasing eigenvalue, dropping eigenvalues <= `cutoff`.
    pub fn eigen_decomposition(&self, cutoff: f64) -> Decomposition {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut states = Vec::new();
        for &k in &order {
            let lam = eig.eigenvalues[k];
            if lam <= cutoff {
                continue;
            }
            let mut amps = CVec::from(eig.eigenvectors.column(k).clone_owned());
            amps *= Complex64::new(lam.sqrt(), 0.0);
            states.push(PureState::new_unchecked(self.space.clone(), amps));
        }
        Decomposition {
            parent_space: self.space.clone(),
            states,
        }
    }
}

pub(crate) fn hermiticity_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// A set of subnormalized pure states whose projectors sum to a density
/// operator.
#[derive(Debug, Clone)]
pub struct Decomposition {
    parent_space: HilbertSpace,
    states: Vec<PureState>,
}

impl Decomposition {
    pub fn parent_space(&self) -> &HilbertSpace {
        &self.parent_space
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// D x r matrix with the subnormalized states as columns.
    pub fn state_matrix(&self) -> CMat {
        let d = self.parent_space.total_dim();
        let r = self.states.len();
        CMat::from_fn(d, r, |i, j| self.states[j].amplitudes()[i])
    }

    pub fn reconstruct(&self) -> CMat {
        let d = self.parent_space.total_dim();
        let mut acc = CMat::zeros(d, d);
        for s in &self.states {
            acc += s.projector();
        }
        acc
    }

    /// Mix the members with an isometry `u` (m x r, orthonormal columns):
    /// new member i is sum_j u[i,j] old_j. Yields a decomposition of the same
    /// operator with m members.
    pub fn rotate(&self, u: &CMat) -> Result<Decomposition> {
        let r = self.states.len();
        let m = u.nrows();
        if u.ncols() != r || m < r {
            return Err(Error::InvalidArgument(format!(
                "isometry must be m x {r} with m >= {r}, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let gram = u.adjoint() * u;
        let mut dev: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let expect = if i == j { C_ONE } else { C_ZERO };
                dev = dev.max((gram[(i, j)] - expect).norm());
            }
        }
        if dev > RECONSTRUCTION_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not an isometry (deviation {dev:.3e})"
            )));
        }
        let phi = self.state_matrix();
        let psi = &phi * u.transpose(); // column i = sum_j u[i,j] phi_j
        let states = (0..m)
            .map(|i| {
                PureState::new_unchecked(self.parent_space.clone(), CVec::from(psi.column(i).clone_owned()))
            })
            .collect();
        Ok(Decomposition {
            parent_space: self.parent_space.clone(),
            states,
        })
    }
}

/// A parsed state file.
#[derive(Debug, Clone)]
pub enum StateFile {
    Density(DensityOperator),
    Pure(PureState),
    Operator { space: HilbertSpace, matrix: CMat },
}

fn format_complex(z: Complex64) -> String {
    // 17 significant digits round-trips f64 exactly.
    format!("{:.16e}:{:.16e}", z.re, z.im)
}

fn parse_complex(tok: &str) -> Result<Complex64> {
    let (re, im) = tok
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("bad complex token `{tok}`")))?;
    let re: f64 = re
        .parse()
        .map_err(|_| Error::Format(format!("bad real part `{re}`")))?;
    let im: f64 = im
        .parse()
        .map_err(|_| Error::Format(format!("bad imaginary part `{im}`")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Format(format!("non-finite entry `{tok}`")));
    }
    Ok(Complex64::new(re, im))
}

fn render_matrix_file(header: &str, dims: &[usize], rows: &[Vec<Complex64>]) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    let dims_line: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    out.push_str(&dims_line.join(" "));
    out.push('\n');
    for row in rows {
        let toks: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_density(rho: &DensityOperator, path: &Path) -> Result<()> {
    let d = rho.space().total_dim();
    let rows: Vec<Vec<Complex64>> = (0..d)
        .map(|i| (0..d).map(|j| rho.matrix()[(i, j)]).collect())
        .collect();
    fs::write(path, render_matrix_file("qdm 1", rho.space().factor_dims(), &rows))?;
    Ok(())
}

pub fn write_pure(psi: &PureState, path: &Path) -> Result<()> {
    let rows = vec![psi.amplitudes().iter().copied().collect::<Vec<_>>()];
    fs::write(path, render_matrix_file("qsv 1", psi.space().factor_dims(), &rows))?;
    Ok(())
}

/// Write a Hermitian operator (e.g. a witness or two-copy operator).
pub fn write_operator(space: &HilbertSpace, matrix: &CMat, path: &Path) -> Result<()> {
    let d = space.total_dim();
    let rows: Vec<Vec<Complex64>> = (0..d)
        .map(|i| (0..d).map(|j| matrix[(i, j)]).collect())
        .collect();
    fs::write(path, render_matrix_file("qop 1", space.factor_dims(), &rows))?;
    Ok(())
}

pub fn read_state_file(path: &Path) -> Result<StateFile> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))?
        .trim();
    let kind = match header {
        "qdm 1" => 'd',
        "qsv 1" => 'v',
        "qop 1" => 'o',
        other => return Err(Error::Format(format!("unknown header `{other}`"))),
    };
    let dims_line = lines
        .next()
        .ok_or_else(|| Error::Format("missing dimensions line".into()))?;
    let dims: Vec<usize> = dims_line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad dimension `{t}`")))
        })
        .collect::<Result<_>>()?;
    let space = HilbertSpace::new(&dims)?;
    let total = space.total_dim();

    let parse_row = |line: &str, expected: usize| -> Result<Vec<Complex64>> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} entries on a line, got {}",
                toks.len()
            )));
        }
        toks.iter().map(|t| parse_complex(t)).collect()
    };

    if kind == 'v' {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format("missing amplitude line".into()))?;
        let amps = parse_row(line, total)?;
        let psi = PureState::new(space, CVec::from_vec(amps))?;
        return Ok(StateFile::Pure(psi));
    }

    let mut matrix = CMat::zeros(total, total);
    for i in 0..total {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing matrix row {i}")))?;
        let row = parse_row(line, total)?;
        for (j, z) in row.into_iter().enumerate() {
            matrix[(i, j)] = z;
        }
    }
    match kind {
        'd' => Ok(StateFile::Density(DensityOperator::new(space, matrix)?)),
        'o' => {
            let dev = hermiticity_deviation(&matrix);
            if dev > HERMITICITY_TOL {
                return Err(Error::Format(format!(
                    "operator is not Hermitian (deviation {dev:.3e})"
                )));
            }
            Ok(StateFile::Operator { space, matrix })
        }
        _ => unreachable!(),
    }
}
