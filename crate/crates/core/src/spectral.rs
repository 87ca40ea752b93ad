//! Graph-shift operators, their eigendecomposition, the graph Fourier
//! transform, and bandlimited-signal synthesis.
//!
//! A shift operator `S` is any `N x N` matrix whose off-diagonal entry
//! `(i, j)` can be nonzero only if the graph has an edge from `j` to `i`.
//! Every decomposition accepted here satisfies `S = V diag(lambda) V^-1`
//! within a relative Frobenius residual of 1e-10, with eigenvalues stored in
//! a deterministic order: decreasing modulus, ties broken by increasing phase
//! magnitude, then by the original solver index. Complex-conjugate pairs
//! therefore always appear negative-phase first.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::Eig;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

const RECONSTRUCTION_TOL: f64 = 1e-10;
const HERMITIAN_TOL: f64 = 1e-12;
const NORMALITY_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense graph-shift operator together with its admissible sparsity pattern.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    entries: Array2<Complex64>,
    pattern: Array2<bool>,
}

impl ShiftOperator {
    /// Build from a dense matrix, deriving the pattern from its nonzeros
    /// (diagonal positions are always admissible).
    pub fn from_dense(entries: Array2<Complex64>) -> Result<Self> {
        let (r, cdim) = entries.dim();
        if r != cdim || r == 0 {
            return Err(Error::DimensionMismatch {
                context: "shift operator",
                expected: r.max(1),
                actual: cdim,
            });
        }
        let mut pattern = Array2::from_elem((r, r), false);
        for ((i, j), v) in entries.indexed_iter() {
            if i == j || v.norm() > 0.0 {
                pattern[[i, j]] = true;
            }
        }
        Ok(Self { entries, pattern })
    }

    /// Build against an explicit admissible pattern; entries outside it must
    /// be zero.
    pub fn with_pattern(entries: Array2<Complex64>, pattern: Array2<bool>) -> Result<Self> {
        if entries.dim() != pattern.dim() {
            return Err(Error::DimensionMismatch {
                context: "shift pattern",
                expected: entries.nrows(),
                actual: pattern.nrows(),
            });
        }
        for ((i, j), v) in entries.indexed_iter() {
            if v.norm() > 0.0 && i != j && !pattern[[i, j]] {
                return Err(Error::InvalidPlan {
                    reason: format!("shift entry ({}, {}) is outside the sparsity pattern", i + 1, j + 1),
                });
            }
        }
        Ok(Self { entries, pattern })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            entries: linalg::identity(n),
            pattern: Array2::from_shape_fn((n, n), |(i, j)| i == j),
        }
    }

    /// Adjacency of the directed cycle: ones on the first cyclic subdiagonal,
    /// so one application moves the value at node i to node i+1.
    pub fn directed_cycle(n: usize) -> Self {
        let mut entries = Array2::zeros((n, n));
        for i in 0..n {
            entries[[(i + 1) % n, i]] = c(1.0);
        }
        Self::from_dense(entries).expect("cycle adjacency is square")
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn pattern(&self) -> &Array2<bool> {
        &self.pattern
    }

    pub fn apply_vec(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        self.entries.dot(x)
    }

    pub fn apply(&self, x: &GraphSignal) -> Result<GraphSignal> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "shift application",
                expected: self.n(),
                actual: x.len(),
            });
        }
        Ok(GraphSignal::new(self.apply_vec(&x.values)))
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.entries.view())
    }

    fn is_cycle_adjacency(&self) -> bool {
        let n = self.n();
        self.entries.indexed_iter().all(|((i, j), v)| {
            let expected = if i == (j + 1) % n { 1.0 } else { 0.0 };
            (v - c(expected)).norm() <= 1e-12
        })
    }
}

/// Signal on the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    pub values: Array1<Complex64>,
}

impl GraphSignal {
    pub fn new(values: Array1<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self {
            values: values.iter().map(|&v| c(v)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: Array1::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Frequency-domain view of a signal: full coefficient vector plus the
/// declared active support (1-based indices into the ordered eigenbasis).
#[derive(Debug, Clone)]
pub struct FrequencyRepresentation {
    pub coefficients: Array1<Complex64>,
    pub support: Vec<usize>,
}

impl FrequencyRepresentation {
    pub fn new(coefficients: Array1<Complex64>, support: Vec<usize>) -> Result<Self> {
        validate_support(&support, coefficients.len())?;
        Ok(Self {
            coefficients,
            support,
        })
    }

    pub fn bandwidth(&self) -> usize {
        self.support.len()
    }
}

pub(crate) fn validate_support(support: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n + 1];
    for &k in support {
        if k == 0 || k > n {
            return Err(Error::InvalidSupport {
                reason: format!("index {k} out of range 1..={n}"),
            });
        }
        if seen[k] {
            return Err(Error::InvalidSupport {
                reason: format!("index {k} repeated"),
            });
        }
        seen[k] = true;
    }
    Ok(())
}

/// How to diagonalize a shift operator.
#[derive(Debug, Clone)]
pub enum DecomposeMode {
    /// Hermitian solver; the shift must equal its conjugate transpose.
    Symmetric,
    /// Closed-form DFT basis of the directed-cycle adjacency.
    AnalyticCycle,
    /// Caller-provided eigenbasis; columns are normalized to unit 2-norm.
    UserSupplied {
        eigenvectors: Array2<Complex64>,
        eigenvalues: Array1<Complex64>,
    },
    /// General dense complex eigensolver.
    General,
}

/// Eigendecomposition `S = V diag(lambda) V^-1` in canonical order.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvectors: Array2<Complex64>,
    pub eigenvalues: Array1<Complex64>,
    pub inverse_eigenvectors: Array2<Complex64>,
    pub is_normal: bool,
    pub condition_number_v: f64,
    /// Permutation relative to the raw solver output: sorted position `k`
    /// holds raw eigenpair `ordering[k]`.
    pub ordering: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Columns of V at the (1-based) support indices.
    pub fn basis_columns(&self, support: &[usize]) -> Result<Array2<Complex64>> {
        validate_support(support, self.n())?;
        let idx: Vec<usize> = support.iter().map(|&k| k - 1).collect();
        Ok(self.eigenvectors.select(Axis(1), &idx))
    }

    /// Eigenvalues at the (1-based) support indices.
    pub fn support_eigenvalues(&self, support: &[usize]) -> Result<Array1<Complex64>> {
        validate_support(support, self.n())?;
        Ok(Array1::from_iter(
            support.iter().map(|&k| self.eigenvalues[k - 1]),
        ))
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// True when both the eigenvalues and the basis are real, in which case
    /// the whole sampling pipeline stays real-valued.
    pub fn is_real(&self) -> bool {
        let vi = self
            .eigenvectors
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        let li = self
            .eigenvalues
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        vi <= 1e-12 && li <= 1e-12
    }
}

/// Round to 12 significant decimal digits so that eigenvalues which are equal
/// up to solver round-off compare as ties.
fn quantize(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(11 - exp);
    (x * scale).round() / scale
}

/// Canonical eigenvalue order: decreasing modulus, then increasing phase
/// magnitude (negative phase first within a conjugate pair), then original
/// index. Modulus and phase are compared after 12-digit quantization.
fn eigen_order(values: &Array1<Complex64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (za, zb) = (values[a], values[b]);
        quantize(zb.norm())
            .total_cmp(&quantize(za.norm()))
            .then(quantize(za.arg().abs()).total_cmp(&quantize(zb.arg().abs())))
            .then(za.arg().is_sign_negative().cmp(&zb.arg().is_sign_negative()).reverse())
            .then(a.cmp(&b))
    });
    idx
}

fn apply_order(
    values: &Array1<Complex64>,
    vectors: &Array2<Complex64>,
) -> (Array1<Complex64>, Array2<Complex64>, Vec<usize>) {
    let order = eigen_order(values);
    let sorted_vals = Array1::from_iter(order.iter().map(|&i| values[i]));
    let sorted_vecs = vectors.select(Axis(1), &order);
    (sorted_vals, sorted_vecs, order)
}

fn normalize_columns(v: &mut Array2<Complex64>) {
    for mut col in v.axis_iter_mut(Axis(1)) {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|z| z / norm);
        }
    }
}

fn matrix_is_normal(s: &Array2<Complex64>) -> bool {
    let sh = linalg::conj_transpose(&s.view());
    let lhs = s.dot(&sh);
    let rhs = sh.dot(s);
    let scale = linalg::frobenius(&s.view()).powi(2).max(1.0);
    linalg::frobenius(&(lhs - rhs).view()) <= NORMALITY_TOL * scale
}

/// Re-orthonormalize eigenvector columns inside exactly-repeated eigenvalue
/// clusters (Gram-Schmidt). Needed so that a normal matrix handed to the
/// general solver still yields a unitary basis when eigenvalues repeat.
fn orthonormalize_clusters(values: &Array1<Complex64>, vectors: &mut Array2<Complex64>) {
    let n = values.len();
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).norm() <= 1e-10 * scale {
            end += 1;
        }
        if end - start > 1 {
            for j in start..end {
                let mut col = vectors.column(j).to_owned();
                for prev in start..j {
                    let p = vectors.column(prev);
                    let proj: Complex64 = p.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                    col = &col - &p.mapv(|z| z * proj);
                }
                let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    col.mapv_inplace(|z| z / norm);
                }
                vectors.column_mut(j).assign(&col);
            }
        }
        start = end;
    }
}

/// Diagonalize a shift operator.
///
/// The result always satisfies the reconstruction residual and the
/// condition-number gate; failing either raises
/// [`Error::DefectiveOrIllConditioned`].
pub fn decompose(shift: &ShiftOperator, mode: DecomposeMode) -> Result<SpectralDecomposition> {
    let n = shift.n();
    let s = shift.matrix();
    let is_normal = matrix_is_normal(s);

    let (values, vectors, inverse, ordering, condition) = match mode {
        DecomposeMode::Symmetric => {
            let dev = shift.hermitian_deviation();
            let scale = linalg::frobenius(&s.view()).max(1.0);
            if dev > HERMITIAN_TOL * scale {
                return Err(Error::NotHermitian { deviation: dev });
            }
            let (real_vals, vecs) = linalg::hermitian_eigen(s)?;
            let vals = real_vals.mapv(c);
            let (vals, vecs, order) = apply_order(&vals, &vecs);
            let inv = linalg::conj_transpose(&vecs.view());
            let cond = linalg::condition_number(&vecs)?;
            (vals, vecs, inv, order, cond)
        }
        DecomposeMode::AnalyticCycle => {
            if !shift.is_cycle_adjacency() {
                return Err(Error::NotDirectedCycle);
            }
            let nf = n as f64;
            let scale = 1.0 / nf.sqrt();
            let vals = Array1::from_iter((0..n).map(|k| {
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * k as f64 / nf)
            }));
            let vecs = Array2::from_shape_fn((n, n), |(i, j)| {
                Complex64::from_polar(
                    scale,
                    2.0 * std::f64::consts::PI * (i as f64) * (j as f64) / nf,
                )
            });
            let (vals, vecs, order) = apply_order(&vals, &vecs);
            let inv = linalg::conj_transpose(&vecs.view());
            (vals, vecs, inv, order, 1.0)
        }
        DecomposeMode::UserSupplied {
            eigenvectors,
            eigenvalues,
        } => {
            if eigenvectors.dim() != (n, n) || eigenvalues.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "user-supplied eigenbasis",
                    expected: n,
                    actual: eigenvalues.len(),
                });
            }
            let mut vecs = eigenvectors;
            normalize_columns(&mut vecs);
            let (vals, vecs, order) = apply_order(&eigenvalues, &vecs);
            let cond = linalg::condition_number(&vecs)?;
            if !cond.is_finite() || cond > linalg::CONDITION_GATE {
                return Err(Error::DefectiveOrIllConditioned {
                    residual: f64::NAN,
                    condition: cond,
                });
            }
            let (inv, _) = linalg::solve_mat_gated(&vecs, &linalg::identity(n))?;
            (vals, vecs, inv, order, cond)
        }
        DecomposeMode::General => {
            let (vals, mut vecs) = s
                .eig()
                .map_err(|_| Error::DefectiveOrIllConditioned {
                    residual: f64::NAN,
                    condition: f64::INFINITY,
                })?;
            normalize_columns(&mut vecs);
            if is_normal {
                orthonormalize_clusters(&vals, &mut vecs);
            }
            let (vals, vecs, order) = apply_order(&vals, &vecs);
            let cond = linalg::condition_number(&vecs)?;
            if !cond.is_finite() || cond > linalg::CONDITION_GATE {
                return Err(Error::DefectiveOrIllConditioned {
                    residual: f64::NAN,
                    condition: cond,
                });
            }
            let vh = linalg::conj_transpose(&vecs.view());
            let unitary_dev = linalg::frobenius(&(vh.dot(&vecs) - linalg::identity(n)).view());
            let inv = if is_normal && unitary_dev <= NORMALITY_TOL {
                vh
            } else {
                let (inv, _) = linalg::solve_mat_gated(&vecs, &linalg::identity(n))?;
                inv
            };
            (vals, vecs, inv, order, cond)
        }
    };

    let reconstructed = {
        let scaled = &vectors * &values.mapv(|l| l);
        scaled.dot(&inverse)
    };
    let denom = linalg::frobenius(&s.view()).max(f64::MIN_POSITIVE);
    let residual = linalg::frobenius(&(s - &reconstructed).view()) / denom;
    if residual > RECONSTRUCTION_TOL {
        return Err(Error::DefectiveOrIllConditioned {
            residual,
            condition,
        });
    }

    Ok(SpectralDecomposition {
        eigenvectors: vectors,
        eigenvalues: values,
        inverse_eigenvectors: inverse,
        is_normal,
        condition_number_v: condition,
        ordering,
    })
}

/// Graph Fourier transform `x_hat = V^-1 x`. The support is left empty; it
/// is declared by the caller or detected separately.
pub fn gft(decomp: &SpectralDecomposition, x: &GraphSignal) -> Result<FrequencyRepresentation> {
    if x.len() != decomp.n() {
        return Err(Error::DimensionMismatch {
            context: "gft",
            expected: decomp.n(),
            actual: x.len(),
        });
    }
    Ok(FrequencyRepresentation {
        coefficients: decomp.inverse_eigenvectors.dot(&x.values),
        support: Vec::new(),
    })
}

/// Inverse graph Fourier transform `x = V x_hat`.
pub fn igft(decomp: &SpectralDecomposition, xhat: &FrequencyRepresentation) -> Result<GraphSignal> {
    if xhat.coefficients.len() != decomp.n() {
        return Err(Error::DimensionMismatch {
            context: "igft",
            expected: decomp.n(),
            actual: xhat.coefficients.len(),
        });
    }
    Ok(GraphSignal::new(
        decomp.eigenvectors.dot(&xhat.coefficients),
    ))
}

/// Column-wise Vandermonde block of eigenvalue powers.
#[derive(Debug, Clone)]
pub struct VandermondeBlock {
    pub rows: usize,
    pub eigenvalue_basis: Array1<Complex64>,
    pub entries: Array2<Complex64>,
}

/// `rows x N` matrix with entry `(l, k) = lambda_k^(l-1)`, built by the row
/// recurrence so each row is exactly the previous one times the basis.
pub fn build_psi(decomp: &SpectralDecomposition, rows: usize) -> VandermondeBlock {
    let basis = decomp.eigenvalues.clone();
    let n = basis.len();
    let mut entries = Array2::zeros((rows, n));
    if rows > 0 {
        entries.row_mut(0).fill(c(1.0));
        for l in 1..rows {
            let prev = entries.row(l - 1).to_owned();
            let next = &prev * &basis;
            entries.row_mut(l).assign(&next);
        }
    }
    VandermondeBlock {
        rows,
        eigenvalue_basis: basis,
        entries,
    }
}

/// Frequency signature of a node: `upsilon_i = V^T e_i`, the i-th row of V
/// transposed (not conjugated). `node` is 1-based.
pub fn node_pattern(decomp: &SpectralDecomposition, node: usize) -> Result<Array1<Complex64>> {
    if node == 0 || node > decomp.n() {
        return Err(Error::IndexOutOfRange {
            context: "node pattern",
            index: node,
            max: decomp.n(),
        });
    }
    Ok(decomp.eigenvectors.row(node - 1).to_owned())
}

/// `x = V_K coeffs` for the given (1-based) support.
pub fn synthesize_bandlimited(
    decomp: &SpectralDecomposition,
    support: &[usize],
    coeffs: &Array1<Complex64>,
) -> Result<GraphSignal> {
    if coeffs.len() != support.len() {
        return Err(Error::DimensionMismatch {
            context: "bandlimited synthesis",
            expected: support.len(),
            actual: coeffs.len(),
        });
    }
    let vk = decomp.basis_columns(support)?;
    Ok(GraphSignal::new(vk.dot(coeffs)))
}

/// Random bandlimited signal with unit-variance coefficients on `support`.
pub fn random_bandlimited<R: Rng>(
    decomp: &SpectralDecomposition,
    support: &[usize],
    rng: &mut R,
) -> Result<(GraphSignal, Array1<Complex64>)> {
    let coeffs = crate::rng::gaussian_vec(rng, support.len(), decomp.is_real());
    let x = synthesize_bandlimited(decomp, support, &coeffs)?;
    Ok((x, coeffs))
}
