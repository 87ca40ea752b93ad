//! Joint recovery and frequency-support identification when the active
//! frequencies are unknown.
//!
//! The sensing matrix of aggregation sampling, `C Psi diag(upsilon_i)`, has
//! a Vandermonde-times-diagonal structure, so with `2K` structured
//! observations any `2K` of its columns form an invertible matrix (full
//! spark) and a K-sparse coefficient vector is identifiable. This module
//! carries the exact 0-norm search (the oracle for everything else), the
//! identifiability checker, a proximal-gradient 1-norm relaxation, and the
//! coherence bound.

use itertools::Itertools;
use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sampling::{SelectionPlan, DEFAULT_TOL_EIG, DEFAULT_TOL_UPSILON};
use crate::spectral::{build_psi, node_pattern, SpectralDecomposition};

/// Relative residual below which a support is accepted as an exact fit.
pub const L0_RESIDUAL_TOL: f64 = 1e-8;
/// Relative residual for declaring the polished 1-norm solution exact.
pub const L1_POLISH_TOL: f64 = 1e-6;

/// Linear observation of an unknown-support bandlimited signal:
/// `b = C Psi diag(upsilon_i) x_hat`.
#[derive(Debug, Clone)]
pub struct SensingSystem {
    /// `m x N` sensing matrix.
    pub matrix: Array2<Complex64>,
    /// The m observed samples.
    pub samples: Array1<Complex64>,
    pub node: usize,
    pub plan: SelectionPlan,
}

impl SensingSystem {
    /// Assemble the system for aggregation observations at `node` picked by
    /// `plan` from a length-`plan.total()` sequence.
    pub fn build(
        decomp: &SpectralDecomposition,
        node: usize,
        plan: &SelectionPlan,
        observed: &Array1<Complex64>,
    ) -> Result<Self> {
        let upsilon = node_pattern(decomp, node)?;
        let psi = build_psi(decomp, plan.total());
        let weighted = &psi.entries * &upsilon;
        let matrix = plan.gather_rows(&weighted)?;
        let samples = plan.gather(observed)?;
        Ok(Self {
            matrix,
            samples,
            node,
            plan: plan.clone(),
        })
    }

    pub fn from_parts(
        matrix: Array2<Complex64>,
        samples: Array1<Complex64>,
        node: usize,
        plan: SelectionPlan,
    ) -> Result<Self> {
        if matrix.nrows() != plan.len() || samples.len() != plan.len() {
            return Err(Error::DimensionMismatch {
                context: "sensing system",
                expected: plan.len(),
                actual: matrix.nrows().min(samples.len()),
            });
        }
        Ok(Self {
            matrix,
            samples,
            node,
            plan,
        })
    }

    pub fn observations(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frequencies(&self) -> usize {
        self.matrix.ncols()
    }
}

/// A sparse coefficient vector with its fit residual.
#[derive(Debug, Clone)]
pub struct SparseSolution {
    /// Active frequency indices, 1-based, ascending.
    pub support: Vec<usize>,
    /// Full-length coefficient vector, zero off the support.
    pub coefficients: Array1<Complex64>,
    /// `‖M x - b‖ / ‖b‖` (absolute when b = 0).
    pub residual: f64,
}

fn restricted_fit(
    matrix: &Array2<Complex64>,
    samples: &Array1<Complex64>,
    support: &[usize],
) -> Result<SparseSolution> {
    let cols: Vec<usize> = support.iter().map(|&k| k - 1).collect();
    let sub = matrix.select(Axis(1), &cols);
    let coeffs = linalg::lstsq(&sub, samples)?;
    let fit = sub.dot(&coeffs);
    let bnorm = linalg::vec_norm(samples);
    let residual = linalg::vec_norm(&(&fit - samples)) / bnorm.max(f64::MIN_POSITIVE);
    let mut full = Array1::zeros(matrix.ncols());
    for (c, &k) in coeffs.iter().zip(support.iter()) {
        full[k - 1] = *c;
    }
    Ok(SparseSolution {
        support: support.to_vec(),
        coefficients: full,
        residual,
    })
}

/// Exact 0-norm recovery by enumeration: supports are visited by increasing
/// cardinality (1, 2, ..., `k_max`), lexicographically within a cardinality,
/// and the first exact fit wins. This is the independent oracle against
/// which every other recovery path is judged.
pub fn brute_force_l0(system: &SensingSystem, k_max: usize) -> Result<SparseSolution> {
    let n = system.frequencies();
    let m = system.observations();
    if n > 30 || k_max > 5 {
        return Err(Error::BudgetExceeded {
            reason: format!("enumeration limited to N <= 30, K <= 5; got N = {n}, K = {k_max}"),
        });
    }
    if m < k_max {
        return Err(Error::InvalidPlan {
            reason: format!("{m} observations cannot determine {k_max} coefficients"),
        });
    }
    let bnorm = linalg::vec_norm(&system.samples);
    if bnorm == 0.0 {
        return Ok(SparseSolution {
            support: Vec::new(),
            coefficients: Array1::zeros(n),
            residual: 0.0,
        });
    }
    // Fit in the row-balanced metric: rows of a power system grow like
    // |lambda_max|^l, and a residual relative to the raw ‖b‖ would only ever
    // test the last few observations.
    let (mat, b) = row_normalized(&system.matrix, &system.samples);
    for cardinality in 1..=k_max {
        for support in (1..=n).combinations(cardinality) {
            let sol = restricted_fit(&mat, &b, &support)?;
            if sol.residual <= L0_RESIDUAL_TOL {
                return Ok(sol);
            }
        }
    }
    Err(Error::Infeasible { k_max })
}

/// Scale every nonzero row (and the matching sample) to unit norm: an exact
/// reformulation of the equality constraints.
fn row_normalized(
    matrix: &Array2<Complex64>,
    samples: &Array1<Complex64>,
) -> (Array2<Complex64>, Array1<Complex64>) {
    let mut mat = matrix.clone();
    let mut b = samples.clone();
    for (r, mut row) in mat.axis_iter_mut(Axis(0)).enumerate() {
        let nrm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            row.mapv_inplace(|z| z / nrm);
            b[r] /= Complex64::new(nrm, 0.0);
        }
    }
    (mat, b)
}

/// Identifiability diagnostics for 0-norm recovery from `2K` structured
/// observations.
#[derive(Debug, Clone)]
pub struct IdentifiabilityReport {
    /// 1-based frequencies where the node pattern vanishes.
    pub vanishing_upsilon: Vec<usize>,
    /// 1-based frequencies with (numerically) zero eigenvalue.
    pub zero_eigenvalues: Vec<usize>,
    /// Pairs whose `lambda^N0` coincide.
    pub coincident_power_pairs: Vec<(usize, usize)>,
    /// Exhaustive full-spark certificate (only attempted for N <= 12).
    pub full_spark: Option<bool>,
    /// A rank-deficient column subset, when certification failed.
    pub deficient_subset: Option<Vec<usize>>,
}

impl IdentifiabilityReport {
    /// Every clause holds for every frequency.
    pub fn passes_strict(&self) -> bool {
        self.vanishing_upsilon.is_empty()
            && self.zero_eigenvalues.is_empty()
            && self.coincident_power_pairs.is_empty()
            && self.full_spark != Some(false)
    }

    /// The analytic clauses restricted to a known support: only eigenvalues
    /// associated with the active frequencies need to satisfy them.
    pub fn passes_for_support(&self, support: &[usize]) -> bool {
        self.vanishing_upsilon.iter().all(|k| !support.contains(k))
            && self.zero_eigenvalues.iter().all(|k| !support.contains(k))
            && self
                .coincident_power_pairs
                .iter()
                .all(|(a, b)| !(support.contains(a) && support.contains(b)))
    }
}

/// Check the identifiability conditions at `node` for a structured plan with
/// `2K` rows: all node-pattern entries nonzero, all eigenvalues nonzero, and
/// `lambda^N0` pairwise distinct. For N <= 12 the full-spark property is
/// additionally certified by enumerating every 2K-column submatrix.
pub fn check_identifiability(
    decomp: &SpectralDecomposition,
    node: usize,
    plan: &SelectionPlan,
    k: usize,
) -> Result<IdentifiabilityReport> {
    let structured = plan.structured_form().ok_or_else(|| Error::InvalidPlan {
        reason: "identifiability needs a structured plan C_2K(n0, N0)".into(),
    })?;
    if plan.len() != 2 * k {
        return Err(Error::InvalidPlan {
            reason: format!("plan has {} rows, need 2K = {}", plan.len(), 2 * k),
        });
    }
    let n = decomp.n();
    let upsilon = node_pattern(decomp, node)?;
    let unorm = linalg::vec_norm(&upsilon).max(f64::MIN_POSITIVE);
    let vanishing: Vec<usize> = (1..=n)
        .filter(|&kk| upsilon[kk - 1].norm() <= DEFAULT_TOL_UPSILON * unorm)
        .collect();
    let scale = decomp.spectral_radius().max(f64::MIN_POSITIVE);
    let zero_eigs: Vec<usize> = (1..=n)
        .filter(|&kk| decomp.eigenvalues[kk - 1].norm() <= DEFAULT_TOL_EIG * scale)
        .collect();
    let powers: Vec<Complex64> = decomp
        .eigenvalues
        .iter()
        .map(|l| l.powu(structured.spacing as u32))
        .collect();
    let pscale = powers.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut coincident = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if (powers[a] - powers[b]).norm() <= DEFAULT_TOL_EIG * pscale {
                coincident.push((a + 1, b + 1));
            }
        }
    }

    let (full_spark, deficient) = if n <= 12 && 2 * k <= n {
        let psi = build_psi(decomp, plan.total());
        let weighted = &psi.entries * &upsilon;
        let m = plan.gather_rows(&weighted)?;
        let mut verdict = true;
        let mut witness = None;
        for cols in (0..n).combinations(2 * k) {
            let sub = m.select(Axis(1), &cols);
            if linalg::numerical_rank(&sub)? < 2 * k {
                verdict = false;
                witness = Some(cols.iter().map(|c| c + 1).collect());
                break;
            }
        }
        (Some(verdict), witness)
    } else {
        (None, None)
    };

    Ok(IdentifiabilityReport {
        vanishing_upsilon: vanishing,
        zero_eigenvalues: zero_eigs,
        coincident_power_pairs: coincident,
        full_spark,
        deficient_subset: deficient,
    })
}

/// How the 1-norm relaxation is driven.
#[derive(Debug, Clone)]
pub enum L1Mode {
    /// Noiseless equality-constrained recovery via a decreasing-gamma path
    /// with warm starts and a support-restricted polish.
    EqualityConstrained,
    /// Single penalized solve at the given gamma.
    Penalized { gamma: f64 },
    /// Penalized solves over an explicit gamma grid (descending recommended).
    PenalizedPath { gammas: Vec<f64> },
}

/// Options for [`l1_recover`].
#[derive(Debug, Clone)]
pub struct L1Options {
    /// Target sparsity K used by the success declaration and the polish.
    pub sparsity: usize,
    /// Optional whitener `W = R^-1/2` applied to rows and samples.
    pub whitener: Option<Array2<Complex64>>,
    /// Normalize sensing columns to unit norm inside the solve. The
    /// coherence-based recovery guarantee assumes unit-norm atoms; without
    /// equilibration the raw column norms act as inverse weights on the
    /// 1-norm, favoring frequencies the shift amplifies.
    pub equilibrate: bool,
    pub max_iter: usize,
    /// Successive-iterate convergence tolerance.
    pub tol: f64,
    /// Points on the automatic gamma path (equality-constrained mode).
    pub path_points: usize,
    /// Ratio between the last and first path gamma.
    pub path_floor: f64,
}

impl L1Options {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            whitener: None,
            equilibrate: true,
            max_iter: 100_000,
            tol: 1e-9,
            path_points: 45,
            path_floor: 1e-8,
        }
    }
}

/// Per-gamma diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct GammaStage {
    pub gamma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
}

/// Result of a 1-norm recovery attempt. `success` is declared only when the
/// polished solution has at most K active entries and reproduces the samples
/// within [`L1_POLISH_TOL`]; the raw proximal iterate is never presented as
/// exact.
#[derive(Debug, Clone)]
pub struct L1Report {
    /// Final proximal iterate (unpolished).
    pub solution: Array1<Complex64>,
    /// Support-restricted least-squares polish of the best stage, if any
    /// stage produced one that fits.
    pub polished: Option<SparseSolution>,
    pub success: bool,
    pub gamma_max: f64,
    pub stages: Vec<GammaStage>,
}

struct Fista {
    a: Array2<Complex64>,
    ah: Array2<Complex64>,
    y: Array1<Complex64>,
    step: f64,
}

impl Fista {
    fn new(a: Array2<Complex64>, y: Array1<Complex64>) -> Result<Self> {
        let s = linalg::singular_values(&a)?;
        let smax = s.iter().cloned().fold(0.0_f64, f64::max);
        let lipschitz = (smax * smax).max(f64::MIN_POSITIVE);
        let ah = linalg::conj_transpose(&a.view());
        Ok(Self {
            a,
            ah,
            y,
            step: 1.0 / lipschitz,
        })
    }

    /// Modulus soft threshold: shrink |z| by t, keep the phase.
    fn shrink(z: Complex64, t: f64) -> Complex64 {
        let m = z.norm();
        if m <= t {
            Complex64::new(0.0, 0.0)
        } else {
            z * ((m - t) / m)
        }
    }

    fn run(
        &self,
        x0: &Array1<Complex64>,
        gamma: f64,
        max_iter: usize,
        tol: f64,
    ) -> (Array1<Complex64>, GammaStage) {
        let mut x = x0.clone();
        let mut z = x.clone();
        let mut theta = 1.0_f64;
        let thresh = gamma * self.step;
        let mut last_change = f64::INFINITY;
        let mut iterations = 0;
        for it in 1..=max_iter {
            iterations = it;
            let residual = self.a.dot(&z) - &self.y;
            let grad = self.ah.dot(&residual);
            let next = Array1::from_iter(
                z.iter()
                    .zip(grad.iter())
                    .map(|(&zi, &gi)| Self::shrink(zi - gi * self.step, thresh)),
            );
            let step_vec = &next - &x;
            // Adaptive restart: drop the momentum whenever it points against
            // the proximal-gradient step, which otherwise makes the iterates
            // oscillate and stall short of tolerance.
            let restart_dot: f64 = (&z - &next)
                .iter()
                .zip(step_vec.iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            if restart_dot > 0.0 {
                theta = 1.0;
            }
            let change = linalg::vec_norm(&step_vec);
            let scale = linalg::vec_norm(&next).max(1.0);
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let momentum = (theta - 1.0) / theta_next;
            z = &next + &step_vec.mapv(|d| d * momentum);
            x = next;
            theta = theta_next;
            last_change = change;
            if change <= tol * scale {
                return (
                    x,
                    GammaStage {
                        gamma,
                        iterations,
                        converged: true,
                        last_change,
                    },
                );
            }
        }
        (
            x,
            GammaStage {
                gamma,
                iterations,
                converged: false,
                last_change,
            },
        )
    }
}

/// Support-restricted least-squares polish of a proximal iterate, fitting in
/// whatever row metric the caller hands in.
///
/// Candidate supports are the size-s subsets (s = 1..=k, ascending) of the
/// top `min(2k, m)` entries of the iterate by modulus, most-indicated subset
/// first. Highly coherent columns spread the iterate's mass over near
/// duplicates, so the runner-up entries must be candidates too; acceptance
/// is still an exact fit of the samples, so the polish cannot declare
/// success on anything that does not reproduce them.
fn polish(
    matrix: &Array2<Complex64>,
    samples: &Array1<Complex64>,
    iterate: &Array1<Complex64>,
    k: usize,
    tol: f64,
) -> Result<Option<SparseSolution>> {
    let n = matrix.ncols();
    let m = matrix.nrows();
    let bnorm = linalg::vec_norm(samples);
    if bnorm == 0.0 {
        return Ok(Some(SparseSolution {
            support: Vec::new(),
            coefficients: Array1::zeros(n),
            residual: 0.0,
        }));
    }
    let mut order: Vec<usize> = (1..=n).collect();
    order.sort_by(|&a, &b| {
        iterate[b - 1]
            .norm()
            .total_cmp(&iterate[a - 1].norm())
            .then(a.cmp(&b))
    });
    let active = order
        .iter()
        .take_while(|&&j| iterate[j - 1].norm() > 0.0)
        .count();
    let pool = order[..active.min(2 * k).min(m)].to_vec();
    for s in 1..=k.min(pool.len()) {
        for candidate in (0..pool.len()).combinations(s) {
            let mut support: Vec<usize> = candidate.iter().map(|&r| pool[r]).collect();
            support.sort_unstable();
            let sol = restricted_fit(matrix, samples, &support)?;
            if sol.residual <= tol {
                return Ok(Some(sol));
            }
        }
    }
    Ok(None)
}

/// 1-norm recovery: minimize `0.5 ‖W (M x - b)‖^2 + gamma ‖x‖_1` by FISTA
/// with modulus shrinkage.
///
/// Columns of the (whitened) sensing matrix are equilibrated to unit norm
/// before the proximal solve; the coherence-based recovery guarantee is
/// stated for unit-norm atoms and does not hold without this. Gamma values
/// refer to the equilibrated system; the reported solution is mapped back to
/// the original coordinates.
///
/// `EqualityConstrained` follows a logarithmic gamma path from
/// `gamma_max = ‖A^H y‖_inf` down to `path_floor * gamma_max`, warm starting
/// each stage and polishing after every stage; the path stops at the first
/// declared success.
pub fn l1_recover(system: &SensingSystem, mode: L1Mode, options: &L1Options) -> Result<L1Report> {
    let (mut a_raw, mut y) = match &options.whitener {
        Some(w) => {
            if w.ncols() != system.observations() {
                return Err(Error::DimensionMismatch {
                    context: "l1 whitener",
                    expected: system.observations(),
                    actual: w.ncols(),
                });
            }
            (w.dot(&system.matrix), w.dot(&system.samples))
        }
        None => (system.matrix.clone(), system.samples.clone()),
    };
    if matches!(mode, L1Mode::EqualityConstrained) {
        // Row normalization is an exact reformulation of the equality
        // constraints. Rows of a Vandermonde power system otherwise grow
        // like |lambda_max|^l and drown the early observations.
        for (r, mut row) in a_raw.axis_iter_mut(Axis(0)).enumerate() {
            let nrm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 0.0 {
                row.mapv_inplace(|z| z / nrm);
                y[r] /= Complex64::new(nrm, 0.0);
            }
        }
    }
    // The polish fits and judges residuals in this (whitened, possibly
    // row-balanced) metric, before any column scaling.
    let fit_matrix = a_raw.clone();
    let fit_samples = y.clone();
    let col_norms: Vec<f64> = (0..a_raw.ncols())
        .map(|j| {
            if !options.equilibrate {
                return 1.0;
            }
            let n = a_raw.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut a = a_raw;
    if options.equilibrate {
        for (j, &nj) in col_norms.iter().enumerate() {
            a.column_mut(j).mapv_inplace(|z| z / nj);
        }
    }
    let corr = linalg::conj_transpose(&a.view()).dot(&y);
    let gamma_max = corr.iter().map(|z| z.norm()).fold(0.0, f64::max);

    if gamma_max == 0.0 {
        // b = 0 (or in the whitened null space): the minimizer is 0.
        return Ok(L1Report {
            solution: Array1::zeros(system.frequencies()),
            polished: polish(
                &fit_matrix,
                &fit_samples,
                &Array1::zeros(system.frequencies()),
                options.sparsity,
                L1_POLISH_TOL,
            )?,
            success: true,
            gamma_max,
            stages: Vec::new(),
        });
    }

    let gammas: Vec<f64> = match &mode {
        L1Mode::Penalized { gamma } => vec![*gamma],
        L1Mode::PenalizedPath { gammas } => gammas.clone(),
        L1Mode::EqualityConstrained => {
            let p = options.path_points.max(2);
            let ratio = options.path_floor.powf(1.0 / (p as f64 - 1.0));
            (0..p).map(|j| gamma_max * ratio.powi(j as i32)).collect()
        }
    };

    let solver = Fista::new(a, y)?;
    let mut u: Array1<Complex64> = Array1::zeros(system.frequencies());
    let mut stages = Vec::with_capacity(gammas.len());
    let mut best: Option<SparseSolution> = None;
    for &gamma in &gammas {
        let (next, stage) = solver.run(&u, gamma, options.max_iter, options.tol);
        u = next;
        stages.push(stage);
        if let Some(sol) = polish(&fit_matrix, &fit_samples, &u, options.sparsity, L1_POLISH_TOL)? {
            best = Some(sol);
            break;
        }
    }

    let success = best.is_some();
    if !success {
        let last = stages.last().copied();
        if let Some(stage) = last {
            if !stage.converged {
                return Err(Error::NoConvergence {
                    iterations: stage.iterations,
                    last_change: stage.last_change,
                });
            }
        }
    }
    let solution = Array1::from_iter(
        u.iter()
            .zip(col_norms.iter())
            .map(|(&ui, &nj)| ui / nj),
    );
    Ok(L1Report {
        solution,
        polished: best,
        success,
        gamma_max,
        stages,
    })
}

/// Column coherence and the sparsity bound it implies.
#[derive(Debug, Clone, Copy)]
pub struct CoherenceReport {
    /// Largest normalized inner product between distinct columns, in [0, 1].
    pub coherence: f64,
    /// `floor((1 + 1/mu) / 2)`; `None` when mu = 0 (orthogonal columns,
    /// unbounded).
    pub sparsity_bound: Option<usize>,
}

/// Coherence of a sensing matrix. Columns that are numerically zero are
/// rejected with their indices.
pub fn coherence(matrix: &Array2<Complex64>) -> Result<CoherenceReport> {
    let n = matrix.ncols();
    let norms: Vec<f64> = (0..n)
        .map(|j| matrix.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let zero_cols: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, &nn)| nn <= scale * 1e-300 || nn == 0.0)
        .map(|(j, _)| j + 1)
        .collect();
    if !zero_cols.is_empty() {
        return Err(Error::ZeroColumn { columns: zero_cols });
    }
    let mut mu = 0.0_f64;
    for a in 0..n {
        for b in (a + 1)..n {
            let inner: Complex64 = matrix
                .column(a)
                .iter()
                .zip(matrix.column(b).iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            mu = mu.max(inner.norm() / (norms[a] * norms[b]));
        }
    }
    mu = mu.min(1.0);
    let sparsity_bound = if mu > 0.0 {
        Some(((1.0 + 1.0 / mu) / 2.0).floor() as usize)
    } else {
        None
    };
    Ok(CoherenceReport {
        coherence: mu,
        sparsity_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;
    use crate::rng::stream_rng;
    use crate::sampling::aggregate;
    use crate::spectral::{
        decompose, synthesize_bandlimited, DecomposeMode, GraphSignal, ShiftOperator,
    };
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }


    /// I - A on a random ER-style graph keeps eigenvalues away from zero.
    fn shifted_decomp(n: usize, seed: u64) -> (ShiftOperator, SpectralDecomposition) {
        let mut rng = stream_rng(seed, 0);
        let mut a: Array2<Complex64> = Array2::zeros((n, n));
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.4 {
                    a[[i, j]] = c(1.0);
                    a[[j, i]] = c(1.0);
                }
            }
        }
        let ima = identity(n) - &a;
        let shift = ShiftOperator::from_dense(ima).unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        (shift, d)
    }

    fn planted_system(
        n: usize,
        k: usize,
        seed: u64,
    ) -> Option<(SensingSystem, Vec<usize>, SpectralDecomposition)> {
        let (shift, d) = shifted_decomp(n, seed);
        let node = 1 + (seed as usize % n);
        let plan = SelectionPlan::first_k(n, 2 * k).unwrap();
        let report = check_identifiability(&d, node, &plan, k).unwrap();
        if !report.passes_strict() {
            return None;
        }
        let mut rng = stream_rng(seed, 1);
        let mut support: Vec<usize> = (1..=n).collect();
        for i in (1..support.len()).rev() {
            let j = rng.random_range(0..=i);
            support.swap(i, j);
        }
        let mut support: Vec<usize> = support[..k].to_vec();
        support.sort_unstable();
        let coeffs = Array1::from_iter((0..k).map(|_| c(rng.random::<f64>() + 0.5)));
        let x = synthesize_bandlimited(&d, &support, &coeffs).unwrap();
        let seq = aggregate(&shift, &x, node, n).unwrap();
        let system = SensingSystem::build(&d, node, &plan, &seq.values).unwrap();
        Some((system, support, d))
    }

    #[test]
    fn zero_samples_give_empty_support() {
        let (_, d) = shifted_decomp(8, 3);
        let plan = SelectionPlan::first_k(8, 4).unwrap();
        let system = SensingSystem::build(&d, 2, &plan, &Array1::zeros(8)).unwrap();
        let sol = brute_force_l0(&system, 2).unwrap();
        assert!(sol.support.is_empty());
        assert!(sol.residual == 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let (_, d) = shifted_decomp(8, 4);
        let plan = SelectionPlan::first_k(8, 6).unwrap();
        let system = SensingSystem::build(&d, 1, &plan, &Array1::zeros(8)).unwrap();
        assert!(matches!(
            brute_force_l0(&system, 6),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn single_frequency_is_identified_by_eigenvalue_ratio() {
        let (shift, d) = shifted_decomp(10, 7);
        let node = 3;
        let k_true = 4;
        let alpha = c(1.3);
        let x = synthesize_bandlimited(&d, &[k_true], &ndarray::array![alpha]).unwrap();
        let seq = aggregate(&shift, &x, node, 10).unwrap();
        // With two samples the active eigenvalue is the ratio y2 / y1.
        let ratio = seq.values[1] / seq.values[0];
        assert!((ratio - d.eigenvalues[k_true - 1]).norm() < 1e-10);
        let plan = SelectionPlan::first_k(10, 2).unwrap();
        let system = SensingSystem::build(&d, node, &plan, &seq.values).unwrap();
        let sol = brute_force_l0(&system, 1).unwrap();
        assert_eq!(sol.support, vec![k_true]);
        let u = node_pattern(&d, node).unwrap()[k_true - 1];
        assert!((sol.coefficients[k_true - 1] - seq.values[0] / u).norm() < 1e-8);
    }

    #[test]
    fn planted_supports_are_recovered_when_certified() {
        let mut tested = 0;
        let mut seed = 0u64;
        while tested < 20 {
            seed += 1;
            let Some((system, support, _)) = planted_system(10, 2, seed) else {
                continue;
            };
            let sol = brute_force_l0(&system, 2).unwrap();
            assert_eq!(sol.support, support, "seed {seed}");
            tested += 1;
        }
    }

    #[test]
    fn uniqueness_witness_under_coefficient_perturbation() {
        let (system0, support, d) = {
            let mut found = None;
            for seed in 1.. {
                if let Some(t) = planted_system(10, 2, seed) {
                    found = Some(t);
                    break;
                }
            }
            found.unwrap()
        };
        let mut rng = stream_rng(400, 0);
        for _ in 0..100 {
            let coeffs = Array1::from_iter((0..2).map(|_| c(rng.random::<f64>() + 0.25)));
            let x = synthesize_bandlimited(&d, &support, &coeffs).unwrap();
            // Rebuild samples through the sensing matrix directly.
            let mut xhat_full: Array1<Complex64> = Array1::zeros(10);
            for (c_, &k) in coeffs.iter().zip(support.iter()) {
                xhat_full[k - 1] = *c_;
            }
            let samples = system0.matrix.dot(&xhat_full);
            let system = SensingSystem::from_parts(
                system0.matrix.clone(),
                samples,
                system0.node,
                system0.plan.clone(),
            )
            .unwrap();
            let sol = brute_force_l0(&system, 2).unwrap();
            assert_eq!(sol.support, support);
            let _ = x;
        }
    }

    #[test]
    fn identity_shift_fails_identifiability() {
        let shift = ShiftOperator::identity(6);
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let plan = SelectionPlan::first_k(6, 4).unwrap();
        let r = check_identifiability(&d, 1, &plan, 2).unwrap();
        assert!(!r.coincident_power_pairs.is_empty());
        assert!(!r.passes_strict());
    }

    #[test]
    fn path_graph_zero_eigenvalue_is_flagged() {
        let mut a = Array2::zeros((3, 3));
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            a[[i, j]] = c(1.0);
        }
        let shift = ShiftOperator::from_dense(a).unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let plan = SelectionPlan::first_k(3, 2).unwrap();
        let r = check_identifiability(&d, 1, &plan, 1).unwrap();
        assert_eq!(r.zero_eigenvalues, vec![3]);
        assert!(!r.passes_strict());
        assert!(r.passes_for_support(&[1, 2]));
    }

    #[test]
    fn cycle_passes_identifiability_with_full_spark() {
        let shift = ShiftOperator::directed_cycle(8);
        let d = decompose(&shift, DecomposeMode::AnalyticCycle).unwrap();
        let plan = SelectionPlan::first_k(8, 4).unwrap();
        let r = check_identifiability(&d, 3, &plan, 2).unwrap();
        assert!(r.vanishing_upsilon.is_empty());
        assert!(r.zero_eigenvalues.is_empty());
        assert!(r.coincident_power_pairs.is_empty());
        assert_eq!(r.full_spark, Some(true));
        assert!(r.passes_strict());
    }

    #[test]
    fn l1_zero_samples_solve_to_zero() {
        let (_, d) = shifted_decomp(8, 21);
        let plan = SelectionPlan::first_k(8, 4).unwrap();
        let system = SensingSystem::build(&d, 2, &plan, &Array1::zeros(8)).unwrap();
        let r = l1_recover(&system, L1Mode::Penalized { gamma: 0.1 }, &L1Options::new(2)).unwrap();
        assert!(linalg::vec_norm(&r.solution) < 1e-12);
        assert!(r.success);
    }

    #[test]
    fn l1_matches_l0_on_planted_single_frequency() {
        let shift = ShiftOperator::directed_cycle(12);
        let d = decompose(&shift, DecomposeMode::AnalyticCycle).unwrap();
        let node = 5;
        let x = synthesize_bandlimited(&d, &[4], &ndarray::array![c(0.9)]).unwrap();
        let seq = {
            let gs = GraphSignal::new(x.values.clone());
            aggregate(&shift, &gs, node, 12).unwrap()
        };
        let plan = SelectionPlan::first_k(12, 2).unwrap();
        let system = SensingSystem::build(&d, node, &plan, &seq.values).unwrap();
        let l0 = brute_force_l0(&system, 1).unwrap();
        let l1 = l1_recover(&system, L1Mode::EqualityConstrained, &L1Options::new(1)).unwrap();
        assert!(l1.success);
        let polished = l1.polished.unwrap();
        assert_eq!(polished.support, l0.support);
        assert!(linalg::rel_diff_vec(&polished.coefficients, &l0.coefficients) < 1e-8);
    }

    #[test]
    fn l1_success_follows_coherence_bound() {
        // Instances satisfying K <= (1 + 1/mu)/2 are declared-success and
        // match the 0-norm oracle.
        let mut checked = 0;
        let mut seed = 100u64;
        while checked < 10 {
            seed += 1;
            let Some((system, _support, _)) = planted_system(10, 1, seed) else {
                continue;
            };
            let mu = coherence(&system.matrix).unwrap();
            let Some(bound) = mu.sparsity_bound else {
                continue;
            };
            if bound < 1 {
                continue;
            }
            let l1 = l1_recover(&system, L1Mode::EqualityConstrained, &L1Options::new(1)).unwrap();
            assert!(l1.success, "seed {seed}: bound {bound}, mu {}", mu.coherence);
            let l0 = brute_force_l0(&system, 1).unwrap();
            let polished = l1.polished.unwrap();
            assert_eq!(polished.support, l0.support, "seed {seed}");
            assert!(
                linalg::rel_diff_vec(&polished.coefficients, &l0.coefficients) < 1e-8,
                "seed {seed}"
            );
            checked += 1;
        }
    }

    #[test]
    fn coherence_of_orthogonal_and_duplicated_columns() {
        let eye: Array2<Complex64> = identity(3);
        let r = coherence(&eye).unwrap();
        assert!(r.coherence == 0.0);
        assert!(r.sparsity_bound.is_none());

        let mut dup = Array2::zeros((3, 2));
        dup[[0, 0]] = c(1.0);
        dup[[1, 0]] = c(2.0);
        dup[[0, 1]] = c(0.5);
        dup[[1, 1]] = c(1.0);
        let r = coherence(&dup).unwrap();
        assert!((r.coherence - 1.0).abs() < 1e-12);
        assert_eq!(r.sparsity_bound, Some(1));
    }

    #[test]
    fn coherence_rejects_zero_columns() {
        let mut m: Array2<Complex64> = Array2::zeros((3, 3));
        m[[0, 0]] = c(1.0);
        m[[1, 2]] = c(1.0);
        match coherence(&m) {
            Err(Error::ZeroColumn { columns }) => assert_eq!(columns, vec![2]),
            other => panic!("expected ZeroColumn, got {other:?}"),
        }
    }
}
