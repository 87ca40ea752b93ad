//! Interpolation from noisy aggregation samples: noise-model covariances,
//! the best linear unbiased estimator, its error covariances and metrics,
//! and the design of sampling node and sample-selection scheme.
//!
//! Everything here treats the observed sequence `z_i = y_i + w_i` at a node,
//! with `w_i` zero mean and covariance fixed by a [`NoiseModel`]. All
//! inverses are gated linear solves; singular systems are reported, never
//! regularized silently.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{gaussian_vec, stream_rng};
use crate::sampling::{build_psi_i, SelectionPlan};
use crate::spectral::{build_psi, node_pattern, validate_support, GraphSignal, SpectralDecomposition};

/// Second-order description of the additive noise on the observed sequence.
///
/// The three white kinds place unit-variance-per-entry noise on the observed
/// sequence, on the original signal, or on the active frequency
/// coefficients; `Custom` supplies the full covariance of the length-L
/// observation noise directly.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    ObservationWhite { sigma2: f64 },
    SignalWhite { sigma2: f64 },
    FrequencyWhite { sigma2: f64 },
    Custom { covariance: Array2<Complex64> },
}

impl NoiseModel {
    /// Validate and wrap a custom covariance (Hermitian, PSD).
    pub fn custom(covariance: Array2<Complex64>) -> Result<Self> {
        let dev = linalg::hermitian_deviation(&covariance.view());
        let scale = linalg::frobenius(&covariance.view()).max(1.0);
        if dev > 1e-12 * scale {
            return Err(Error::InvalidModel(format!(
                "custom covariance is not Hermitian (deviation {dev:.3e})"
            )));
        }
        let (vals, _) = linalg::hermitian_eigen(&covariance)?;
        let vmax = vals.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
        let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if vmin < -1e-10 * vmax {
            return Err(Error::InvalidModel(format!(
                "custom covariance is not PSD (min eigenvalue {vmin:.3e})"
            )));
        }
        Ok(Self::Custom { covariance })
    }

    pub fn sigma2(&self) -> Option<f64> {
        match self {
            Self::ObservationWhite { sigma2 }
            | Self::SignalWhite { sigma2 }
            | Self::FrequencyWhite { sigma2 } => Some(*sigma2),
            Self::Custom { .. } => None,
        }
    }

    fn validate_sigma2(&self) -> Result<()> {
        if let Some(s) = self.sigma2() {
            if s.is_nan() || s < 0.0 {
                return Err(Error::InvalidModel(format!("sigma2 = {s} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Full L x L covariance of the observation noise at `node` under `model`.
pub fn noise_covariance(
    model: &NoiseModel,
    decomp: &SpectralDecomposition,
    node: usize,
    support: &[usize],
    rows: usize,
) -> Result<NoiseCovariance> {
    model.validate_sigma2()?;
    validate_support(support, decomp.n())?;
    let (matrix, factor) = match model {
        NoiseModel::ObservationWhite { sigma2 } => (
            linalg::identity(rows).mapv(|z| z * *sigma2),
            Some(linalg::identity(rows).mapv(|z| z * sigma2.sqrt())),
        ),
        NoiseModel::SignalWhite { sigma2 } => {
            let f = signal_noise_transform(decomp, node, rows)?.mapv(|z| z * sigma2.sqrt());
            let fh = linalg::conj_transpose(&f.view());
            (f.dot(&fh), Some(f))
        }
        NoiseModel::FrequencyWhite { sigma2 } => {
            let f = build_psi_i(decomp, node, support, rows)?.mapv(|z| z * sigma2.sqrt());
            let fh = linalg::conj_transpose(&f.view());
            (f.dot(&fh), Some(f))
        }
        NoiseModel::Custom { covariance } => {
            if covariance.dim() != (rows, rows) {
                return Err(Error::InvalidModel(format!(
                    "custom covariance is {}x{}, expected {rows}x{rows}",
                    covariance.nrows(),
                    covariance.ncols()
                )));
            }
            (covariance.clone(), None)
        }
    };
    Ok(NoiseCovariance {
        matrix: linalg::hermitian_part(&matrix),
        factor,
    })
}

/// Hermitian PSD covariance, carrying its factor `R = F F^H` when the model
/// provides one. Factored whitening keeps solves at cond(F) instead of
/// cond(F)^2.
#[derive(Debug, Clone)]
pub struct NoiseCovariance {
    pub matrix: Array2<Complex64>,
    pub factor: Option<Array2<Complex64>>,
}

/// `C R C^H` together with the row-gathered factor `C F`.
#[derive(Debug, Clone)]
pub struct ReducedCovariance {
    pub matrix: Array2<Complex64>,
    pub factor: Option<Array2<Complex64>>,
}

impl ReducedCovariance {
    /// Wrap a bare matrix (no factor available).
    pub fn from_matrix(matrix: Array2<Complex64>) -> Self {
        Self {
            matrix,
            factor: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        is_zero(&self.matrix)
    }
}

/// `Psi diag(upsilon_i) V^-1`: maps white noise on the signal to the
/// resulting noise on the observed sequence. Reduces to
/// `Psi |diag(upsilon_i)|` composed with a unitary for normal shifts.
fn signal_noise_transform(
    decomp: &SpectralDecomposition,
    node: usize,
    rows: usize,
) -> Result<Array2<Complex64>> {
    let upsilon = node_pattern(decomp, node)?;
    let psi = build_psi(decomp, rows);
    let weighted = &psi.entries * &upsilon;
    Ok(weighted.dot(&decomp.inverse_eigenvectors))
}

/// Restrict a full covariance to the picked rows and columns.
pub fn reduce_covariance(cov: &NoiseCovariance, plan: &SelectionPlan) -> Result<ReducedCovariance> {
    if cov.matrix.nrows() != plan.total() {
        return Err(Error::DimensionMismatch {
            context: "covariance reduction",
            expected: plan.total(),
            actual: cov.matrix.nrows(),
        });
    }
    let m = plan.len();
    let picks = plan.picks();
    let mut out = Array2::zeros((m, m));
    for (a, &pa) in picks.iter().enumerate() {
        for (b, &pb) in picks.iter().enumerate() {
            out[[a, b]] = cov.matrix[[pa - 1, pb - 1]];
        }
    }
    let factor = cov
        .factor
        .as_ref()
        .map(|f| linalg::gather_rows(&f.view(), picks));
    Ok(ReducedCovariance {
        matrix: out,
        factor,
    })
}

fn is_zero(m: &Array2<Complex64>) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// BLUE computed through the whitened system `W G` with `W^H W = R^-1`, via
/// one SVD: estimator `B = (WG)^+ W`, error covariance `V diag(s^-2) V^H`.
/// When the covariance carries a factor `R = F F^H`, the whitener comes from
/// the SVD of `F` and every solve stays at cond(F); frequency-white noise
/// with a square plan then yields exactly sigma^2 I.
///
/// A zero covariance degenerates to the plain (unweighted) least-squares
/// estimator with zero error covariance.
pub(crate) struct BlueCore {
    pub estimator: Array2<Complex64>,
    pub cov_frequency: Array2<Complex64>,
}

pub(crate) fn blue_core(g: &Array2<Complex64>, reduced: &ReducedCovariance) -> Result<BlueCore> {
    let m = g.nrows();
    let k = g.ncols();
    let zero = reduced.is_zero();
    let (w, whitened) = if zero {
        (linalg::identity(m), g.clone())
    } else if let Some(f) = &reduced.factor {
        let (uf, sf, _) = linalg::svd_parts(f)?;
        let sfmax = sf.iter().cloned().fold(0.0_f64, f64::max);
        let sfmin = sf.iter().cloned().fold(f64::INFINITY, f64::min);
        let cond = if sfmin > 0.0 && sf.len() == m {
            (sfmax / sfmin).powi(2)
        } else {
            f64::INFINITY
        };
        if !cond.is_finite() || cond > linalg::CONDITION_GATE {
            return Err(Error::SingularNoiseCovariance { condition: cond });
        }
        let ufh = linalg::conj_transpose(&uf.view());
        let w = Array2::from_shape_fn((m, m), |(i, j)| ufh[[i, j]] / sf[i]);
        let wg = w.dot(g);
        (w, wg)
    } else {
        let cond = linalg::condition_number(&reduced.matrix)?;
        if !cond.is_finite() || cond > linalg::CONDITION_GATE {
            return Err(Error::SingularNoiseCovariance { condition: cond });
        }
        let w = linalg::inv_sqrt_psd(&reduced.matrix)
            .map_err(|_| Error::SingularNoiseCovariance { condition: cond })?;
        let wg = w.dot(g);
        (w, wg)
    };
    let (u, s, vt) = linalg::svd_parts(&whitened)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond_ne = if smin > 0.0 {
        (smax / smin).powi(2)
    } else {
        f64::INFINITY
    };
    if s.len() < k || !cond_ne.is_finite() || cond_ne > linalg::CONDITION_GATE {
        return Err(Error::SingularNormalEquations { condition: cond_ne });
    }
    let v = linalg::conj_transpose(&vt.view());
    let uh = linalg::conj_transpose(&u.view());
    // (WG)^+ = V diag(1/s) U^H
    let scaled_v = &v * &s.mapv(|x| Complex64::new(1.0 / x, 0.0));
    let pinv = scaled_v.dot(&uh);
    let estimator = pinv.dot(&w);
    let cov_frequency = if zero {
        Array2::zeros((k, k))
    } else {
        let half = &v * &s.mapv(|x| Complex64::new(1.0 / x, 0.0));
        linalg::hermitian_part(&half.dot(&linalg::conj_transpose(&half.view())))
    };
    Ok(BlueCore {
        estimator,
        cov_frequency,
    })
}

/// BLUE of the active frequency coefficients from the picked noisy samples.
///
/// With `G = C Psi_i`, computes `(G^H R^-1 G)^-1 G^H R^-1 z`. A zero
/// covariance degenerates to the noiseless solve (square or least squares);
/// when the plan picks exactly K rows the estimator coincides with the plain
/// inverse `(C Psi_i)^-1 z` (see [`square_estimate`]).
pub fn blue_estimate(
    psi_i: &Array2<Complex64>,
    plan: &SelectionPlan,
    reduced_cov: &ReducedCovariance,
    samples: &Array1<Complex64>,
) -> Result<Array1<Complex64>> {
    let k = psi_i.ncols();
    let m = plan.len();
    if m < k {
        return Err(Error::InvalidPlan {
            reason: format!("plan picks {m} rows, need at least K = {k}"),
        });
    }
    if samples.len() != m || reduced_cov.matrix.dim() != (m, m) {
        return Err(Error::DimensionMismatch {
            context: "blue estimate",
            expected: m,
            actual: samples.len(),
        });
    }
    let g = plan.gather_rows(psi_i)?;
    let core = blue_core(&g, reduced_cov)?;
    Ok(core.estimator.dot(samples))
}

/// Square-plan estimator `(C Psi_i)^-1 z`; requires exactly K picks.
pub fn square_estimate(
    psi_i: &Array2<Complex64>,
    plan: &SelectionPlan,
    samples: &Array1<Complex64>,
) -> Result<Array1<Complex64>> {
    let k = psi_i.ncols();
    if plan.len() != k {
        return Err(Error::InvalidPlan {
            reason: format!("square estimator needs exactly K = {k} picks, got {}", plan.len()),
        });
    }
    let g = plan.gather_rows(psi_i)?;
    linalg::solve_gated(&g, samples).map(|(x, _)| x).map_err(|e| match e {
        Error::SingularSystem { condition } => Error::SingularNormalEquations { condition },
        other => other,
    })
}

/// Error covariances of the BLUE: frequency-domain `R_hat_e` and
/// time-domain `R_e = V_K R_hat_e V_K^H` (rank at most K).
pub fn error_covariances(
    psi_i: &Array2<Complex64>,
    plan: &SelectionPlan,
    reduced_cov: &ReducedCovariance,
    v_support: &Array2<Complex64>,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    let g = plan.gather_rows(psi_i)?;
    let core = blue_core(&g, reduced_cov)?;
    let r_hat = core.cov_frequency;
    let vh = linalg::conj_transpose(&v_support.view());
    let r_time = linalg::hermitian_part(&v_support.dot(&r_hat).dot(&vh));
    Ok((r_hat, r_time))
}

/// The four scalar error metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// trace of the time-domain error covariance (mean square error)
    pub e1: f64,
    /// largest eigenvalue of the time-domain error covariance
    pub e2: f64,
    /// log determinant of the frequency-domain error covariance
    pub e3: f64,
    /// inverse of the trace of the inverse frequency-domain error covariance
    pub e4: f64,
}

/// Which metric drives a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    E1,
    E2,
    E3,
    E4,
}

impl ErrorMetrics {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::E1 => self.e1,
            Metric::E2 => self.e2,
            Metric::E3 => self.e3,
            Metric::E4 => self.e4,
        }
    }
}

/// Compute e1..e4 from the two error covariances. `e3` and `e4` come from
/// the frequency-domain covariance because the time-domain one is singular
/// whenever K < N.
pub fn error_metrics(
    r_hat_e: &Array2<Complex64>,
    r_e: &Array2<Complex64>,
) -> Result<ErrorMetrics> {
    let e1 = r_e.diag().iter().map(|z| z.re).sum::<f64>();
    let e2 = linalg::hermitian_lambda_max(r_e)?;
    let (vals, _) = linalg::hermitian_eigen(r_hat_e)?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let e3 = vals.iter().map(|v| v.ln()).sum::<f64>();
    let e4 = 1.0 / vals.iter().map(|v| 1.0 / v).sum::<f64>();
    Ok(ErrorMetrics { e1, e2, e3, e4 })
}

fn zero_noise_metrics() -> ErrorMetrics {
    ErrorMetrics {
        e1: 0.0,
        e2: 0.0,
        e3: f64::NEG_INFINITY,
        e4: 0.0,
    }
}

/// Full estimation outcome: estimates, covariances, metrics, conditioning.
#[derive(Debug, Clone)]
pub struct EstimationReport {
    pub estimate_frequency: Array1<Complex64>,
    pub estimate_time: GraphSignal,
    pub cov_frequency: Array2<Complex64>,
    pub cov_time: Array2<Complex64>,
    pub metrics: ErrorMetrics,
    pub condition_number: f64,
}

/// One-call BLUE pipeline for aggregation sampling at a node.
pub fn estimate(
    decomp: &SpectralDecomposition,
    support: &[usize],
    node: usize,
    plan: &SelectionPlan,
    model: &NoiseModel,
    samples: &Array1<Complex64>,
) -> Result<EstimationReport> {
    let rows = plan.total();
    let psi_i = build_psi_i(decomp, node, support, rows)?;
    let full_cov = noise_covariance(model, decomp, node, support, rows)?;
    let reduced = reduce_covariance(&full_cov, plan)?;
    let vk = decomp.basis_columns(support)?;
    let xhat = blue_estimate(&psi_i, plan, &reduced, samples)?;
    let (cov_f, cov_t) = error_covariances(&psi_i, plan, &reduced, &vk)?;
    let metrics = if reduced.is_zero() {
        zero_noise_metrics()
    } else {
        error_metrics(&cov_f, &cov_t)?
    };
    let g = plan.gather_rows(&psi_i)?;
    let condition_number = linalg::condition_number(&g)?;
    Ok(EstimationReport {
        estimate_time: GraphSignal::new(vk.dot(&xhat)),
        estimate_frequency: xhat,
        cov_frequency: cov_f,
        cov_time: cov_t,
        metrics,
        condition_number,
    })
}

/// Per-node ranking entry. Nodes whose normal equations are singular under
/// the plan carry no metrics and sort last.
#[derive(Debug, Clone)]
pub struct NodeRanking {
    pub node: usize,
    pub metrics: Option<ErrorMetrics>,
    pub fast_score: Option<f64>,
}

/// Rank all nodes by the chosen error metric (best first). For white
/// observation noise and a structured plan the closed-form geometric score
/// is attached; its descending order matches the exhaustive e4 ranking.
pub fn select_sampling_node(
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &SelectionPlan,
    model: &NoiseModel,
    metric: Metric,
) -> Result<Vec<NodeRanking>> {
    let n = decomp.n();
    let rows = plan.total();
    let vk = decomp.basis_columns(support)?;
    let fast = matches!(model, NoiseModel::ObservationWhite { .. })
        .then(|| fast_node_scores(decomp, support, plan).ok())
        .flatten();
    let mut rankings = Vec::with_capacity(n);
    for node in 1..=n {
        let psi_i = build_psi_i(decomp, node, support, rows)?;
        let full_cov = noise_covariance(model, decomp, node, support, rows)?;
        let reduced = reduce_covariance(&full_cov, plan)?;
        let metrics = if reduced.is_zero() {
            Some(zero_noise_metrics())
        } else {
            match error_covariances(&psi_i, plan, &reduced, &vk) {
                Ok((cf, ct)) => error_metrics(&cf, &ct).ok(),
                Err(Error::SingularNormalEquations { .. })
                | Err(Error::SingularNoiseCovariance { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        let fast_score = fast.as_ref().map(|scores| scores[node - 1].1);
        rankings.push(NodeRanking {
            node,
            metrics,
            fast_score,
        });
    }
    rankings.sort_by(|a, b| {
        let va = a.metrics.map_or(f64::INFINITY, |m| m.get(metric));
        let vb = b.metrics.map_or(f64::INFINITY, |m| m.get(metric));
        va.total_cmp(&vb).then(a.node.cmp(&b.node))
    });
    Ok(rankings)
}

/// Closed-form node scores for white observation noise and a structured
/// plan `C_K(n0, N0)`:
///
/// `score(i) = sum_k |[upsilon_i]_k|^2 * sum_m |lambda_k|^(2 (n0-1+m N0))`
///
/// where the inner geometric sum is evaluated in closed form, falling back
/// to the direct power sum when `|lambda_k|^(2 N0)` is 1 and the geometric
/// denominator vanishes. Returned in node order; larger is better (the
/// score is the trace of the inverse frequency error covariance up to the
/// noise power, so ranking by descending score equals ranking by ascending
/// e4).
pub fn fast_node_scores(
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &SelectionPlan,
) -> Result<Vec<(usize, f64)>> {
    let s = plan.structured_form().ok_or_else(|| Error::InvalidPlan {
        reason: "closed-form node scores need a structured plan".into(),
    })?;
    validate_support(support, decomp.n())?;
    let lambdas = decomp.support_eigenvalues(support)?;
    let weights: Vec<f64> = lambdas
        .iter()
        .map(|lam| {
            let r = lam.norm_sqr();
            let step = r.powi(s.spacing as i32);
            let start = r.powi(s.n0 as i32 - 1);
            if (1.0 - step).abs() < 1e-12 {
                // Degenerate geometric sum (|lambda| = 1): direct power sum.
                (0..s.count).map(|m| start * step.powi(m as i32)).sum()
            } else {
                start * (1.0 - step.powi(s.count as i32)) / (1.0 - step)
            }
        })
        .collect();
    let mut scores = Vec::with_capacity(decomp.n());
    for node in 1..=decomp.n() {
        let upsilon = node_pattern(decomp, node)?;
        let score: f64 = support
            .iter()
            .zip(weights.iter())
            .map(|(&k, w)| upsilon[k - 1].norm_sqr() * w)
            .sum();
        scores.push((node, score));
    }
    Ok(scores)
}

/// Outcome of the shift-count design rule.
#[derive(Debug, Clone, Copy)]
pub struct N0Selection {
    pub n0: usize,
    /// Product of |lambda_k|^2 over the support: the per-step determinant
    /// factor that decides the rule.
    pub eigenvalue_power_product: f64,
}

/// Optimal first observation index `n0` for the log-determinant metric under
/// white observation noise: each unit increase of `n0` multiplies
/// `det(R_hat_e)` by `1 / prod_k |lambda_k|^2`, so take `n0 = 1` when the
/// product is at most one and the largest admissible `n0` otherwise.
pub fn select_n0(
    decomp: &SpectralDecomposition,
    support: &[usize],
    spacing: usize,
    max_shifts: usize,
    model: &NoiseModel,
) -> Result<N0Selection> {
    if !matches!(model, NoiseModel::ObservationWhite { .. }) {
        return Err(Error::InvalidModel(
            "the n0 rule is derived for white observation noise only".into(),
        ));
    }
    validate_support(support, decomp.n())?;
    let k = support.len();
    if spacing == 0 || max_shifts < 1 + (k - 1) * spacing {
        return Err(Error::InvalidPlan {
            reason: format!(
                "no admissible n0 for K = {k}, N0 = {spacing}, L = {max_shifts}"
            ),
        });
    }
    let lambdas = decomp.support_eigenvalues(support)?;
    let product: f64 = lambdas.iter().map(|l| l.norm_sqr()).product();
    let n0 = if product <= 1.0 {
        1
    } else {
        max_shifts - (k - 1) * spacing
    };
    Ok(N0Selection {
        n0,
        eigenvalue_power_product: product,
    })
}

/// Linear map from a standard Gaussian to the picked noise `w_bar`, plus
/// whether the pipeline is real-valued.
fn noise_transform(
    model: &NoiseModel,
    decomp: &SpectralDecomposition,
    node: usize,
    support: &[usize],
    plan: &SelectionPlan,
) -> Result<(Array2<Complex64>, bool)> {
    model.validate_sigma2()?;
    let rows = plan.total();
    let real = decomp.is_real();
    match model {
        NoiseModel::ObservationWhite { sigma2 } => {
            let m = plan.len();
            Ok((
                linalg::identity(m).mapv(|z| z * sigma2.sqrt()),
                real,
            ))
        }
        NoiseModel::SignalWhite { sigma2 } => {
            let t = signal_noise_transform(decomp, node, rows)?;
            Ok((plan.gather_rows(&t)?.mapv(|z| z * sigma2.sqrt()), real))
        }
        NoiseModel::FrequencyWhite { sigma2 } => {
            let psi_i = build_psi_i(decomp, node, support, rows)?;
            Ok((plan.gather_rows(&psi_i)?.mapv(|z| z * sigma2.sqrt()), real))
        }
        NoiseModel::Custom { covariance } => {
            let full = NoiseCovariance {
                matrix: covariance.clone(),
                factor: None,
            };
            let reduced = reduce_covariance(&full, plan)?;
            let factor = linalg::psd_sqrt(&reduced.matrix)?;
            let cov_real = covariance.iter().all(|z| z.im.abs() <= 1e-12);
            Ok((factor, real && cov_real))
        }
    }
}

/// Draw one realization of the picked observation noise `w_bar = C w`.
pub fn sample_noise<R: Rng>(
    model: &NoiseModel,
    decomp: &SpectralDecomposition,
    node: usize,
    support: &[usize],
    plan: &SelectionPlan,
    rng: &mut R,
) -> Result<Array1<Complex64>> {
    let (transform, real) = noise_transform(model, decomp, node, support, plan)?;
    let g = gaussian_vec(rng, transform.ncols(), real);
    Ok(transform.dot(&g))
}

/// Empirical validation of the estimator against its theoretical error
/// covariance.
#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub trials: usize,
    /// Mean time-domain squared error over the trials.
    pub empirical_mse: f64,
    /// trace of the theoretical time-domain error covariance.
    pub theoretical_mse: f64,
    pub empirical_covariance: Array2<Complex64>,
    pub theoretical_covariance: Array2<Complex64>,
    pub mean_estimate: Array1<Complex64>,
}

/// Run `trials` independent noisy estimations of a known coefficient vector.
/// Per-trial noise comes from counter-indexed streams of the master seed, so
/// the result does not depend on execution order.
#[allow(clippy::too_many_arguments)]
pub fn simulate_estimation(
    decomp: &SpectralDecomposition,
    support: &[usize],
    node: usize,
    plan: &SelectionPlan,
    model: &NoiseModel,
    xhat_true: &Array1<Complex64>,
    trials: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let k = support.len();
    if xhat_true.len() != k {
        return Err(Error::DimensionMismatch {
            context: "simulation",
            expected: k,
            actual: xhat_true.len(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidPlan {
            reason: "at least one trial required".into(),
        });
    }
    let rows = plan.total();
    let psi_i = build_psi_i(decomp, node, support, rows)?;
    let g = plan.gather_rows(&psi_i)?;
    let full_cov = noise_covariance(model, decomp, node, support, rows)?;
    let reduced = reduce_covariance(&full_cov, plan)?;
    let vk = decomp.basis_columns(support)?;
    let (cov_f, cov_t) = error_covariances(&psi_i, plan, &reduced, &vk)?;
    let theoretical_mse = cov_t.diag().iter().map(|z| z.re).sum::<f64>();

    // Precompute the estimator matrix B with B G = I.
    let estimator = blue_core(&g, &reduced)?.estimator;

    let (transform, real) = noise_transform(model, decomp, node, support, plan)?;
    let dim = transform.ncols();
    let clean = g.dot(xhat_true);

    let mut sum_sq_time = 0.0;
    let mut cov_acc: Array2<Complex64> = Array2::zeros((k, k));
    let mut mean_acc: Array1<Complex64> = Array1::zeros(k);
    for t in 0..trials {
        let mut rng = stream_rng(seed, t as u64);
        let gauss = gaussian_vec(&mut rng, dim, real);
        let z = &clean + &transform.dot(&gauss);
        let est = estimator.dot(&z);
        let err = xhat_true - &est;
        let time_err = vk.dot(&err);
        sum_sq_time += time_err.iter().map(|z| z.norm_sqr()).sum::<f64>();
        for a in 0..k {
            for b in 0..k {
                cov_acc[[a, b]] += err[a] * err[b].conj();
            }
        }
        mean_acc = &mean_acc + &est;
    }
    let tf = trials as f64;
    Ok(SimulationReport {
        trials,
        empirical_mse: sum_sq_time / tf,
        theoretical_mse,
        empirical_covariance: cov_acc.mapv(|z| z / tf),
        theoretical_covariance: cov_f,
        mean_estimate: mean_acc.mapv(|z| z / tf),
    })
}
