//! Space-shift sampling: observations at arbitrary (node, shift) pairs.
//!
//! Stacking the aggregation sequences of every node gives a system of N*L
//! equations in the K active coefficients; picking rows of that stack
//! generalizes both samplers. All-shifts-at-one-node reduces to aggregation
//! sampling, first-shift-at-K-nodes reduces to selection sampling. The
//! stacked vector uses vec(Z^T) ordering: node-major, shift-minor, flat
//! index `(i - 1) L + l`. Nothing N^2-sized is ever materialized for the
//! solves; system rows and noise covariances are assembled pick by pick.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphs_io::EdgeListGraph;
use crate::linalg;
use crate::noisy::{error_metrics, EstimationReport, NoiseModel, ReducedCovariance};


use crate::spectral::{node_pattern, validate_support, GraphSignal, SpectralDecomposition};

/// Ordered distinct (node, shift) picks; shift index l in 1..=L observes
/// `[S^(l-1) x]_node`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationPlan {
    picks: Vec<(usize, usize)>,
    node_count: usize,
    shift_count: usize,
}

impl ObservationPlan {
    pub fn new(picks: Vec<(usize, usize)>, node_count: usize, shift_count: usize) -> Result<Self> {
        if picks.is_empty() {
            return Err(Error::InvalidPlan {
                reason: "empty observation plan".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for &(node, shift) in &picks {
            if node == 0 || node > node_count {
                return Err(Error::IndexOutOfRange {
                    context: "observation plan node",
                    index: node,
                    max: node_count,
                });
            }
            if shift == 0 || shift > shift_count {
                return Err(Error::IndexOutOfRange {
                    context: "observation plan shift",
                    index: shift,
                    max: shift_count,
                });
            }
            if !seen.insert((node, shift)) {
                return Err(Error::InvalidPlan {
                    reason: format!("pick ({node}, {shift}) repeated"),
                });
            }
        }
        Ok(Self {
            picks,
            node_count,
            shift_count,
        })
    }

    /// Aggregation-style plan: shifts 1..=k at a single node.
    pub fn all_shifts_at(node: usize, k: usize, node_count: usize, shift_count: usize) -> Result<Self> {
        Self::new(
            (1..=k).map(|l| (node, l)).collect(),
            node_count,
            shift_count,
        )
    }

    /// Selection-style plan: shift index `shift` at each of the given nodes.
    pub fn nodes_at_shift(
        nodes: &[usize],
        shift: usize,
        node_count: usize,
        shift_count: usize,
    ) -> Result<Self> {
        Self::new(
            nodes.iter().map(|&i| (i, shift)).collect(),
            node_count,
            shift_count,
        )
    }

    pub fn picks(&self) -> &[(usize, usize)] {
        &self.picks
    }

    pub fn len(&self) -> usize {
        self.picks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picks.is_empty()
    }

    pub fn shift_count(&self) -> usize {
        self.shift_count
    }

    /// Flat indices into vec(Z^T): `(i - 1) L + l`, 1-based.
    pub fn flat_indices(&self) -> Vec<usize> {
        self.picks
            .iter()
            .map(|&(i, l)| (i - 1) * self.shift_count + l)
            .collect()
    }

    /// Gather the picked samples from per-node aggregation sequences laid
    /// out as an N x L matrix (row i holds node i's sequence).
    pub fn gather(&self, sequences: &Array2<Complex64>) -> Result<Array1<Complex64>> {
        if sequences.nrows() != self.node_count || sequences.ncols() < self.shift_count {
            return Err(Error::DimensionMismatch {
                context: "observation gather",
                expected: self.node_count,
                actual: sequences.nrows(),
            });
        }
        Ok(Array1::from_iter(
            self.picks.iter().map(|&(i, l)| sequences[[i - 1, l - 1]]),
        ))
    }
}

/// The stacked node-pattern matrices: block i of `Upsilon` is
/// `diag(upsilon_i)` (N^2 x N), block i of the reduced form is the support
/// restriction (N K x K).
pub fn build_upsilon(
    decomp: &SpectralDecomposition,
    support: &[usize],
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    validate_support(support, decomp.n())?;
    let n = decomp.n();
    let k = support.len();
    let mut full = Array2::zeros((n * n, n));
    let mut reduced = Array2::zeros((n * k, k));
    for i in 1..=n {
        let upsilon = node_pattern(decomp, i)?;
        for j in 0..n {
            full[[(i - 1) * n + j, j]] = upsilon[j];
        }
        for (c, &kk) in support.iter().enumerate() {
            reduced[[(i - 1) * k + c, c]] = upsilon[kk - 1];
        }
    }
    Ok((full, reduced))
}

/// System matrix of the picked equations: row for pick (i, l) is row l of
/// `Psi_i`, so the Kronecker stack is never formed.
pub fn build_stacked_system(
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &ObservationPlan,
) -> Result<Array2<Complex64>> {
    validate_support(support, decomp.n())?;
    let k = support.len();
    let lambdas = decomp.support_eigenvalues(support)?;
    let mut out = Array2::zeros((plan.len(), k));
    for (row, &(node, shift)) in plan.picks().iter().enumerate() {
        let upsilon = node_pattern(decomp, node)?;
        for (col, (&kk, lam)) in support.iter().zip(lambdas.iter()).enumerate() {
            out[[row, col]] = lam.powu(shift as u32 - 1) * upsilon[kk - 1];
        }
    }
    Ok(out)
}

/// Stacked noise covariance restricted to the picked rows (m x m), with its
/// factor when the model provides one.
///
/// Correlations across nodes matter for the signal- and frequency-white
/// models because every node observes the same underlying noise; the factor
/// row for pick (i, l) is assembled directly from `Psi`, the node patterns
/// and, for signal-white noise on non-normal shifts, `V^-1`.
pub fn stacked_noise_covariance(
    model: &NoiseModel,
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &ObservationPlan,
) -> Result<ReducedCovariance> {
    validate_support(support, decomp.n())?;
    let m = plan.len();
    let factor = match model {
        NoiseModel::ObservationWhite { sigma2 } => {
            linalg::identity(m).mapv(|z| z * sigma2.sqrt())
        }
        NoiseModel::SignalWhite { sigma2 } => {
            let n = decomp.n();
            // Factor row for pick (i, l): (lambda^(l-1) .* upsilon_i)^T V^-1.
            let mut rows = Array2::zeros((m, n));
            for (r, &(node, shift)) in plan.picks().iter().enumerate() {
                let upsilon = node_pattern(decomp, node)?;
                let weighted = Array1::from_iter((0..n).map(|kk| {
                    decomp.eigenvalues[kk].powu(shift as u32 - 1) * upsilon[kk]
                }));
                rows.row_mut(r)
                    .assign(&decomp.inverse_eigenvectors.t().dot(&weighted));
            }
            rows.mapv(|z| z * sigma2.sqrt())
        }
        NoiseModel::FrequencyWhite { sigma2 } => {
            build_stacked_system(decomp, support, plan)?.mapv(|z| z * sigma2.sqrt())
        }
        NoiseModel::Custom { .. } => {
            return Err(Error::InvalidModel(
                "custom covariances are per-node; build the stacked covariance explicitly".into(),
            ))
        }
    };
    let fh = linalg::conj_transpose(&factor.view());
    Ok(ReducedCovariance {
        matrix: linalg::hermitian_part(&factor.dot(&fh)),
        factor: Some(factor),
    })
}

fn is_zero(m: &Array2<Complex64>) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// BLUE over an arbitrary space-shift observation plan, with the same
/// covariances and metrics as single-node estimation.
pub fn spaceshift_blue(
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &ObservationPlan,
    model: &NoiseModel,
    samples: &Array1<Complex64>,
) -> Result<EstimationReport> {
    let k = support.len();
    let m = plan.len();
    if samples.len() != m {
        return Err(Error::DimensionMismatch {
            context: "space-shift samples",
            expected: m,
            actual: samples.len(),
        });
    }
    if m < k {
        return Err(Error::InvalidPlan {
            reason: format!("plan picks {m} rows, need at least K = {k}"),
        });
    }
    let g = build_stacked_system(decomp, support, plan)?;
    let cov = stacked_noise_covariance(model, decomp, support, plan)?;
    let vk = decomp.basis_columns(support)?;

    let core = crate::noisy::blue_core(&g, &cov)?;
    let xhat = core.estimator.dot(samples);
    let cov_f = core.cov_frequency;

    let vh = linalg::conj_transpose(&vk.view());
    let cov_t = linalg::hermitian_part(&vk.dot(&cov_f).dot(&vh));
    let metrics = if is_zero(&cov_f) {
        crate::noisy::ErrorMetrics {
            e1: 0.0,
            e2: 0.0,
            e3: f64::NEG_INFINITY,
            e4: 0.0,
        }
    } else {
        error_metrics(&cov_f, &cov_t)?
    };
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

/// Message-passing observability pattern around one node.
#[derive(Debug, Clone, Copy)]
pub struct StructuredPlan {
    pub center: usize,
    /// Shifts computed at the center (L1).
    pub depth: usize,
    /// Incoming neighbors of the center (N1).
    pub neighbor_count: usize,
}

/// The structured plan with its induced system diagnostics.
#[derive(Debug, Clone)]
pub struct StructuredSystem {
    pub structured: StructuredPlan,
    pub plan: ObservationPlan,
    pub rows: usize,
    pub rank: usize,
    /// `1 + L1 N1`: the most frequencies this pattern can ever determine.
    pub rank_bound: usize,
}

/// Build the observation plan a center node can realize by computing `depth`
/// shifts with message passing: its own samples for shifts 0..=depth plus
/// each incoming neighbor's samples for shifts 0..depth. Reports the
/// numerical rank of the induced system for the given support.
///
/// The system is rank deficient by construction whenever depth >= 1: every
/// center sample after the first is a linear combination of the neighbors'
/// earlier samples, capping the rank at `1 + depth * neighbor_count`.
pub fn structured_plan(
    graph: &EdgeListGraph,
    decomp: &SpectralDecomposition,
    support: &[usize],
    center: usize,
    depth: usize,
) -> Result<StructuredSystem> {
    let n = graph.node_count();
    if center == 0 || center > n {
        return Err(Error::IndexOutOfRange {
            context: "structured plan center",
            index: center,
            max: n,
        });
    }
    if decomp.n() != n {
        return Err(Error::DimensionMismatch {
            context: "structured plan",
            expected: n,
            actual: decomp.n(),
        });
    }
    let neighbors = graph.incoming_neighbors(center);
    let n1 = neighbors.len();
    if depth >= 1 && n1 == 0 {
        return Err(Error::IsolatedNode {
            node: center,
            requested: depth,
        });
    }
    let mut picks = Vec::with_capacity(1 + depth * (1 + n1));
    for l in 1..=(depth + 1) {
        picks.push((center, l));
    }
    for &j in &neighbors {
        for l in 1..=depth {
            picks.push((j, l));
        }
    }
    let shift_count = (depth + 1).max(1);
    let plan = ObservationPlan::new(picks, n, shift_count)?;
    let system = build_stacked_system(decomp, support, &plan)?;
    let rank = linalg::numerical_rank(&system)?;
    Ok(StructuredSystem {
        structured: StructuredPlan {
            center,
            depth,
            neighbor_count: n1,
        },
        rows: plan.len(),
        rank,
        rank_bound: 1 + depth * n1,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs_io::erdos_renyi;
    use crate::noisy::{estimate, simulate_estimation};
    use crate::rng::stream_rng;
    use crate::sampling::{aggregate, build_psi_i, SelectionPlan};
    use crate::spectral::{
        decompose, synthesize_bandlimited, DecomposeMode, ShiftOperator,
    };
    use rand::Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_decomp(n: usize, seed: u64) -> SpectralDecomposition {
        let mut rng = stream_rng(seed, 0);
        let a = Array2::from_shape_fn((n, n), |_| c(rng.random::<f64>() - 0.5));
        let shift = ShiftOperator::from_dense(linalg::hermitian_part(&a)).unwrap();
        decompose(&shift, DecomposeMode::Symmetric).unwrap()
    }

    #[test]
    fn upsilon_blocks_are_node_patterns() {
        let d = random_decomp(4, 3);
        let (full, reduced) = build_upsilon(&d, &[1, 3]).unwrap();
        assert_eq!(full.dim(), (16, 4));
        assert_eq!(reduced.dim(), (8, 2));
        for i in 1..=4 {
            let upsilon = node_pattern(&d, i).unwrap();
            for j in 0..4 {
                for col in 0..4 {
                    let want = if col == j { upsilon[j] } else { c(0.0) };
                    assert!((full[[(i - 1) * 4 + j, col]] - want).norm() < 1e-15);
                }
            }
            for (cidx, &k) in [1usize, 3].iter().enumerate() {
                assert!(
                    (reduced[[(i - 1) * 2 + cidx, cidx]] - upsilon[k - 1]).norm() < 1e-15
                );
            }
        }
    }

    #[test]
    fn full_support_reduced_equals_full() {
        let d = random_decomp(2, 5);
        let (full, reduced) = build_upsilon(&d, &[1, 2]).unwrap();
        assert!(linalg::rel_diff_mat(&full, &reduced) < 1e-15);
    }

    #[test]
    fn stacked_system_matches_explicit_kronecker() {
        let d = random_decomp(8, 7);
        let support = vec![1, 2, 4];
        let k = support.len();
        let n = 8;
        let plan = ObservationPlan::new(
            vec![(1, 1), (3, 2), (3, 5), (7, 1), (8, 8)],
            n,
            n,
        )
        .unwrap();
        let fast = build_stacked_system(&d, &support, &plan).unwrap();

        // Explicit I (x) (Psi E_K) times the reduced Upsilon stack.
        let psi = crate::spectral::build_psi(&d, n);
        let cols: Vec<usize> = support.iter().map(|&kk| kk - 1).collect();
        let psi_ek = psi.entries.select(ndarray::Axis(1), &cols);
        let (_, reduced) = build_upsilon(&d, &support).unwrap();
        let mut kron = Array2::zeros((n * n, n * k));
        for i in 0..n {
            for r in 0..n {
                for cc in 0..k {
                    kron[[i * n + r, i * k + cc]] = psi_ek[[r, cc]];
                }
            }
        }
        let big = kron.dot(&reduced);
        let flat = plan.flat_indices();
        let explicit = linalg::gather_rows(&big.view(), &flat);
        assert!(linalg::rel_diff_mat(&fast, &explicit) < 1e-12);
    }

    #[test]
    fn one_node_plan_is_aggregation_sampling() {
        let d = random_decomp(9, 11);
        let support = vec![1, 2, 3];
        let node = 4;
        let plan = ObservationPlan::all_shifts_at(node, 3, 9, 9).unwrap();
        let sys = build_stacked_system(&d, &support, &plan).unwrap();
        let psi_i = build_psi_i(&d, node, &support, 3).unwrap();
        assert!(linalg::rel_diff_mat(&sys, &psi_i) < 1e-14);
    }

    #[test]
    fn first_shift_plan_is_selection_sampling() {
        let d = random_decomp(9, 13);
        let support = vec![1, 2, 3];
        let nodes = vec![2, 5, 8];
        let plan = ObservationPlan::nodes_at_shift(&nodes, 1, 9, 9).unwrap();
        let sys = build_stacked_system(&d, &support, &plan).unwrap();
        let vk = d.basis_columns(&support).unwrap();
        let sel = SelectionPlan::new(9, nodes).unwrap();
        let cvk = sel.gather_rows(&vk).unwrap();
        assert!(linalg::rel_diff_mat(&sys, &cvk) < 1e-14);
    }

    #[test]
    fn single_node_blue_matches_aggregation_estimate() {
        let d = random_decomp(10, 17);
        let support = vec![1, 2, 3];
        let node = 6;
        let mut rng = stream_rng(18, 0);
        let xhat = crate::rng::gaussian_vec(&mut rng, 3, true);
        let plan1 = SelectionPlan::first_k(10, 3).unwrap();
        let psi_i = build_psi_i(&d, node, &support, 10).unwrap();
        let g = plan1.gather_rows(&psi_i).unwrap();
        let noise = crate::rng::gaussian_vec(&mut rng, 3, true).mapv(|z| z * 0.05);
        let z = &g.dot(&xhat) + &noise;

        for model in [
            NoiseModel::ObservationWhite { sigma2: 0.01 },
            NoiseModel::SignalWhite { sigma2: 0.01 },
            NoiseModel::FrequencyWhite { sigma2: 0.01 },
        ] {
            let single = estimate(&d, &support, node, &plan1, &model, &z).unwrap();
            let plan2 = ObservationPlan::all_shifts_at(node, 3, 10, 10).unwrap();
            let stacked = spaceshift_blue(&d, &support, &plan2, &model, &z).unwrap();
            assert!(
                linalg::rel_diff_vec(&single.estimate_frequency, &stacked.estimate_frequency)
                    < 1e-10
            );
            assert!(
                linalg::rel_diff_mat(&single.cov_frequency, &stacked.cov_frequency) < 1e-10
            );
            assert!((single.metrics.e1 - stacked.metrics.e1).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_noise_recovers_planted_coefficients() {
        let d = random_decomp(8, 19);
        let support = vec![1, 2];
        let mut rng = stream_rng(20, 0);
        let xhat = crate::rng::gaussian_vec(&mut rng, 2, true);
        let plan = ObservationPlan::new(vec![(1, 1), (5, 2)], 8, 8).unwrap();
        let g = build_stacked_system(&d, &support, &plan).unwrap();
        let z = g.dot(&xhat);
        let report = spaceshift_blue(
            &d,
            &support,
            &plan,
            &NoiseModel::ObservationWhite { sigma2: 0.0 },
            &z,
        )
        .unwrap();
        assert!(linalg::rel_diff_vec(&report.estimate_frequency, &xhat) < 1e-10);
        assert!(report.metrics.e1 == 0.0);
    }

    #[test]
    fn signal_white_cross_node_covariance_matches_monte_carlo() {
        // Nodes observing the same noisy signal see correlated noise; check
        // the assembled cross-node covariance empirically.
        let d = random_decomp(6, 23);
        let support = vec![1, 2];
        let plan = ObservationPlan::new(vec![(1, 1), (4, 1), (4, 2), (2, 3)], 6, 6).unwrap();
        let cov = stacked_noise_covariance(
            &NoiseModel::SignalWhite { sigma2: 1.0 },
            &d,
            &support,
            &plan,
        )
        .unwrap();
        let mut rng = stream_rng(24, 0);
        let draws = 200_000;
        let m = plan.len();
        let mut acc: Array2<Complex64> = Array2::zeros((m, m));
        let vinv = d.inverse_eigenvectors.clone();
        for _ in 0..draws {
            let w = crate::rng::gaussian_vec(&mut rng, 6, d.is_real());
            let what = vinv.dot(&w);
            let samples: Vec<Complex64> = plan
                .picks()
                .iter()
                .map(|&(node, shift)| {
                    let upsilon = node_pattern(&d, node).unwrap();
                    (0..6)
                        .map(|kk| {
                            d.eigenvalues[kk].powu(shift as u32 - 1) * upsilon[kk] * what[kk]
                        })
                        .sum()
                })
                .collect();
            for a in 0..m {
                for b in 0..m {
                    acc[[a, b]] += samples[a] * samples[b].conj();
                }
            }
        }
        let emp = acc.mapv(|z| z / draws as f64);
        assert!(
            linalg::rel_diff_mat(&emp, &cov.matrix) < 0.05,
            "gap {}",
            linalg::rel_diff_mat(&emp, &cov.matrix)
        );
    }

    #[test]
    fn aggregation_beats_selection_on_lowpass_ensemble() {
        // Low-pass signals sit on frequencies with |lambda| > 1, so repeated
        // shifts amplify the signal while white observation noise stays at
        // sigma^2: later samples carry higher SNR. Observing one node across
        // shifts therefore beats observing the raw signal at K nodes.
        let graph = erdos_renyi(20, 0.2, 404, true, true).unwrap();
        let shift = crate::graphs_io::shift_from_graph(
            &graph,
            &crate::graphs_io::ShiftKind::Adjacency,
        )
        .unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        // Support on the two largest-modulus frequencies.
        let support = vec![1, 2];
        let k = support.len();
        let n = 20;
        let sigma2 = 0.05;
        let model = NoiseModel::ObservationWhite { sigma2 };
        let mut agg_errors = Vec::new();
        let mut sel_errors = Vec::new();
        for trial in 0..60u64 {
            let mut rng = stream_rng(500 + trial, 0);
            let coeffs = crate::rng::gaussian_vec(&mut rng, k, true);
            let x = synthesize_bandlimited(&d, &support, &coeffs).unwrap();
            let energy = x.energy();

            let node = 1 + rng.random_range(0..n);
            let seq = aggregate(&shift, &x, node, k).unwrap();
            let agg_noise = crate::rng::gaussian_vec(&mut rng, k, true).mapv(|z| z * sigma2.sqrt());
            let agg_plan = ObservationPlan::all_shifts_at(node, k, n, k).unwrap();
            let agg = spaceshift_blue(&d, &support, &agg_plan, &model, &(&seq.values + &agg_noise));

            let mut nodes: Vec<usize> = (1..=n).collect();
            for i in (1..nodes.len()).rev() {
                let j = rng.random_range(0..=i);
                nodes.swap(i, j);
            }
            let nodes: Vec<usize> = nodes[..k].to_vec();
            let sel_plan = ObservationPlan::nodes_at_shift(&nodes, 1, n, k).unwrap();
            let sel_noise = crate::rng::gaussian_vec(&mut rng, k, true).mapv(|z| z * sigma2.sqrt());
            let sel_samples = Array1::from_iter(nodes.iter().map(|&i| x.values[i - 1])) + sel_noise;
            let sel = spaceshift_blue(&d, &support, &sel_plan, &model, &sel_samples);

            if let Ok(a) = agg {
                let err = (&a.estimate_time.values - &x.values)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    / energy;
                agg_errors.push(err);
            }
            if let Ok(s) = sel {
                let err = (&s.estimate_time.values - &x.values)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    / energy;
                sel_errors.push(err);
            }
        }
        let median = |v: &mut Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        let agg_med = median(&mut agg_errors);
        let sel_med = median(&mut sel_errors);
        assert!(
            agg_med < sel_med,
            "aggregation median {agg_med} vs selection median {sel_med}"
        );
    }

    #[test]
    fn structured_plan_rows_and_rank_bound() {
        // Star graph: center 1 with three neighbors.
        let edges = vec![(2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0)];
        let graph = EdgeListGraph::new(4, edges, false).unwrap();
        let shift =
            crate::graphs_io::shift_from_graph(&graph, &crate::graphs_io::ShiftKind::Adjacency)
                .unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let support: Vec<usize> = (1..=4).collect();
        let sys = structured_plan(&graph, &d, &support, 1, 2).unwrap();
        assert_eq!(sys.rows, 1 + 2 * (1 + 3));
        assert_eq!(sys.structured.neighbor_count, 3);
        assert_eq!(sys.rank_bound, 7);
        assert!(sys.rank <= sys.rank_bound);
        // Rows exceed the bound, so the system is rank deficient.
        assert!(sys.rank < sys.rows);
    }

    #[test]
    fn structured_plan_depth_zero_is_single_row() {
        let edges = vec![(1, 2, 1.0)];
        let graph = EdgeListGraph::new(2, edges, false).unwrap();
        let shift =
            crate::graphs_io::shift_from_graph(&graph, &crate::graphs_io::ShiftKind::Adjacency)
                .unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let sys = structured_plan(&graph, &d, &[1], 1, 0).unwrap();
        assert_eq!(sys.rows, 1);
        assert_eq!(sys.plan.picks(), &[(1, 1)]);
    }

    #[test]
    fn isolated_center_is_rejected() {
        let edges = vec![(2, 3, 1.0)];
        let graph = EdgeListGraph::new(3, edges, false).unwrap();
        let shift =
            crate::graphs_io::shift_from_graph(&graph, &crate::graphs_io::ShiftKind::Adjacency)
                .unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        assert!(matches!(
            structured_plan(&graph, &d, &[1], 1, 1),
            Err(Error::IsolatedNode { node: 1, requested: 1 })
        ));
    }

    #[test]
    fn random_graph_ranks_stay_bounded() {
        for seed in 0..10u64 {
            let graph = erdos_renyi(10, 0.3, 600 + seed, true, true).unwrap();
            let shift = crate::graphs_io::shift_from_graph(
                &graph,
                &crate::graphs_io::ShiftKind::Adjacency,
            )
            .unwrap();
            let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
            let support: Vec<usize> = (1..=10).collect();
            let mut rng = stream_rng(700 + seed, 0);
            let center = 1 + rng.random_range(0..10);
            let depth = 1 + rng.random_range(0..3);
            let sys = structured_plan(&graph, &d, &support, center, depth).unwrap();
            assert!(
                sys.rank <= sys.rank_bound,
                "seed {seed}: rank {} > bound {}",
                sys.rank,
                sys.rank_bound
            );
        }
    }

    #[test]
    fn simulation_and_stacked_theory_agree_on_single_node() {
        let d = random_decomp(8, 31);
        let support = vec![1, 2];
        let node = 3;
        let plan1 = SelectionPlan::first_k(8, 2).unwrap();
        let mut rng = stream_rng(32, 0);
        let xhat = crate::rng::gaussian_vec(&mut rng, 2, true);
        let sim = simulate_estimation(
            &d,
            &support,
            node,
            &plan1,
            &NoiseModel::SignalWhite { sigma2: 0.02 },
            &xhat,
            4000,
            5,
        )
        .unwrap();
        let plan2 = ObservationPlan::all_shifts_at(node, 2, 8, 8).unwrap();
        let g = build_stacked_system(&d, &support, &plan2).unwrap();
        let z = g.dot(&xhat);
        let stacked = spaceshift_blue(
            &d,
            &support,
            &plan2,
            &NoiseModel::SignalWhite { sigma2: 0.02 },
            &z,
        )
        .unwrap();
        let ratio = sim.empirical_mse / stacked.metrics.e1;
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    }
}
