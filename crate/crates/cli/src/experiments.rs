//! The experiment studies behind the CLI subcommands.
//!
//! Every study derives all of its randomness from a master seed through
//! counter-indexed streams, so reruns are bit-identical and units of work
//! are order independent.

use gsp_core::error::{Error, Result};
use gsp_core::graphs_io::{
    erdos_renyi, shift_from_graph, EdgeListGraph, GraphSpec, NoiseSpec, PlanSpec, ShiftKind,
    SupportSpec,
};
use gsp_core::linalg;
use gsp_core::noisy::{
    estimate, fast_node_scores, sample_noise, select_n0, select_sampling_node, Metric,
    N0Selection, NodeRanking, NoiseModel,
};
use gsp_core::rng::{gaussian_vec, stream_rng};
use gsp_core::sampling::{aggregate, aggregation_sample, SelectionPlan};
use gsp_core::sparse::{
    brute_force_l0, check_identifiability, l1_recover, L1Mode, L1Options, SensingSystem,
};
use gsp_core::spaceshift::{spaceshift_blue, ObservationPlan};
use gsp_core::spectral::{
    decompose, synthesize_bandlimited, DecomposeMode, ShiftOperator,
    SpectralDecomposition,
};
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;

/// Pick the decomposition mode for a built shift: the directed-cycle
/// adjacency gets the analytic DFT basis, Hermitian shifts the symmetric
/// solver, anything else the general one.
pub fn decompose_shift(
    graph_spec: &GraphSpec,
    kind: ShiftKind,
    shift: &ShiftOperator,
) -> Result<SpectralDecomposition> {
    let mode = if graph_spec.is_directed_cycle() && kind == ShiftKind::Adjacency {
        DecomposeMode::AnalyticCycle
    } else {
        let scale = linalg::frobenius(&shift.matrix().view()).max(1.0);
        if shift.hermitian_deviation() <= 1e-12 * scale {
            DecomposeMode::Symmetric
        } else {
            DecomposeMode::General
        }
    };
    decompose(shift, mode)
}

/// Graph, shift and decomposition from config pieces.
pub fn build_instance(
    graph_spec: &GraphSpec,
    kind: ShiftKind,
    seed: u64,
) -> Result<(EdgeListGraph, ShiftOperator, SpectralDecomposition)> {
    let graph = graph_spec.build(seed)?;
    let shift = shift_from_graph(&graph, &kind)?;
    let decomp = decompose_shift(graph_spec, kind, &shift)?;
    Ok((graph, shift, decomp))
}

#[derive(Debug, Clone)]
pub struct DecompositionSummary {
    pub n: usize,
    pub eigenvalues: Vec<Complex64>,
    pub is_normal: bool,
    pub condition_number: f64,
    pub ordering: Vec<usize>,
}

pub fn decompose_report(
    graph_spec: &GraphSpec,
    kind: ShiftKind,
    seed: u64,
) -> Result<DecompositionSummary> {
    let (_, _, d) = build_instance(graph_spec, kind, seed)?;
    Ok(DecompositionSummary {
        n: d.n(),
        eigenvalues: d.eigenvalues.to_vec(),
        is_normal: d.is_normal,
        condition_number: d.condition_number_v,
        ordering: d.ordering.clone(),
    })
}

/// Number of rows the aggregation sequence needs for a plan spec, capped at
/// four `N` shift applications.
pub fn plan_rows(n: usize, plan: &PlanSpec, k: usize) -> Result<usize> {
    let needed = match plan {
        PlanSpec::FirstK => k,
        PlanSpec::Structured { n0, spacing } => n0 + spacing * (k - 1),
        PlanSpec::Picks { picks } => picks.iter().copied().max().unwrap_or(1),
    };
    if needed > 4 * n {
        return Err(Error::InvalidPlan {
            reason: format!("plan needs {needed} shift applications, cap is {}", 4 * n),
        });
    }
    Ok(needed.max(n.min(4 * n)))
}

#[derive(Debug, Clone, Copy)]
pub struct TrialRow {
    pub trial: usize,
    pub node: usize,
    pub rel_error: f64,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct RecoverOutcome {
    pub rows: Vec<TrialRow>,
    pub attempted: usize,
    pub successes: usize,
    pub mean_error: f64,
    pub median_error: f64,
}

pub struct RecoverParams {
    pub graph: GraphSpec,
    pub shift: ShiftKind,
    pub support: SupportSpec,
    pub plan: PlanSpec,
    pub noise: NoiseSpec,
    /// None samples at every node.
    pub node: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

/// Planted-signal recovery trials on one graph: synthesize a random
/// bandlimited signal, observe it through the plan under the noise model,
/// interpolate with the BLUE, and record per-trial errors. Per-trial solver
/// failures are recorded as failed rows, not raised.
pub fn recover_trials(params: &RecoverParams) -> Result<RecoverOutcome> {
    let (_, shift, decomp) = build_instance(&params.graph, params.shift, params.seed)?;
    let n = decomp.n();
    let support = params.support.resolve(n)?;
    let k = support.len();
    let rows = plan_rows(n, &params.plan, k)?;
    let plan = params.plan.to_plan(rows, k)?;
    let model = params.noise.to_model();
    let nodes: Vec<usize> = match params.node {
        Some(i) if i >= 1 && i <= n => vec![i],
        Some(i) => {
            return Err(Error::IndexOutOfRange {
                context: "recover node",
                index: i,
                max: n,
            })
        }
        None => (1..=n).collect(),
    };
    let mut out_rows = Vec::with_capacity(params.trials * nodes.len());
    let mut errors = Vec::new();
    let mut successes = 0usize;
    for trial in 0..params.trials {
        let mut rng = stream_rng(params.seed, 1_000 + trial as u64);
        let coeffs = gaussian_vec(&mut rng, k, decomp.is_real());
        let x = synthesize_bandlimited(&decomp, &support, &coeffs)?;
        for &node in &nodes {
            let seq = aggregate(&shift, &x, node, rows)?;
            let clean = aggregation_sample(&seq, &plan)?;
            let noise = sample_noise(&model, &decomp, node, &support, &plan, &mut rng)?;
            let samples = &clean + &noise;
            let rel_error = match estimate(&decomp, &support, node, &plan, &model, &samples) {
                Ok(report) => linalg::rel_diff_vec(&report.estimate_time.values, &x.values),
                Err(Error::SingularNormalEquations { .. })
                | Err(Error::SingularNoiseCovariance { .. })
                | Err(Error::SingularSystem { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let success = rel_error < 1e-8;
            successes += success as usize;
            errors.push(rel_error);
            out_rows.push(TrialRow {
                trial,
                node,
                rel_error,
                success,
            });
        }
    }
    errors.sort_by(f64::total_cmp);
    let attempted = out_rows.len();
    let mean_error = if errors.is_empty() {
        f64::NAN
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    let median_error = if errors.is_empty() {
        f64::NAN
    } else {
        errors[errors.len() / 2]
    };
    Ok(RecoverOutcome {
        rows: out_rows,
        attempted,
        successes,
        mean_error,
        median_error,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOutcome {
    pub cases: usize,
    pub successes: usize,
    pub condition_cases: usize,
    pub condition_successes: usize,
}

impl SweepOutcome {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.cases.max(1) as f64
    }

    pub fn conditioned_rate(&self) -> f64 {
        self.condition_successes as f64 / self.condition_cases.max(1) as f64
    }
}

/// Noiseless recovery ensemble: random connected symmetric graphs with
/// `N in [10, 30]`, bandwidth `K in [1, 5]`, edge probability in
/// `[0.15, 0.25]`; every node of every graph attempts to recover a planted
/// bandlimited signal from its first K aggregation samples.
pub fn noiseless_recovery_sweep(graphs: usize, seed: u64) -> Result<SweepOutcome> {
    let mut outcome = SweepOutcome {
        cases: 0,
        successes: 0,
        condition_cases: 0,
        condition_successes: 0,
    };
    for g in 0..graphs {
        let mut rng = stream_rng(seed, g as u64);
        let n = rng.random_range(10..=30);
        let k = rng.random_range(1..=5usize);
        let p = 0.15 + 0.10 * rng.random::<f64>();
        let graph_seed = rng.random::<u64>();
        let graph = erdos_renyi(n, p, graph_seed, true, true)?;
        let shift = shift_from_graph(&graph, &ShiftKind::Adjacency)?;
        let decomp = decompose(&shift, DecomposeMode::Symmetric)?;
        let support: Vec<usize> = (1..=k).collect();
        let coeffs = gaussian_vec(&mut rng, k, true);
        let x = synthesize_bandlimited(&decomp, &support, &coeffs)?;
        let plan = SelectionPlan::first_k(k, k)?;
        for node in 1..=n {
            let seq = aggregate(&shift, &x, node, k)?;
            let samples = aggregation_sample(&seq, &plan)?;
            let conditions = gsp_core::sampling::check_recovery_conditions(
                &decomp,
                &support,
                node,
                gsp_core::sampling::DEFAULT_TOL_EIG,
                gsp_core::sampling::DEFAULT_TOL_UPSILON,
            )?
            .passes();
            let rec = gsp_core::sampling::aggregation_interpolate(
                &decomp,
                &support,
                node,
                &plan,
                &samples,
                gsp_core::sampling::InterpolateOptions {
                    force: true,
                    ..Default::default()
                },
            );
            let success = match rec {
                Ok(r) => linalg::rel_diff_vec(&r.signal.values, &x.values) < 1e-8,
                Err(Error::SingularSystem { .. }) => false,
                Err(e) => return Err(e),
            };
            outcome.cases += 1;
            outcome.successes += success as usize;
            if conditions {
                outcome.condition_cases += 1;
                outcome.condition_successes += success as usize;
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportMethod {
    L0,
    L1,
}

pub struct SupportIdParams {
    pub n: usize,
    pub bandwidth: usize,
    pub shifts: Vec<ShiftKind>,
    pub edge_probabilities: Vec<f64>,
    pub observations: Vec<usize>,
    pub instances: usize,
    pub method: SupportMethod,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct SupportIdPoint {
    pub shift: ShiftKind,
    pub p: f64,
    pub observations: usize,
    pub instances: usize,
    pub recovered: usize,
    /// Instances whose 2K-row structured system passed the identifiability
    /// clauses for the planted support.
    pub certified: usize,
    pub certified_recovered: usize,
}

impl SupportIdPoint {
    pub fn rate(&self) -> f64 {
        self.recovered as f64 / self.instances.max(1) as f64
    }

    pub fn certified_rate(&self) -> f64 {
        self.certified_recovered as f64 / self.certified.max(1) as f64
    }
}

/// Unknown-support recovery rates versus observation count.
///
/// Per instance: one connected symmetric graph, one bandlimited signal on
/// the K leading adjacency frequencies (all shift kinds share the
/// eigenbasis), one random sampling node. Observation counts reuse the same instance with
/// nested first-m plans. Success means the reconstructed signal matches the
/// planted one to 1e-6 in the node domain.
pub fn support_id_sweep(params: &SupportIdParams) -> Result<Vec<SupportIdPoint>> {
    let n = params.n;
    let k = params.bandwidth;
    let max_obs = params.observations.iter().copied().max().unwrap_or(2 * k);
    let mut points = Vec::new();
    for (pi, &p) in params.edge_probabilities.iter().enumerate() {
        // instance data per shift kind: (sequence, decomp, node, certified)
        let mut rates = vec![vec![(0usize, 0usize, 0usize); params.observations.len()]; params.shifts.len()];
        let mut certified_counts = vec![0usize; params.shifts.len()];
        for inst in 0..params.instances {
            let mut rng = stream_rng(params.seed, (pi * params.instances + inst) as u64);
            let graph_seed = rng.random::<u64>();
            let graph = erdos_renyi(n, p, graph_seed, true, true)?;
            let base_shift = shift_from_graph(&graph, &ShiftKind::Adjacency)?;
            let base_decomp = decompose(&base_shift, DecomposeMode::Symmetric)?;
            // Bandlimited in the shared eigenbasis: the K leading
            // frequencies of the adjacency.
            let support: Vec<usize> = (1..=k).collect();
            let coeffs = gaussian_vec(&mut rng, k, true);
            let x = synthesize_bandlimited(&base_decomp, &support, &coeffs)?;
            let node = 1 + rng.random_range(0..n);

            for (si, kind) in params.shifts.iter().enumerate() {
                let shift = shift_from_graph(&graph, kind)?;
                let decomp = decompose(&shift, DecomposeMode::Symmetric)?;
                let seq = aggregate(&shift, &x, node, max_obs)?;
                // Certification of the 2K-observation structured system for
                // the planted support, mapped into this shift's ordering.
                let cert = if 2 * k <= max_obs {
                    let plan2k = SelectionPlan::first_k(max_obs, 2 * k)?;
                    let report = check_identifiability(&decomp, node, &plan2k, k)?;
                    let mapped = map_support(&base_decomp, &decomp, &support);
                    report.passes_for_support(&mapped)
                } else {
                    false
                };
                certified_counts[si] += cert as usize;
                for (mi, &m) in params.observations.iter().enumerate() {
                    let plan = SelectionPlan::first_k(max_obs, m)?;
                    let system = SensingSystem::build(&decomp, node, &plan, &seq.values)?;
                    let recovered = match params.method {
                        SupportMethod::L0 => match brute_force_l0(&system, k) {
                            Ok(sol) => {
                                let x_rec = decomp.eigenvectors.dot(&sol.coefficients);
                                linalg::rel_diff_vec(&x_rec, &x.values) < 1e-6
                            }
                            Err(Error::Infeasible { .. }) => false,
                            Err(e) => return Err(e),
                        },
                        SupportMethod::L1 => {
                            match l1_recover(
                                &system,
                                L1Mode::EqualityConstrained,
                                &L1Options::new(k),
                            ) {
                                Ok(rep) if rep.success => {
                                    let sol = rep.polished.expect("success implies polish");
                                    let x_rec = decomp.eigenvectors.dot(&sol.coefficients);
                                    linalg::rel_diff_vec(&x_rec, &x.values) < 1e-6
                                }
                                Ok(_) => false,
                                Err(Error::NoConvergence { .. }) => false,
                                Err(e) => return Err(e),
                            }
                        }
                    };
                    let cell = &mut rates[si][mi];
                    cell.0 += recovered as usize;
                    if cert {
                        cell.1 += 1;
                        cell.2 += recovered as usize;
                    }
                }
            }
        }
        for (si, kind) in params.shifts.iter().enumerate() {
            for (mi, &m) in params.observations.iter().enumerate() {
                let (recovered, certified, certified_recovered) = rates[si][mi];
                let _ = certified_counts[si];
                points.push(SupportIdPoint {
                    shift: *kind,
                    p,
                    observations: m,
                    instances: params.instances,
                    recovered,
                    certified,
                    certified_recovered,
                });
            }
        }
    }
    Ok(points)
}

/// Map a support expressed in `from`'s eigenvalue order to the equivalent
/// indices in `to`'s order (both decompositions share eigenvectors).
fn map_support(
    from: &SpectralDecomposition,
    to: &SpectralDecomposition,
    support: &[usize],
) -> Vec<usize> {
    let mut mapped = Vec::with_capacity(support.len());
    for &kf in support {
        let col = from.eigenvectors.column(kf - 1);
        let mut best = (0usize, f64::INFINITY);
        for j in 0..to.n() {
            let cj = to.eigenvectors.column(j);
            // Eigenvectors match up to sign/phase; compare by alignment.
            let inner: Complex64 = cj.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
            let miss = 1.0 - inner.norm();
            if miss < best.1 {
                best = (j + 1, miss);
            }
        }
        mapped.push(best.0);
    }
    mapped.sort_unstable();
    mapped
}

pub struct StrategyParams {
    pub n: usize,
    pub p: f64,
    pub bandwidth: usize,
    /// How many leading frequencies carry the signal energy.
    pub dominant: usize,
    pub sigma2: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct StrategyOutcome {
    pub name: &'static str,
    pub attempted: usize,
    pub solved: usize,
    pub min_error: f64,
    pub median_error: f64,
}

/// The six space-shift sampling strategies compared on a synthetic low-pass
/// ensemble: energy concentrated in the leading frequencies, white noise on
/// the observations. Errors are signal-energy-normalized squared errors.
pub fn strategy_comparison(params: &StrategyParams) -> Result<Vec<StrategyOutcome>> {
    let n = params.n;
    let k = params.bandwidth;
    let graph = erdos_renyi(n, params.p, params.seed, true, true)?;
    let shift = shift_from_graph(&graph, &ShiftKind::Adjacency)?;
    let decomp = decompose(&shift, DecomposeMode::Symmetric)?;
    let support: Vec<usize> = (1..=k).collect();
    let model = NoiseModel::ObservationWhite {
        sigma2: params.sigma2,
    };
    let names = [
        "aggregation-one-node",
        "selection-k-nodes",
        "selection-after-1-shift",
        "selection-after-2-shifts",
        "selection-after-3-shifts",
        "two-nodes-two-shifts",
    ];
    let mut errors: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut attempted = vec![0usize; names.len()];
    for trial in 0..params.trials {
        let mut rng = stream_rng(params.seed, 10_000 + trial as u64);
        let raw = gaussian_vec(&mut rng, k, true);
        let coeffs = Array1::from_iter(raw.iter().enumerate().map(|(i, z)| {
            if i < params.dominant {
                *z
            } else {
                z * 0.05
            }
        }));
        let x = synthesize_bandlimited(&decomp, &support, &coeffs)?;
        let energy = x.energy();
        // All shifted signals any strategy needs: powers 0..=3 plus enough
        // for the aggregation row.
        let depth = k.max(4);
        let mut sequences = Array2::zeros((n, depth));
        let mut current = x.values.clone();
        for l in 0..depth {
            if l > 0 {
                current = shift.apply_vec(&current);
            }
            sequences.column_mut(l).assign(&current);
        }
        let node = 1 + rng.random_range(0..n);
        let mut others: Vec<usize> = (1..=n).collect();
        for i in (1..others.len()).rev() {
            let j = rng.random_range(0..=i);
            others.swap(i, j);
        }
        let picked: Vec<usize> = others[..k].to_vec();
        let pair: Vec<usize> = others[k..k + 2].to_vec();
        let plans: Vec<ObservationPlan> = vec![
            ObservationPlan::all_shifts_at(node, k, n, depth)?,
            ObservationPlan::nodes_at_shift(&picked, 1, n, depth)?,
            ObservationPlan::nodes_at_shift(&picked, 2, n, depth)?,
            ObservationPlan::nodes_at_shift(&picked, 3, n, depth)?,
            ObservationPlan::nodes_at_shift(&picked, 4, n, depth)?,
            ObservationPlan::new(
                vec![(pair[0], 1), (pair[0], 2), (pair[1], 1), (pair[1], 2)],
                n,
                depth,
            )?,
        ];
        for (si, plan) in plans.iter().enumerate() {
            attempted[si] += 1;
            let clean = plan.gather(&sequences)?;
            let noise =
                gaussian_vec(&mut rng, plan.len(), decomp.is_real()).mapv(|z| z * params.sigma2.sqrt());
            let samples = &clean + &noise;
            match spaceshift_blue(&decomp, &support, plan, &model, &samples) {
                Ok(report) => {
                    let err = (&report.estimate_time.values - &x.values)
                        .iter()
                        .map(|z| z.norm_sqr())
                        .sum::<f64>()
                        / energy;
                    errors[si].push(err);
                }
                Err(Error::SingularNormalEquations { .. })
                | Err(Error::SingularSystem { .. })
                | Err(Error::SingularNoiseCovariance { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(si, name)| {
            let list = &mut errors[si];
            list.sort_by(f64::total_cmp);
            StrategyOutcome {
                name,
                attempted: attempted[si],
                solved: list.len(),
                min_error: list.first().copied().unwrap_or(f64::NAN),
                median_error: if list.is_empty() {
                    f64::NAN
                } else {
                    list[list.len() / 2]
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct DesignReport {
    pub rankings: Vec<NodeRanking>,
    pub fast_scores: Option<Vec<(usize, f64)>>,
    pub n0: Option<N0Selection>,
}

/// Node ranking under the chosen metric plus, for white observation noise,
/// the closed-form score and the n0 design rule.
pub fn design_report(
    decomp: &SpectralDecomposition,
    support: &[usize],
    plan: &SelectionPlan,
    model: &NoiseModel,
    metric: Metric,
    max_shifts: usize,
) -> Result<DesignReport> {
    let rankings = select_sampling_node(decomp, support, plan, model, metric)?;
    let observation = matches!(model, NoiseModel::ObservationWhite { .. });
    let fast_scores = if observation && plan.structured_form().is_some() {
        Some(fast_node_scores(decomp, support, plan)?)
    } else {
        None
    };
    let n0 = if observation {
        let spacing = plan.structured_form().map_or(1, |s| s.spacing);
        Some(select_n0(decomp, support, spacing, max_shifts, model)?)
    } else {
        None
    };
    Ok(DesignReport {
        rankings,
        fast_scores,
        n0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_on_small_budget_recovers_nearly_everything() {
        let outcome = noiseless_recovery_sweep(20, 11).unwrap();
        assert!(outcome.cases >= 200);
        assert!(outcome.rate() > 0.95, "rate {}", outcome.rate());
    }

    #[test]
    fn recover_noiseless_is_exact() {
        let params = RecoverParams {
            graph: GraphSpec::ErdosRenyi {
                n: 15,
                p: 0.25,
                connected: true,
                symmetric: true,
            },
            shift: ShiftKind::Adjacency,
            support: SupportSpec::FirstK { k: 3 },
            plan: PlanSpec::FirstK,
            noise: NoiseSpec::None,
            node: Some(2),
            trials: 5,
            seed: 3,
        };
        let out = recover_trials(&params).unwrap();
        assert_eq!(out.attempted, 5);
        assert_eq!(out.successes, 5);
        assert!(out.median_error < 1e-10);
    }

    #[test]
    fn zero_sigma_matches_noiseless_flag() {
        let mk = |noise| RecoverParams {
            graph: GraphSpec::ErdosRenyi {
                n: 12,
                p: 0.3,
                connected: true,
                symmetric: true,
            },
            shift: ShiftKind::Adjacency,
            support: SupportSpec::FirstK { k: 2 },
            plan: PlanSpec::FirstK,
            noise,
            node: Some(1),
            trials: 4,
            seed: 9,
        };
        let a = recover_trials(&mk(NoiseSpec::None)).unwrap();
        let b = recover_trials(&mk(NoiseSpec::Observation { sigma2: 0.0 })).unwrap();
        for (ra, rb) in a.rows.iter().zip(b.rows.iter()) {
            assert_eq!(ra.rel_error, rb.rel_error);
        }
    }

    #[test]
    fn strategy_table_has_six_rows() {
        let outcomes = strategy_comparison(&StrategyParams {
            n: 20,
            p: 0.2,
            bandwidth: 4,
            dominant: 2,
            sigma2: 0.02,
            trials: 10,
            seed: 5,
        })
        .unwrap();
        assert_eq!(outcomes.len(), 6);
        assert_eq!(outcomes[0].name, "aggregation-one-node");
        assert!(outcomes.iter().all(|o| o.attempted == 10));
    }
}
