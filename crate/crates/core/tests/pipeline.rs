//! End-to-end sampling and interpolation round trips across graph families.

use gsp_core::graphs_io::{erdos_renyi, shift_from_graph, ShiftKind};
use gsp_core::linalg;
use gsp_core::rng::stream_rng;
use gsp_core::sampling::{
    admissible_selections, aggregate, aggregate_spectral, aggregation_interpolate,
    aggregation_sample, check_recovery_conditions, selection_interpolate, InterpolateOptions,
    SelectionPlan, DEFAULT_TOL_EIG, DEFAULT_TOL_UPSILON,
};
use gsp_core::spectral::{
    decompose, gft, igft, random_bandlimited, DecomposeMode, GraphSignal, ShiftOperator,
    SpectralDecomposition,
};
use ndarray::Array1;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn er_decomp(n: usize, p: f64, seed: u64) -> (gsp_core::spectral::ShiftOperator, SpectralDecomposition) {
    let graph = erdos_renyi(n, p, seed, true, true).unwrap();
    let shift = shift_from_graph(&graph, &ShiftKind::Adjacency).unwrap();
    let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
    (shift, d)
}

#[test]
fn gft_round_trip_on_many_random_signals() {
    let (_, d) = er_decomp(12, 0.2, 3);
    let mut rng = stream_rng(4, 0);
    for _ in 0..100 {
        let x = GraphSignal::new(gsp_core::rng::gaussian_vec(&mut rng, 12, false));
        let xhat = gft(&d, &x).unwrap();
        let back = igft(&d, &xhat).unwrap();
        assert!(linalg::rel_diff_vec(&back.values, &x.values) < 1e-10);
    }
}

#[test]
fn synthesize_then_recover_via_selection() {
    let (_, d) = er_decomp(20, 0.2, 7);
    let support = vec![1, 2, 3];
    let mut rng = stream_rng(8, 0);
    let (x, _) = random_bandlimited(&d, &support, &mut rng).unwrap();
    // A random node subset that yields an invertible system.
    for attempt in 0..20u64 {
        let mut rng2 = stream_rng(9, attempt);
        let mut nodes: Vec<usize> = (1..=20).collect();
        for i in (1..nodes.len()).rev() {
            let j = rng2.random_range(0..=i);
            nodes.swap(i, j);
        }
        let plan = SelectionPlan::new(20, nodes[..3].to_vec()).unwrap();
        let samples = plan.gather(&x.values).unwrap();
        match selection_interpolate(&d, &support, &plan, &samples) {
            Ok(rec) => {
                assert!(linalg::rel_diff_vec(&rec.signal.values, &x.values) < 1e-8);
                return;
            }
            Err(_) => continue,
        }
    }
    panic!("no invertible node subset found in 20 attempts");
}

#[test]
fn synthesize_aggregate_interpolate_round_trip() {
    for seed in 0..20u64 {
        let (shift, d) = er_decomp(20, 0.2, 100 + seed);
        let support = vec![1, 2, 3];
        let mut rng = stream_rng(200 + seed, 0);
        let (x, _) = random_bandlimited(&d, &support, &mut rng).unwrap();
        let node = 1 + rng.random_range(0..20);
        let report =
            check_recovery_conditions(&d, &support, node, DEFAULT_TOL_EIG, DEFAULT_TOL_UPSILON)
                .unwrap();
        if !report.passes() {
            continue;
        }
        let seq = aggregate(&shift, &x, node, 20).unwrap();
        let plan = SelectionPlan::first_k(20, 3).unwrap();
        let samples = aggregation_sample(&seq, &plan).unwrap();
        let rec = aggregation_interpolate(
            &d,
            &support,
            node,
            &plan,
            &samples,
            InterpolateOptions::default(),
        )
        .unwrap();
        assert!(
            linalg::rel_diff_vec(&rec.signal.values, &x.values) < 1e-8,
            "seed {seed} node {node}"
        );
        assert!(rec.factorization_gap.unwrap() < 1e-10);
    }
}

#[test]
fn admissible_plans_always_invertible_for_clean_spectra() {
    // With distinct nonzero lambda^N0, every plan in the admissible family
    // yields a solvable Vandermonde system.
    for seed in 0..8u64 {
        let graph = erdos_renyi(12, 0.3, 40 + seed, true, true).unwrap();
        let shift = shift_from_graph(&graph, &ShiftKind::IdentityMinusAdjacency).unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let support = vec![1, 2, 3];
        let lambdas = d.support_eigenvalues(&support).unwrap();
        let scale = d.spectral_radius();
        if lambdas.iter().any(|l| l.norm() < 1e-8 * scale) {
            continue;
        }
        let mut rng = stream_rng(50 + seed, 0);
        let (x, _) = random_bandlimited(&d, &support, &mut rng).unwrap();
        let node = 1 + rng.random_range(0..12);
        let cond = check_recovery_conditions(&d, &support, node, DEFAULT_TOL_EIG, DEFAULT_TOL_UPSILON)
            .unwrap();
        if !cond.passes() {
            continue;
        }
        let seq = aggregate(&shift, &x, node, 12).unwrap();
        for plan in admissible_selections(12, 3).unwrap() {
            let s = plan.structured_form().unwrap();
            let powered: Vec<Complex64> = lambdas
                .iter()
                .map(|l| l.powu(s.spacing as u32))
                .collect();
            let mut distinct = true;
            for a in 0..3 {
                for b in (a + 1)..3 {
                    if (powered[a] - powered[b]).norm() < 1e-8 * scale {
                        distinct = false;
                    }
                }
            }
            if !distinct {
                continue;
            }
            let samples = aggregation_sample(&seq, &plan).unwrap();
            let rec = aggregation_interpolate(
                &d,
                &support,
                node,
                &plan,
                &samples,
                InterpolateOptions::default(),
            )
            .unwrap_or_else(|e| panic!("plan {:?} failed: {e}", plan.picks()));
            assert!(linalg::rel_diff_vec(&rec.signal.values, &x.values) < 1e-6);
        }
    }
}

#[test]
fn cycle_reduces_to_classical_sampling() {
    for n in [6usize, 12] {
        let shift = ShiftOperator::directed_cycle(n);
        let _ = decompose(&shift, DecomposeMode::AnalyticCycle).unwrap();
        let k = n / 2;
        let mut rng = stream_rng(77, n as u64);
        let x = GraphSignal::new(gsp_core::rng::gaussian_vec(&mut rng, n, false));
        let uniform = SelectionPlan::structured(n, 1, n / k, k).unwrap();
        let selected = uniform.gather(&x.values).unwrap();
        let seq = aggregate(&shift, &x, 1, n).unwrap();
        let aggregated = aggregation_sample(&seq, &uniform).unwrap();
        let mut a: Vec<(f64, f64)> = selected.iter().map(|z| (z.re, z.im)).collect();
        let mut b: Vec<(f64, f64)> = aggregated.iter().map(|z| (z.re, z.im)).collect();
        let key = |p: &(f64, f64)| (p.0, p.1);
        a.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        b.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for ((ar, ai), (br, bi)) in a.iter().zip(b.iter()) {
            assert!((ar - br).abs() < 1e-12 && (ai - bi).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn aggregation_routes_agree(seed in 0u64..2000, n in 6usize..16, node_pick in 0usize..16) {
        let graph = erdos_renyi(n, 0.3, seed, false, true).unwrap();
        let shift = shift_from_graph(&graph, &ShiftKind::Adjacency).unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let mut rng = stream_rng(seed, 1);
        let x = GraphSignal::new(gsp_core::rng::gaussian_vec(&mut rng, n, false));
        let xhat = gft(&d, &x).unwrap();
        let node = 1 + node_pick % n;
        let direct = aggregate(&shift, &x, node, n).unwrap();
        let spectral = aggregate_spectral(&d, &xhat, node, n).unwrap();
        prop_assert!(linalg::rel_diff_vec(&direct.values, &spectral.values) < 1e-10);
    }

    #[test]
    fn vandermonde_rows_follow_recurrence(seed in 0u64..2000, n in 2usize..12, rows in 1usize..20) {
        let graph = erdos_renyi(n.max(2), 0.4, seed, false, true).unwrap();
        let shift = shift_from_graph(&graph, &ShiftKind::Adjacency).unwrap();
        let d = decompose(&shift, DecomposeMode::Symmetric).unwrap();
        let psi = gsp_core::spectral::build_psi(&d, rows);
        for v in psi.entries.row(0).iter() {
            prop_assert!((v - Complex64::new(1.0, 0.0)).norm() == 0.0);
        }
        for l in 1..rows {
            let prev: Array1<Complex64> = psi.entries.row(l - 1).to_owned();
            let expect = &prev * &psi.eigenvalue_basis;
            for (a, b) in psi.entries.row(l).iter().zip(expect.iter()) {
                prop_assert!(a == b);
            }
        }
    }
}
