use marsrm::dr::{support_values, worst_case_arsrm, MomentAmbiguitySet};
use marsrm::linalg::Matrix;
use marsrm::lp::{extensive_form_dr, extensive_form_marsrm};
use marsrm::risk::{PreferenceDistribution, PreferencePoint, SpectrumRule};
use marsrm::scenario::{build_lognormal_lattice, LognormalParams, RngStream, ScenarioLattice};
use marsrm::sddp::{
    dr_train, train, upper_value, DrMarsrm, Marsrm, Sampling, StateArchive, TrainOptions,
    TrainReport,
};
use marsrm::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(seed: u64) -> ScenarioLattice {
    let mut corr = Matrix::identity(2);
    corr[(0, 1)] = 0.3;
    corr[(1, 0)] = 0.3;
    let params = LognormalParams {
        mu: vec![0.04, 0.08],
        sigma: vec![0.1, 0.3],
        corr,
    };
    build_lognormal_lattice(3, &params, &[3, 3], &[0.01, 0.01], RngStream::new(seed)).unwrap()
}

fn preference() -> PreferenceDistribution {
    PreferenceDistribution::from_points(
        &[
            PreferencePoint::new(0.3, 0.5),
            PreferencePoint::new(0.8, 0.9),
        ],
        vec![0.5, 0.5],
        SpectrumRule::Exact,
    )
    .unwrap()
}

fn ambiguity() -> MomentAmbiguitySet {
    let pts = [
        PreferencePoint::new(0.2, 0.5),
        PreferencePoint::new(0.6, 0.9),
        PreferencePoint::new(0.9, 0.3),
    ];
    MomentAmbiguitySet::from_empirical(&pts, &[0.3, 0.3, 0.4], SpectrumRule::Exact).unwrap()
}

fn enumerate(iters: usize) -> TrainOptions {
    TrainOptions {
        max_iters: iters,
        tol: 1e-7,
        sampling: Sampling::Enumerate,
        ..TrainOptions::default()
    }
}

fn check_bracketing(report: &TrainReport, exact: f64) {
    let mut prev = f64::NEG_INFINITY;
    for (i, r) in report.rows.iter().enumerate() {
        assert!(
            r.raw_lower <= exact + 1e-6,
            "iteration {i}: lower {} above {exact}",
            r.raw_lower
        );
        assert!(
            exact <= r.raw_upper + 1e-6,
            "iteration {i}: upper {} below {exact}",
            r.raw_upper
        );
        assert!(
            r.raw_lower >= prev - 1e-9,
            "iteration {i}: lower fell from {prev} to {}",
            r.raw_lower
        );
        prev = r.raw_lower;
    }
}

#[test]
fn every_iteration_brackets_the_optimum() {
    let lat = lattice(21);
    let prefs = vec![preference(), preference()];
    let exact = extensive_form_marsrm(&lat, &prefs).unwrap();
    check_bracketing(&train(&lat, &prefs, &enumerate(50)).unwrap().report, exact);
    let sampled = TrainOptions {
        paths: 2,
        max_iters: 50,
        tol: 1e-7,
        seed: 9,
        ..TrainOptions::default()
    };
    check_bracketing(&train(&lat, &prefs, &sampled).unwrap().report, exact);

    let ambs = vec![ambiguity(), ambiguity()];
    let exact = extensive_form_dr(&lat, &ambs).unwrap();
    check_bracketing(
        &dr_train(&lat, &ambs, &enumerate(50)).unwrap().report,
        exact,
    );
}

#[test]
fn envelope_shrinks_as_the_archive_grows() {
    let lat = lattice(22);
    let prefs = vec![preference(), preference()];
    let run = train(
        &lat,
        &prefs,
        &TrainOptions {
            paths: 3,
            max_iters: 8,
            seed: 1,
            ..TrainOptions::default()
        },
    )
    .unwrap();
    let points = run.archive.stage(2);
    assert!(points.len() > 1);
    let model = Marsrm::new(&lat, &prefs).unwrap();
    for x in [[1.0, 0.0], [0.5, 0.5], [0.2, 0.8]] {
        for j in 0..lat.scenario_count(1) {
            let below = model.solve_stage(1, &x, j, &run.pools).unwrap().value;
            let mut archive = StateArchive::new(lat.horizon());
            let mut prev = f64::INFINITY;
            for (s, v) in points {
                archive.push(2, s.clone(), v.clone());
                let up = upper_value(&lat, 1, &x, &lat.stage(1)[j], &archive, 50.0).unwrap();
                assert!(up <= prev + 1e-9, "{up} > {prev}");
                assert!(
                    below <= up + 1e-7,
                    "lower model {below} above envelope {up}"
                );
                prev = up;
            }
        }
    }
}

fn assert_convex_along(f: impl Fn(&[f64]) -> f64, a: [f64; 2], b: [f64; 2]) {
    for t in [0.25, 0.5, 0.75] {
        let mid = [t * a[0] + (1.0 - t) * b[0], t * a[1] + (1.0 - t) * b[1]];
        let chord = t * f(&a) + (1.0 - t) * f(&b);
        assert!(f(&mid) <= chord + 1e-8, "{} above chord {chord}", f(&mid));
    }
}

#[test]
fn lower_models_are_convex_in_the_incoming_state() {
    let lat = lattice(23);
    let ambs = vec![ambiguity(), ambiguity()];
    let run = dr_train(
        &lat,
        &ambs,
        &TrainOptions {
            paths: 2,
            max_iters: 6,
            seed: 4,
            ..TrainOptions::default()
        },
    )
    .unwrap();
    let model = DrMarsrm::new(&lat, &ambs).unwrap();
    for j in 0..lat.scenario_count(1) {
        assert_convex_along(
            |x| model.solve_stage(1, x, j, &run.pools).unwrap().value,
            [1.0, 0.0],
            [0.0, 1.0],
        );
        assert_convex_along(
            |x| model.solve_stage(1, x, j, &run.pools).unwrap().value,
            [0.9, 0.1],
            [0.3, 0.7],
        );
    }

    let prefs = vec![preference(), preference()];
    let run = train(
        &lat,
        &prefs,
        &TrainOptions {
            paths: 2,
            max_iters: 6,
            seed: 4,
            ..TrainOptions::default()
        },
    )
    .unwrap();
    let model = Marsrm::new(&lat, &prefs).unwrap();
    for j in 0..lat.scenario_count(1) {
        assert_convex_along(
            |x| model.solve_stage(1, x, j, &run.pools).unwrap().value,
            [1.0, 0.0],
            [0.0, 1.0],
        );
    }
}

/// Solves `a x = b` restricted to `cols`; `None` unless the columns are
/// independent and the system is consistent.
fn basic_solution(rows: &[Vec<f64>], targets: &[f64], cols: &[usize]) -> Option<Vec<f64>> {
    let m = targets.len();
    let n = cols.len();
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|e| {
            cols.iter()
                .map(|&l| rows[l][e])
                .chain([targets[e]])
                .collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        let pivot = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != c {
                let f = row[c] / pivot[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= f * y;
                }
            }
        }
    }
    if a[n..].iter().any(|row| row[n].abs() > 1e-9) {
        return None;
    }
    Some((0..n).map(|c| a[c][n] / a[c][c]).collect())
}

/// Maximum of the linear objective over the vertices of the membership
/// polytope, found by enumerating basic solutions.
fn vertex_maximum(amb: &MomentAmbiguitySet, objective: &[f64]) -> f64 {
    let (rows, targets) = amb.moment_system();
    let l = rows.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << l) {
        let cols: Vec<usize> = (0..l).filter(|&i| mask & (1 << i) != 0).collect();
        if cols.len() > targets.len() {
            continue;
        }
        if let Some(q) = basic_solution(&rows, &targets, &cols) {
            if q.iter().all(|&v| v >= -1e-10) {
                best = best.max(cols.iter().zip(&q).map(|(&i, w)| w * objective[i]).sum());
            }
        }
    }
    best
}

#[test]
fn worst_case_matches_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..60 {
        let n = rng.gen_range(3..=8);
        let pts: Vec<PreferencePoint> = (0..n)
            .map(|_| PreferencePoint::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..0.95)))
            .collect();
        let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        let amb = MomentAmbiguitySet::from_empirical(&pts, &q, SpectrumRule::Exact).unwrap();
        let k = rng.gen_range(2..=12);
        let values: Vec<f64> = (0..k).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let probs = vec![1.0 / k as f64; k];
        let r = support_values(&values, &probs, &amb).unwrap();
        let vertex = vertex_maximum(&amb, &r);
        let dual = worst_case_arsrm(&values, &probs, &amb).unwrap();
        assert!(
            (vertex - dual).abs() < 1e-7,
            "case {case}: vertices {vertex}, dual {dual}"
        );
    }
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let lat = lattice(24);
    let prefs = vec![preference(), preference()];
    let ambs = vec![ambiguity(), ambiguity()];
    let opts = |execution| TrainOptions {
        paths: 3,
        max_iters: 10,
        seed: 2,
        execution,
        ..TrainOptions::default()
    };
    let key = |r: &TrainReport| {
        r.rows
            .iter()
            .map(|r| (r.cuts, r.lower.to_bits(), r.upper.to_bits()))
            .collect::<Vec<_>>()
    };

    let seq = train(&lat, &prefs, &opts(Execution::Sequential)).unwrap();
    let par = train(&lat, &prefs, &opts(Execution::Parallel)).unwrap();
    assert_eq!(key(&seq.report), key(&par.report));
    assert_eq!(seq.pools, par.pools);

    let seq = dr_train(&lat, &ambs, &opts(Execution::Sequential)).unwrap();
    let par = dr_train(&lat, &ambs, &opts(Execution::Parallel)).unwrap();
    assert_eq!(key(&seq.report), key(&par.report));
}
