use marsrm::dr::MomentAmbiguitySet;
use marsrm::linalg::Matrix;
use marsrm::lp::{extensive_form_dr, extensive_form_marsrm};
use marsrm::risk::{PreferenceDistribution, PreferencePoint, SpectrumRule};
use marsrm::scenario::{build_lognormal_lattice, LognormalParams, RngStream, ScenarioLattice};
use marsrm::sddp::{dr_train, train, Sampling, TrainOptions};

fn lattice(horizon: usize, assets: usize, k: usize, f: f64, seed: u64) -> ScenarioLattice {
    let mut corr = Matrix::identity(assets);
    for i in 0..assets {
        for j in 0..assets {
            if i != j {
                corr[(i, j)] = 0.5;
            }
        }
    }
    let params = LognormalParams {
        mu: vec![0.05; assets],
        sigma: vec![0.2; assets],
        corr,
    };
    build_lognormal_lattice(
        horizon,
        &params,
        &vec![k; horizon - 1],
        &vec![f; horizon - 1],
        RngStream::new(seed),
    )
    .unwrap()
}

fn enumerate() -> TrainOptions {
    TrainOptions {
        max_iters: 200,
        tol: 1e-7,
        sampling: Sampling::Enumerate,
        ..TrainOptions::default()
    }
}

#[test]
fn marsrm_bounds_meet_the_extensive_form() {
    let lat = lattice(3, 2, 3, 0.01, 7);
    let pref = PreferenceDistribution::dirac(0.5, 0.8).unwrap();
    let prefs = vec![pref.clone(), pref];
    let exact = extensive_form_marsrm(&lat, &prefs).unwrap();
    let run = train(&lat, &prefs, &enumerate()).unwrap();
    let r = run.report.last().unwrap();
    assert!(run.report.converged, "gap {}", r.gap);
    assert!(
        r.lower <= exact + 1e-6 && exact <= r.upper + 1e-6,
        "{} {} {}",
        r.lower,
        exact,
        r.upper
    );
    assert!((r.lower - exact).abs() < 1e-5);
}

#[test]
fn sampled_paths_also_converge() {
    let lat = lattice(3, 2, 3, 0.02, 11);
    let pref = PreferenceDistribution::from_points(
        &[
            PreferencePoint::new(0.3, 0.6),
            PreferencePoint::new(0.9, 0.2),
        ],
        vec![0.4, 0.6],
        SpectrumRule::Exact,
    )
    .unwrap();
    let prefs = vec![pref.clone(), pref];
    let exact = extensive_form_marsrm(&lat, &prefs).unwrap();
    let opts = TrainOptions {
        paths: 2,
        max_iters: 300,
        tol: 1e-7,
        seed: 3,
        ..TrainOptions::default()
    };
    let run = train(&lat, &prefs, &opts).unwrap();
    let r = run.report.last().unwrap();
    assert!(run.report.converged, "gap {}", r.gap);
    assert!((r.upper - exact).abs() < 1e-5, "{} vs {exact}", r.upper);
}

#[test]
fn dr_bounds_meet_the_extensive_form() {
    let lat = lattice(3, 2, 3, 0.01, 5);
    let pts = [
        PreferencePoint::new(0.2, 0.5),
        PreferencePoint::new(0.6, 0.9),
        PreferencePoint::new(0.9, 0.3),
    ];
    let amb =
        MomentAmbiguitySet::from_empirical(&pts, &[0.3, 0.3, 0.4], SpectrumRule::Exact).unwrap();
    let ambs = vec![amb.clone(), amb];
    let exact = extensive_form_dr(&lat, &ambs).unwrap();
    let run = dr_train(&lat, &ambs, &enumerate()).unwrap();
    let r = run.report.last().unwrap();
    assert!(run.report.converged, "gap {}", r.gap);
    assert!((r.lower - exact).abs() < 1e-5, "{} vs {exact}", r.lower);
}
