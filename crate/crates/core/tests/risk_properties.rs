use marsrm::risk::{
    arsrm, arsrm_cvar_route, cvar, srm, DiscreteDistribution, PiecewiseLinearSpectrum,
    PreferenceDistribution, PreferencePoint, Spectrum, SpectrumRule,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn outcomes(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -100.0..100.0f64], 1..=max)
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01..1.0f64, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn distribution(max: usize) -> impl Strategy<Value = DiscreteDistribution> {
    outcomes(max).prop_flat_map(|x| {
        let n = x.len();
        (Just(x), weights(n)).prop_map(|(x, p)| DiscreteDistribution::new(x, p).unwrap())
    })
}

fn preference() -> impl Strategy<Value = PreferenceDistribution> {
    let atom = prop_oneof![
        (0.0..=1.0f64, 0.0..0.99f64).prop_map(|(l, a)| (Some(PreferencePoint::new(l, a)), None)),
        (0.0..=2.0f64).prop_map(|k| (
            None,
            Some(Spectrum::from(PiecewiseLinearSpectrum::tilted(k).unwrap()))
        )),
    ];
    (prop::collection::vec(atom, 1..=4), 0usize..=8).prop_flat_map(|(atoms, cells)| {
        let n = atoms.len();
        (Just(atoms), weights(n), Just(cells)).prop_map(|(atoms, q, cells)| {
            let rule = if cells == 0 {
                SpectrumRule::Exact
            } else {
                SpectrumRule::Projected { cells }
            };
            let spectra: Vec<Spectrum> = atoms
                .into_iter()
                .map(|(p, s)| match (p, s) {
                    (Some(p), _) => rule.build(p).unwrap().into(),
                    (None, Some(s)) => s,
                    (None, None) => unreachable!(),
                })
                .collect();
            PreferenceDistribution::from_spectra(spectra, q).unwrap()
        })
    })
}

fn shuffled(d: &DiscreteDistribution, seed: u64) -> DiscreteDistribution {
    let mut pairs: Vec<(f64, f64)> = d
        .outcomes()
        .iter()
        .cloned()
        .zip(d.probs().iter().cloned())
        .collect();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (x, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    DiscreteDistribution::new(x, p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cvar_is_nondecreasing_in_alpha(d in distribution(10), a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(cvar(&d, lo).unwrap() <= cvar(&d, hi).unwrap() + 1e-9);
    }

    #[test]
    fn cvar_lies_between_mean_and_max(d in distribution(10), a in 0.0..0.99f64) {
        let c = cvar(&d, a).unwrap();
        let max = d.outcomes().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(d.mean() - 1e-9 <= c && c <= max + 1e-9);
    }

    #[test]
    fn shifting_outcomes_shifts_arsrm(d in distribution(10), pref in preference(), eps in 0.0..10.0f64) {
        let up = DiscreteDistribution::new(d.outcomes().iter().map(|x| x + eps).collect(), d.probs().to_vec()).unwrap();
        prop_assert!((arsrm(&up, &pref) - arsrm(&d, &pref) - eps).abs() < 1e-9);
    }

    #[test]
    fn arsrm_is_monotone(d in distribution(10), pref in preference(), bumps in prop::collection::vec(0.0..5.0f64, 10)) {
        let up = DiscreteDistribution::new(
            d.outcomes().iter().zip(&bumps).map(|(x, b)| x + b).collect(),
            d.probs().to_vec(),
        ).unwrap();
        prop_assert!(arsrm(&d, &pref) <= arsrm(&up, &pref) + 1e-9);
    }

    #[test]
    fn arsrm_is_linear_in_the_preference(d in distribution(10), p1 in preference(), p2 in preference(), t in 0.0..=1.0f64) {
        let mix = p1.mixture(t, &p2).unwrap();
        let expect = t * arsrm(&d, &p1) + (1.0 - t) * arsrm(&d, &p2);
        prop_assert!((arsrm(&d, &mix) - expect).abs() < 1e-9);
    }

    #[test]
    fn shuffling_pairs_changes_nothing(d in distribution(10), pref in preference(), a in 0.0..0.99f64, seed in any::<u64>()) {
        let s = shuffled(&d, seed);
        prop_assert_eq!(s.outcomes(), d.outcomes());
        prop_assert!((cvar(&s, a).unwrap() - cvar(&d, a).unwrap()).abs() < 1e-12);
        prop_assert!((arsrm(&s, &pref) - arsrm(&d, &pref)).abs() < 1e-12);
        for atom in pref.atoms() {
            prop_assert!((srm(&s, &atom.spectrum) - srm(&d, &atom.spectrum)).abs() < 1e-12);
        }
    }

    #[test]
    fn routes_agree_for_equiprobable_outcomes(x in prop::collection::vec(-50.0..50.0f64, 2..=50), pref in preference()) {
        let d = DiscreteDistribution::equiprobable(x).unwrap();
        prop_assert!((arsrm(&d, &pref) - arsrm_cvar_route(&d, &pref).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn non_equiprobable_reduction_is_refused() {
    let d = DiscreteDistribution::new(vec![1.0, 2.0], vec![0.3, 0.7]).unwrap();
    let pref = PreferenceDistribution::dirac(0.5, 0.5).unwrap();
    assert!(matches!(
        arsrm_cvar_route(&d, &pref),
        Err(marsrm::Error::Unsupported(_))
    ));
}
