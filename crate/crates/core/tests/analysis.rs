use proptest::prelude::*;
use superrad::series::{Sample, TimeSeries};
use superrad::{classify_regime, detect_bursts, AnalysisOptions, Regime};

fn trace(values: &[f64]) -> TimeSeries {
    TimeSeries::from_samples(
        values.iter().enumerate().map(|(i, &x)| Sample::new(i as f64 * 0.1, 0.0, 0.0, 0.0, x)).collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn bursts_invariant_under_rescaling(values in prop::collection::vec(0.0f64..10.0, 1..200), c in 1e-3f64..1e3) {
        let a = detect_bursts(&trace(&values), 0.1).unwrap();
        let scaled: Vec<f64> = values.iter().map(|x| x * c).collect();
        let b = detect_bursts(&trace(&scaled), 0.1).unwrap();
        prop_assert_eq!(a.burst_count, b.burst_count);
        for (x, y) in a.bursts.iter().zip(&b.bursts) {
            prop_assert_eq!(x.peak_time, y.peak_time);
            prop_assert!((x.width - y.width).abs() <= 1e-9 * (1.0 + x.width));
        }
    }

    #[test]
    fn bursts_are_disjoint_and_ordered(values in prop::collection::vec(0.0f64..10.0, 1..200)) {
        let r = detect_bursts(&trace(&values), 0.3).unwrap();
        for w in r.bursts.windows(2) {
            prop_assert!(w[0].end < w[1].start);
        }
        for b in &r.bursts {
            prop_assert!(b.start <= b.peak_time && b.peak_time <= b.end);
        }
        prop_assert!((0.0..=1.0).contains(&r.quiescent_fraction));
    }

    #[test]
    fn field_dominated_whenever_alpha_exceeds_critical(g in 0.1f64..100.0, ac in 1e-4f64..1.0, excess in 1.0001f64..10.0) {
        prop_assert_eq!(classify_regime(g, ac * excess, ac, &AnalysisOptions::default()), Regime::FieldDominated);
    }
}
