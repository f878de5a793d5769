use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpm::exact::mine_single_events;
use stpm::{
    build_sequence_db, max_season, mine, mine_approx, nmi, oracle_mine, random_case, season_lower_bound,
    GranularitySpec, JointDist, MinerConfig, OracleLimits, RelationConfig, SeasonConfig, SymbolicDatabase,
    SymbolicSeries,
};

fn sample_db() -> SymbolicDatabase {
    const ROWS: [(&str, &str); 6] = [
        ("C", "110100110000000000111111000000100110000110"),
        ("D", "100100110110000000111111000000100100110110"),
        ("F", "001011001001111000000000111111001001001001"),
        ("K", "001011001111111111000000111111001001011001"),
        ("M", "110100111110111111000111111111111010111111"),
        ("N", "110111111110111111000000111111111111111000"),
    ];
    SymbolicDatabase::new(
        ROWS.iter()
            .map(|(id, bits)| SymbolicSeries::from_bits(*id, bits).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Normalizes random weights into a joint distribution with at least one zero-free row and column.
fn joint_from(rows: usize, cols: usize, w: &[f64]) -> Option<JointDist<f64>> {
    let total: f64 = w.iter().sum();
    let j = JointDist::new(rows, cols, w.iter().map(|x| x / total).collect()).ok()?;
    let nonzero = |v: Vec<f64>| v.iter().all(|&p| p > 0.0);
    (nonzero(j.marginal_x()) && nonzero(j.marginal_y())).then_some(j)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn approx_output_is_contained_in_exact_output(seed in 1000u64..100_000) {
        let case = random_case(seed, 6, 30, 3).unwrap();
        prop_assume!(case.db.series().len() >= 2);
        let seq = build_sequence_db(&case.db, &case.granularity).unwrap();
        let exact = mine(&seq, &case.miner).unwrap();
        let approx = mine_approx(&seq, &case.db, &case.miner).unwrap();
        for k in approx.keys() {
            prop_assert!(exact.find(k).is_some());
        }
    }

    #[test]
    fn oracle_agrees_on_pairs(seed in 100_000u64..200_000) {
        let mut case = random_case(seed, 5, 20, 2).unwrap();
        case.miner.k_max = 2;
        let seq = build_sequence_db(&case.db, &case.granularity).unwrap();
        let exact = mine(&seq, &case.miner).unwrap();
        let oracle = oracle_mine(&seq, &case.miner, &OracleLimits::default()).unwrap();
        prop_assert_eq!(exact.keys().collect::<Vec<_>>(), oracle.keys().collect::<Vec<_>>());
    }
}

/// Monte-Carlo over peaked random joint distributions: the pair bound holds
/// whenever `p(X1 | Y1) >= 1/e`, and is violated somewhere outside that regime.
#[test]
fn season_bound_holds_in_its_regime() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut checked, mut outside_violations) = (0, 0);
    for _ in 0..100_000 {
        let rows = rng.random_range(2..=4);
        let cols = rng.random_range(2..=4);
        let sharp = rng.random_range(0.0..30.0);
        let w: Vec<f64> = (0..rows * cols)
            .map(|_| (-sharp * rng.random::<f64>()).exp())
            .collect();
        let Some(j) = joint_from(rows, cols, &w) else {
            continue;
        };
        let mu = nmi(&j);
        let l1 = j.marginal_x().into_iter().fold(1.0, f64::min);
        for x in 0..rows {
            for (y, &l2) in j.marginal_y().iter().enumerate() {
                // Below the Lambert domain the bound says nothing.
                let Ok(bound) = season_lower_bound(l1, l2, mu, 1, 1) else {
                    continue;
                };
                let p = j.get(x, y);
                if p / l2 >= (-1.0f64).exp() {
                    assert!(p >= bound - 1e-12, "p={p} bound={bound} in {j:?}");
                    checked += 1;
                } else if p < bound {
                    outside_violations += 1;
                }
            }
        }
    }
    assert!(checked > 10_000, "only {checked} in-regime checks");
    assert!(outside_violations > 0);
}

#[test]
fn season_bound_fails_outside_its_regime() {
    // X = Y: NMI is 1 yet (X=1, Y=0) never co-occurs.
    let j = JointDist::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let mu = nmi(&j);
    assert_eq!(mu, 1.0);
    let bound = season_lower_bound(0.5, 0.5, mu, 1, 1).unwrap();
    assert_eq!(j.get(1, 0), 0.0);
    assert!(bound > 0.4, "bound {bound}");
}

#[test]
fn patterns_never_out_season_their_events() {
    let seq = build_sequence_db(&sample_db(), &GranularitySpec::new("5min", 3).unwrap()).unwrap();
    let cfg = MinerConfig::new(
        SeasonConfig::absolute(2, 2, 2, 10, 2),
        RelationConfig::default(),
        3,
    );
    let res = mine(&seq, &cfg).unwrap();
    let (hlh1, _) = mine_single_events(&seq, &cfg).unwrap();
    let mut checked = 0;
    for p in res.patterns.iter().filter(|p| p.key.len() >= 2) {
        for &e in p.key.events() {
            let sup = &hlh1
                .get(e)
                .expect("events of mined patterns are candidates")
                .support;
            assert!(p.support.is_subset_of(sup));
            assert!(p.max_season <= max_season(sup.len(), 2));
            checked += 1;
        }
        let prefix = p.key.prefix();
        if let Some(pre) = res.find(&prefix) {
            assert!(p.max_season <= pre.max_season);
        }
    }
    assert!(checked > 50, "only {checked} checks");
}
