use super::*;
use crate::model::fixtures::{ev, sample_seq};
use crate::pattern::PatternKey;
use crate::relation::RelationKind::*;
use crate::MaxSeason;

fn fixture_cfg(k_max: usize) -> MinerConfig {
    MinerConfig::new(
        SeasonConfig::absolute(2, 3, 4, 10, 2),
        RelationConfig::default(),
        k_max,
    )
}

fn loose_cfg(k_max: usize) -> MinerConfig {
    MinerConfig::new(
        SeasonConfig::absolute(2, 1, 1, 14, 1),
        RelationConfig::default(),
        k_max,
    )
}

fn labels(db: &SequenceDatabase, events: impl Iterator<Item = EventId>) -> Vec<String> {
    let mut v: Vec<String> = events.map(|e| db.event_label(e).to_string()).collect();
    v.sort();
    v
}

#[test]
fn candidate_single_events() {
    let db = sample_seq();
    let (hlh1, frequent) = mine_single_events(&db, &fixture_cfg(1)).unwrap();
    assert_eq!(
        labels(&db, hlh1.events()),
        ["C:0", "C:1", "D:0", "D:1", "F:0", "F:1", "K:0", "K:1", "M:1", "N:1"]
    );
    let m1 = ev(&db, "M:1");
    assert!(hlh1.get(m1).is_some());
    assert!(frequent.iter().all(|p| p.key.events() != [m1]));
    assert_eq!(hlh1.get(ev(&db, "M:0")).map(|e| e.support.len()), None);
    assert_eq!(
        hlh1.get(m1).unwrap().support.as_slice(),
        &[1, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 13, 14]
    );
}

#[test]
fn granule_table_points_at_instances() {
    let db = sample_seq();
    let (hlh1, _) = mine_single_events(&db, &fixture_cfg(1)).unwrap();
    let c1 = ev(&db, "C:1");
    let entry = hlh1.get(c1).unwrap();
    for &g in entry.support.as_slice() {
        let idx = entry.instances_at(g).unwrap();
        assert!(!idx.is_empty());
        assert!(idx.iter().all(|&i| db.granule(g)[i as usize].event == c1));
    }
    assert!(entry.instances_at(4).is_none());
}

#[test]
fn two_event_supports() {
    let db = sample_seq();
    let cfg = fixture_cfg(2);
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    let (hlh2, _) = mine_2event_patterns(&db, &hlh1, &cfg).unwrap();
    let (c1, d1, m1, n1) = (ev(&db, "C:1"), ev(&db, "D:1"), ev(&db, "M:1"), ev(&db, "N:1"));
    assert_eq!(
        hlh2.pair(c1, d1, Contains).unwrap().support.as_slice(),
        &[1, 2, 3, 7, 8, 11, 12, 14]
    );
    assert_eq!(
        hlh2.pair(m1, n1, Contains).unwrap().support.as_slice(),
        &[1, 3, 4, 5, 6, 9, 10, 11, 13]
    );
    let group = hlh2.groups().iter().find(|g| g.events == [m1, n1]).unwrap();
    assert_eq!(group.support.as_slice(), &[1, 2, 3, 4, 5, 6, 9, 10, 11, 12, 13]);
    for g in hlh2.groups() {
        for &p in &g.patterns {
            assert!(hlh2.patterns()[p].support.is_subset_of(&g.support));
        }
    }
}

#[test]
fn fixture_config_results() {
    let db = sample_seq();
    let res = mine(&db, &fixture_cfg(2)).unwrap();
    let (c1, d1, m1, n1) = (ev(&db, "C:1"), ev(&db, "D:1"), ev(&db, "M:1"), ev(&db, "N:1"));
    let cd = res.find(&PatternKey::pair(c1, d1, Contains)).unwrap();
    assert_eq!(cd.analysis.distances, [8]);
    assert_eq!(cd.max_season, MaxSeason::new(8, 3));
    assert!(res.find(&PatternKey::single(m1)).is_none());
    // M:1 and N:1 share [25,27] in granule 9, which joins the two runs into
    // seasons {1,3,4,5,6} and {9,10,11,13}, three granules apart.
    assert!(res.find(&PatternKey::pair(m1, n1, Contains)).is_none());
}

#[test]
fn super_pattern_seasonal_while_sub_pattern_is_not() {
    let db = sample_seq();
    let cfg = MinerConfig::new(
        SeasonConfig::absolute(2, 3, 3, 10, 2),
        RelationConfig::default(),
        2,
    );
    let res = mine(&db, &cfg).unwrap();
    let (m1, n1) = (ev(&db, "M:1"), ev(&db, "N:1"));
    let p = res.find(&PatternKey::pair(m1, n1, Contains)).unwrap();
    let seasons: Vec<&[u32]> = p.analysis.seasons.iter().map(SupportSet::as_slice).collect();
    assert_eq!(seasons, [&[1, 3, 4, 5, 6][..], &[9, 10, 11, 13][..]]);
    assert!(res.find(&PatternKey::single(m1)).is_none());
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    assert!(hlh1.get(m1).is_some());
}

#[test]
fn k_max_one_yields_single_events_only() {
    let res = mine(&sample_seq(), &fixture_cfg(1)).unwrap();
    assert!(!res.patterns.is_empty());
    assert!(res.patterns.iter().all(|p| p.key.len() == 1));
    assert_eq!(res.stats.levels.len(), 1);
}

#[test]
fn three_event_extension_via_iterative_check() {
    let db = sample_seq();
    let cfg = loose_cfg(3);
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    let (hlh2, _) = mine_2event_patterns(&db, &hlh1, &cfg).unwrap();
    let (c1, d1, c0) = (ev(&db, "C:1"), ev(&db, "D:1"), ev(&db, "C:0"));
    let prefix = hlh2.pair(c1, d1, Contains).unwrap();
    let p = iterative_check(&db, &hlh1, &hlh2, prefix, c0, &[Follows, Follows], &cfg)
        .unwrap()
        .unwrap();
    assert!(p.support.contains(1));
    assert!(p.support.is_subset_of(&prefix.support));
    assert_eq!(p.key.relation(0, 2), Follows);
    assert_eq!(p.key.relation(1, 2), Follows);
    let realized = p.tuples_at(1);
    assert!(!realized.is_empty());
    for t in realized {
        let evs: Vec<EventId> = t.iter().map(|&i| db.granule(1)[i as usize].event).collect();
        assert_eq!(evs, [c1, d1, c0]);
    }
}

#[test]
fn iterative_check_aborts_on_missing_triple() {
    let db = sample_seq();
    let cfg = loose_cfg(3);
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    let (hlh2, _) = mine_2event_patterns(&db, &hlh1, &cfg).unwrap();
    let (c1, d1, c0) = (ev(&db, "C:1"), ev(&db, "D:1"), ev(&db, "C:0"));
    assert!(hlh2.pair(d1, c0, Overlaps).is_none());
    let prefix = hlh2.pair(c1, d1, Contains).unwrap();
    assert!(
        iterative_check(&db, &hlh1, &hlh2, prefix, c0, &[Follows, Overlaps], &cfg)
            .unwrap()
            .is_none()
    );
}

#[test]
fn transitivity_filter_is_a_subset() {
    let db = sample_seq();
    let cfg = fixture_cfg(3);
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    let (hlh2, _) = mine_2event_patterns(&db, &hlh1, &cfg).unwrap();
    let f = transitivity_filter(&hlh1, &hlh2);
    assert!(f.iter().all(|&e| hlh1.get(e).is_some()));
    assert!(transitivity_filter(&hlh1, &HlhK::new(2)).is_empty());
}

#[test]
fn candidate_groups_respect_gate() {
    let db = sample_seq();
    let cfg = fixture_cfg(3);
    let (hlh1, _) = mine_single_events(&db, &cfg).unwrap();
    let (hlh2, _) = mine_2event_patterns(&db, &hlh1, &cfg).unwrap();
    let f1: Vec<EventId> = hlh1.events().collect();
    let groups = candidate_k_groups(&db, &hlh1, &hlh2, &f1, &cfg).unwrap();
    assert!(!groups.is_empty());
    for (events, sup) in &groups {
        assert_eq!(events.len(), 3);
        assert!(sup.len() >= 6);
        for e in events {
            assert!(sup.is_subset_of(&hlh1.get(*e).unwrap().support));
        }
    }
}

#[test]
fn pruning_flags_do_not_change_output() {
    let db = sample_seq();
    for cfg in [fixture_cfg(3), loose_cfg(3)] {
        let reference = mine(&db, &cfg).unwrap();
        for (apriori, transitivity) in [(false, false), (false, true), (true, false)] {
            let other = mine(
                &db,
                &cfg.with_pruning(Pruning {
                    apriori,
                    transitivity,
                }),
            )
            .unwrap();
            assert_eq!(
                other.patterns, reference.patterns,
                "apriori={apriori} transitivity={transitivity}"
            );
            assert!(reference.stats.candidate_groups() <= other.stats.candidate_groups());
        }
    }
}

#[test]
fn supports_nest_and_max_season_bounds_hold() {
    let db = sample_seq();
    let res = mine(&db, &loose_cfg(3)).unwrap();
    assert!(res.patterns.iter().any(|p| p.key.len() == 3));
    for p in &res.patterns {
        for &e in p.key.events() {
            let single = res.find(&PatternKey::single(e));
            if let Some(s) = single {
                assert!(p.support.is_subset_of(&s.support));
                assert!(p.max_season <= s.max_season);
            }
        }
        if p.key.len() >= 2 {
            if let Some(prefix) = res.find(&p.key.prefix()) {
                assert!(p.support.is_subset_of(&prefix.support));
            }
        }
    }
}

#[test]
fn stats_reconcile() {
    let res = mine(&sample_seq(), &fixture_cfg(3)).unwrap();
    for l in &res.stats.levels {
        assert_eq!(l.candidates, l.generated - l.pruned, "level {}", l.level);
        assert_eq!(
            l.pruned,
            l.pruned_by_graph + l.pruned_by_support + l.pruned_by_transitivity
        );
    }
    assert_eq!(res.stats.levels[0].generated, 12);
    assert_eq!(res.stats.levels[0].candidates, 10);
}

#[test]
fn invalid_configs_are_rejected() {
    let db = sample_seq();
    assert!(mine(&db, &fixture_cfg(0)).is_err());
    let bad = MinerConfig::new(
        SeasonConfig::absolute(2, 3, 10, 4, 2),
        RelationConfig::default(),
        2,
    );
    assert!(mine(&db, &bad).is_err());
}
