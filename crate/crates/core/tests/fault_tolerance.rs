mod common;

use std::sync::atomic::{AtomicBool, Ordering};

use common::{load_cluster, reference, sf, Db};
use deskmpp::cluster::EngineConfig;
use deskmpp::datagen::{GenSeed, Generator, Table};
use deskmpp::exec::{
    execute, execute_with, plan_for, run_refresh, ExecOptions, PlanContext, QueryId, QueryParams,
    RefreshId,
};
use deskmpp::Error;

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

#[test]
fn every_pair_of_dead_nodes_still_answers_correctly() {
    let scale = sf("0.001");
    let db = Db::generate(&Generator::new(scale, GenSeed(8)));
    let cluster = load_cluster(5, 2, scale, 8, EngineConfig::default());
    let ctx = PlanContext::new(scale, 0);
    let plans: Vec<_> = QueryId::all()
        .map(|q| plan_for(&QueryParams::defaults(q), &ctx).unwrap())
        .collect();
    let want: Vec<_> = QueryId::all()
        .map(|q| reference(&db, &QueryParams::defaults(q)))
        .collect();
    for dead in subsets(5, 2) {
        for &n in &dead {
            cluster.kill_node(n).unwrap();
        }
        for (plan, want) in plans.iter().zip(&want) {
            assert_eq!(
                &execute(plan, &cluster).unwrap().result,
                want,
                "dead {dead:?}"
            );
        }
        for &n in &dead {
            cluster.set_node_state(n, true).unwrap();
            cluster.recover_node(n).unwrap();
        }
    }
}

#[test]
fn three_dead_nodes_match_the_exhaustive_safety_oracle() {
    let scale = sf("0.001");
    let plan = plan_for(
        &QueryParams::defaults(QueryId::new(6).unwrap()),
        &PlanContext::new(scale, 0),
    )
    .unwrap();
    let mut unsafe_seen = 0;
    for dead in subsets(5, 3) {
        // An unsafe cluster cannot be recovered in place, so each subset gets a fresh one.
        let cluster = load_cluster(5, 2, scale, 2, EngineConfig::default());
        let healthy = execute(&plan, &cluster).unwrap().result;
        let map = cluster.map().clone();
        let uncovered =
            (0..map.bucket_count).any(|b| map.replicas(b).iter().all(|n| dead.contains(n)));
        for &n in &dead {
            cluster.kill_node(n).unwrap();
        }
        match execute(&plan, &cluster) {
            Ok(out) => {
                assert!(!uncovered, "{dead:?} uncovers a bucket but the query ran");
                assert_eq!(out.result, healthy);
            }
            Err(Error::ClusterUnsafe(_)) => {
                assert!(
                    uncovered,
                    "{dead:?} covers every bucket but the query was refused"
                );
                unsafe_seen += 1;
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
    assert!(unsafe_seen > 0);
}

#[test]
fn node_lost_mid_query_is_retried_on_replicas() {
    let scale = sf("0.002");
    let cluster = load_cluster(5, 2, scale, 4, EngineConfig::default());
    let db = Db::generate(&Generator::new(scale, GenSeed(4)));
    let params = QueryParams::defaults(QueryId::new(3).unwrap());
    let plan = plan_for(&params, &PlanContext::new(scale, 100_000)).unwrap();
    let fired = AtomicBool::new(false);
    let probe = |c: &deskmpp::cluster::Cluster| {
        if !fired.swap(true, Ordering::SeqCst) {
            c.kill_node(2).unwrap();
        }
    };
    let out = execute_with(
        &plan,
        &cluster,
        ExecOptions {
            after_scans: Some(&probe),
            max_attempts: None,
        },
    )
    .unwrap();
    assert_eq!(out.stats.retries, 1);
    assert_eq!(out.result, reference(&db, &params));
}

#[test]
fn recovery_catches_up_on_writes_missed_while_down() {
    let scale = sf("0.002");
    let cluster = load_cluster(4, 1, scale, 6, EngineConfig::default());
    let before = cluster.row_count(Table::LineItem).unwrap();
    cluster.kill_node(1).unwrap();
    let rf1 = run_refresh(RefreshId::Rf1, &cluster).unwrap();
    cluster.set_node_state(1, true).unwrap();
    let report = cluster.recover_node(1).unwrap();
    assert!(report.segments_copied > 0);
    for b in cluster.map().buckets_on(1) {
        let counts: Vec<u64> = cluster
            .map()
            .replicas(b)
            .iter()
            .map(|&n| {
                cluster
                    .node_catalog(n)
                    .table(Table::LineItem)
                    .live_rows(Some(b))
            })
            .collect();
        assert!(
            counts.windows(2).all(|w| w[0] == w[1]),
            "bucket {b}: {counts:?}"
        );
    }
    assert_eq!(
        cluster.row_count(Table::LineItem).unwrap(),
        before + rf1.lineitems
    );
}
