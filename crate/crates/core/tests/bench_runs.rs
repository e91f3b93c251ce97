mod common;

use common::{load_cluster, reference, sf, Db};
use deskmpp::bench::report::{
    parse_load_csv, parse_power_csv, parse_scale_csv, LOAD_CSV, POWER_CSV, SCALE_CSV,
};
use deskmpp::bench::{
    compute_power, emit_report, expected_counts, run_initial_load, run_power, run_power_with,
    run_scale_experiment, run_throughput, LoadSource, ReportFormat, ReportSet, ScaleOptions,
    ThroughputOptions, TimingKind,
};
use deskmpp::cluster::{Cluster, EngineConfig, Topology};
use deskmpp::datagen::{generate_table, write_tbl, GenSeed, Generator, Table};
use deskmpp::exec::{execute, plan_for, run_refresh, PlanContext, QueryId, QueryParams, RefreshId};
use deskmpp::Error;

#[test]
fn refresh_pair_restores_counts_and_results() {
    let scale = sf("0.005");
    let cluster = load_cluster(3, 1, scale, 21, EngineConfig::default());
    let q1 = plan_for(
        &QueryParams::defaults(QueryId::new(1).unwrap()),
        &PlanContext::new(scale, 0),
    )
    .unwrap();
    let counts = |c: &Cluster| {
        (
            c.row_count(Table::Orders).unwrap(),
            c.row_count(Table::LineItem).unwrap(),
        )
    };
    let before = (counts(&cluster), execute(&q1, &cluster).unwrap().result);
    let rf1 = run_refresh(RefreshId::Rf1, &cluster).unwrap();
    assert_eq!(
        counts(&cluster),
        (before.0 .0 + rf1.orders, before.0 .1 + rf1.lineitems)
    );
    let rf2 = run_refresh(RefreshId::Rf2, &cluster).unwrap();
    assert_eq!(
        (rf2.orders, rf2.lineitems, rf2.keys),
        (rf1.orders, rf1.lineitems, rf1.keys)
    );
    assert_eq!(
        (counts(&cluster), execute(&q1, &cluster).unwrap().result),
        before
    );
    assert!(matches!(
        run_refresh(RefreshId::Rf2, &cluster),
        Err(Error::Refresh(_))
    ));
}

#[test]
fn refresh_needs_a_dataset() {
    let cluster = Cluster::new(Topology::new(2, 1, None), EngineConfig::default()).unwrap();
    assert!(matches!(
        run_refresh(RefreshId::Rf1, &cluster),
        Err(Error::Refresh(_))
    ));
    assert!(matches!(run_power(&cluster, 1), Err(Error::Bench(_))));
}

#[test]
fn initial_load_counts_from_generator_and_tbl_files() {
    let scale = sf("0.002");
    let gen_cluster = Cluster::new(Topology::new(3, 1, None), EngineConfig::default()).unwrap();
    let report = run_initial_load(&gen_cluster, scale, LoadSource::Generate(GenSeed(3))).unwrap();
    assert!(report.succeeded());
    for (t, n) in expected_counts(scale) {
        assert_eq!(report.row(t).unwrap().rows, n, "{t}");
        assert_eq!(gen_cluster.row_count(t).unwrap(), n);
    }
    assert!(matches!(
        run_initial_load(&gen_cluster, scale, LoadSource::Generate(GenSeed(3))),
        Err(Error::Bench(_))
    ));

    let dir = tempfile::tempdir().unwrap();
    for t in Table::ALL {
        write_tbl(
            t,
            generate_table(t, scale, GenSeed(3)),
            &dir.path().join(format!("{}.tbl", t.name())),
        )
        .unwrap();
    }
    let tbl_cluster = Cluster::new(Topology::new(2, 1, None), EngineConfig::default()).unwrap();
    let r = run_initial_load(
        &tbl_cluster,
        scale,
        LoadSource::Tbl {
            dir: dir.path(),
            seed: GenSeed(3),
        },
    )
    .unwrap();
    assert!(r.succeeded());
    let q = plan_for(
        &QueryParams::defaults(QueryId::new(10).unwrap()),
        &PlanContext::new(scale, 0),
    )
    .unwrap();
    assert_eq!(
        execute(&q, &tbl_cluster).unwrap().result,
        execute(&q, &gen_cluster).unwrap().result
    );
}

#[test]
fn missing_tbl_file_marks_table_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cluster = Cluster::new(Topology::new(2, 0, None), EngineConfig::default()).unwrap();
    let r = run_initial_load(
        &cluster,
        sf("0.001"),
        LoadSource::Tbl {
            dir: dir.path(),
            seed: GenSeed(1),
        },
    )
    .unwrap();
    assert!(!r.succeeded());
    assert!(r.tables.iter().all(|t| t.error.is_some()));
    assert!(cluster.dataset().is_none());
}

#[test]
fn power_run_structure_and_repeatability() {
    let scale = sf("0.002");
    let cluster = load_cluster(5, 2, scale, 13, EngineConfig::default());
    let a = run_power(&cluster, 1).unwrap();
    assert_eq!(a.timings.len(), 24);
    assert_eq!(a.timings[0].kind, TimingKind::Refresh(RefreshId::Rf1));
    assert_eq!(a.timings[23].kind, TimingKind::Refresh(RefreshId::Rf2));
    assert_eq!(compute_power(&a.timings, scale.as_f64()).unwrap(), a.power);
    let sum: f64 = a.timings.iter().map(|t| t.seconds).sum();
    assert!((a.total_seconds - sum).abs() <= 0.024);
    assert_eq!(a.results.len(), 22);
    assert!(!cluster.is_frozen());

    // A second cluster built from the same seed answers identically.
    let other = load_cluster(5, 2, scale, 13, EngineConfig::default());
    assert_eq!(run_power(&other, 1).unwrap().results, a.results);
}

#[test]
fn power_follows_configured_stream_order() {
    let scale = sf("0.001");
    let cfg = EngineConfig {
        stream_order: deskmpp::exec::queries::STREAM0_ORDER.to_vec(),
        ..EngineConfig::default()
    };
    let cluster = load_cluster(2, 1, scale, 1, cfg);
    let r = run_power(&cluster, 1).unwrap();
    let order: Vec<u8> = r.timings[1..23]
        .iter()
        .map(|t| match t.kind {
            TimingKind::Query(q) => q.number(),
            _ => panic!("expected a query"),
        })
        .collect();
    assert_eq!(order, deskmpp::exec::queries::STREAM0_ORDER);
}

#[test]
fn configuration_is_frozen_between_power_steps() {
    let scale = sf("0.001");
    let cluster = load_cluster(3, 1, scale, 1, EngineConfig::default());
    let mut rejected = Vec::new();
    run_power_with(&cluster, 1, &mut |step, c| {
        if step.index == 5 {
            rejected.push(c.update_config("raise broadcast threshold", |cfg| {
                cfg.broadcast_threshold = 1
            }));
        }
    })
    .unwrap();
    assert!(matches!(rejected.as_slice(), [Err(Error::ConfigFrozen(_))]));
    assert!(cluster
        .update_config("after the run", |cfg| cfg.broadcast_threshold = 7)
        .is_ok());
}

#[test]
fn throughput_streams_return_reference_results() {
    let scale = sf("0.002");
    let db = Db::generate(&Generator::new(scale, GenSeed(17)));
    let cluster = load_cluster(3, 1, scale, 17, EngineConfig::default());
    let r = run_throughput(
        &cluster,
        ThroughputOptions {
            streams: 2,
            seed: 5,
            refresh: false,
        },
    )
    .unwrap();
    assert_eq!(r.results.len(), 44);
    for s in &r.results {
        assert_eq!(
            s.result,
            reference(&db, &s.params),
            "stream {} {:?}",
            s.stream,
            s.params
        );
    }
    assert!(r.metric.is_finite() && r.metric > 0.0);
    assert_ne!(r.results[0].params, r.results[22].params);
}

#[test]
fn throughput_with_refresh_stream_leaves_data_unchanged() {
    let scale = sf("0.002");
    let cluster = load_cluster(3, 1, scale, 9, EngineConfig::default());
    let before = cluster.row_count(Table::LineItem).unwrap();
    let r = run_throughput(
        &cluster,
        ThroughputOptions {
            streams: 2,
            seed: 1,
            refresh: true,
        },
    )
    .unwrap();
    let refreshes = r
        .records
        .iter()
        .filter(|t| matches!(t.kind, TimingKind::Refresh(_)))
        .count();
    assert_eq!(refreshes, 4);
    assert_eq!(r.records.len(), 48);
    assert_eq!(cluster.row_count(Table::LineItem).unwrap(), before);
    let expected = 2.0 * 22.0 * 3600.0 * scale.as_f64() / r.elapsed;
    assert!((r.metric - expected).abs() <= 1e-9 * expected);
}

#[test]
fn scale_experiment_reports_round_trip() {
    let opts = ScaleOptions {
        sf: sf("0.001"),
        seed: GenSeed(2),
        node_counts: vec![3, 5],
        runs: 2,
        k_safety: 1,
        config: EngineConfig::default(),
    };
    let r = run_scale_experiment(&opts).unwrap();
    assert_eq!(r.cells.len(), 4);
    assert!(r.cells.iter().all(|c| c.report.is_some()));
    assert_eq!(r.improvements.len(), 2);
    assert!(r.results_consistent);

    let dir = tempfile::tempdir().unwrap();
    let power: Vec<_> = r.cells.iter().filter_map(|c| c.report.clone()).collect();
    let set = ReportSet {
        load: Some(r.loads[0].clone()),
        power: power.clone(),
        scale: Some(r.clone()),
        ..Default::default()
    };
    let files = emit_report(&set, ReportFormat::Both, dir.path()).unwrap();
    assert_eq!(files.len(), 7);

    let cells =
        parse_scale_csv(&std::fs::read_to_string(dir.path().join(SCALE_CSV)).unwrap()).unwrap();
    let want: Vec<_> = r
        .cells
        .iter()
        .map(|c| (c.label(), c.total_seconds()))
        .collect();
    assert_eq!(cells, want);
    let cols =
        parse_power_csv(&std::fs::read_to_string(dir.path().join(POWER_CSV)).unwrap()).unwrap();
    for (c, p) in cols.iter().zip(&power) {
        assert_eq!(
            (c.power, c.total_seconds, c.total_hours),
            (p.power, p.total_seconds, p.total_hours)
        );
    }
    let load =
        parse_load_csv(&std::fs::read_to_string(dir.path().join(LOAD_CSV)).unwrap()).unwrap();
    assert_eq!(load.len(), 9);
}
