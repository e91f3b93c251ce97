mod common;

use std::fs;
use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use common::{reference, Db};
use deskmpp::cli::{dispatch, ingest_batch};
use deskmpp::cluster::Cluster;
use deskmpp::datagen::{GenSeed, Generator, Table};
use deskmpp::exec::{execute, plan_for, PlanContext, QueryId, QueryParams};
use deskmpp::kv::KvFile;
use zip::write::SimpleFileOptions;
use zip::ZipWriter;

fn run(data: &Path, args: &[&str]) -> i32 {
    let mut argv = vec![
        "deskmpp".to_string(),
        "--data-dir".into(),
        data.display().to_string(),
    ];
    argv.extend(args.iter().map(|s| s.to_string()));
    dispatch(argv)
}

fn latest_run(data: &Path, command: &str) -> PathBuf {
    let mut dirs: Vec<PathBuf> = fs::read_dir(data.join("runs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().ends_with(command))
        .collect();
    dirs.sort();
    dirs.pop().unwrap()
}

fn zip_of(members: &[(&str, &str)]) -> Vec<u8> {
    let mut z = ZipWriter::new(Cursor::new(Vec::new()));
    for (name, body) in members {
        z.start_file(*name, SimpleFileOptions::default()).unwrap();
        z.write_all(body.as_bytes()).unwrap();
    }
    z.finish().unwrap().into_inner()
}

#[test]
fn usage_errors_exit_two_and_run_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]), 2);
    assert_eq!(run(dir.path(), &["power", "--no-such-flag"]), 2);
    assert_eq!(run(dir.path(), &["gen", "--sf", "0.01"]), 2);
    assert_eq!(run(dir.path(), &["cluster", "status"]), 1);
    assert_eq!(run(dir.path(), &["power"]), 1);
}

#[test]
fn gen_writes_eight_tbl_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tbl");
    assert_eq!(
        run(
            dir.path(),
            &[
                "gen",
                "--sf",
                "0.001",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap()
            ]
        ),
        0
    );
    for t in Table::ALL {
        assert!(out.join(format!("{}.tbl", t.name())).exists(), "{t}");
    }
}

#[test]
fn packet_from_tbl_files_loads_every_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path();
    let tbl = data.join("tbl");
    assert_eq!(
        run(
            data,
            &[
                "gen",
                "--sf",
                "0.001",
                "--seed",
                "5",
                "--out",
                tbl.to_str().unwrap()
            ]
        ),
        0
    );
    assert_eq!(
        run(
            data,
            &["load", "--sf", "0.001", "--nodes", "3", "--k", "1", "--format", "csv"]
        ),
        0
    );
    let before: Vec<u64> = {
        let c = Cluster::open(&data.join("cluster")).unwrap();
        Table::ALL
            .iter()
            .map(|&t| c.row_count(t).unwrap())
            .collect()
    };
    let packet = data.join("packet.zip");
    assert_eq!(
        run(
            data,
            &[
                "pack",
                "--tbl-dir",
                tbl.to_str().unwrap(),
                "--out",
                packet.to_str().unwrap()
            ]
        ),
        0
    );
    assert_eq!(
        run(
            data,
            &[
                "ingest-batch",
                packet.to_str().unwrap(),
                "--deadline",
                "3600"
            ]
        ),
        0
    );

    let report = KvFile::read(&latest_run(data, "ingest-batch").join("batch.txt")).unwrap();
    assert_eq!(report.get("deadline_met"), Some("true"));
    let c = Cluster::open(&data.join("cluster")).unwrap();
    for (i, t) in Table::ALL.iter().enumerate() {
        let lines = fs::read_to_string(tbl.join(format!("{}.tbl", t.name())))
            .unwrap()
            .lines()
            .count() as u64;
        assert_eq!(
            report.require::<u64>(&format!("inserted.{t}")).unwrap(),
            lines
        );
        assert_eq!(c.row_count(*t).unwrap(), before[i] + lines);
    }
}

#[test]
fn bad_files_are_rejected_whole_and_others_load() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path();
    assert_eq!(
        run(
            data,
            &["load", "--sf", "0.001", "--nodes", "2", "--k", "1", "--format", "csv"]
        ),
        0
    );
    let c = Cluster::open(&data.join("cluster")).unwrap();
    let customers = c.row_count(Table::Customer).unwrap();
    let orders = c.row_count(Table::Orders).unwrap();

    let header = "c_custkey,c_name,c_address,c_nationkey,c_phone,c_acctbal,c_mktsegment,c_comment";
    let good = format!(
        "{header}\n9001,Customer#9001,addr,1,11-111-111-1111,10.50,BUILDING,x\n\
         9002,Customer#9002,addr,2,11-111-111-1112,-3.00,MACHINERY,y\n\
         9003,Customer#9003,\"a, b\",3,11-111-111-1113,0.00,HOUSEHOLD,z\n"
    );
    let bad_orders = "o_orderkey,o_custkey,o_orderstatus,o_totalprice,o_orderdate,o_orderpriority,o_clerk,o_shippriority,o_comment\n\
                      900001,1,O,10.00,1996-01-02,1-URGENT,Clerk#1,0,ok\n\
                      900002,1,O,10.00,1996-13-40,1-URGENT,Clerk#1,0,bad date\n";
    let bytes = zip_of(&[
        ("q1/customer.csv", &good),
        ("q1/orders.csv", bad_orders),
        ("q1/scan-0001.png", "not really a png"),
        ("q1/widgets.csv", "a,b\n1,2\n"),
    ]);
    let out = ingest_batch(Cursor::new(bytes), &c).unwrap();
    assert_eq!(out.inserted[&Table::Customer], 3);
    assert_eq!(out.inserted[&Table::Orders], 0);
    assert_eq!(out.skipped, vec!["q1/scan-0001.png".to_string()]);
    let rejected: Vec<(&str, Option<u64>)> = out
        .rejects
        .iter()
        .map(|r| (r.member.as_str(), r.line))
        .collect();
    assert_eq!(
        rejected,
        vec![("q1/orders.csv", Some(3)), ("q1/widgets.csv", None)]
    );
    assert_eq!(c.row_count(Table::Customer).unwrap(), customers + 3);
    assert_eq!(c.row_count(Table::Orders).unwrap(), orders);

    let empty = ingest_batch(Cursor::new(zip_of(&[])), &c).unwrap();
    assert_eq!(empty.total(), 0);
    assert!(ingest_batch(Cursor::new(b"not a zip".to_vec()), &c).is_err());
}

#[test]
fn power_after_killing_two_nodes_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path();
    assert_eq!(
        run(
            data,
            &["power", "--sf", "0.001", "--seed", "4", "--nodes", "5", "--k", "2", "--runs", "2"]
        ),
        0
    );
    let first = latest_run(data, "power");
    assert!(first.join("power.csv").exists() && first.join("query_duration.svg").exists());
    assert!(first.join("manifest.txt").exists());

    assert_eq!(run(data, &["cluster", "kill", "1", "3"]), 0);
    assert_eq!(run(data, &["power", "--runs", "1", "--format", "csv"]), 0);
    let c = Cluster::open(&data.join("cluster")).unwrap();
    assert!(!c.state().nodes[1].up && !c.state().nodes[3].up);
    let scale = c.dataset().unwrap().sf;
    let db = Db::generate(&Generator::new(scale, GenSeed(4)));
    let ctx = PlanContext::new(scale, c.config().broadcast_threshold);
    for q in QueryId::all() {
        let p = QueryParams::defaults(q);
        assert_eq!(
            execute(&plan_for(&p, &ctx).unwrap(), &c).unwrap().result,
            reference(&db, &p),
            "{q}"
        );
    }

    assert_eq!(run(data, &["cluster", "recover", "1", "3"]), 0);
    assert_eq!(run(data, &["cluster", "kill", "0", "1", "2"]), 0);
    assert_eq!(run(data, &["power"]), 1);
    assert_eq!(
        run(
            data,
            &[
                "report",
                first.to_str().unwrap(),
                "--out",
                data.join("charts").to_str().unwrap()
            ]
        ),
        0
    );
    assert!(data.join("charts/total_duration.svg").exists());
}
