use geopg_bench::{parse_libsvm, read_trace, write_libsvm, write_trace, HEADER};
use geopg_core::{solve, ElasticNetLs, SolverConfig, SparseDesign, Termination, Variant};
use proptest::prelude::*;

fn sparse_rows(cols: usize) -> impl Strategy<Value = Vec<Vec<(usize, f64)>>> {
    let row = prop::collection::btree_map(0..cols, -1e6f64..1e6, 0..=cols)
        .prop_map(|m| m.into_iter().filter(|(_, v)| *v != 0.0).collect::<Vec<_>>());
    prop::collection::vec(row, 1..12)
}

proptest! {
    #[test]
    fn libsvm_round_trips(
        cols in 1usize..20,
        seed_rows in sparse_rows(20),
        labels in prop::collection::vec(prop_oneof![Just(1.0), Just(-1.0), -5.0f64..5.0], 12),
    ) {
        let rows: Vec<Vec<(usize, f64)>> = seed_rows
            .into_iter()
            .map(|r| r.into_iter().filter(|(j, _)| *j < cols).collect())
            .collect();
        let targets = labels[..rows.len()].to_vec();
        let design = SparseDesign::from_rows(cols, rows, targets).unwrap();
        let mut buf = Vec::new();
        write_libsvm(&design, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice(), Some(cols)).unwrap();
        prop_assert_eq!(back, design);
    }
}

#[test]
fn binary_labels_are_written_as_integers() {
    let d = SparseDesign::from_rows(3, vec![vec![(0, 0.5), (2, -1.0)], vec![]], vec![1.0, -1.0]).unwrap();
    let mut buf = Vec::new();
    write_libsvm(&d, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "1 1:0.5 3:-1\n-1\n");
}

#[test]
fn solver_traces_round_trip_through_csv() {
    let a: Vec<f64> = (0..30).map(|i| ((i * 7 % 13) as f64 - 6.0) / 4.0).collect();
    let b: Vec<f64> = (0..10).map(|i| i as f64 / 3.0 - 1.0).collect();
    let d = SparseDesign::from_dense(10, 3, &a, b).unwrap();
    let p = ElasticNetLs::new(d, 0.1, 0.05).unwrap();
    for v in [Variant::GeoPgB, Variant::ApgB, Variant::LGeoPgB] {
        let cfg = SolverConfig {
            termination: Termination::RelGap { f_star: 0.5 },
            tol: 0.0,
            max_iter: 40,
            ..SolverConfig::new(v)
        };
        let trace = solve(&p, &cfg, &[0.0; 3], &mut ()).unwrap();
        let mut buf = Vec::new();
        write_trace(&trace.records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
        assert_eq!(read_trace(buf.as_slice()).unwrap(), trace.records, "{v}");
    }
}
