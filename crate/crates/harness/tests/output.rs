use langevin_homog::output::{
    emit_csv, emit_plot_script, emit_profile, emit_summary, read_csv, sweep_header,
};
use langevin_homog::sweep::{Check, Profile, Verdict};
use langevin_homog::{ConvergenceRecord, SweepRow};
use proptest::prelude::*;

fn record(eps: f64, n: usize, seed: f64) -> ConvergenceRecord {
    ConvergenceRecord {
        epsilon: eps,
        h: eps * eps,
        poisson_err_l2: 0.3 * eps + seed,
        poisson_err_h1: 0.4 + seed,
        corrector_err_h1: 0.25 * eps,
        eigen_gap: (0..n).map(|i| i as f64 * eps / 7.0).collect(),
        eigen_err_l2: (0..n).map(|i| (i as f64 + seed).sqrt()).collect(),
        eigen_err_h1: (0..n).map(|i| 1.0 / (1.0 + i as f64 + seed)).collect(),
    }
}

/// Half a unit in the twelfth significant digit.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 5e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn same(a: &ConvergenceRecord, b: &ConvergenceRecord) -> bool {
    let pa = [
        a.epsilon,
        a.h,
        a.poisson_err_l2,
        a.poisson_err_h1,
        a.corrector_err_h1,
    ];
    let pb = [
        b.epsilon,
        b.h,
        b.poisson_err_l2,
        b.poisson_err_h1,
        b.corrector_err_h1,
    ];
    pa.iter().zip(&pb).all(|(x, y)| close(*x, *y))
        && [
            (&a.eigen_gap, &b.eigen_gap),
            (&a.eigen_err_l2, &b.eigen_err_l2),
            (&a.eigen_err_h1, &b.eigen_err_h1),
        ]
        .iter()
        .all(|(x, y)| x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| close(*p, *q)))
}

#[test]
fn single_record_is_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    emit_csv(&[SweepRow::Ok(record(0.4, 3, 0.1))], &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.ends_with('\n'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], sweep_header(3).join(","));
    assert!(lines[1].starts_with("4.00000000000e-1,1.60000000000e-1,"));
    assert!(lines[1].ends_with(",ok"));
}

#[test]
fn empty_input_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    assert!(emit_csv(&[], &p).is_err());
    assert!(!p.exists());
    assert!(emit_plot_script(&[], &dir.path().join("p.py"), "s.csv").is_err());
}

#[test]
fn error_rows_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let rows = vec![
        SweepRow::Failed {
            epsilon: 0.4,
            h: 0.16,
            message: "solver failed, \"badly\"".into(),
        },
        SweepRow::Ok(record(0.2, 2, 0.0)),
    ];
    emit_csv(&rows, &p).unwrap();
    let back = read_csv(&p).unwrap();
    match &back[0] {
        SweepRow::Failed {
            epsilon, message, ..
        } => {
            assert_eq!(*epsilon, 0.4);
            assert_eq!(message, "solver failed, \"badly\"");
        }
        other => panic!("{other:?}"),
    }
    assert!(same(back[1].record().unwrap(), rows[1].record().unwrap()));
}

#[test]
fn rejects_foreign_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    std::fs::write(&p, "a,b,c\n1,2,3\n").unwrap();
    assert!(read_csv(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn csv_round_trip(
        eps in prop::collection::vec(1e-4f64..10.0, 1..6),
        n in 1usize..7,
        seed in 0.0f64..1e3,
    ) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let rows: Vec<SweepRow> = eps.iter().map(|&e| SweepRow::Ok(record(e, n, seed))).collect();
        emit_csv(&rows, &p).unwrap();
        let back = read_csv(&p).unwrap();
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert!(same(a.record().unwrap(), b.record().unwrap()));
        }
    }
}

fn stanzas(script: &str) -> usize {
    script.matches("# --- plot:").count()
}

fn assert_relative(script: &str) {
    for quoted in script.split('"').skip(1).step_by(2) {
        assert!(!quoted.starts_with('/'), "absolute path {quoted}");
        assert!(!quoted.contains(":\\"), "absolute path {quoted}");
    }
    assert!(!script.contains("#!/"));
}

#[test]
fn plot_script_for_full_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("plot.py");
    let rows: Vec<SweepRow> = [0.4, 0.2, 0.1]
        .iter()
        .map(|&e| SweepRow::Ok(record(e, 5, 0.0)))
        .collect();
    emit_plot_script(&rows, &p, "sweep.csv").unwrap();
    let s = std::fs::read_to_string(&p).unwrap();
    assert_eq!(stanzas(&s), 3);
    assert!(s.contains("\"profile_eps_0.2.csv\""));
    assert!(!s.contains(dir.path().to_str().unwrap()));
    assert_relative(&s);
}

#[test]
fn plot_script_for_single_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("plot.py");
    emit_plot_script(&[SweepRow::Ok(record(0.4, 5, 0.0))], &p, "sweep.csv").unwrap();
    let s = std::fs::read_to_string(&p).unwrap();
    assert_eq!(stanzas(&s), 1);
    assert!(s.contains("# decay plots skipped"));
    assert_relative(&s);
}

#[test]
fn profile_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let prof = Profile {
        x: vec![-1.0, 0.0, 1.0],
        u_eps: vec![1.0, 2.0, 3.0],
        u_hom: vec![1.5, 2.0, 2.5],
        u_corrector: vec![1.1, 2.0, 2.9],
    };
    let p = dir.path().join("profile.csv");
    emit_profile(&prof, &p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,u_eps,u_hom,u_corrector");
    assert_eq!(lines.len(), 4);

    let checks = vec![
        Check {
            name: "a".into(),
            verdict: Verdict::Pass,
        },
        Check {
            name: "b".into(),
            verdict: Verdict::Fail,
        },
        Check {
            name: "c".into(),
            verdict: Verdict::Skipped,
        },
    ];
    let s = dir.path().join("summary.csv");
    emit_summary(&checks, &s).unwrap();
    assert_eq!(
        std::fs::read_to_string(&s).unwrap(),
        "a,b,c\npass,fail,skipped\n"
    );
}
