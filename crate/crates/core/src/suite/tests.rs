use num_complex::Complex64;

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn complex_literals() {
    assert_eq!(parse_complex("0.5-2i").unwrap(), c(0.5, -2.0));
    assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
    assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
    assert_eq!(parse_complex("-1/4 + 3/2*i").unwrap(), c(-0.25, 1.5));
    assert!(matches!(parse_complex("z1"), Err(Error::Config(_))));
    assert!(matches!(parse_complex("1 +"), Err(Error::Config(_))));
}

#[test]
fn suite_names_round_trip() {
    for id in SuiteId::CONCRETE.iter().chain([&SuiteId::All]) {
        assert_eq!(id.name().parse::<SuiteId>().unwrap(), *id);
        let json = serde_json::to_string(id).unwrap();
        assert_eq!(json, format!("\"{}\"", id.name()));
    }
    assert!(matches!(
        "verify-nothing".parse::<SuiteId>(),
        Err(Error::Config(_))
    ));
}

#[test]
fn grid_file_parses_members_and_defaults_mu() {
    let g = GridFile::parse(
        r#"
seed = 7
radii = [10.0, 100.0]

[[member]]
n = 1
lambda = "0.3+1.2i"
mu = ["0.1-0.2i"]

[[member]]
n = 2
lambda = "2i"
"#,
    )
    .unwrap();
    assert_eq!(g.seed, Some(7));
    assert_eq!(g.samples, None);
    assert_eq!(g.radii, Some(vec![10.0, 100.0]));
    assert_eq!(g.members.len(), 2);
    assert_eq!(g.members[0].mu, vec![c(0.1, -0.2)]);
    assert_eq!(g.members[1].mu, vec![c(0.0, 0.0); 2]);
}

#[test]
fn grid_file_rejects_bad_input() {
    // Im λ must exceed |μ|²/4.
    let inadmissible = "[[member]]\nn = 1\nlambda = \"0.1i\"\nmu = [\"2\"]\n";
    assert!(matches!(
        GridFile::parse(inadmissible),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        GridFile::parse("sed = 1\n"),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        GridFile::parse("[[member]]\nn = 1\nlambda = \"oops(\"\n"),
        Err(Error::Config(_))
    ));
}

#[test]
fn config_validation() {
    let base = RunConfig::new(SuiteId::VerifyGroup);
    assert!(base.validate().is_ok());
    let bad = [
        RunConfig {
            dims: vec![1, 0],
            ..base.clone()
        },
        RunConfig {
            samples: Some(0),
            ..base.clone()
        },
        RunConfig {
            radii: Some(vec![10.0]),
            ..base.clone()
        },
        RunConfig {
            radii: Some(vec![10.0, -1.0]),
            ..base.clone()
        },
        RunConfig {
            grid: GridSpec::Default { count: 0 },
            ..base.clone()
        },
        RunConfig {
            grid: GridSpec::Members {
                members: vec![GridMember {
                    n: 1,
                    lambda: c(0.0, -1.0),
                    mu: vec![c(0.0, 0.0)],
                }],
            },
            ..base.clone()
        },
        RunConfig {
            expr: Some("z1 +* 2".into()),
            ..base.clone()
        },
    ];
    for cfg in bad {
        assert!(matches!(run_suite(&cfg), Err(Error::Config(_))), "{cfg:?}");
    }
}

fn small_group() -> RunConfig {
    RunConfig {
        dims: vec![1],
        samples: Some(200),
        seed: 3,
        ..RunConfig::new(SuiteId::VerifyGroup)
    }
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let a = run_suite(&small_group()).unwrap();
    let b = run_suite(&small_group()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(Report::from_json(&a.to_json()).unwrap(), a);
    assert!(a.all_passed());
    assert!(a.wall_time_s.is_none());
    let other = run_suite(&RunConfig {
        seed: 4,
        ..small_group()
    })
    .unwrap();
    assert_ne!(a.checks[0].inputs_digest, other.checks[0].inputs_digest);
}

#[test]
fn csv_has_one_row_per_check() {
    let r = run_suite(&small_group()).unwrap();
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("id,value,tolerance,rule,pass,inputs_digest")
    );
    assert_eq!(lines.count(), r.checks.len());
}

#[test]
fn series_emission() {
    let r = run_suite(&small_group()).unwrap();
    let text = emit_series(&r, "volume-n1").unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(lines.count(), r.series("volume-n1").unwrap().rows.len());
    assert!(matches!(
        emit_series(&r, "nope"),
        Err(Error::UnknownSeries(_))
    ));
}

#[test]
fn tolerance_overrides_change_outcomes() {
    let mut cfg = RunConfig {
        suite: SuiteId::VerifyEuclidean,
        dims: vec![3],
        samples: Some(10),
        ..RunConfig::new(SuiteId::VerifyEuclidean)
    };
    assert!(run_suite(&cfg).unwrap().all_passed());
    cfg.tolerances
        .apply_override("euclidean-residual=1e-300")
        .unwrap();
    let r = run_suite(&cfg).unwrap();
    // Roundoff leaves a nonzero residual.
    assert!(!r.all_passed());
    assert_eq!(r.checks[0].tolerance, 1e-300);
}

#[test]
fn corpus_has_twenty_expressions() {
    let exprs = crate::expr::parse_corpus(CORPUS).unwrap();
    assert_eq!(exprs.len(), 20);
    assert_eq!(exprs.iter().filter(|e| e.is_polynomial()).count(), 11);
}
