use std::path::PathBuf;

use torsionkit_cli::{emit, main_with_args, parse_input, reserialize, CliError, Format, Report};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> (String, String, i32) {
    main_with_args(std::iter::once("torsionkit").chain(args.iter().copied()))
}

fn report(args: &[&str]) -> Report {
    let mut all = args.to_vec();
    all.push("--json");
    let (out, err, code) = run(&all);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn wh_infinite_six_is_false_with_exit_zero() {
    let r = report(&["wh-infinite", "6"]);
    assert_eq!(r.verdict, "false");
    assert!(!r.citations.is_empty());
}

#[test]
fn swindle_fixture_is_trivial() {
    let r = report(&["swindle", "--input", &fixture("swindle_pair.json")]);
    assert_eq!(r.verdict, "trivial");
    assert_eq!(r.data["det_is_one"], true);
}

#[test]
fn golden_fixture_is_nontrivial_with_exit_zero() {
    let r = report(&["torsion", "--input", &fixture("torsion_golden.json")]);
    assert_eq!(r.verdict, "nontrivial");
    assert_eq!(r.data["trivial"], false);
}

#[test]
fn malformed_and_invalid_inputs_exit_one() {
    let (_, err, code) = run(&["torsion", "--input", &fixture("invalid/malformed.json")]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "{err}");
    let (_, err, code) = run(&["torsion", "--input", &fixture("invalid/bad_d_squared.json")]);
    assert_eq!(code, 1);
    assert!(err.contains("degree 2"), "{err}");
    let (_, _, code) = run(&["torsion", "--input", &fixture("does_not_exist.json")]);
    assert_eq!(code, 1);
    let (_, _, code) = run(&["structures", "--family", "lens"]);
    assert_eq!(code, 1);
    let (_, _, code) = run(&["no-such-verb"]);
    assert_eq!(code, 1);
}

#[test]
fn schema_violation_names_the_path() {
    let (out, _, code) =
        run(&["torsion", "--json", "--input", r#"{"schema": 1, "source": {"group": {"free_rank": "x"}}}"#]);
    assert_eq!(code, 1);
    assert!(out.contains("$.source.group.free_rank"), "{out}");
}

#[test]
fn contract_violations_exit_two() {
    let e: CliError = torsionkit::Error::ContractionFailure("delta".into()).into();
    assert_eq!(e.exit_code(), 2);
    let e: CliError = torsionkit::Error::Contract("post".into()).into();
    assert_eq!(e.exit_code(), 2);
    let e: CliError = torsionkit::Error::Spec("shape".into()).into();
    assert_eq!(e.exit_code(), 1);
}

#[test]
fn json_report_reparses_and_text_carries_citations() {
    let r = report(&["structures", "--family", "lens", "--p", "5"]);
    assert_eq!(serde_json::from_str::<Report>(&emit(&r, Format::Json)).unwrap(), r);
    let text = emit(&r, Format::Text);
    for c in &r.citations {
        assert!(text.contains(c.as_str()));
    }
    assert!(r.caveats.is_empty());
    assert!(!text.contains("caveats:"));
}

#[test]
fn caveats_are_printed_when_present() {
    let r = report(&["torus", "--input", &fixture("torus_z4.json")]);
    assert!(!r.caveats.is_empty());
    assert!(emit(&r, Format::Text).contains("caveats:"));
}

#[test]
fn fixtures_round_trip() {
    let dir = PathBuf::from(fixture(""));
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path).unwrap();
        let v = parse_input(path.to_str().unwrap()).unwrap();
        let back = reserialize(&name, &v).unwrap();
        assert_eq!(back, v, "{name}");
        assert_eq!(torsionkit::json::to_text(&back), text, "{name}");
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn randomized_verbs_are_deterministic() {
    for args in [
        &["swindle", "--torsion", "5", "--trials", "3", "--seed", "9", "--json"][..],
        &["cdga", "bl", "--model", "heisenberg", "--seed", "4"][..],
        &["nil-surject", "--generators", &fixture("nil_heisenberg.json"), "--trials", "50", "--seed", "1"][..],
    ] {
        let a = run(args);
        assert_eq!(a.2, 0, "{}", a.1);
        assert_eq!(a, run(args));
    }
}

#[test]
fn every_verb_cites_its_theorem() {
    let cases: Vec<Vec<String>> = vec![
        vec!["wh-rank".into(), "7".into()],
        vec!["gersten".into(), "--input".into(), fixture("gersten_golden.json")],
        vec!["nil-surject".into(), "--generators".into(), fixture("nil_uni4_level1.json")],
        vec!["cdga".into(), "exp".into(), "--input".into(), fixture("cdga_heisenberg.json")],
        vec!["cdga".into(), "homotopy".into(), "--input".into(), fixture("cdga_sphere_u.json")],
        vec!["structures".into(), "--family".into(), "custom".into(), "--input".into(), fixture("space_custom.json")],
    ];
    for c in cases {
        let args: Vec<&str> = c.iter().map(String::as_str).collect();
        assert!(!report(&args).citations.is_empty(), "{c:?}");
    }
}
