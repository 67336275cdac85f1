use std::io::Write;
use std::process::{Command, Output};

fn asdgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asdgeo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ppwave_with_harmonic_free_profile_verifies() {
    let o = asdgeo(&[
        "verify",
        "--entry",
        "ppwave",
        "--Q",
        "x^2+y^2",
        "--samples",
        "50",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["consistent"], true);
}

#[test]
fn heavenly_overrides() {
    // x³ has no mixed second derivatives, so this Ω still solves the equation
    let o = asdgeo(&[
        "verify",
        "--entry",
        "heavenly1",
        "--Omega",
        "w*x+z*y+x^3",
        "--samples",
        "10",
    ]);
    assert_eq!(code(&o), 0);
    let o = asdgeo(&[
        "verify",
        "--entry",
        "heavenly1",
        "--Omega",
        "w*x+z*y+x^3*w",
        "--samples",
        "10",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("\"verdict\":\"fail\""));
}

#[test]
fn every_line_is_json() {
    let o = asdgeo(&["verify", "--entry", "tod", "--samples", "5"]);
    assert_eq!(code(&o), 0);
    for l in stdout(&o).lines() {
        serde_json::from_str::<serde_json::Value>(l).unwrap();
    }
}

#[test]
fn cp2_fails_atiyah_parity() {
    let o = asdgeo(&["topology", "--manifold", "CP2"]);
    assert_eq!(code(&o), 1);
    let all = stdout(&o) + &String::from_utf8_lossy(&o.stderr);
    assert!(all.contains("fails Atiyah parity"));
}

#[test]
fn k3_and_s2xs2_admit() {
    assert_eq!(
        code(&asdgeo(&["topology", "--manifold", "K3", "--radius", "6"])),
        0
    );
    let o = asdgeo(&["topology", "--manifold", "S2xS2", "--radius", "3", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["hirzebruchHopf"]["verdict"], "admits");
}

#[test]
fn zoo_list_is_the_registry() {
    let o = asdgeo(&["zoo", "list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout(&o)
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["name"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(names, asd_core::zoo::ZOO_NAMES);
    for n in &names {
        let o = asdgeo(&["zoo", "eval", "--entry", n, "--samples", "3"]);
        assert_eq!(code(&o), 0, "{n}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "verify",
        "--entry",
        "ooguri-vafa",
        "--samples",
        "8",
        "--seed",
        "42",
    ];
    assert_eq!(asdgeo(&args).stdout, asdgeo(&args).stdout);
    let other = asdgeo(&[
        "verify",
        "--entry",
        "ooguri-vafa",
        "--samples",
        "8",
        "--seed",
        "43",
    ]);
    assert_ne!(asdgeo(&args).stdout, other.stdout);
}

#[test]
fn config_file_runs_and_flags_win() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        f,
        "# pp-wave run\ncommand = verify\nentry = ppwave\nQ = \"sin(x)*y\"\nsamples = 4"
    )
    .unwrap();
    let p = f.path().to_str().unwrap();
    let o = asdgeo(&["--config", p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"samplePoints\":4"));
    let o = asdgeo(&["--config", p, "verify", "--samples", "6"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"samplePoints\":6"));
}

#[test]
fn usage_errors_exit_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "entry ppwave").unwrap();
    assert_eq!(
        code(&asdgeo(&["--config", f.path().to_str().unwrap(), "verify"])),
        2
    );
    assert_eq!(code(&asdgeo(&["verify", "--entry", "no-such-entry"])), 2);
    assert_eq!(
        code(&asdgeo(&["verify", "--entry", "ppwave", "--Q", "x^^2"])),
        2
    );
    assert_eq!(code(&asdgeo(&["frobnicate"])), 2);
    assert_eq!(
        code(&asdgeo(&[
            "verify",
            "--entry",
            "ppwave-quadratic",
            "--Zeta",
            "x"
        ])),
        2
    );
}

#[test]
fn out_flag_writes_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let o = asdgeo(&[
        "lax",
        "--entry",
        "flat",
        "--samples",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("\"agree\":true"));
}

#[test]
fn reduction_and_lift() {
    assert_eq!(
        code(&asdgeo(&[
            "reduce",
            "--entry",
            "ooguri-vafa",
            "--samples",
            "5"
        ])),
        0
    );
    assert_eq!(code(&asdgeo(&["reduce", "--entry", "ppwave-quadratic"])), 2);
    for p in ["toda", "dkp"] {
        assert_eq!(
            code(&asdgeo(&["lift", "--preset", p, "--samples", "5"])),
            0,
            "{p}"
        );
    }
}

#[test]
fn monopole_solver_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let o = asdgeo(&[
        "solve-monopole",
        "--n",
        "9",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().next(), Some("x,y,t,V"));
    assert_eq!(text.lines().count(), 1 + 9 * 9 * 9);
}

#[test]
fn xray_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let lines = dir.path().join("lines.csv");
    std::fs::write(&lines, "x,y,w,z\n0,0,0,0\n0.2,-0.1,0.3,0.4\n").unwrap();
    let o = asdgeo(&[
        "xray",
        "--f",
        "gaussian",
        "--lines",
        lines.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "x,y,w,z,psi,residual");
    assert_eq!(rows.len(), 3);
    let psi: f64 = rows[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!((psi - std::f64::consts::PI.sqrt()).abs() < 1e-8);
}

#[test]
fn petrov_types() {
    assert_eq!(
        code(&asdgeo(&[
            "petrov",
            "--quartic",
            "0,0,0,0,1",
            "--expect",
            "N"
        ])),
        0
    );
    assert_eq!(
        code(&asdgeo(&[
            "petrov",
            "--entry",
            "g0",
            "--samples",
            "3",
            "--expect",
            "O"
        ])),
        0
    );
    assert_eq!(
        code(&asdgeo(&[
            "petrov",
            "--entry",
            "ppwave-quadratic",
            "--samples",
            "3",
            "--expect",
            "O"
        ])),
        1
    );
}
