use std::path::Path;

use asd_core::einstein_weyl::presets::{lift_reports, preset};
use asd_core::einstein_weyl::{
    ew_residual, jones_tod_reduce, metricity_residual, monopole_solve_linear, Grid3,
    LinearMonopole, SolverOptions,
};
use asd_core::geometry::{asd_residual, classify_quartic, petrov_classify};
use asd_core::jets::{parse_expr, Expr};
use asd_core::report::ResidualReport;
use asd_core::spinor::{default_lambdas, lax_integrability};
use asd_core::topology::{
    atiyah_check, atiyah_failure, hirzebruch_hopf_check, manifold, Admissibility,
};
use asd_core::xray::{
    random_lines, uhwave_residual, xray_table, Integrand3D, LineParam, QuadOptions,
};
use asd_core::zoo::{zoo_entry, Family, Tolerances, ZooEntry, ZOO_NAMES};
use asd_core::GeomError;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::{Cli, Cmd, EntryArgs, Global, ZooCmd};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

type Out = Vec<u8>;

fn usage(s: impl Into<String>) -> CliError {
    CliError::Usage(s.into())
}

fn line(out: &mut Out, v: &impl Serialize) {
    out.extend(serde_json::to_string(v).expect("serialisable").bytes());
    out.push(b'\n');
}

/// A report line tagged with extra fields.
fn tagged(out: &mut Out, tags: Value, r: &ResidualReport) {
    let mut v = serde_json::to_value(r).expect("serialisable");
    if let (Value::Object(m), Value::Object(t)) = (&mut v, tags) {
        for (k, x) in t {
            m.insert(k, x);
        }
    }
    line(out, &v);
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Registered entry (potentials overridable) or a family built from `sets`.
pub fn resolve_entry(name: &str, sets: &[String]) -> Result<ZooEntry, CliError> {
    let mut pairs = Vec::new();
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| usage(format!("expected NAME=EXPR, got {s:?}")))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    let (family, mut params, registered) = if ZOO_NAMES.contains(&name) {
        let e = zoo_entry(name)?;
        (e.family, e.params.clone(), true)
    } else {
        (Family::from_name(name)?, Default::default(), false)
    };
    if registered && pairs.is_empty() {
        return Ok(zoo_entry(name)?);
    }
    let coords = family.coords();
    for (k, v) in pairs {
        // plain numbers also fill the constant slot of the same name
        if let Ok(x) = v.parse::<f64>() {
            if registered && params.constants.contains_key(&k) {
                params.constants.insert(k, x);
                continue;
            }
            if !registered {
                params.constants.insert(k.clone(), x);
            }
        }
        if registered && !params.potentials.contains_key(&k) {
            return Err(usage(format!("{name} has no potential {k:?}")));
        }
        params.potentials.insert(k, parse_expr(&v, &coords)?);
    }
    let mut e = family.build(&params)?;
    e.name = name.to_string();
    Ok(e)
}

pub fn run(cli: &Cli, out: &mut Out) -> Result<bool, CliError> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Verify(a) => verify(g, a, out),
        Cmd::Lax(a) => lax(g, a, out),
        Cmd::Reduce { entry, slice } => reduce(g, entry, *slice, out),
        Cmd::Lift { preset: p } => lift(g, p, out),
        Cmd::SolveMonopole {
            background,
            u,
            exact,
            n,
            lo,
            hi,
            csv,
        } => solve(
            g,
            background,
            u.as_deref(),
            exact.as_deref(),
            *n,
            lo.as_deref(),
            hi.as_deref(),
            csv.as_deref(),
            out,
        ),
        Cmd::Xray {
            f,
            radius,
            tail,
            lines,
            random,
            h,
            csv,
        } => xray(
            g,
            f,
            *radius,
            *tail,
            lines.as_deref(),
            *random,
            *h,
            csv.as_deref(),
            out,
        ),
        Cmd::Petrov {
            entry,
            set,
            quartic,
            expect,
        } => petrov(
            g,
            entry.as_deref(),
            set,
            quartic.as_deref(),
            expect.as_deref(),
            out,
        ),
        Cmd::Topology {
            manifold: m,
            radius,
            json,
        } => topology(m, *radius, *json, out),
        Cmd::Zoo { action } => match action {
            ZooCmd::List => {
                for n in ZOO_NAMES {
                    let e = zoo_entry(n)?;
                    line(
                        out,
                        &json!({
                            "name": e.name,
                            "family": e.family.name(),
                            "coords": e.coords,
                            "expected": e.expected.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                        }),
                    );
                }
                Ok(true)
            }
            ZooCmd::Eval { entry } => {
                let names: Vec<String> = match entry {
                    Some(n) => vec![n.clone()],
                    None => ZOO_NAMES.iter().map(|s| s.to_string()).collect(),
                };
                let mut ok = true;
                for n in names {
                    ok &= evaluate(g, &resolve_entry(&n, &[])?, out);
                }
                Ok(ok)
            }
        },
    }
}

fn tolerances(g: &Global) -> Tolerances {
    let mut t = Tolerances::default();
    if let Some(x) = g.tol {
        t.governing = x;
        t.asd = x;
        t.ricci = x;
    }
    t
}

fn evaluate(g: &Global, e: &ZooEntry, out: &mut Out) -> bool {
    let s = e.samples(g.samples, g.seed);
    let r = e.evaluate(&s, &tolerances(g));
    for rep in &r.governing {
        tagged(out, json!({"entry": e.name, "kind": "governing"}), rep);
    }
    for rep in &r.verdicts {
        tagged(out, json!({"entry": e.name, "kind": "verdict"}), rep);
    }
    line(out, &json!({"entry": e.name, "consistent": r.consistent}));
    r.consistent
}

fn verify(g: &Global, a: &EntryArgs, out: &mut Out) -> Result<bool, CliError> {
    let e = resolve_entry(&a.entry, &a.set)?;
    Ok(evaluate(g, &e, out))
}

fn lax(g: &Global, a: &EntryArgs, out: &mut Out) -> Result<bool, CliError> {
    let e = resolve_entry(&a.entry, &a.set)?;
    let frame = e
        .frame
        .as_ref()
        .ok_or_else(|| usage(format!("{} has no null tetrad", e.name)))?;
    let tol = g.tol.unwrap_or(1e-8);
    let s = e.samples(g.samples, g.seed);
    let lax = lax_integrability(frame, &s, &default_lambdas(g.seed), tol);
    let asd = asd_residual(&e.metric, &s, tol);
    tagged(out, json!({"entry": e.name}), &lax);
    tagged(out, json!({"entry": e.name}), &asd);
    line(
        out,
        &json!({"entry": e.name, "agree": lax.passed() == asd.passed()}),
    );
    Ok(lax.passed())
}

fn reduce(g: &Global, a: &EntryArgs, slice: Option<f64>, out: &mut Out) -> Result<bool, CliError> {
    let e = resolve_entry(&a.entry, &a.set)?;
    let k = e
        .killing
        .as_ref()
        .filter(|k| !k.null)
        .ok_or_else(|| usage(format!("{} has no non-null symmetry", e.name)))?;
    let reference = e
        .samples(1, g.seed)
        .pop()
        .ok_or_else(|| usage("no admissible sample point"))?;
    let axis = k
        .components
        .iter()
        .position(|c| !c.is_zero())
        .ok_or_else(|| usage("zero symmetry"))?;
    let red = jones_tod_reduce(
        &e.metric,
        &k.components,
        slice.unwrap_or(reference[axis]),
        &reference,
    )?;
    let s = red.samples(g.samples, g.seed);
    let tol = g.tol.unwrap_or(1e-7);
    let ew = ew_residual(&red, &s, tol);
    let met = metricity_residual(&red, &s, tol);
    tagged(out, json!({"entry": e.name}), &ew);
    tagged(out, json!({"entry": e.name}), &met);
    Ok(ew.passed() && met.passed())
}

fn lift(g: &Global, name: &str, out: &mut Out) -> Result<bool, CliError> {
    let (ew, m) = preset(name)?;
    let reps = lift_reports(&ew, &m, g.samples, g.seed, g.tol.unwrap_or(1e-7))?;
    let mut ok = true;
    for r in &reps {
        tagged(out, json!({"preset": name}), r);
        ok &= r.passed();
    }
    Ok(ok)
}

fn triple(s: Option<&str>, default: [f64; 3]) -> Result<[f64; 3], CliError> {
    let Some(s) = s else {
        return Ok(default);
    };
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("bad triple {s:?}: {e}")))?;
    v.try_into()
        .map_err(|_| usage(format!("expected three numbers, got {s:?}")))
}

#[allow(clippy::too_many_arguments)]
fn solve(
    g: &Global,
    background: &str,
    u: Option<&str>,
    exact: Option<&str>,
    n: usize,
    lo: Option<&str>,
    hi: Option<&str>,
    csv: Option<&Path>,
    out: &mut Out,
) -> Result<bool, CliError> {
    let vars = ["x", "y", "t"];
    let (du, dex, dlo, dhi) = match background {
        "dkp" => ("-x/t", "-x/t", [0.5, -0.5, -2.0], [1.5, 0.5, -1.0]),
        "toda" => (
            "ln(4*(1-t^2)/(1+x^2+y^2)^2)",
            "(1 + 0.5*t)/(1 - t^2)",
            [-0.5, -0.5, -0.4],
            [0.5, 0.5, 0.4],
        ),
        other => return Err(usage(format!("unknown background {other:?}"))),
    };
    let u = parse_expr(u.unwrap_or(du), &vars)?;
    let exact: Expr = parse_expr(exact.unwrap_or(dex), &vars)?;
    let problem = if background == "dkp" {
        LinearMonopole::Dkp { u }
    } else {
        LinearMonopole::Toda { u }
    };
    let grid = Grid3::cube(triple(lo, dlo)?, triple(hi, dhi)?, n)?;
    let f = |p: &[f64; 3]| exact.eval::<f64>(p).unwrap_or(f64::NAN);
    let sol = monopole_solve_linear(&problem, &grid, &f, &SolverOptions::default())?;
    let err = sol.max_error(f);
    let tol = g.tol.unwrap_or(1e-3);
    let rep = ResidualReport::from_residuals("monopole-grid-error", &[err], tol).with_note(
        format!("{n}^3 nodes, closure defect {:.3e}", sol.closure_defect),
    );
    tagged(out, json!({"background": background}), &rep);
    if let Some(p) = csv {
        write_file(p, &sol.to_csv())?;
    }
    Ok(rep.passed())
}

fn read_lines(path: &Path) -> Result<Vec<LineParam>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut v = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = l.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match parsed {
            Ok(xs) if xs.len() == 4 => v.push(LineParam::new(xs[0], xs[1], xs[2], xs[3])),
            Err(_) if i == 0 => continue, // header
            _ => {
                return Err(usage(format!(
                    "{}:{}: expected x,y,w,z",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn xray(
    g: &Global,
    f: &str,
    radius: f64,
    tail: f64,
    lines: Option<&Path>,
    random: usize,
    h: f64,
    csv: Option<&Path>,
    out: &mut Out,
) -> Result<bool, CliError> {
    let integrand = match Integrand3D::named(f) {
        Ok(i) => i,
        Err(_) => Integrand3D::parse(f, radius, tail)?,
    };
    let lines = match lines {
        Some(p) => read_lines(p)?,
        None => random_lines(random, 1.0, g.seed),
    };
    let quad = QuadOptions::default();
    let tol = g.tol.unwrap_or(1e-4);
    let rep = uhwave_residual(&integrand, &lines, h, tol, &quad)?;
    let rows = xray_table(&integrand, &lines, h, &quad)?;
    let mut text = String::from("x,y,w,z,psi,residual\n");
    for r in &rows {
        let l = r.line;
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            l.x, l.y, l.w, l.z, r.psi, r.residual
        ));
    }
    match csv {
        Some(p) => {
            write_file(p, &text)?;
            tagged(out, json!({"f": f}), &rep);
        }
        None => {
            out.extend(text.bytes());
            eprintln!("{}", rep.to_json_line());
        }
    }
    Ok(rep.passed())
}

fn petrov(
    g: &Global,
    entry: Option<&str>,
    set: &[String],
    quartic: Option<&str>,
    expect: Option<&str>,
    out: &mut Out,
) -> Result<bool, CliError> {
    let tol = g.tol.unwrap_or(1e-6);
    let mut types = Vec::new();
    match (entry, quartic) {
        (Some(name), None) => {
            let e = resolve_entry(name, set)?;
            let frame = e
                .frame
                .as_ref()
                .ok_or_else(|| usage(format!("{} has no null tetrad", e.name)))?;
            for p in e.samples(g.samples.min(20), g.seed) {
                let q = petrov_classify(&e.metric, frame, &p)?;
                line(
                    out,
                    &json!({"entry": e.name, "point": p, "type": q.petrov_type.to_string(), "allRootsReal": q.all_roots_real, "vietaResidual": q.vieta_residual}),
                );
                types.push(q.petrov_type.to_string());
            }
        }
        (None, Some(q)) => {
            let v: Vec<f64> = q
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| usage(format!("bad quartic {q:?}: {e}")))?;
            let psi: [f64; 5] = v
                .try_into()
                .map_err(|_| usage("quartic needs five numbers ψ0..ψ4"))?;
            let w = classify_quartic(psi, tol)?;
            line(out, &w);
            types.push(w.petrov_type.to_string());
        }
        _ => return Err(usage("give exactly one of --entry and --quartic")),
    }
    Ok(match expect {
        Some(t) => types.iter().all(|x| x.eq_ignore_ascii_case(t)),
        None => true,
    })
}

fn topology(name: &str, radius: i64, as_json: bool, out: &mut Out) -> Result<bool, CliError> {
    let m = manifold(name)?;
    let atiyah = atiyah_check(m.euler, m.signature);
    let hh = hirzebruch_hopf_check(&m, radius)?;
    let ok = atiyah && hh.verdict == Admissibility::Admits;
    if as_json {
        line(
            out,
            &json!({"manifold": m.name, "euler": m.euler, "signature": m.signature, "atiyah": atiyah, "hirzebruchHopf": hh}),
        );
        return Ok(ok);
    }
    let mut t = String::new();
    t.push_str(&format!("manifold         {}\n", m.name));
    t.push_str(&format!("euler            {}\n", m.euler));
    t.push_str(&format!("signature        {}\n", m.signature));
    t.push_str(&format!(
        "form rank        {} ({})\n",
        m.rank(),
        if m.is_even() { "even" } else { "odd" }
    ));
    let at = atiyah_failure(m.euler, m.signature).unwrap_or("passes");
    t.push_str(&format!("atiyah           {at}\n"));
    for s in [&hh.plus, &hh.minus] {
        let detail = match (&s.witness, &s.certificate) {
            (Some(w), _) => format!("represented by {w:?}"),
            (None, Some(c)) => format!("not represented: {c}"),
            (None, None) => format!("no witness within radius {radius}"),
        };
        t.push_str(&format!("target {:>9}  {detail}\n", s.target));
    }
    let verdict = match hh.verdict {
        Admissibility::Admits => "admits",
        Admissibility::Rejects => "rejects",
        Admissibility::Inconclusive => "inconclusive",
    };
    t.push_str(&format!("hirzebruch-hopf  {verdict}\n"));
    out.extend(t.bytes());
    if let Some(f) = atiyah_failure(m.euler, m.signature) {
        eprintln!("{}: {f}", m.name);
    }
    Ok(ok)
}
