mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

/// Numerical checks of neutral-signature anti-self-dual geometry.
#[derive(Parser, Debug)]
#[command(name = "asdgeo", version, args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Run file of `key = value` lines; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report stream here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Override the default tolerance of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct EntryArgs {
    /// Registered entry or family name.
    #[arg(long)]
    pub entry: String,
    /// Potential override NAME=EXPR; `--NAME EXPR` is accepted as shorthand.
    #[arg(long = "set", value_name = "NAME=EXPR")]
    pub set: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Governing equations and expected verdicts of an entry.
    Verify(EntryArgs),
    /// Lax-pair integrability next to the ASD residual.
    Lax(EntryArgs),
    /// Reduce along the entry's non-null symmetry to an Einstein-Weyl space.
    Reduce {
        #[command(flatten)]
        entry: EntryArgs,
        /// Value of the symmetry coordinate on the transversal slice.
        #[arg(long)]
        slice: Option<f64>,
    },
    /// Lift Einstein-Weyl data with a monopole to a 4-metric and check it.
    Lift {
        /// toda or dkp.
        #[arg(long, default_value = "toda")]
        preset: String,
    },
    /// Finite-difference solve of the linear monopole equation.
    SolveMonopole {
        /// dkp or toda.
        #[arg(long, default_value = "dkp")]
        background: String,
        /// Background solution u(x, y, t).
        #[arg(long)]
        u: Option<String>,
        /// Exact potential used as boundary data and for the error.
        #[arg(long)]
        exact: Option<String>,
        #[arg(long, default_value_t = 17)]
        n: usize,
        /// Box corners "x,y,t".
        #[arg(long)]
        lo: Option<String>,
        #[arg(long)]
        hi: Option<String>,
        /// Write the grid potential as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Line-integral transform and its wave-equation residual, as CSV.
    Xray {
        /// Named integrand (gaussian, gaussian-offset, zero) or f(x, y, z).
        #[arg(long, default_value = "gaussian")]
        f: String,
        /// Decay radius for an expression integrand.
        #[arg(long, default_value_t = 8.0)]
        radius: f64,
        /// Tail bound for an expression integrand.
        #[arg(long, default_value_t = 0.0)]
        tail: f64,
        /// CSV of lines x,y,w,z (header optional).
        #[arg(long)]
        lines: Option<PathBuf>,
        /// Random lines when no file is given.
        #[arg(long, default_value_t = 20)]
        random: usize,
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
        /// Write the CSV here; the summary then goes to standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Petrov type of the Weyl quartic.
    Petrov {
        /// Entry to classify at sample points.
        #[arg(long)]
        entry: Option<String>,
        #[arg(long = "set", value_name = "NAME=EXPR")]
        set: Vec<String>,
        /// Explicit ψ0..ψ4, comma separated.
        #[arg(long)]
        quartic: Option<String>,
        /// Exit 1 unless every point has this type.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Admissibility of neutral metrics on a compact 4-manifold.
    Topology {
        #[arg(long)]
        manifold: String,
        #[arg(long, default_value_t = 4)]
        radius: i64,
        /// JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// The metric registry.
    Zoo {
        #[command(subcommand)]
        action: ZooCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZooCmd {
    List,
    /// Evaluate one entry, or every entry without --entry.
    Eval {
        #[arg(long)]
        entry: Option<String>,
    },
}

/// Argv range `start..end` holding the subcommand path.
fn subcommand_span(args: &[String]) -> Option<(usize, usize)> {
    let cmd = Cli::command();
    let mut i = 1;
    // skip global options before the subcommand
    while i < args.len() && args[i].starts_with("--") {
        i += if args[i].contains('=') { 1 } else { 2 };
    }
    let sub = cmd.find_subcommand(args.get(i)?)?;
    if sub.has_subcommands() {
        sub.find_subcommand(args.get(i + 1)?)?;
        Some((i, i + 2))
    } else {
        Some((i, i + 1))
    }
}

fn long_names(path: &[String]) -> Vec<String> {
    let mut cmd = Cli::command();
    cmd.build();
    let mut names: Vec<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let mut cur = &cmd;
    for p in path {
        let Some(s) = cur.find_subcommand(p) else {
            break;
        };
        names.extend(
            s.get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string)),
        );
        cur = s;
    }
    names.extend(["help".into(), "version".into()]);
    names
}

/// Splices config entries in after the subcommand and rewrites unknown
/// `--NAME VALUE` pairs on entry commands to `--set NAME=VALUE`.
fn preprocess(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut args = args;
    // --config is global; read it first
    let cfg_path = args.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            args.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_string)
        }
    });
    let cfg = match cfg_path {
        Some(p) => config::load(std::path::Path::new(&p)).map_err(|e| e.to_string())?,
        None => Vec::new(),
    };
    let mut span = subcommand_span(&args);
    if span.is_none() {
        if let Some((_, c)) = cfg.iter().find(|(k, _)| k == "command") {
            let mut words: Vec<String> = c.split_whitespace().map(str::to_string).collect();
            let n = words.len();
            words.extend(args.drain(1..));
            args.truncate(1);
            args.extend(words);
            span = Some((1, 1 + n));
        }
    }
    let Some((start, depth)) = span else {
        return Ok(args);
    };
    let mut injected = Vec::new();
    for (k, v) in cfg.iter().filter(|(k, _)| k != "command") {
        injected.push(format!("--{k}"));
        injected.push(v.clone());
    }
    let mut rest: Vec<String> = injected;
    rest.extend(args.drain(depth..));
    let path = args[start..depth].to_vec();
    let known = long_names(&path);
    let takes_set = matches!(
        path.first().map(String::as_str),
        Some("verify" | "lax" | "reduce" | "petrov")
    );
    let mut out = args;
    let mut i = 0;
    while i < rest.len() {
        let a = &rest[i];
        if let (true, Some(name)) = (takes_set, a.strip_prefix("--")) {
            let (name, inline) = match name.split_once('=') {
                Some((n, v)) => (n, Some(v.to_string())),
                None => (name, None),
            };
            if !known.iter().any(|k| k == name) {
                let value = match inline {
                    Some(v) => v,
                    None => {
                        i += 1;
                        rest.get(i)
                            .cloned()
                            .ok_or_else(|| format!("--{name} needs a value"))?
                    }
                };
                out.push("--set".into());
                out.push(format!("{name}={value}"));
                i += 1;
                continue;
            }
        }
        out.push(a.clone());
        i += 1;
    }
    Ok(out)
}

fn main() -> ExitCode {
    let args = match preprocess(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let mut buf = Vec::new();
    let code = match commands::run(&cli, &mut buf) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    let written = match &cli.global.out {
        Some(p) => std::fs::write(p, &buf),
        None => std::io::stdout().write_all(&buf),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn potential_flags_become_sets() {
        let a = preprocess(s(&[
            "asdgeo",
            "verify",
            "--entry",
            "ppwave",
            "--Q",
            "x^2",
            "--samples",
            "5",
        ]))
        .unwrap();
        assert_eq!(
            a,
            s(&[
                "asdgeo",
                "verify",
                "--entry",
                "ppwave",
                "--set",
                "Q=x^2",
                "--samples",
                "5"
            ])
        );
        let cli = Cli::parse_from(a);
        assert_eq!(cli.global.samples, 5);
    }

    #[test]
    fn other_commands_keep_their_flags() {
        let a = preprocess(s(&["asdgeo", "topology", "--manifold", "K3"])).unwrap();
        assert_eq!(a, s(&["asdgeo", "topology", "--manifold", "K3"]));
        assert_eq!(
            subcommand_span(&s(&["asdgeo", "zoo", "list"])),
            Some((1, 3))
        );
        assert_eq!(
            subcommand_span(&s(&["asdgeo", "--seed", "3", "lax"])),
            Some((3, 4))
        );
    }
}
