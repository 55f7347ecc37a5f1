//! `nott`: towers, groups, annihilators and automata from the command line.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use nottingham::christol::{self, SynthesisReport};
use nottingham::dfao::{self, Dfao, Equivalence};
use nottingham::fixtures::{self, TABLES};
use nottingham::minpoly::{guess_annihilator, is_nonsingular, verify_annihilator};
use nottingham::ramification::{close_group, Convention};
use nottingham::towers::{self, build_tower, TowerSpec};
use nottingham::{BivarPoly, FieldCtx, DEFAULT_PRECISION};

/// Print a line; a closed pipe ends the program quietly.
macro_rules! emit {
    ($($t:tt)*) => {
        write_line(&format!($($t)*))
    };
}

fn write_line(s: &str) {
    use std::io::Write;
    if let Err(e) = writeln!(std::io::stdout().lock(), "{s}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

#[derive(Parser)]
#[command(name = "nott", version, about = "Order-8 subgroups of the Nottingham group over GF(4)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct TowerArgs {
    /// q8 or d4
    #[arg(long)]
    family: String,
    /// 0 or s for q8; 1, s or s2 for d4
    #[arg(long)]
    param: String,
    /// Series precision (default: $NOTT_PRECISION or 4096)
    #[arg(short = 'N', long = "precision")]
    precision: Option<i64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Series of every Galois element of a tower, as JSON.
    Tower(TowerArgs),
    /// Group table, order profile, isomorphism type, depths and breaks.
    Group {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long)]
        json: bool,
    },
    /// Recover the annihilating polynomial of one element.
    Minpoly {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long)]
        element: String,
        #[arg(long, default_value_t = 3)]
        dx: u32,
        #[arg(long, default_value_t = 3)]
        dt: u32,
    },
    /// Automaton of the root of a nonsingular polynomial.
    Synth {
        /// Polynomial text, or a file containing it
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = christol::DEFAULT_VERIFY)]
        verify: usize,
    },
    /// Automaton of one element from its coefficients alone.
    SynthOracle {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long)]
        element: String,
        /// Known terms of the series (default 2^20)
        #[arg(long, default_value_t = christol::DEFAULT_ORACLE_N)]
        terms: u64,
        #[arg(long, default_value_t = christol::DEFAULT_PROBE_LEN)]
        probe_len: usize,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
    },
    /// Label of the automaton at index n.
    Eval {
        #[arg(long)]
        automaton: String,
        #[arg(long)]
        n: String,
    },
    /// Sequence equivalence of two automata; exits 1 if they differ.
    Compare {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Checks on the printed tables and polynomials.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Graphviz rendering of an automaton.
    ExportDot {
        #[arg(long)]
        automaton: String,
        #[arg(long)]
        omit_self_loops: bool,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    /// Parse, validate, synthesize and compare every fixture.
    Verify {
        /// Read the tables from this directory instead of the embedded copies
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

/// Bad flag values; exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn default_precision() -> anyhow::Result<i64> {
    match std::env::var("NOTT_PRECISION") {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("NOTT_PRECISION must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

fn spec_of(a: &TowerArgs) -> anyhow::Result<TowerSpec> {
    let n = match a.precision {
        Some(n) => n,
        None => default_precision()?,
    };
    if n < 16 {
        return Err(usage(format!("precision {n} is too small (minimum 16)")));
    }
    TowerSpec::parse(&a.family, &a.param, n).map_err(|e| usage(e.to_string()))
}

/// `fixture:KEY`, a JSON file, or a table file (`--label` style suffix
/// `path#KEY` picks a column; the first column otherwise).
fn load_automaton(src: &str) -> anyhow::Result<Dfao> {
    if let Some(key) = src.strip_prefix("fixture:") {
        return Ok(fixtures::automaton(key)?.automaton);
    }
    let (path, label) = match src.rsplit_once('#') {
        Some((p, l)) => (p, Some(l)),
        None => (src, None),
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    if text.trim_start().starts_with('{') {
        return Dfao::parse_json(&text).with_context(|| format!("parsing {path}"));
    }
    let autos = dfao::parse_tsv(&text).with_context(|| format!("parsing {path}"))?;
    match label {
        None => Ok(autos.into_iter().next().expect("at least one label column").1),
        Some(l) => autos
            .into_iter()
            .find(|(k, _)| k == l)
            .map(|(_, a)| a)
            .ok_or_else(|| anyhow!("{path} has no label column `{l}`")),
    }
}

fn load_poly(src: &str) -> anyhow::Result<BivarPoly> {
    let text = if Path::new(src).is_file() {
        std::fs::read_to_string(src).with_context(|| format!("reading {src}"))?
    } else {
        src.to_string()
    };
    let body: String = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join(" ");
    let body = body.split_once(':').map_or(body.as_str(), |(_, p)| p);
    BivarPoly::parse(&FieldCtx::gf4(), body).map_err(|e| usage(format!("polynomial: {e}")))
}

fn print_report(r: &SynthesisReport) {
    emit!("{}", r.to_json_pretty());
}

fn cmd_tower(a: &TowerArgs) -> anyhow::Result<()> {
    let spec = spec_of(a)?;
    let tw = build_tower(&spec)?;
    let mut series = serde_json::Map::new();
    for e in &tw.elements {
        series.insert(e.name.clone(), serde_json::to_value(e.series.series().to_json())?);
    }
    let out = serde_json::json!({
        "tower": spec.key(),
        "precision": spec.precision,
        "z": tw.z.to_json(),
        "pi_k": tw.pi_k.to_json(),
        "series": series,
    });
    emit!("{}", serde_json::to_string(&out)?);
    Ok(())
}

fn cmd_group(a: &TowerArgs, json: bool) -> anyhow::Result<()> {
    let spec = spec_of(a)?;
    let tw = build_tower(&spec)?;
    let gens: Vec<_> = tw.generators().into_iter().take(2).collect();
    let g = close_group(&gens, 64, Convention::Anti)?;
    let ram = g.ramification()?;
    let iso = g.iso_type()?;
    // Tower names for the words of the closure.
    let names: Vec<String> = g
        .elements
        .iter()
        .map(|e| tw.elements.iter().find(|x| x.series == e.series).map_or(e.word.clone(), |x| x.name.clone()))
        .collect();
    let lower: Vec<String> = ram.lower_breaks.iter().map(u64::to_string).collect();
    let upper = ram.upper_strings();
    if json {
        let out = serde_json::json!({
            "tower": spec.key(),
            "precision": spec.precision,
            "iso_type": iso.to_string(),
            "elements": names,
            "table": g.table,
            "order_profile": g.order_profile(),
            "depths": names.iter().zip(&ram.depth_of).map(|(n, (_, d))| (n.clone(), d.to_string())).collect::<Vec<_>>(),
            "lower_breaks": ram.lower_breaks,
            "upper_breaks": upper,
        });
        emit!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    let mut s = String::new();
    writeln!(s, "tower {} (N = {})", spec.key(), spec.precision)?;
    writeln!(s, "iso type: {iso}")?;
    let profile: Vec<String> = g.order_profile().iter().map(|(o, c)| format!("{o}:{c}")).collect();
    writeln!(s, "order profile: {}", profile.join(" "))?;
    let w = names.iter().map(String::len).max().unwrap_or(2) + 1;
    write!(s, "{:w$}|", "")?;
    for n in &names {
        write!(s, " {n:w$}")?;
    }
    writeln!(s)?;
    for (i, row) in g.table.iter().enumerate() {
        write!(s, "{:w$}|", names[i])?;
        for &k in row {
            write!(s, " {:w$}", names[k])?;
        }
        writeln!(s)?;
    }
    let depths: Vec<String> = names.iter().zip(&ram.depth_of).skip(1).map(|(n, (_, d))| format!("{n}={d}")).collect();
    writeln!(s, "depths: {}", depths.join(" "))?;
    writeln!(s, "lower: {}; upper: {}", lower.join(","), upper.join(","))?;
    emit!("{}", s.trim_end());
    Ok(())
}

fn cmd_minpoly(a: &TowerArgs, element: &str, dx: u32, dt: u32) -> anyhow::Result<()> {
    let spec = spec_of(a)?;
    let tw = build_tower(&spec)?;
    let e = tw.element(element).map_err(|e| usage(e.to_string()))?;
    let s = e.series.series();
    let f = guess_annihilator(s, dx, dt, spec.precision as usize)?;
    let v = verify_annihilator(&f, s)?;
    emit!("{f}");
    emit!("residual: f(t, {}(t)) = O(t^{v}); {}", e.name, if is_nonsingular(&f) { "nonsingular" } else { "singular" });
    Ok(())
}

fn cmd_synth_oracle(
    a: &TowerArgs,
    element: &str,
    terms: u64,
    probe_len: usize,
    max_states: usize,
) -> anyhow::Result<()> {
    let spec = spec_of(a)?;
    towers::element_rational_form(&spec, element).map_err(|e| usage(e.to_string()))?;
    let s = towers::element_series(&spec, element, terms as i64)?;
    let r = christol::oracle_kernel_automaton(&s, terms, max_states, probe_len)?;
    print_report(&r);
    Ok(())
}

fn cmd_eval(src: &str, n: &str) -> anyhow::Result<()> {
    let a = load_automaton(src)?;
    let n: num_bigint::BigUint =
        n.trim().parse().map_err(|_| usage(format!("--n must be a nonnegative integer, got `{n}`")))?;
    emit!("{}", a.ctx().token(a.eval_big(&n)));
    Ok(())
}

fn cmd_compare(a: &str, b: &str) -> anyhow::Result<bool> {
    let (a, b) = (load_automaton(a)?, load_automaton(b)?);
    match a.equivalent(&b)? {
        Equivalence::Equivalent => {
            emit!("equivalent");
            Ok(true)
        }
        Equivalence::Differ(w) => {
            emit!("differ at n = {w}: {} vs {}", a.ctx().token(a.eval_big(&w)), b.ctx().token(b.eval_big(&w)));
            Ok(false)
        }
    }
}

fn cmd_fixtures_verify(dir: Option<&Path>) -> anyhow::Result<bool> {
    let n = default_precision()?;
    let polys = match dir {
        Some(d) => fixtures::polynomials_from_dir(d),
        None => fixtures::polynomials(),
    };
    let mut ok = true;
    let mut rows: Vec<[String; 5]> = Vec::new();
    let polys = match polys {
        Ok(p) => p,
        Err(e) => {
            rows.push(["polynomials.txt".into(), "-".into(), "-".into(), "-".into(), format!("FAIL: {e}")]);
            ok = false;
            Vec::new()
        }
    };
    let mut towers_by_key = std::collections::BTreeMap::new();
    for spec in TowerSpec::all(n) {
        towers_by_key.insert(spec.key(), build_tower(&spec)?);
    }
    for (key, printed) in &polys {
        let status = (|| -> anyhow::Result<String> {
            let (tk, el) = key.split_once('.').ok_or_else(|| anyhow!("bad key"))?;
            let tw = towers_by_key.get(tk).ok_or_else(|| anyhow!("unknown tower {tk}"))?;
            let g = guess_annihilator(tw.element(el)?.series.series(), 3, 3, n as usize)?;
            if g.eq_up_to_scalar(printed) {
                Ok("ok".into())
            } else {
                bail!("tower series gives {g}")
            }
        })();
        let status = status.unwrap_or_else(|e| {
            ok = false;
            format!("FAIL: {e}")
        });
        rows.push([format!("poly {key}"), "-".into(), "-".into(), "-".into(), status]);
    }
    for (file, embedded, expected) in TABLES {
        let text = match dir {
            Some(d) => match std::fs::read_to_string(d.join(file)) {
                Ok(t) => t,
                Err(e) => {
                    ok = false;
                    rows.push([file.into(), "-".into(), "-".into(), "-".into(), format!("FAIL: {e}")]);
                    continue;
                }
            },
            None => embedded.to_string(),
        };
        let autos = match dfao::parse_tsv(&text) {
            Ok(a) => a,
            Err(e) => {
                ok = false;
                rows.push([file.into(), "-".into(), "-".into(), "-".into(), format!("FAIL: {e}")]);
                continue;
            }
        };
        for (key, a) in autos {
            let status = (|| -> anyhow::Result<(String, String)> {
                if a.num_states() != expected {
                    bail!("{} states, expected {expected}", a.num_states());
                }
                let f = &polys.iter().find(|(k, _)| *k == key).ok_or_else(|| anyhow!("no polynomial for {key}"))?.1;
                let r = christol::poly_to_automaton(f, n as usize)?;
                let synth = r.minimized_state_count.to_string();
                match r.automaton.equivalent(&a)? {
                    Equivalence::Equivalent => Ok((synth, "equivalent".into())),
                    Equivalence::Differ(w) => bail!("differs from synthesized automaton at n = {w}"),
                }
            })();
            match status {
                Ok((synth, eq)) => {
                    rows.push([format!("{file} {key}"), a.num_states().to_string(), synth, eq, "ok".into()])
                }
                Err(e) => {
                    ok = false;
                    rows.push([
                        format!("{file} {key}"),
                        a.num_states().to_string(),
                        "-".into(),
                        "-".into(),
                        format!("FAIL: {e}"),
                    ]);
                }
            }
        }
    }
    let header = ["fixture", "states", "synth", "compare", "status"];
    let widths: Vec<usize> =
        (0..5).map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0)).collect();
    let line = |r: &[&str]| {
        r.iter().zip(&widths).map(|(c, w)| format!("{c:w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    emit!("{}", line(&header));
    for r in &rows {
        emit!("{}", line(&r.iter().map(String::as_str).collect::<Vec<_>>()));
    }
    emit!("{}", if ok { "all fixtures verified" } else { "fixture verification FAILED" });
    Ok(ok)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Tower(a) => cmd_tower(&a).map(|_| true),
        Cmd::Group { tower, json } => cmd_group(&tower, json).map(|_| true),
        Cmd::Minpoly { tower, element, dx, dt } => cmd_minpoly(&tower, &element, dx, dt).map(|_| true),
        Cmd::Synth { poly, verify } => {
            let f = load_poly(&poly)?;
            if !is_nonsingular(&f) {
                return Err(usage("polynomial is singular at the origin; use synth-oracle"));
            }
            print_report(&christol::poly_to_automaton(&f, verify)?);
            Ok(true)
        }
        Cmd::SynthOracle { tower, element, terms, probe_len, max_states } => {
            cmd_synth_oracle(&tower, &element, terms, probe_len, max_states).map(|_| true)
        }
        Cmd::Eval { automaton, n } => cmd_eval(&automaton, &n).map(|_| true),
        Cmd::Compare { a, b } => cmd_compare(&a, &b),
        Cmd::Fixtures { action: FixtureAction::Verify { dir } } => cmd_fixtures_verify(dir.as_deref()),
        Cmd::ExportDot { automaton, omit_self_loops } => {
            emit!("{}", load_automaton(&automaton)?.to_dot(omit_self_loops).trim_end());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
