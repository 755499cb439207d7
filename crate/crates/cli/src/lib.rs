//! Command-line front end: spec-file loading, subcommand dispatch, and
//! deterministic text/JSON report rendering on top of `fbcp-core`.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use fbcp_core::circle::CirclePoint;
use fbcp_core::classify::{compare, dossier};
use fbcp_core::extent::{ExtRational, Extent};
use fbcp_core::freedim::{free_dimension, FactorDescriptor, Summand};
use fbcp_core::freeprob::{
    enumerate_nc, moments_from_cumulants, ov_moment, Diag, OVDistribution,
};
use fbcp_core::parse::{parse_spec, SpecFile};
use fbcp_core::presentation::{
    afp_presentation, ap_weighted_basis, cocycle_presentation, normalizer_summary,
};
use fbcp_core::rep::Representation;
use fbcp_core::words::rebase;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

pub const GRAMMAR: &str = "\
input grammar (.bog files, line oriented, `#` comments, `;` separates statements):
  symbol NAME
  rep NAME {
    atom ANGLE mult (INT | inf)
    wm left_regular [mult (INT | inf)] [flags mixing mildly_mixing]
    wm (singular_closed | atomless) [flags mixing mildly_mixing rigid]
  }
  ANGLE: 1 | -1 | P/Q in [0,1) turns | sym:NAME | sums such as 1/3+2*sym:NAME
";

#[derive(Parser, Debug)]
#[command(
    name = "fbcp",
    about = "Structural invariants of free Bogoljubov crossed products",
    disable_version_flag = true
)]
struct Cli {
    /// Emit a single JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap applied to infinite multiplicities where a finite working
    /// prefix is needed.
    #[arg(long, global = true, default_value_t = 64)]
    truncate: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FileRep {
    /// Path to a .bog spec file.
    file: String,
    /// Representation name inside the file.
    name: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full structural report on one representation.
    Classify(FileRep),
    /// Isomorphism verdict for two representations from one file.
    Compare {
        file: String,
        name1: String,
        name2: String,
    },
    /// Amalgamated free product presentation, commutant, cocycle and
    /// normalizer of an almost periodic representation.
    Present(FileRep),
    /// Free-dimension parameter of a direct-sum descriptor, e.g.
    /// "lfr(4/3)@1" or "mat(3)@1/2 + diffuse@1/2".
    Freedim { expr: String },
    /// Moment/cumulant tables of the (operator-valued) standard
    /// semicircular distribution.
    Cumulants {
        #[arg(long)]
        order: usize,
        /// Work over the diagonal algebra C^k instead of scalars.
        #[arg(long)]
        ov: Option<usize>,
    },
    /// Free basis change carrying one weighted basis to another.
    BasisChange {
        file: String,
        name1: String,
        name2: String,
    },
    /// Enumerate the non-crossing partitions of {1..n}.
    Nc {
        #[arg(long)]
        n: usize,
    },
}

enum Failure {
    /// Domain error: exit 1 with a diagnostic.
    Domain(String),
    /// Parse/usage error: exit 2 with the grammar excerpt.
    Parse(String),
}

type Out = Result<String, Failure>;

fn domain<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Domain(msg.into()))
}

fn load(path: &str) -> Result<SpecFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Domain(format!("cannot read `{path}`: {e}")))?;
    parse_spec(&text).map_err(|e| Failure::Parse(format!("{path}: {e}")))
}

fn find<'a>(file: &'a SpecFile, path: &str, name: &str) -> Result<&'a Representation, Failure> {
    file.get(name)
        .ok_or_else(|| Failure::Domain(format!("unknown representation `{name}` in `{path}`")))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

// --- freedim expression parser ---------------------------------------------

fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).ok()?;
            let q = BigInt::from_str(q.trim()).ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(BigInt::from_str(text).ok()?)),
    }
}

fn parse_freedim_expr(expr: &str) -> Result<FactorDescriptor, Failure> {
    let mut summands = Vec::new();
    for term in expr.split('+') {
        let term = term.trim();
        let Some((head, weight)) = term.rsplit_once('@') else {
            return Err(Failure::Parse(format!(
                "term `{term}` lacks a weight (expected HEAD@WEIGHT)"
            )));
        };
        let weight = parse_rational(weight)
            .ok_or_else(|| Failure::Parse(format!("bad weight in `{term}`")))?;
        let head = head.trim();
        if head == "diffuse" {
            summands.push(Summand::DiffuseHyperfinite { weight });
        } else if let Some(arg) = head.strip_prefix("lfr(").and_then(|s| s.strip_suffix(')')) {
            let r = if arg.trim() == "inf" {
                ExtRational::Infinite
            } else {
                ExtRational::Finite(
                    parse_rational(arg)
                        .ok_or_else(|| Failure::Parse(format!("bad parameter in `{term}`")))?,
                )
            };
            summands.push(Summand::Interpolated { r, weight });
        } else if let Some(arg) = head.strip_prefix("mat(").and_then(|s| s.strip_suffix(')')) {
            let n: u128 = arg
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| Failure::Parse(format!("bad matrix size in `{term}`")))?;
            // C^n diagonal reading: n unit blocks sharing the weight.
            let w = weight / BigRational::from_integer(n.into());
            for _ in 0..n {
                summands.push(Summand::MatrixBlock {
                    size: 1,
                    weight: w.clone(),
                });
            }
        } else {
            return Err(Failure::Parse(format!(
                "unknown summand `{head}` (expected lfr(R), mat(N) or diffuse)"
            )));
        }
    }
    Ok(FactorDescriptor::new(summands))
}

// --- subcommands ------------------------------------------------------------

fn cmd_classify(file: &str, name: &str, json: bool) -> Out {
    let spec = load(file)?;
    let rep = find(&spec, file, name)?;
    let d = dossier(rep);
    Ok(if json {
        pretty(&d.to_json())
    } else {
        d.render_text()
    })
}

fn cmd_compare(file: &str, name1: &str, name2: &str, json: bool) -> Out {
    let spec = load(file)?;
    let r1 = find(&spec, file, name1)?;
    let r2 = find(&spec, file, name2)?;
    let v = compare(r1, r2);
    if !v.reverify(r1, r2) {
        return domain("internal: certificate failed re-verification");
    }
    Ok(if json { pretty(&v.to_json()) } else { v.render_text() })
}

fn cmd_present(file: &str, name: &str, json: bool) -> Out {
    let spec = load(file)?;
    let rep = find(&spec, file, name)?;
    let p = afp_presentation(rep).map_err(|e| Failure::Domain(e.to_string()))?;
    let n = normalizer_summary(rep).map_err(|e| Failure::Domain(e.to_string()))?;
    let c = cocycle_presentation(rep).map_err(|e| Failure::Domain(e.to_string()))?;
    if json {
        return Ok(pretty(&json!({
            "name": rep.name(),
            "presentation": p.describe(),
            "passive_rank_m": p.m.to_string(),
            "acting_rank_n": p.n.to_string(),
            "counts": {
                "rotation_pairs": p.n1.to_string(),
                "half_turns": p.n2.to_string(),
                "trivial": p.m0.to_string(),
            },
            "acting_weights": p.acting_weights.iter()
                .map(|(w, m)| json!({ "angle": w.to_string(), "mult": m.to_string() }))
                .collect::<Vec<_>>(),
            "amalgam": p.amalgam,
            "commutant": {
                "rank": n.commutant.rank.to_string(),
                "kernel_rank": n.commutant.kernel_rank.to_string(),
                "description": n.commutant.description,
            },
            "normalizer": n.description,
            "cocycle": c.description,
        })));
    }
    let mut s = String::new();
    let _ = writeln!(s, "presentation of {}: {}", rep.name(), p.describe());
    let _ = writeln!(
        s,
        "  passive rank m = {} (rotation pairs {}, trivial {}), acting rank n = {}",
        p.m, p.n1, p.m0, p.n
    );
    for (w, m) in &p.acting_weights {
        let _ = writeln!(s, "  acting weight {w} (mult {m})");
    }
    let _ = writeln!(s, "  amalgam {}", p.amalgam);
    let _ = writeln!(
        s,
        "  commutant rank {} (kernel part {}): {}",
        n.commutant.rank, n.commutant.kernel_rank, n.commutant.description
    );
    let _ = writeln!(s, "  normalizer: {}", n.description);
    let _ = writeln!(s, "  cocycle: {}", c.description);
    Ok(s)
}

fn cmd_freedim(expr: &str, json: bool) -> Out {
    let desc = parse_freedim_expr(expr)?;
    let d = free_dimension(&desc).map_err(|e| Failure::Domain(e.to_string()))?;
    Ok(if json {
        pretty(&json!({ "expr": expr, "free_dimension": d.to_string() }))
    } else {
        format!("{d}\n")
    })
}

fn scalar_cumulant_table(order: usize) -> Result<Vec<(BigRational, BigRational)>, Failure> {
    // Standard semicircular: the only nonvanishing cumulant is the
    // quadratic one (index 1 in the n+1-slot indexing).
    let mut c = vec![BigRational::zero(); order.max(1)];
    c[0] = BigRational::one();
    let m = moments_from_cumulants(&c, order).map_err(|e| Failure::Domain(e.to_string()))?;
    Ok((1..=order)
        .map(|n| {
            let cum = if n == 1 {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            (m[n].clone(), cum)
        })
        .collect())
}

fn cmd_cumulants(order: usize, ov: Option<usize>, json: bool) -> Out {
    match ov {
        None => {
            let table = scalar_cumulant_table(order)?;
            if json {
                Ok(pretty(&json!({
                    "order": order,
                    "moments": table.iter().map(|(m, _)| m.to_string()).collect::<Vec<_>>(),
                    "cumulants": table.iter().map(|(_, c)| c.to_string()).collect::<Vec<_>>(),
                })))
            } else {
                let mut s = String::from("n  moment  cumulant\n");
                for (n, (m, c)) in table.iter().enumerate() {
                    let _ = writeln!(s, "{}  {m}  {c}", n + 1);
                }
                Ok(s)
            }
        }
        Some(k) => {
            if k == 0 {
                return domain("--ov dimension must be at least 1");
            }
            let dist = OVDistribution::standard(k);
            let ones: Diag = vec![BigRational::one(); k];
            let mut rows = Vec::new();
            for n in 1..=order {
                let args = vec![ones.clone(); n.saturating_sub(1)];
                let m = ov_moment(&dist, &args).map_err(|e| Failure::Domain(e.to_string()))?;
                rows.push((n, m));
            }
            if json {
                Ok(pretty(&json!({
                    "order": order,
                    "algebra_dim": k,
                    "moments": rows.iter().map(|(n, m)| json!({
                        "order": n,
                        "diagonal": m.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })))
            } else {
                let mut s = format!("operator-valued moments over C^{k}\n");
                for (n, m) in rows {
                    let entries: Vec<String> = m.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(s, "E(X^{n}) = diag({})", entries.join(", "));
                }
                Ok(s)
            }
        }
    }
}

/// Replaces infinite atom multiplicities by the truncation cap.
fn truncate_rep(rep: &Representation, cap: u128) -> Result<Representation, Failure> {
    if !rep.is_ap_only() {
        return domain(format!(
            "`{}` has a weakly mixing part; basis change needs an almost periodic representation",
            rep.name()
        ));
    }
    if cap == 0 {
        return domain("--truncate must be at least 1");
    }
    let atoms = rep
        .ap_atoms()
        .iter()
        .map(|(p, m)| {
            (
                p.clone(),
                match m {
                    Extent::Infinite => Extent::Finite(cap),
                    finite => *finite,
                },
            )
        })
        .collect();
    Representation::new(rep.name(), atoms, vec![], rep.symbols().clone())
        .map_err(|e| Failure::Domain(e.to_string()))
}

fn cmd_basis_change(file: &str, name1: &str, name2: &str, cap: u128, json: bool) -> Out {
    let spec = load(file)?;
    let r1 = truncate_rep(find(&spec, file, name1)?, cap)?;
    let r2 = truncate_rep(find(&spec, file, name2)?, cap)?;
    let source = ap_weighted_basis(&r1).expect("truncated ap representation has a finite basis");
    let target = ap_weighted_basis(&r2).expect("truncated ap representation has a finite basis");
    let target_weights: Vec<CirclePoint> = target.weights().to_vec();
    let (auto, rebased) =
        rebase(&source, &target_weights).map_err(|e| Failure::Domain(e.to_string()))?;
    if json {
        return Ok(pretty(&json!({
            "source": source.names().iter().zip(source.weights())
                .map(|(n, w)| json!({ "name": n, "weight": w.to_string() }))
                .collect::<Vec<_>>(),
            "target_weights": target_weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "forward": auto.forward().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "backward": auto.backward().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "rebased_weights": rebased.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "valid": auto.is_valid(),
        })));
    }
    let mut s = String::new();
    let _ = writeln!(s, "basis change {} -> {}", name1, name2);
    for i in 0..source.len() {
        let _ = writeln!(
            s,
            "  {} (weight {}) -> {} (weight {})",
            source.names()[i],
            source.weights()[i],
            auto.forward()[i],
            rebased.weights()[i],
        );
    }
    let _ = writeln!(
        s,
        "  automorphism valid: {}",
        if auto.is_valid() { "yes" } else { "no" }
    );
    Ok(s)
}

fn cmd_nc(n: usize, json: bool) -> Out {
    let parts = enumerate_nc(n).map_err(|e| Failure::Domain(e.to_string()))?;
    if json {
        Ok(pretty(&json!({
            "n": n,
            "count": parts.len(),
            "partitions": parts.iter().map(|p| {
                p.blocks.iter()
                    .map(|b| b.iter().map(|i| i + 1).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })))
    } else {
        let mut s = format!("{} non-crossing partitions of {{1..{n}}}\n", parts.len());
        for p in &parts {
            let _ = writeln!(s, "  {p}");
        }
        Ok(s)
    }
}

/// Runs the tool on an argument vector (excluding the binary name is fine;
/// it is tolerated either way). Returns the process exit code.
pub fn run<W: Write, E: Write>(argv: &[String], out: &mut W, err: &mut E) -> i32 {
    let mut full: Vec<String> = Vec::new();
    if argv.first().map(String::as_str) != Some("fbcp") {
        full.push("fbcp".to_string());
    }
    full.extend(argv.iter().cloned());
    let cli = match Cli::try_parse_from(&full) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    let _ = write!(err, "\n{GRAMMAR}");
                    2
                }
            };
        }
    };
    let json = cli.json;
    let result = match &cli.command {
        Command::Classify(fr) => cmd_classify(&fr.file, &fr.name, json),
        Command::Compare { file, name1, name2 } => cmd_compare(file, name1, name2, json),
        Command::Present(fr) => cmd_present(&fr.file, &fr.name, json),
        Command::Freedim { expr } => cmd_freedim(expr, json),
        Command::Cumulants { order, ov } => cmd_cumulants(*order, *ov, json),
        Command::BasisChange { file, name1, name2 } => {
            cmd_basis_change(file, name1, name2, cli.truncate, json)
        }
        Command::Nc { n } => cmd_nc(*n, json),
    };
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Parse(msg)) => {
            let _ = writeln!(err, "parse error: {msg}");
            let _ = write!(err, "{GRAMMAR}");
            2
        }
    }
}

/// Convenience wrapper used by tests: run with string arguments, capture
/// stdout/stderr and the exit code.
pub fn run_capture(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let code = run(&argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf-8 output"),
        String::from_utf8(err).expect("utf-8 output"),
    )
}
