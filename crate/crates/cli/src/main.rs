use std::io::Write;
use std::process::ExitCode;

use chainfill_core::closed_fill::evaluate_closed;
use chainfill_core::diophantine::{bilinear_holds, brute_force, quad_holds, solve_bilinear, solve_linear, solve_quad};
use chainfill_core::enumerate::{distinctness, search_triples, verify_family, Pattern, RowStatus};
use chainfill_core::homology::{form_order, h1_order};
use chainfill_core::instructions::{
    factors_to_m3, m3_to_n, m4_reductions, orbit_with_budget, ChainLink, FillingInstruction, ORBIT_BUDGET,
};
use chainfill_core::magic_rules::{base_family, is_parametric, FAMILIES};
use chainfill_core::seifert::{classify, normalize_closed, parse_raw, ClosedManifoldForm};
use chainfill_core::slopes::Slope;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "chainfill", version, about = "Exact Dehn fillings of chain-link exteriors")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct InstructionArgs {
    /// M5, M4, M3, N or F
    #[arg(long)]
    link: String,
    /// Comma-separated slopes `p/q`, `p` or `inf`; `_` leaves a slot empty
    #[arg(long, allow_hyphen_values = true)]
    slots: String,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed filling
    Fill {
        #[command(flatten)]
        inst: InstructionArgs,
        /// Slope for the last slot when `--slots` leaves it out
        #[arg(long, allow_hyphen_values = true)]
        last: Option<String>,
    },
    /// Normalize and classify a closed manifold given as notation or JSON
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
    },
    /// Orbit of an instruction under the symmetry generators
    Orbit {
        #[command(flatten)]
        inst: InstructionArgs,
        #[arg(long, default_value_t = ORBIT_BUDGET)]
        budget: usize,
    },
    /// Reduce an instruction down the chain M5 → M4 → M3 → N
    Reduce {
        #[command(flatten)]
        inst: InstructionArgs,
    },
    /// Order of the first homology of a closed filling (0 when infinite)
    H1 {
        #[command(flatten)]
        inst: InstructionArgs,
    },
    /// Solve one of the Diophantine equations
    Solve {
        /// `α,β` for `αs − n = βns`
        #[arg(long, allow_hyphen_values = true, group = "equation")]
        bilinear: Option<String>,
        /// `a,b,c` for `at + bu = c`
        #[arg(long, allow_hyphen_values = true, group = "equation")]
        linear: Option<String>,
        /// `n(1 − 4m − nm) = m ± 1`
        #[arg(long, group = "equation")]
        quad: bool,
        /// Also scan `|x|, |y| ≤ BOUND` and compare
        #[arg(long)]
        brute_force: Option<i64>,
        /// Include the completeness certificate
        #[arg(long)]
        certificate: bool,
    },
    /// Check the family tables against the evaluators and the H1 oracle
    VerifyTables {
        #[arg(long)]
        family: Option<String>,
        /// `lo..hi`, inclusive
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Bounded search for exceptional triples on N(a, b)
    Search {
        /// lens-lens, lens-toroidal or lens-seifert
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        height: i64,
        /// Required distance between the second and third slopes, or `any`
        #[arg(long)]
        distance: Option<String>,
        /// Write the full report here
        #[arg(long)]
        json: Option<std::path::PathBuf>,
    },
}

/// Exit statuses: success or clean no-result, verification mismatch, usage error.
const OK: u8 = 0;
const MISMATCH: u8 = 1;
const USAGE: u8 = 2;

type Outcome = Result<(Value, u8), String>;

fn link(text: &str) -> Result<ChainLink, String> {
    text.parse::<ChainLink>().map_err(|e| e.to_string())
}

fn instruction(args: &InstructionArgs) -> Result<FillingInstruction, String> {
    FillingInstruction::parse(link(&args.link)?, &args.slots).map_err(|e| e.to_string())
}

fn slope(text: &str) -> Result<Slope, String> {
    text.trim().parse::<Slope>().map_err(|e| e.to_string())
}

fn ints(text: &str, n: usize) -> Result<Vec<i64>, String> {
    let v: Vec<i64> = text
        .split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated integers, got {:?}", text));
    }
    Ok(v)
}

fn range(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| format!("range {text:?} is not of the form lo..hi"))?;
    let lo = lo.trim().parse::<i64>().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi = hi.trim().parse::<i64>().map_err(|e| format!("{hi:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {text:?}"));
    }
    Ok((lo, hi))
}

fn form_summary(form: &ClosedManifoldForm) -> Value {
    json!({ "form": form, "type": classify(form), "h1": form_order(form) })
}

fn fill(inst: &InstructionArgs, last: Option<&str>) -> Outcome {
    let mut f = instruction(inst)?;
    if let Some(l) = last {
        let s = slope(l)?;
        if f.slots.len() + 1 == f.link.arity() {
            f.slots.push(Some(s));
        } else if f.slots.len() == f.link.arity() && f.slots.last() == Some(&None) {
            *f.slots.last_mut().expect("nonempty") = Some(s);
        } else {
            return Err(format!("--last needs {} slots with the last one missing", f.link.arity()));
        }
    }
    if !f.is_full() {
        return Err(format!("{f} is not a closed filling"));
    }
    let h1 = h1_order(&f).map_err(|e| e.to_string())?;
    match evaluate_closed(&f) {
        Ok(e) => Ok((json!({ "form": e.form, "type": classify(&e.form), "h1": h1 }), OK)),
        Err(e) => Ok((json!({ "form": null, "type": null, "h1": h1, "reason": e.to_string() }), OK)),
    }
}

fn classify_cmd(text: &str) -> Outcome {
    let form = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let f = ClosedManifoldForm::from_json(&v).map_err(|e| e.to_string())?;
        chainfill_core::seifert::to_raw(&f).map(|r| normalize_closed(&r)).unwrap_or(f)
    } else {
        normalize_closed(&parse_raw(text).map_err(|e| e.to_string())?)
    };
    let mut out = form_summary(&form);
    out["annotations"] = json!(form.annotations());
    Ok((out, OK))
}

fn orbit_cmd(inst: &InstructionArgs, budget: usize) -> Outcome {
    let f = instruction(inst)?;
    let members = orbit_with_budget(&f, budget).map_err(|e| e.to_string())?;
    let mut out = json!({
        "instruction": f.to_string(),
        "size": members.len(),
        "orbit": members.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
    });
    if f.is_full() {
        let own = h1_order(&f).ok();
        out["h1"] = json!(own);
        out["h1_constant"] = json!(members.iter().all(|g| h1_order(g).ok() == own));
    }
    Ok((out, OK))
}

fn reduce_cmd(inst: &InstructionArgs) -> Outcome {
    let mut f = instruction(inst)?;
    let mut chain = vec![f.to_string()];
    let err = |e: chainfill_core::instructions::InstructionError| e.to_string();
    loop {
        let next = match f.link {
            ChainLink::M5 => m4_reductions(&f).map_err(err)?.into_iter().next(),
            ChainLink::M4 => factors_to_m3(&f).map_err(err)?,
            ChainLink::M3 => Some(m3_to_n(&f)),
            ChainLink::N | ChainLink::F => None,
        };
        match next {
            Some(g) => {
                chain.push(g.to_string());
                f = g;
            }
            None => break,
        }
    }
    Ok((json!({ "chain": chain, "reached": f.link }), OK))
}

fn h1_cmd(inst: &InstructionArgs) -> Outcome {
    let f = instruction(inst)?;
    let h1 = h1_order(&f).map_err(|e| e.to_string())?;
    Ok((json!({ "h1": h1 }), OK))
}

fn pairs(v: &[(i64, i64)]) -> Value {
    json!(v.iter().map(|(x, y)| [*x, *y]).collect::<Vec<_>>())
}

fn solve_cmd(
    bilinear: Option<&str>,
    linear: Option<&str>,
    quad: bool,
    bound: Option<i64>,
    certificate: bool,
) -> Outcome {
    if let Some(text) = linear {
        let v = ints(text, 3)?;
        let sol = solve_linear(v[0], v[1], v[2]).map_err(|e| e.to_string())?;
        return Ok((serde_json::to_value(sol).map_err(|e| e.to_string())?, OK));
    }
    let (set, holds): (_, Box<dyn Fn(i64, i64) -> bool + Sync>) = if let Some(text) = bilinear {
        let v = ints(text, 2)?;
        let (a, b) = (v[0], v[1]);
        (solve_bilinear(a, b).map_err(|e| e.to_string())?, Box::new(move |n, s| bilinear_holds(a, b, n, s)))
    } else if quad {
        (solve_quad(), Box::new(quad_holds))
    } else {
        return Err("one of --bilinear, --linear or --quad is required".to_string());
    };
    let mut out = json!({ "solutions": pairs(&set.solutions) });
    if certificate {
        out["equation"] = json!(set.equation);
        out["certificate"] = serde_json::to_value(&set.certificate).map_err(|e| e.to_string())?;
    }
    let mut code = OK;
    if let Some(b) = bound {
        let scan = brute_force(holds, b).map_err(|e| e.to_string())?;
        let agrees = scan == set.solutions;
        out["brute_force"] = json!({ "bound": b, "solutions": pairs(&scan), "agrees": agrees });
        if !agrees {
            code = MISMATCH;
        }
    }
    Ok((out, code))
}

fn verify_cmd(family: Option<&str>, range_text: Option<&str>, all: bool) -> Outcome {
    let ids: Vec<String> = match (family, all) {
        (Some(id), false) => vec![id.to_string()],
        (None, true) => FAMILIES.iter().map(|s| s.to_string()).collect(),
        _ => return Err("give exactly one of --family or --all".to_string()),
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for id in &ids {
        let base = base_family(id).map_err(|e| e.to_string())?;
        let (lo, hi) = match range_text {
            Some(t) => range(t)?,
            None if !is_parametric(base) => (0, 0),
            None => (base.min.unwrap_or(-10).max(-10), 10),
        };
        let r = verify_family(id, lo, hi).map_err(|e| e.to_string())?;
        if r.rows.is_empty() {
            return Err(r.errors.join("; "));
        }
        ok &= r.all_match();
        reports.push(json!({
            "family": r.family,
            "range": [r.range.0, r.range.1],
            "match": r.count(RowStatus::Match),
            "order_match_only": r.count(RowStatus::OrderMatchOnly),
            "mismatch": r.count(RowStatus::Mismatch),
            "not_covered": r.count(RowStatus::NotCovered),
            "passed": r.all_match(),
            "report": r,
        }));
    }
    let mut out = json!({ "families": reports });
    if all {
        let d = distinctness((-10, 10), (3, 10)).map_err(|e| e.to_string())?;
        ok &= d.passed();
        out["distinctness"] = json!({ "passed": d.passed(), "checks": d.checks });
    }
    out["passed"] = json!(ok);
    Ok((out, if ok { OK } else { MISMATCH }))
}

fn search_cmd(pattern: &str, height: i64, distance: Option<&str>, path: Option<&std::path::Path>) -> Outcome {
    let p: Pattern = pattern.parse()?;
    let d = match distance {
        None => p.default_distance(),
        Some("any") => None,
        Some(t) => Some(t.parse::<u128>().map_err(|e| format!("{t:?}: {e}"))?),
    };
    let r = search_triples(p, height, d)?;
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(&r).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let identified: Vec<Value> = r
        .triples
        .iter()
        .map(|t| {
            json!({
                "instruction": t.instruction.to_string(),
                "slopes": t.slopes,
                "orders": t.orders,
                "family": t.identified.as_ref().map(|i| format!("{}_{}", i.family, i.n)),
                "match": t.identified.as_ref().map(|i| i.kind.clone()),
            })
        })
        .collect();
    Ok((
        json!({
            "pattern": p,
            "height": height,
            "distance": d,
            "scanned": r.scanned,
            "triples": identified,
            "unidentified": r.unidentified(),
            "not_covered": r.not_covered.iter().map(|b| json!({
                "instruction": b.instruction.to_string(),
                "reason": b.reason,
                "triples": b.triples.len(),
            })).collect::<Vec<_>>(),
        }),
        OK,
    ))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        other => other.to_string(),
    }
}

/// Plain-text rendering: one `key: value` line per field, one line per
/// element of an array of records.
fn table(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(m) => {
            let width = m.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, x) in m {
                match x {
                    Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                        out.push_str(&format!("{k}:\n"));
                        for item in items {
                            let cells: Vec<String> = item
                                .as_object()
                                .expect("object")
                                .iter()
                                .filter(|(_, c)| !c.is_object() && !c.is_array() || c.to_string().len() < 60)
                                .map(|(ck, c)| format!("{ck}={}", scalar(c)))
                                .collect();
                            out.push_str(&format!("  {}\n", cells.join("  ")));
                        }
                    }
                    _ => out.push_str(&format!("{k:width$}  {}\n", scalar(x))),
                }
            }
        }
        other => out.push_str(&format!("{}\n", scalar(other))),
    }
    out
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Fill { inst, last } => fill(inst, last.as_deref()),
        Command::Classify { form } => classify_cmd(form),
        Command::Orbit { inst, budget } => orbit_cmd(inst, *budget),
        Command::Reduce { inst } => reduce_cmd(inst),
        Command::H1 { inst } => h1_cmd(inst),
        Command::Solve { bilinear, linear, quad, brute_force, certificate } => {
            solve_cmd(bilinear.as_deref(), linear.as_deref(), *quad, *brute_force, *certificate)
        }
        Command::VerifyTables { family, range, all } => verify_cmd(family.as_deref(), range.as_deref(), *all),
        Command::Search { pattern, height, distance, json } => {
            search_cmd(pattern, *height, distance.as_deref(), json.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, code)) => {
            let text = match cli.format {
                Format::Json => format!("{value}\n"),
                Format::Table => table(&value),
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(code)
        }
        Err(msg) => {
            eprintln!("{}", json!({ "error": msg }));
            ExitCode::from(USAGE)
        }
    }
}
