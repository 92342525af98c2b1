use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use steinpsd::bound::{
    exact_tv, fit_registry, BoundContext, BoundReport, Preconditions, VariantRegistry,
};
use steinpsd::dependent::{DependentSequence, SummandModel};
use steinpsd::model::ModelSpec;
use steinpsd::oracle::{exact_conditional_d, model_law, Conditioning};
use steinpsd::psd::{FamilySpec, PowerSeries};
use steinpsd::runs::{table1, table1_check, TABLE1_CELLS};
use steinpsd::verify::{verify_model, Status, VerifyOptions};
use steinpsd::Error;

#[derive(Parser)]
#[command(name = "steinpsd", version, about = "Power-series approximation bounds for 1-dependent sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and comparison bounds for the 18 printed cells.
    Table1 {
        /// Compare against the printed six-decimal values.
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 6)]
        precision: usize,
        /// Adds this to every closed-form value before printing.
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb: f64,
    },
    /// Evaluate one bound variant on a model.
    Bound {
        #[arg(long)]
        model: PathBuf,
        /// Target family JSON.
        #[arg(long, conflicts_with = "fit", required_unless_present = "fit")]
        target: Option<PathBuf>,
        /// Fit the target to the model's moments: nb or poisson.
        #[arg(long)]
        fit: Option<String>,
        /// theorem | d1 | d2 | crude | min | closed-form
        #[arg(long, default_value = "min")]
        variant: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, default_value_t = 12)]
        precision: usize,
        /// Evaluate the general bound below n = 6.
        #[arg(long)]
        allow_small_n: bool,
        /// Also print the exact total-variation distance.
        #[arg(long)]
        compare_tv: bool,
        /// Estimate moments by Monte Carlo with this seed when enumeration is too large.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 1 << 24)]
        max_outcomes: u64,
    },
    /// Check closed forms and bounds against the exact oracles.
    Verify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1 << 20)]
        max_outcomes: u64,
        #[arg(long)]
        fit: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Scales every closed-form bracket moment, to exercise the failure path.
        #[arg(long, hide = true)]
        corrupt_abar2: Option<f64>,
    },
    /// Exact law of the sum and its distance to a fitted target.
    Oracle {
        #[arg(long)]
        model: PathBuf,
        /// Also list the conditional smoothness values at this index.
        #[arg(long)]
        conditional: Option<usize>,
        #[arg(long, default_value = "poisson")]
        fit: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long, default_value_t = 12)]
        precision: usize,
        #[arg(long, default_value_t = 1 << 24)]
        max_outcomes: u64,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Json(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: 2, message }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Arc<dyn SummandModel>, Failure> {
    Ok(ModelSpec::from_json(&read(path)?)?.build()?)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn cmd_table1(check: bool, format: Format, precision: usize, perturb: f64) -> Outcome {
    let mut cells = table1()?;
    for c in &mut cells {
        c.closed_form += perturb;
    }
    let p = precision;
    let mut out = String::new();
    match format {
        Format::Text => {
            writeln!(out, "{:>4}  {:>5}  {:>12}  {:>12}", "n", "p", "closed-form", "brown-xia").unwrap();
            for c in &cells {
                writeln!(out, "{:>4}  {:>5.2}  {:>12.p$}  {:>12.p$}", c.n, c.p, c.closed_form, c.brown_xia).unwrap();
            }
        }
        Format::Csv => {
            out.push_str("n,p,closed_form,brown_xia\n");
            for c in &cells {
                writeln!(out, "{},{},{:.p$},{:.p$}", c.n, c.p, c.closed_form, c.brown_xia).unwrap();
            }
        }
        Format::Json => {
            let rows: Vec<_> = cells
                .iter()
                .map(|c| json!({"n": c.n, "p": c.p, "closed_form": format!("{:.p$}", c.closed_form), "brown_xia": format!("{:.p$}", c.brown_xia)}))
                .collect();
            out = pretty(&rows);
        }
    }
    if check {
        let bad = table1_check(&cells);
        if !bad.is_empty() {
            for m in &bad {
                writeln!(out, "MISMATCH n={} p={} {}: expected {}, got {}", m.n, m.p, m.column, m.expected, m.got).unwrap();
            }
            return Err(Failure { code: 1, message: out });
        }
        writeln!(out, "check: all {} cells match", TABLE1_CELLS.len()).unwrap();
    }
    Ok(out)
}

fn render_report(r: &BoundReport, format: Format, precision: usize, tv: Option<(f64, f64)>) -> String {
    let p = precision;
    match format {
        Format::Json => {
            let mut v = serde_json::to_value(r).expect("serializable");
            if let Some((value, hi)) = tv {
                v["exact_tv"] = json!({"value": value, "hi": hi});
            }
            pretty(&v)
        }
        Format::Csv => {
            let mut s = format!("{}\n{}", BoundReport::csv_header(), r.csv_row(p));
            if let Some((value, _)) = tv {
                s = s.replacen('\n', ",exact_tv\n", 1) + &format!(",{value:.p$}");
            }
            s + "\n"
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "variant        {}", r.variant).unwrap();
            writeln!(s, "n              {}", r.n).unwrap();
            writeln!(s, "target (a, b)  ({:.p$}, {:.p$})", r.a, r.b).unwrap();
            writeln!(s, "delta_g        {:.p$}", r.delta_g_factor).unwrap();
            writeln!(s, "quadratic      {:.p$}", r.term_quadratic).unwrap();
            writeln!(s, "linear         {:.p$}", r.term_linear).unwrap();
            writeln!(s, "tau            {:.p$}", r.term_tau).unwrap();
            writeln!(s, "total          {:.p$}", r.total).unwrap();
            writeln!(s, "slack          {:.p$}", r.slack).unwrap();
            if let Some(c) = r.comparison {
                writeln!(s, "brown-xia      {c:.p$}").unwrap();
            }
            if let Some((value, _)) = tv {
                writeln!(s, "exact tv       {value:.p$}").unwrap();
            }
            s
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound(
    model: &Path,
    target: Option<&Path>,
    fit: Option<&str>,
    variant: &str,
    format: Format,
    precision: usize,
    allow_small_n: bool,
    compare_tv: bool,
    seed: Option<u64>,
    samples: usize,
    max_outcomes: u64,
) -> Outcome {
    let model = load_model(model)?;
    let seq = match seed {
        Some(seed) => DependentSequence::sampled(model.clone(), seed, samples),
        None => DependentSequence::exact(model.clone()).with_max_outcomes(max_outcomes),
    };
    let variant = VariantRegistry::builtin().get(variant)?;
    let ctx = match (target, fit) {
        (Some(path), _) => {
            let family = FamilySpec::from_json(&read(path)?)?;
            BoundContext::new(seq, family.as_panjer()?.clone())
        }
        (None, Some(name)) => BoundContext::fitted(seq, fit_registry().get(name)?.as_ref())?,
        (None, None) => return Err(usage("either --target or --fit is required".into())),
    };
    let ctx = ctx.with_preconditions(Preconditions { allow_small_n, ..Default::default() });
    let report = variant.evaluate(&ctx)?;
    let tv = if compare_tv {
        let law = model_law(model.as_ref(), max_outcomes)?;
        let table = ctx.target.table(law.masses.len() + 1)?;
        let tv = exact_tv(&law, &table);
        Some((tv.value, tv.hi))
    } else {
        None
    };
    Ok(render_report(&report, format, precision, tv))
}

fn cmd_verify(model: &Path, max_outcomes: u64, fit: Option<String>, format: Format, corrupt: Option<f64>) -> Outcome {
    let model = load_model(model)?;
    let opts = VerifyOptions { max_outcomes, fit, corrupt_bracket_x_n1: corrupt, ..Default::default() };
    let report = verify_model(model, &opts)?;
    let out = match format {
        Format::Json => pretty(&report),
        Format::Text | Format::Csv => {
            let mut s = format!("model {} n={} target {}\n", report.model, report.n, report.target);
            for c in &report.checks {
                let tag = match c.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skip => "SKIP",
                };
                writeln!(s, "{tag} {}: {}", c.name, c.detail).unwrap();
            }
            s
        }
    };
    if report.passed() {
        Ok(out)
    } else {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure { code: 1, message: format!("{out}failed: {}", names.join(", ")) })
    }
}

fn cmd_oracle(
    model: &Path,
    conditional: Option<usize>,
    fit: &str,
    format: Format,
    precision: usize,
    max_outcomes: u64,
) -> Outcome {
    let model = load_model(model)?;
    let law = model_law(model.as_ref(), max_outcomes)?;
    let seq = DependentSequence::exact(model.clone()).with_max_outcomes(max_outcomes);
    let ctx = BoundContext::fitted(seq.clone(), fit_registry().get(fit)?.as_ref())?;
    let table = ctx.target.table(law.masses.len() + 1)?;
    let tv = exact_tv(&law, &table);
    let conditional = match conditional {
        Some(i) => Some((
            i,
            exact_conditional_d(&seq, i, Conditioning::N2)?,
            exact_conditional_d(&seq, i, Conditioning::N1N2)?,
        )),
        None => None,
    };
    let p = precision;
    Ok(match format {
        Format::Json => {
            let mut v = json!({"law": law, "target": {"fit": fit, "a": ctx.target.a, "b": ctx.target.b}, "tv": tv});
            if let Some((i, n2, n1n2)) = &conditional {
                v["conditional"] = json!({"i": i, "n2": n2, "n1n2": n1n2});
            }
            pretty(&v)
        }
        Format::Csv => {
            let mut s = String::from("k,p_w,p_target\n");
            for (k, m) in law.masses.iter().enumerate() {
                writeln!(s, "{k},{m:.p$},{:.p$}", table.pmf(k as u64)).unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = format!("{:>4}  {:>w$}  {:>w$}\n", "k", "P(W=k)", "P(Z=k)", w = p + 3);
            for (k, m) in law.masses.iter().enumerate() {
                writeln!(s, "{k:>4}  {m:>w$.p$}  {:>w$.p$}", table.pmf(k as u64), w = p + 3).unwrap();
            }
            writeln!(s, "target {fit}: a = {:.p$}, b = {:.p$}", ctx.target.a, ctx.target.b).unwrap();
            writeln!(s, "d_TV = {:.p$} in [{:.p$}, {:.p$}]", tv.value, tv.lo, tv.hi).unwrap();
            if let Some((i, n2, n1n2)) = &conditional {
                for (label, laws) in [("N2", n2), ("N1,N2", n1n2)] {
                    for l in laws {
                        writeln!(s, "D(W | X_[{label}] = {:?}) at i={i}: {:.p$} (prob {:.p$})", l.condition, l.d, l.probability)
                            .unwrap();
                    }
                }
            }
            s
        }
    })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Table1 { check, format, precision, perturb } => cmd_table1(check, format, precision, perturb),
        Command::Bound {
            model,
            target,
            fit,
            variant,
            format,
            precision,
            allow_small_n,
            compare_tv,
            seed,
            samples,
            max_outcomes,
        } => cmd_bound(
            &model,
            target.as_deref(),
            fit.as_deref(),
            &variant,
            format,
            precision,
            allow_small_n,
            compare_tv,
            seed,
            samples,
            max_outcomes,
        ),
        Command::Verify { model, max_outcomes, fit, format, corrupt_abar2 } => {
            cmd_verify(&model, max_outcomes, fit, format, corrupt_abar2)
        }
        Command::Oracle { model, conditional, fit, format, precision, max_outcomes } => {
            cmd_oracle(&model, conditional, &fit, format, precision, max_outcomes)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", f.message.trim_end());
            ExitCode::from(f.code)
        }
    }
}
