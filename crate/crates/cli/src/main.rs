//! `mcoal` — coalition analysis for multicast cost-sharing games.
//!
//! Exit codes: 0 = analysis ran and the answer is definitive; 1 = usage or
//! validation error; 2 = analysis ran but was inconclusive; 3 = an
//! enumeration or iteration cap was hit. Machine-readable output via
//! `--json` (keys sorted, byte-identical across identical invocations).

use clap::{Parser, Subcommand, ValueEnum};
use mcoal_core::core_analysis::{ConditionReport, CoreCondition};
use mcoal_core::dc_stability::DcCounterexampleKind;
use mcoal_core::scenario::ScenarioFileError;
use mcoal_core::sweep::{SweepFormat, SweepSpec};
use mcoal_core::*;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mcoal",
    about = "Analyze coalition stability in multicast cost-sharing games",
    version,
    after_help = "Environment:\n  MCOAL_ENUM_CAP  subset-enumeration user cap (default 24; also caps the\n                  cross-block coalition scan, default 20)\n  MCOAL_LP_CAP    user cap for the LP core-feasibility path (default 16)\n\nExit codes: 0 definitive answer, 1 usage/validation error, 2 inconclusive,\n3 enumeration or iteration cap hit."
)]
struct Cli {
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario file and report every violation.
    Validate { file: PathBuf },
    /// Evaluate the value and bottleneck rate of one coalition.
    Value {
        file: PathBuf,
        /// Comma-separated 1-based user indices, e.g. "1,2,3".
        #[arg(long)]
        coalition: String,
    },
    /// Decide whether the core is non-empty.
    CheckCore {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Check convexity of the game (implies a non-empty core).
    CheckConvex { file: PathBuf },
    /// Decide whether a partition is stable against regrouping.
    CheckDc {
        file: PathBuf,
        /// Semicolon-separated blocks of comma-separated 1-based indices,
        /// e.g. "1,2,3;4,5".
        #[arg(long)]
        partition: String,
    },
    /// Evaluate every analytical stability condition with diagnostics.
    Theorems { file: PathBuf },
    /// Exhaustively search for a total-value-maximizing partition.
    BestPartition { file: PathBuf },
    /// Generate a seeded scenario.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        /// Use the banded rate formula.
        #[arg(long, conflicts_with = "rates")]
        banded: bool,
        /// Comma-separated explicit rates.
        #[arg(long)]
        rates: Option<String>,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep described by a spec file.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Lp,
    Theorems,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

/// A finished report: text or JSON rendering plus the exit code.
struct Report {
    text: String,
    json: Value,
    code: u8,
}

/// A usage or input error (exit 1).
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (help/version exit 0).
            let code = if e.exit_code() == 0 {
                EXIT_OK
            } else {
                EXIT_USAGE
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_mode = cli.json;
    match run(cli) {
        Ok(report) => {
            if json_mode {
                println!("{}", report.json);
            } else {
                println!("{}", report.text);
            }
            ExitCode::from(report.code)
        }
        Err(UsageError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<Report, UsageError> {
    let limits = EnumLimits::from_env();
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Value { file, coalition } => value_of(&file, &coalition),
        Command::CheckCore { file, method } => check_core(&file, method, &limits),
        Command::CheckConvex { file } => check_convex(&file, &limits),
        Command::CheckDc { file, partition } => check_dc(&file, &partition, &limits),
        Command::Theorems { file } => theorems(&file),
        Command::BestPartition { file } => best_partition(&file, &limits),
        Command::Gen {
            seed,
            n,
            banded,
            rates,
            out,
        } => gen(seed, n, banded, rates.as_deref(), out.as_deref()),
        Command::Sweep { spec, out, format } => sweep(&spec, &out, format),
    }
}

fn load(file: &std::path::Path) -> Result<Scenario, UsageError> {
    load_scenario(file).map_err(UsageError::from)
}

fn validate(file: &std::path::Path) -> Result<Report, UsageError> {
    match load_scenario(file) {
        Ok(s) => {
            let d = derive_constants(&s);
            let text = format!(
                "scenario: VALID ({} users, rates {}..{})",
                s.n(),
                fmt(s.rates().iter().copied().fold(f64::INFINITY, f64::min)),
                fmt(s.rates().iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            );
            Ok(Report {
                text,
                json: json!({
                    "valid": true,
                    "n": s.n(),
                    "alpha_min": d.alpha_min(),
                    "alpha_max": d.alpha_max(),
                    "beta": d.beta,
                    "gamma": d.gamma,
                }),
                code: EXIT_OK,
            })
        }
        Err(ScenarioFileError::Invalid(invalid)) => {
            let lines: Vec<String> = invalid.violations.iter().map(|v| v.to_string()).collect();
            Err(UsageError(format!(
                "scenario invalid:\n  {}",
                lines.join("\n  ")
            )))
        }
        Err(other) => Err(UsageError(other.to_string())),
    }
}

fn parse_coalition(text: &str, n: usize) -> Result<Coalition, UsageError> {
    let indices = parse_index_list(text)?;
    if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
        return Err(UsageError(format!("user index {bad} out of range 1..={n}")));
    }
    Coalition::from_members(indices.iter().map(|&i| i - 1), n).map_err(UsageError::from)
}

fn parse_index_list(text: &str) -> Result<Vec<usize>, UsageError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| UsageError(format!("bad user index '{}'", part.trim())))
        })
        .collect()
}

fn parse_partition(text: &str, n: usize) -> Result<Partition, UsageError> {
    let blocks: Vec<Vec<usize>> = text
        .split(';')
        .map(parse_index_list)
        .collect::<Result<_, _>>()?;
    Partition::from_one_based(&blocks, n).map_err(UsageError::from)
}

fn one_based(c: Coalition) -> Vec<usize> {
    c.members().map(|i| i + 1).collect()
}

fn fmt(v: f64) -> String {
    let text = format!("{v:.5}");
    let trimmed = text.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() {
        "0".into()
    } else {
        trimmed.into()
    }
}

fn value_of(file: &std::path::Path, coalition: &str) -> Result<Report, UsageError> {
    let s = load(file)?;
    let c = parse_coalition(coalition, s.n())?;
    let rate = coalition_rate(&s, c);
    let value = coalition_value(&s, c);
    Ok(Report {
        text: format!(
            "coalition {{{}}}: rate {}, value {}",
            one_based(c)
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
            fmt(rate),
            fmt(value),
        ),
        json: json!({ "coalition": c, "rate": rate, "value": value }),
        code: EXIT_OK,
    })
}

fn condition_json(report: &ConditionReport) -> Value {
    serde_json::to_value(report).expect("reports serialize")
}

fn condition_line(name: &str, role: &str, report: &ConditionReport) -> String {
    if !report.applicable {
        return format!("{name} ({role}): not applicable");
    }
    let verdict = if report.holds == Some(true) {
        "HOLDS"
    } else {
        "does not hold"
    };
    let relation = report
        .checks
        .iter()
        .find(|c| !c.satisfied)
        .or_else(|| report.checks.first())
        .map(|c| c.relation.symbol())
        .unwrap_or(">=");
    format!(
        "{name} ({role}): {verdict} ({} {relation} {})",
        fmt(report.lhs),
        fmt(report.rhs)
    )
}

fn analysis_exit(e: &AnalysisError) -> UsageError {
    UsageError(e.to_string())
}

fn check_core(
    file: &std::path::Path,
    method: Method,
    limits: &EnumLimits,
) -> Result<Report, UsageError> {
    let s = load(file)?;
    let conditions = all_core_conditions(&s);
    let conditions_json: Value = conditions
        .iter()
        .map(|(condition, report)| (condition.label().to_string(), condition_json(report)))
        .collect::<serde_json::Map<_, _>>()
        .into();

    let screen = screen_core(&s);
    let lp_allowed = method != Method::Theorems;
    let screen_allowed = method != Method::Lp;

    if screen_allowed {
        match &screen {
            CoreScreen::NonEmpty { condition, .. } => {
                // Definitive by a sufficient condition; also produce the
                // explicit witness the condition's argument constructs.
                let witness = match condition {
                    CoreCondition::UniformSymmetric => symmetric_core_profile(&s).ok(),
                    CoreCondition::RateRatioBound => {
                        Some(mcoal_core::core_analysis::rate_ratio_core_profile(&s))
                    }
                    _ => None,
                };
                let verified = match &witness {
                    Some(w) => is_in_core(&s, w, 1e-9, limits)
                        .map(|v| v.feasible)
                        .unwrap_or(false),
                    None => false,
                };
                let witness_json = witness
                    .as_ref()
                    .map(|w| json!(w.payoffs()))
                    .unwrap_or(Value::Null);
                return Ok(Report {
                    text: format!(
                        "core: NON-EMPTY ({} condition{})",
                        condition.label(),
                        if verified { "; witness verified" } else { "" }
                    ),
                    json: json!({
                        "verdict": "non-empty",
                        "method": condition.label(),
                        "witness": witness_json,
                        "witness_verified": verified,
                        "conditions": conditions_json,
                    }),
                    code: EXIT_OK,
                });
            }
            CoreScreen::Empty { condition, report } => {
                return Ok(Report {
                    text: format!(
                        "core: EMPTY ({}: {} > {})",
                        condition.label(),
                        fmt(report.lhs),
                        fmt(report.rhs)
                    ),
                    json: json!({
                        "verdict": "empty",
                        "method": condition.label(),
                        "conditions": conditions_json,
                    }),
                    code: EXIT_OK,
                });
            }
            CoreScreen::Inconclusive => {}
        }
    }

    if !lp_allowed {
        return Ok(Report {
            text: "core: INCONCLUSIVE (no sufficient condition fired; LP disabled)".into(),
            json: json!({
                "verdict": "inconclusive",
                "method": "theorems",
                "conditions": conditions_json,
            }),
            code: EXIT_INCONCLUSIVE,
        });
    }

    match core_nonempty(&s, limits) {
        Ok(verdict) if verdict.feasible => {
            let witness = verdict.witness.expect("feasible implies witness");
            Ok(Report {
                text: "core: NON-EMPTY (LP witness verified)".into(),
                json: json!({
                    "verdict": "non-empty",
                    "method": "lp",
                    "witness": witness.payoffs(),
                    "witness_verified": true,
                    "conditions": conditions_json,
                }),
                code: EXIT_OK,
            })
        }
        Ok(_) => Ok(Report {
            text: "core: EMPTY (LP infeasible)".into(),
            json: json!({
                "verdict": "empty",
                "method": "lp",
                "conditions": conditions_json,
            }),
            code: EXIT_OK,
        }),
        Err(e @ (AnalysisError::SizeLimit { .. } | AnalysisError::SolverStall { .. })) => {
            Ok(Report {
                text: format!("core: UNDECIDED ({e})"),
                json: json!({
                    "verdict": "undecided",
                    "error": e.to_string(),
                    "conditions": conditions_json,
                }),
                code: EXIT_LIMIT,
            })
        }
        Err(e) => Err(analysis_exit(&e)),
    }
}

fn all_core_conditions(s: &Scenario) -> Vec<(CoreCondition, ConditionReport)> {
    vec![
        (CoreCondition::UniformSymmetric, check_uniform_nonempty(s)),
        (CoreCondition::RateRatioBound, check_rate_ratio_nonempty(s)),
        (CoreCondition::SecondMinGap, check_second_min_empty(s)),
        (CoreCondition::MaxMinSpread, check_max_min_empty(s)),
    ]
}

fn check_convex(file: &std::path::Path, limits: &EnumLimits) -> Result<Report, UsageError> {
    let s = load(file)?;
    match is_convex(&s, limits) {
        Ok(report) => {
            let text = match &report.counterexample {
                None => "convex: YES (core is non-empty)".to_string(),
                Some((a, b)) => format!(
                    "convex: NO (v(S1)+v(S2) > v(S1 u S2)+v(S1 n S2) for S1={:?}, S2={:?})",
                    one_based(*a),
                    one_based(*b)
                ),
            };
            Ok(Report {
                text,
                json: json!({
                    "convex": report.convex,
                    "counterexample": report.counterexample.map(|(a, b)| json!([a, b])),
                }),
                code: EXIT_OK,
            })
        }
        Err(e @ AnalysisError::SizeLimit { .. }) => Ok(Report {
            text: format!("convex: UNDECIDED ({e})"),
            json: json!({ "convex": null, "error": e.to_string() }),
            code: EXIT_LIMIT,
        }),
        Err(e) => Err(analysis_exit(&e)),
    }
}

fn check_dc(
    file: &std::path::Path,
    partition: &str,
    limits: &EnumLimits,
) -> Result<Report, UsageError> {
    let s = load(file)?;
    let p = parse_partition(partition, s.n())?;
    let banded = check_banded_partition_stable(&s, &p);
    match is_dc_stable(&s, &p, limits) {
        Ok(verdict) => {
            let text = match &verdict.counterexample {
                None => format!(
                    "partition: STABLE ({} blocks; banded condition: {})",
                    p.blocks().len(),
                    match banded.holds {
                        Some(true) => "holds",
                        Some(false) => "does not hold",
                        None => "not applicable",
                    }
                ),
                Some(ce) => {
                    let what = match &ce.kind {
                        DcCounterexampleKind::CompatibleSplit { whole, left, right } => format!(
                            "split {:?} into {:?} + {:?} pays",
                            one_based(*whole),
                            one_based(*left),
                            one_based(*right)
                        ),
                        DcCounterexampleKind::IncompatibleCoalition { coalition } => {
                            format!("cross-block coalition {:?} pays", one_based(*coalition))
                        }
                    };
                    format!(
                        "partition: UNSTABLE ({what}: {} < {})",
                        fmt(ce.lhs),
                        fmt(ce.rhs)
                    )
                }
            };
            Ok(Report {
                text,
                json: json!({
                    "stable": verdict.stable,
                    "counterexample": verdict.counterexample,
                    "banded_condition": condition_json(&banded),
                }),
                code: EXIT_OK,
            })
        }
        Err(e @ AnalysisError::SizeLimit { .. }) => Ok(Report {
            text: format!("partition: UNDECIDED ({e})"),
            json: json!({ "stable": null, "error": e.to_string() }),
            code: EXIT_LIMIT,
        }),
        Err(e) => Err(analysis_exit(&e)),
    }
}

fn theorems(file: &std::path::Path) -> Result<Report, UsageError> {
    let s = load(file)?;
    let singleton = check_singleton_partition_stable(&s);
    let mut lines = Vec::new();
    let mut object = serde_json::Map::new();
    for (condition, report) in all_core_conditions(&s) {
        let role = match condition {
            CoreCondition::UniformSymmetric | CoreCondition::RateRatioBound => "core non-empty",
            CoreCondition::SecondMinGap | CoreCondition::MaxMinSpread => "core empty",
        };
        lines.push(condition_line(condition.label(), role, &report));
        object.insert(condition.label().into(), condition_json(&report));
    }
    lines.push(condition_line(
        "singleton-stability",
        "all-singletons partition stable",
        &singleton,
    ));
    object.insert("singleton-stability".into(), condition_json(&singleton));
    Ok(Report {
        text: lines.join("\n"),
        json: Value::Object(object),
        code: EXIT_OK,
    })
}

fn best_partition(file: &std::path::Path, limits: &EnumLimits) -> Result<Report, UsageError> {
    let s = load(file)?;
    match best_partition_bruteforce(&s, limits) {
        Ok(best) => {
            let blocks: Vec<Vec<usize>> = best
                .partition
                .blocks()
                .iter()
                .map(|&b| one_based(b))
                .collect();
            let rendered = blocks
                .iter()
                .map(|b| {
                    b.iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join(";");
            Ok(Report {
                text: format!(
                    "best partition: {rendered} (value {}, {} partitions examined)",
                    fmt(best.value),
                    best.examined
                ),
                json: json!({
                    "partition": blocks,
                    "value": best.value,
                    "examined": best.examined,
                }),
                code: EXIT_OK,
            })
        }
        Err(e @ AnalysisError::SizeLimit { .. }) => Ok(Report {
            text: format!("best partition: UNDECIDED ({e})"),
            json: json!({ "partition": null, "error": e.to_string() }),
            code: EXIT_LIMIT,
        }),
        Err(e) => Err(analysis_exit(&e)),
    }
}

fn gen(
    seed: u64,
    n: usize,
    banded: bool,
    rates: Option<&str>,
    out: Option<&std::path::Path>,
) -> Result<Report, UsageError> {
    let rule = match (banded, rates) {
        (true, None) => RateRule::banded_default(),
        (false, Some(list)) => {
            let rates: Result<Vec<f64>, _> = list
                .split(',')
                .map(|part| part.trim().parse::<f64>())
                .collect();
            RateRule::Explicit(rates.map_err(|_| UsageError("bad --rates list".into()))?)
        }
        (false, None) => {
            return Err(UsageError(
                "specify either --banded or --rates <list>".into(),
            ))
        }
        (true, Some(_)) => unreachable!("clap conflicts_with"),
    };
    let s = generate_scenario(seed, n, &rule)?;
    let rendered = serde_json::to_string_pretty(&s).expect("scenarios serialize");
    if let Some(path) = out {
        std::fs::write(path, format!("{rendered}\n"))?;
        Ok(Report {
            text: format!(
                "wrote scenario ({n} users, seed {seed}) to {}",
                path.display()
            ),
            json: json!({ "written": path.display().to_string(), "n": n, "seed": seed }),
            code: EXIT_OK,
        })
    } else {
        Ok(Report {
            json: serde_json::to_value(&s).expect("scenarios serialize"),
            text: rendered,
            code: EXIT_OK,
        })
    }
}

fn sweep(
    spec_path: &std::path::Path,
    out: &std::path::Path,
    format: Format,
) -> Result<Report, UsageError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| UsageError(format!("malformed sweep spec: {e}")))?;
    let rows = run_sweep(&spec)?;
    let mut buffer = Vec::new();
    let sweep_format = match format {
        Format::Csv => SweepFormat::Csv,
        Format::Jsonl => SweepFormat::Jsonl,
    };
    emit_results(&spec, &rows, sweep_format, &mut buffer)?;
    std::fs::write(out, &buffer)?;
    Ok(Report {
        text: format!(
            "wrote {} rows ({} axis) to {}",
            rows.len(),
            spec.axis.label(),
            out.display()
        ),
        json: json!({
            "written": out.display().to_string(),
            "rows": rows.len(),
            "axis": spec.axis.label(),
        }),
        code: EXIT_OK,
    })
}
