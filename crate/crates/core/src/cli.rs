//! The `cardproto` command line.
//!
//! Exit codes: 0 pass, 1 usage or input error, 2 a check failed, 3 the
//! enumeration budget ran out.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::analyzer::{
    build_report, count_resources, input_label, sample_paths, Options, Prior, ProtocolResult,
    Report, DEFAULT_BUDGET,
};
use crate::error::Error;
use crate::protocol::{
    builtin, equality_first_sabotaged, BuiltinParams, Cursor, Event, Next, Protocol, Sabotage,
    StepBudget, Stmt,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cardproto",
    version,
    about = "Run and verify card-based secure computation protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute one path with seeded shuffles and print every step.
    Run(RunArgs),
    /// Check correctness and security by exhaustive enumeration.
    Verify(VerifyArgs),
    /// Like verify, plus posterior tables under a prior.
    Analyze(AnalyzeArgs),
    /// Count cards and shuffles.
    Resources(CommonArgs),
    /// Parse and elaborate a .cardp script.
    CheckScript {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Built-in protocol name.
    #[arg(required_unless_present = "script", conflicts_with = "script")]
    protocol: Option<String>,
    /// Load the protocol from a .cardp script instead.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Reduced symmetric function table, e.g. 0,0,1,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Option<Vec<i64>>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Statements executed per input before giving up.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated input values.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["a", "b"])]
    input: Option<Vec<u32>>,
    /// First input of a two-input protocol.
    #[arg(long, requires = "b")]
    a: Option<u32>,
    /// Second input of a two-input protocol.
    #[arg(long, requires = "a")]
    b: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Show face-down suits and shuffle outcomes.
    #[arg(long)]
    unsafe_peek: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Check N random paths instead of all of them; can only refute.
    #[arg(long, requires = "seed")]
    sample: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `uniform`, `point:a1,a2,...` or `weights:p1,p2,...`.
    #[arg(long, default_value = "uniform")]
    prior: String,
    /// Observe only the first D reveals.
    #[arg(long)]
    depth: Option<usize>,
}

/// A failure with its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget { .. } | Error::InputBudget { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name).
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Resources(a) => resources(a, out),
        Command::CheckScript { path, format } => check_script(path, *format, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    main_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn load_protocol(c: &CommonArgs) -> Result<Protocol, Failure> {
    if let Some(path) = &c.script {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        return crate::script::load(&text).map_err(|d| {
            let rendered = crate::script::render_diagnostics(&path.display().to_string(), &d);
            Failure::usage(format!("script rejected\n{}", rendered.trim_end()))
        });
    }
    let name = c.protocol.as_deref().expect("clap requires a protocol");
    let params = BuiltinParams {
        n: c.n,
        k: c.k,
        g: c.g.clone(),
    };
    let need_n = || {
        c.n.ok_or_else(|| Failure::usage(format!("{name} needs --n")))
    };
    Ok(match name {
        "equality_first_no_final_cut" => equality_first_sabotaged(need_n()?, Sabotage::NoFinalCut)?,
        "equality_first_early_reveal" => {
            equality_first_sabotaged(need_n()?, Sabotage::EarlyReveal)?
        }
        _ => builtin(name, &params)?,
    })
}

fn options(c: &CommonArgs) -> Result<Options, Failure> {
    Ok(Options {
        budget: c.budget,
        ..Options::from_env()?
    })
}

fn describe(p: &Protocol) -> String {
    if p.params().is_empty() {
        return p.name().to_string();
    }
    let params: Vec<String> = p.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{} ({})", p.name(), params.join(", "))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(out, "{text}").map_err(|e| Failure::usage(e.to_string()))
}

fn put(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::usage(e.to_string()))
}

/// Prints what is known when the budget runs out, then fails with code 3.
fn budget_summary(p: &Protocol, e: Error, format: Format, out: &mut dyn Write) -> Failure {
    if let Error::InputBudget {
        budget,
        input,
        completed,
        total,
    } = &e
    {
        let _ = match format {
            Format::Json => emit_json(
                out,
                &json!({
                    "protocol": p.name(),
                    "params": p.params(),
                    "partial": {
                        "reason": "budget",
                        "budget": budget,
                        "stopped_at_input": input,
                        "inputs_finished": completed,
                        "inputs_total": total,
                    },
                }),
            ),
            Format::Text => put(
                out,
                &format!(
                    "protocol {}\npartial: {completed} of {total} inputs enumerated before input {input} exceeded the budget of {budget} steps\n",
                    describe(p)
                ),
            ),
        };
    }
    Failure::from(e)
}

fn run(a: &RunArgs, out: &mut dyn Write) -> Outcome {
    let p = load_protocol(&a.common)?;
    let input: Vec<u32> = match (&a.input, a.a, a.b) {
        (Some(x), _, _) => x.clone(),
        (None, Some(x), Some(y)) => vec![x, y],
        _ => return Err(Failure::usage("run needs --input (or --a and --b)")),
    };
    p.domain().check(&input)?;
    let peek = a.unsafe_peek;
    let view = |row: &crate::deck::CardSequence| {
        if peek {
            row.peek_view()
        } else {
            row.public_view()
        }
    };

    let mut steps: Vec<(String, String)> = vec![("deal".into(), view(&p.initial_row(&input)?))];
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut budget = StepBudget::new(a.common.budget);
    let mut cursor = Cursor::start(&p, &input)?;
    let result = {
        let mut hook = |event: Event<'_>| {
            let (action, row) = match event {
                Event::Stmt {
                    stmt,
                    row,
                    observation,
                } => {
                    let label = match (stmt, observation) {
                        (Stmt::Reveal(_), Some(obs)) => format!("reveal {obs}"),
                        _ => stmt.to_string(),
                    };
                    (label, row)
                }
                Event::Shuffled {
                    action,
                    choice,
                    row,
                } => {
                    let mut label = format!("{} over {} outcomes", action.kind(), action.size());
                    if peek {
                        label.push_str(&format!(", took #{}", choice.index));
                    }
                    (label, row)
                }
            };
            steps.push((action, view(row)));
        };
        loop {
            match cursor.advance(&mut budget, None, &mut hook)? {
                Next::Done(r) => break r,
                Next::Shuffle(action) => {
                    let i = rng.gen_range(0..action.size());
                    cursor.choose(action, i, &mut hook)?;
                }
                Next::Pruned => unreachable!("no prefix given"),
            }
        }
    };

    let (summary, decoded) = match &result {
        ProtocolResult::Public(v) => (format!("result: {v}"), None),
        ProtocolResult::Committed { positions, value } => (
            format!(
                "committed output at {},{}",
                positions[0] + 1,
                positions[1] + 1
            ),
            Some(format!("committed output decodes to {value}")),
        ),
        ProtocolResult::Encoded {
            positions,
            scheme,
            value,
        } => (
            format!(
                "{scheme}-scheme output at {}",
                positions
                    .iter()
                    .map(|p| (p + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Some(format!("encoded output decodes to {value}")),
        ),
    };
    match a.common.format {
        Format::Json => {
            let steps: Vec<_> = steps
                .iter()
                .map(|(action, row)| json!({"action": action, "row": row}))
                .collect();
            let mut result_json = serde_json::to_value(&result).expect("results serialize");
            if !peek {
                if let Some(obj) = result_json.as_object_mut() {
                    if obj.get("kind").and_then(|k| k.as_str()) != Some("public") {
                        obj.remove("value");
                    }
                }
            }
            emit_json(
                out,
                &json!({
                    "protocol": p.name(),
                    "params": p.params(),
                    "input": input,
                    "seed": a.seed,
                    "steps": steps,
                    "result": result_json,
                }),
            )?;
        }
        Format::Text => {
            let mut text = format!(
                "protocol {}, input {}, seed {}\n",
                describe(&p),
                input_label(&input),
                a.seed
            );
            let width = steps.iter().map(|(s, _)| s.len()).max().unwrap_or(0);
            for (action, row) in &steps {
                text.push_str(&format!("  {action:<width$}  {row}\n"));
            }
            text.push_str(&summary);
            text.push('\n');
            match decoded {
                Some(d) if peek => text.push_str(&format!("{d}\n")),
                Some(_) => text.push_str("(face down; pass --unsafe-peek to decode)\n"),
                None => {}
            }
            put(out, &text)?;
        }
    }
    Ok(EXIT_PASS)
}

fn report_text(r: &Report) -> String {
    let mut t = String::new();
    let c = &r.correctness;
    t.push_str(&format!(
        "correctness: {} ({} inputs, {} paths",
        verdict(c.pass),
        c.inputs,
        c.paths
    ));
    if c.failing_paths > 0 {
        t.push_str(&format!(", {} wrong", c.failing_paths));
    }
    t.push_str(")\n");
    for ce in &c.counterexamples {
        t.push_str(&format!(
            "  input {} choices {:?}: expected {}, got {} after {}\n",
            input_label(&ce.input),
            ce.choices,
            ce.expected,
            ce.got,
            ce.trace
        ));
    }
    for d in &c.dead_branches {
        let at = d.line.map_or_else(String::new, |l| format!(" (line {l})"));
        t.push_str(&format!(
            "  dead branch {} of reveal #{}{at}\n",
            d.pattern, d.reveal
        ));
    }
    let s = &r.security;
    t.push_str(&format!(
        "security: {} ({} classes, {} comparisons)\n",
        verdict(s.pass),
        s.classes,
        s.comparisons
    ));
    for v in &s.violations {
        t.push_str(&format!(
            "  inputs {} and {} see {} with probability {} vs {}\n",
            input_label(&v.inputs[0]),
            input_label(&v.inputs[1]),
            v.trace,
            v.probabilities[0],
            v.probabilities[1]
        ));
    }
    t.push_str(&resources_text(&r.resources));
    if let Some(post) = &r.posteriors {
        let depth = post.depth.map_or_else(
            || "whole traces".to_string(),
            |d| format!("first {d} reveals"),
        );
        t.push_str(&format!(
            "posteriors: {} ({} prior, {depth}, {} traces)\n",
            verdict(post.pass),
            post.prior,
            post.rows.len()
        ));
        for row in &post.rows {
            let cells: Vec<String> = row
                .posterior
                .iter()
                .map(|e| format!("{}:{}", input_label(&e.input), e.probability))
                .collect();
            let mark = if row.matches_prior {
                ""
            } else {
                "  <- differs from prior"
            };
            t.push_str(&format!(
                "  {} [p={}] {}{mark}\n",
                row.trace,
                row.probability,
                cells.join(" ")
            ));
        }
    }
    t
}

fn resources_text(r: &crate::analyzer::ResourceCount) -> String {
    let kinds: Vec<String> = r
        .by_kind
        .iter()
        .map(|(k, c)| {
            if c.min == c.max {
                format!("{k} x{}", c.max)
            } else {
                format!("{k} x{}..{}", c.min, c.max)
            }
        })
        .collect();
    let shuffles = if r.uniform {
        format!("{} shuffles on every path", r.shuffles)
    } else {
        format!(
            "{}..{} shuffles depending on the path",
            r.shuffles_min, r.shuffles_max
        )
    };
    format!(
        "resources: {} cards ({} clubs, {} hearts), {shuffles}{}\n",
        r.cards,
        r.clubs,
        r.hearts,
        if kinds.is_empty() {
            String::new()
        } else {
            format!(" [{}]", kinds.join(", "))
        }
    )
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn full_report(
    c: &CommonArgs,
    prior: Option<(&str, Option<usize>)>,
    out: &mut dyn Write,
) -> Outcome {
    let p = load_protocol(c)?;
    let opts = options(c)?;
    let prior = match prior {
        Some((text, depth)) => Some((Prior::parse(text, *p.domain())?, depth)),
        None => None,
    };
    let report = match build_report(&p, &opts, prior.as_ref().map(|(pr, d)| (pr, *d))) {
        Ok(r) => r,
        Err(e @ Error::InputBudget { .. }) => return Err(budget_summary(&p, e, c.format, out)),
        Err(e) => return Err(e.into()),
    };
    match c.format {
        Format::Json => emit_json(out, &report)?,
        Format::Text => put(
            out,
            &format!("protocol {}\n{}", describe(&p), report_text(&report)),
        )?,
    }
    Ok(if report.pass() {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    })
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let Some(samples) = a.sample else {
        return full_report(&a.common, None, out);
    };
    let p = load_protocol(&a.common)?;
    let seed = a.seed.expect("clap requires a seed");
    let r = sample_paths(&p, samples, seed, a.common.budget)?;
    match a.common.format {
        Format::Json => emit_json(out, &r)?,
        Format::Text => {
            let mut t = format!(
                "protocol {} (sampled: {samples} paths, seed {seed}; can refute, cannot prove)\n",
                describe(&p)
            );
            t.push_str(&format!(
                "correctness: {} on {} sampled paths\n",
                if r.correctness.pass {
                    "no counterexample"
                } else {
                    "FAIL"
                },
                r.correctness.paths
            ));
            for ce in &r.correctness.counterexamples {
                t.push_str(&format!(
                    "  input {}: expected {}, got {}\n",
                    input_label(&ce.input),
                    ce.expected,
                    ce.got
                ));
            }
            t.push_str(&format!(
                "security: {} in {} comparisons\n",
                if r.security.pass {
                    "no leak found"
                } else {
                    "FAIL"
                },
                r.security.comparisons
            ));
            for v in &r.security.violations {
                t.push_str(&format!(
                    "  inputs {} and {} see {} with probability {} vs {}\n",
                    input_label(&v.inputs[0]),
                    input_label(&v.inputs[1]),
                    v.trace,
                    v.probabilities[0],
                    v.probabilities[1]
                ));
            }
            put(out, &t)?;
        }
    }
    Ok(if r.correctness.pass && r.security.pass {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    })
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Outcome {
    full_report(&a.common, Some((&a.prior, a.depth)), out)
}

fn resources(c: &CommonArgs, out: &mut dyn Write) -> Outcome {
    let p = load_protocol(c)?;
    let r = count_resources(&p)?;
    match c.format {
        Format::Json => emit_json(
            out,
            &json!({"protocol": p.name(), "params": p.params(), "resources": r}),
        )?,
        Format::Text => put(
            out,
            &format!("protocol {}\n{}", describe(&p), resources_text(&r)),
        )?,
    }
    Ok(EXIT_PASS)
}

fn check_script(path: &PathBuf, format: Format, out: &mut dyn Write) -> Outcome {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let shown = path.display().to_string();
    let result = crate::script::load(&text);
    match (format, &result) {
        (Format::Json, Ok(p)) => emit_json(
            out,
            &json!({
                "script": shown,
                "ok": true,
                "protocol": p.name(),
                "cards": p.card_count(),
                "reveals": p.reveal_count(),
            }),
        )?,
        (Format::Json, Err(diags)) => {
            let list: Vec<_> = diags
                .iter()
                .map(
                    |d| json!({"code": d.code, "line": d.line, "col": d.col, "message": d.message}),
                )
                .collect();
            emit_json(
                out,
                &json!({"script": shown, "ok": false, "diagnostics": list}),
            )?
        }
        (Format::Text, Ok(p)) => put(
            out,
            &format!(
                "{shown}: ok ({}, {} cards, {} reveals)\n",
                p.name(),
                p.card_count(),
                p.reveal_count()
            ),
        )?,
        (Format::Text, Err(diags)) => put(out, &crate::script::render_diagnostics(&shown, diags))?,
    }
    Ok(if result.is_ok() {
        EXIT_PASS
    } else {
        EXIT_USAGE
    })
}
