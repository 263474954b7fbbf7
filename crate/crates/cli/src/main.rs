//! `sagex`: validate bundles, derive conclusions, run explorations, serve
//! sessions over HTTP.

use std::fmt::Write as _;
use std::io::{self, BufRead, IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sagex_core::es::{Explanans, HeuristicOrder, InfoNode, Interaction, Stage};
use sagex_core::exploration::Exploration;
use sagex_core::format::parse_bundle;
use sagex_core::model::{ExplanandumBundle, Mode};
use sagex_core::narrative::ExportFormat;
use sagex_core::reasoner::{derive, Derivation, Support};
use sagex_core::script::{parse_line, parse_script};
use sagex_core::validate::validate_explainability;

const EXIT_USAGE: u8 = 1;
const EXIT_BUNDLE: u8 = 2;
const EXIT_REASONING: u8 = 3;
const EXIT_SCRIPT: u8 = 4;

#[derive(Parser)]
#[command(name = "sagex", version, about = "Interactive explanations of defeasible rule-based decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Markdown => ExportFormat::Markdown,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a bundle against the explainability checklist.
    Validate { bundle: PathBuf },
    /// Print conclusions, the causal chain and justifications.
    Derive {
        bundle: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Replay a script (or explore interactively) and export the narrative.
    Explain {
        bundle: PathBuf,
        #[arg(long, conflicts_with = "interactive")]
        script: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        /// Write the narrative here instead of after the transcript.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        #[arg(long, env = "SAGEX_HEURISTIC_ORDER", default_value = "relevance,abstraction,simplicity")]
        heuristic_order: HeuristicOrder,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "SAGEX_LISTEN", default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
        #[arg(long, env = "SAGEX_STORAGE", default_value = "sagex-data")]
        storage: PathBuf,
        #[arg(long, env = "SAGEX_HEURISTIC_ORDER", default_value = "relevance,abstraction,simplicity")]
        heuristic_order: HeuristicOrder,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Validate { bundle } => validate(&bundle),
        Command::Derive { bundle, json } => derive_cmd(&bundle, json),
        Command::Explain {
            bundle,
            script,
            interactive,
            format,
            output,
            mode,
            heuristic_order,
        } => explain(&bundle, script.as_deref(), interactive, format.into(), output.as_deref(), mode, heuristic_order),
        Command::Serve {
            listen,
            storage,
            heuristic_order,
        } => serve(listen, storage, heuristic_order),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<ExplanandumBundle, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
    parse_bundle(&text).map_err(|e| fail(EXIT_BUNDLE, format!("{}: {e}", path.display())))
}

fn validate(path: &Path) -> Result<(), Failure> {
    let bundle = load(path)?;
    let violations = validate_explainability(&bundle);
    if violations.is_empty() {
        println!("ok: {} satisfies the explainability checklist", bundle.id);
        return Ok(());
    }
    for v in &violations {
        println!("{}\t{}", v.kind.as_str(), v.subject);
    }
    Err(fail(EXIT_BUNDLE, format!("{} violation(s)", violations.len())))
}

fn derive_bundle(bundle: &ExplanandumBundle) -> Result<Derivation, Failure> {
    derive(bundle.theory(), &bundle.grounded_facts()).map_err(|e| fail(EXIT_REASONING, e.to_string()))
}

fn derive_cmd(path: &Path, json: bool) -> Result<(), Failure> {
    let bundle = load(path)?;
    let d = derive_bundle(&bundle)?;
    if json {
        let mut doc = serde_json::json!({ "bundle": bundle.id, "derivation": d });
        if let Some(dec) = &bundle.overview.decision {
            doc["decision"] = serde_json::json!({
                "literal": dec,
                "conclusion": d.conclusion(dec),
                "deciding_rule": d.deciding_rule(dec),
            });
        }
        println!("{}", serde_json::to_string_pretty(&doc).expect("derivation serializes"));
    } else {
        print!("{}", derivation_text(&bundle, &d));
    }
    Ok(())
}

fn derivation_text(bundle: &ExplanandumBundle, d: &Derivation) -> String {
    let mut s = String::new();
    // Refuted complements of premises carry no information; rule heads and
    // their complements are always shown so rejected claims stay visible.
    let heads: std::collections::BTreeSet<_> = bundle
        .theory()
        .rules
        .iter()
        .flat_map(|r| [r.consequent.clone(), r.consequent.complement()])
        .collect();
    let shown: Vec<_> = d
        .conclusions
        .iter()
        .filter(|(lit, c)| c.definite || c.defeasible || heads.contains(*lit))
        .collect();
    if !shown.is_empty() {
        s.push_str("conclusions:\n");
        for (lit, c) in shown {
            let _ = writeln!(s, "  {} {} {lit}", c.definite_tag().symbol(), c.defeasible_tag().symbol());
        }
    }
    if !d.causal_chain.is_empty() {
        s.push_str("causal chain:\n");
        for f in &d.causal_chain {
            let rule = bundle.rule(&f.rule).expect("fired rules exist");
            let _ = writeln!(s, "  {}. {rule}", f.step);
        }
    }
    let contested: Vec<_> = d
        .justifications
        .values()
        .filter(|j| j.winning_rule != Support::Fact)
        .collect();
    if !contested.is_empty() {
        s.push_str("justifications:\n");
        for j in contested {
            let _ = writeln!(s, "  {}: winner {}", j.conclusion, j.winning_rule);
            for def in &j.defeated_rules {
                let _ = write!(s, "    defeated {} ({})", def.rule, def.reason.as_str());
                if let Some(by) = &def.by {
                    let _ = write!(s, " by {by}");
                }
                if let Some(a) = &def.annotation {
                    let _ = write!(s, ": {a}");
                }
                s.push('\n');
            }
        }
    }
    if let Some(dec) = &bundle.overview.decision {
        let c = d.conclusion(dec);
        let _ = writeln!(s, "decision: {} {dec}", c.defeasible_tag().symbol());
        if c.defeasible {
            if let Some(r) = d.deciding_rule(dec) {
                let _ = writeln!(s, "  deciding rule: {r} ({})", bundle.label(r));
            }
        }
    }
    s
}

struct Painter {
    color: bool,
}

impl Painter {
    fn detect() -> Self {
        Painter {
            color: std::env::var_os("NO_COLOR").is_none() && io::stdout().is_terminal(),
        }
    }

    fn stage(&self, stage: Stage) -> String {
        if !self.color {
            return format!("[{stage}]");
        }
        let code = match stage {
            Stage::Incipit => "1;37",
            Stage::CoreInformation => "1;32",
            Stage::MarginalInformation => "33",
            Stage::Ground => "36",
            Stage::Sources => "34",
            Stage::Counterfactuals => "35",
        };
        format!("\x1b[{code}m[{stage}]\x1b[0m")
    }
}

fn node_text(p: &Painter, n: &InfoNode) -> String {
    let mut s = format!("{} {}\n", p.stage(n.stage), n.id);
    for line in n.rendering.lines() {
        let _ = writeln!(s, "    {line}");
    }
    s
}

fn step_text(p: &Painter, index: usize, interaction: &Interaction, appended: &[InfoNode], x: &Exploration) -> String {
    let mut s = format!("== {index}. {interaction}\n");
    if let Interaction::Mark { .. } = interaction {
        if let Some(a) = x.narrative().arguments.last() {
            let _ = writeln!(
                s,
                "argument {} {} {} (evidence: {})",
                a.id,
                a.stance,
                a.target,
                a.evidence.join(", ")
            );
        }
    }
    for n in appended {
        s.push_str(&node_text(p, n));
    }
    s
}

fn initial_text(p: &Painter, e: &Explanans) -> String {
    let mut s = String::from("== E_0\n");
    for n in &e.nodes {
        s.push_str(&node_text(p, n));
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn explain(
    path: &Path,
    script: Option<&Path>,
    interactive: bool,
    format: ExportFormat,
    output: Option<&Path>,
    mode: Option<Mode>,
    order: HeuristicOrder,
) -> Result<(), Failure> {
    let bundle = load(path)?;
    if bundle.overview.mode == Mode::ExPost || mode == Some(Mode::ExPost) {
        derive_bundle(&bundle)?;
    }
    let mut x = Exploration::start(bundle, mode, order).map_err(|e| fail(EXIT_REASONING, e.to_string()))?;
    let painter = Painter::detect();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let _ = out.write_all(initial_text(&painter, x.explanans()).as_bytes());

    if let Some(script) = script {
        let text = std::fs::read_to_string(script)
            .map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", script.display())))?;
        let lines = parse_script(&text).map_err(|e| fail(EXIT_SCRIPT, format!("{}: {e}", script.display())))?;
        for (i, line) in lines.iter().enumerate() {
            let appended = x.apply(&line.interaction).map_err(|e| {
                let _ = out.flush();
                fail(EXIT_SCRIPT, format!("{}: line {}: {e}", script.display(), line.line))
            })?;
            let _ = out.write_all(step_text(&painter, i + 1, &line.interaction, &appended, &x).as_bytes());
        }
    } else if interactive {
        drop(out);
        interact(&painter, &mut x)?;
        out = stdout.lock();
    }

    let narrative = x.export(format);
    match output {
        Some(p) => std::fs::write(p, narrative).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", p.display())))?,
        None if !x.explanans().interactions.is_empty() => {
            let _ = writeln!(out, "== narrative");
            let _ = out.write_all(narrative.as_bytes());
        }
        None => {}
    }
    let _ = out.flush();
    Ok(())
}

const MENU_SIZE: usize = 15;

fn interact(p: &Painter, x: &mut Exploration) -> Result<(), Failure> {
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    let mut step = 0;
    loop {
        let actions = x.actions();
        println!("-- next actions (number, a script line, or q to finish):");
        for (i, a) in actions.iter().take(MENU_SIZE).enumerate() {
            println!("  {:>2}) {}  -> {}", i + 1, a.interaction, a.appends.join(", "));
        }
        if actions.len() > MENU_SIZE {
            println!("  ... {} more", actions.len() - MENU_SIZE);
        }
        print!("> ");
        let _ = io::stdout().flush();
        let Some(line) = lines.next() else { break };
        let line = line.map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "q" || line == "quit" {
            break;
        }
        let interaction = match line.parse::<usize>() {
            Ok(n) if (1..=actions.len().min(MENU_SIZE)).contains(&n) => actions[n - 1].interaction.clone(),
            Ok(_) => {
                println!("no action {line}");
                continue;
            }
            Err(_) => match parse_line(line) {
                Ok(i) => i,
                Err(e) => {
                    println!("{e}");
                    continue;
                }
            },
        };
        match x.apply(&interaction) {
            Ok(appended) => {
                step += 1;
                print!("{}", step_text(p, step, &interaction, &appended, x));
            }
            Err(e) => println!("{} ({})", e, e.code()),
        }
    }
    Ok(())
}

fn serve(listen: SocketAddr, storage: PathBuf, heuristic_order: HeuristicOrder) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(io::stderr)
        .init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let config = sagex_service::Config {
        listen,
        storage,
        heuristic_order,
    };
    runtime
        .block_on(sagex_service::serve(config, |addr| {
            println!("listening on {addr}");
            let _ = io::stdout().flush();
        }))
        .map_err(|e| fail(EXIT_USAGE, e.to_string()))
}
