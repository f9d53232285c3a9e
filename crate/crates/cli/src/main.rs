use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcp_core::eval::{budget_sweep, emit_report, ReportFormat};
use rcp_core::miner::{cross_validate, features, N_FEATURES};
use rcp_core::synth::label_windows;
use rcp_core::trace::{parse_corpus, write_corpus};
use rcp_core::{
    evaluate_corpus, generate, stage_profile, train, Cadence, Controller, Error, RuleSet,
    StrategyConfig, ToolkitConfig,
};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema_version 1)");

#[derive(Parser)]
#[command(name = "rcpd", version = VERSION, about = "Early stopping of reasoning traces by end-of-thinking rank")]
struct Cli {
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with known completion points.
    Synth(SynthArgs),
    /// Replay stop strategies over a corpus and report tokens, accuracy, CR.
    Replay(ReplayArgs),
    /// Train boosted trees on labeled rank windows and distill rules.
    Mine(MineArgs),
    /// Serve the line protocol on stdin/stdout.
    Stream(StreamArgs),
    /// Inspect rule sets.
    Rules {
        #[command(subcommand)]
        action: RulesAction,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// default, no-loops or flat.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyName {
    Full,
    #[value(name = "budget_force", alias = "budget-force", alias = "bf")]
    BudgetForce,
    #[value(name = "nothink", alias = "no_think", alias = "no-think")]
    Nothink,
    #[value(name = "think_rank5", alias = "think-rank5")]
    ThinkRank5,
    Deer,
    Rcpd,
    /// Every strategy the corpus supports.
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => ReportFormat::Table,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Strategies to run, comma separated. FULL is always reported.
    #[arg(long, value_delimiter = ',', default_value = "rcpd")]
    strategy: Vec<StrategyName>,
    /// Token budget for budget_force.
    #[arg(long)]
    budget: Option<u64>,
    /// Budget sweep for budget_force, comma separated.
    #[arg(long, value_delimiter = ',')]
    budgets: Vec<u64>,
    #[arg(long)]
    deer_threshold: Option<f64>,
    /// JSON (or .toml) rule set for rcpd.
    #[arg(long)]
    rules_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also print the stage profile (depth vs content tokens) as JSON.
    #[arg(long)]
    stages: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rules: Option<usize>,
    /// Also run k-fold cross-validation over traces.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    emit_rules: Option<PathBuf>,
    /// Write the full model as JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long)]
    rules_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    cadence: Option<CadenceArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CadenceArg {
    Sentence,
    Token,
}

#[derive(Subcommand)]
enum RulesAction {
    /// Print the active rule set (default RCPD rules unless configured).
    Show {
        #[arg(long)]
        json: bool,
        #[arg(long)]
        rules_file: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = match &cli.config {
        Some(p) => ToolkitConfig::load(p)?,
        None => ToolkitConfig::default(),
    };
    match cli.command {
        Command::Synth(a) => synth(&config, a),
        Command::Replay(a) => replay(&config, a),
        Command::Mine(a) => mine(&config, a),
        Command::Stream(a) => stream(&config, a),
        Command::Rules {
            action: RulesAction::Show { json, rules_file },
        } => {
            let rules = load_rules(&config, rules_file.as_deref())?;
            if json {
                println!("{}", rules.to_json());
            } else {
                print!("{}", describe_rules(&rules));
            }
            Ok(())
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn load_rules(config: &ToolkitConfig, file: Option<&Path>) -> Result<RuleSet, Error> {
    match file {
        Some(p) => RuleSet::load(p),
        None => Ok(config.rules.clone()),
    }
}

fn describe_rules(rules: &RuleSet) -> String {
    let mut s = String::new();
    for r in &rules.rules {
        s.push_str(&format!(
            "{:<4} current<={}",
            r.rule_id, r.current_threshold
        ));
        let mut hist = r.history.clone();
        hist.sort();
        for (o, t) in hist {
            s.push_str(&format!("  prev{o}<={t}"));
        }
        s.push('\n');
    }
    s
}

fn synth(config: &ToolkitConfig, a: SynthArgs) -> Result<(), Error> {
    let mut p = match &a.preset {
        Some(name) => rcp_core::SynthParams::preset(name)?,
        None => config.synth_params()?,
    };
    if let Some(n) = a.n {
        p.n_traces = n;
    }
    if let Some(s) = a.seed {
        p.seed = s;
    }
    p.rank_cap = config.rank_cap;
    let corpus = generate(&p)?;
    write_corpus(&corpus, &a.out)?;
    eprintln!(
        "wrote {} traces to {}",
        corpus.traces.len(),
        a.out.display()
    );
    Ok(())
}

fn replay(config: &ToolkitConfig, a: ReplayArgs) -> Result<(), Error> {
    let corpus = parse_corpus(&a.corpus)?;
    let deer_threshold = a.deer_threshold.unwrap_or(config.deer_threshold);
    let rules = load_rules(config, a.rules_file.as_deref())?;
    let mut budgets = a.budgets.clone();
    budgets.extend(a.budget);

    let mut configs = Vec::new();
    for s in &a.strategy {
        match s {
            StrategyName::Full => configs.push(StrategyConfig::Full),
            StrategyName::BudgetForce => {
                if budgets.is_empty() {
                    return Err(Error::Params(
                        "budget_force needs --budget or --budgets".into(),
                    ));
                }
                configs.extend(budget_sweep(&budgets));
            }
            StrategyName::Nothink => configs.push(StrategyConfig::NoThink),
            StrategyName::ThinkRank5 => configs.push(StrategyConfig::ThinkRank5),
            StrategyName::Deer => configs.push(StrategyConfig::Deer {
                confidence_threshold: deer_threshold,
            }),
            StrategyName::Rcpd => configs.push(StrategyConfig::Rcpd {
                rules: rules.clone(),
            }),
            StrategyName::All => {
                configs.push(StrategyConfig::NoThink);
                configs.extend(budget_sweep(&budgets));
                if corpus.traces.iter().all(|t| t.has_confidence()) {
                    configs.push(StrategyConfig::Deer {
                        confidence_threshold: deer_threshold,
                    });
                }
                configs.push(StrategyConfig::ThinkRank5);
                configs.push(StrategyConfig::Rcpd {
                    rules: rules.clone(),
                });
            }
        }
    }
    let reports = evaluate_corpus(&corpus, &configs)?;
    let format = a.format.map_or(config.report_format, ReportFormat::from);
    let mut text = emit_report(&reports, format);
    if a.stages {
        let stats = stage_profile(&corpus, &config.stage)?;
        text.push_str(&serde_json::to_string_pretty(&stats).expect("stats serialize"));
        text.push('\n');
    }
    write_output(a.out.as_deref(), &text)
}

fn mine(config: &ToolkitConfig, a: MineArgs) -> Result<(), Error> {
    let corpus = parse_corpus(&a.corpus)?;
    let mut p = config.miner.clone();
    p.depth = a.depth.unwrap_or(p.depth);
    p.n_trees = a.trees.unwrap_or(p.n_trees);
    p.learning_rate = a.lr.unwrap_or(p.learning_rate);
    p.seed = a.seed.unwrap_or(p.seed);
    p.max_rules = a.max_rules.unwrap_or(p.max_rules);
    p.rank_cap = corpus.rank_cap;

    let windows = label_windows(&corpus)?;
    let model = train(&features(&windows, corpus.rank_cap), &p)?;
    let mut out = String::from("importance");
    for k in 0..N_FEATURES {
        out.push_str(&format!("  r{k} {:.2}", model.importance[k]));
    }
    out.push('\n');
    if model.distilled_rules.rules.is_empty() {
        out.push_str("warning: no rule could be distilled\n");
    }
    out.push_str(&describe_rules(&model.distilled_rules));
    if let Some(k) = a.folds {
        let cv = cross_validate(&windows, k, &p)?;
        for f in &cv.folds {
            out.push_str(&format!(
                "fold {}  n={}  ensemble P/R/F1 {:.3}/{:.3}/{:.3}  rules P/R/F1 {:.3}/{:.3}/{:.3}  recall+-1 {:.3}\n",
                f.fold,
                f.n_test,
                f.ensemble.precision,
                f.ensemble.recall,
                f.ensemble.f1,
                f.distilled.precision,
                f.distilled.recall,
                f.distilled.f1,
                f.tolerant_recall
            ));
        }
        out.push_str(&format!(
            "mean    ensemble F1 {:.3}  rules F1 {:.3}  recall+-1 {:.3}{}\n",
            cv.mean_ensemble.f1,
            cv.mean_distilled.f1,
            cv.mean_tolerant_recall,
            if cv.mean_ensemble.degenerate {
                "  (degenerate)"
            } else {
                ""
            }
        ));
    }
    if let Some(path) = &a.emit_rules {
        write_output(Some(path), &(model.distilled_rules.to_json() + "\n"))?;
    }
    if let Some(path) = &a.model_out {
        write_output(
            Some(path),
            &(serde_json::to_string(&model).expect("model serializes") + "\n"),
        )?;
    }
    write_output(None, &out)
}

fn stream(config: &ToolkitConfig, a: StreamArgs) -> Result<(), Error> {
    let rules = load_rules(config, a.rules_file.as_deref())?;
    let cadence = match a.cadence {
        Some(CadenceArg::Sentence) => Cadence::Sentence,
        Some(CadenceArg::Token) => Cadence::Token,
        None => config.cadence,
    };
    let mut ctl = Controller::new(rules, config.segmenter.clone())?
        .with_rank_cap(config.rank_cap)
        .with_cadence(cadence);
    let stdin = io::stdin();
    ctl.serve(stdin.lock(), io::stdout().lock())
        .map_err(|e| Error::Io {
            path: "<stdio>".into(),
            source: e,
        })
}
