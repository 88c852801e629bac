//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage or parameter error, 2 input error,
//! 3 the sanitized database failed its hiding re-check.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::hiding::{
    render_modification_log, sanitize_with, verify_hidden, HidingParams, HidingStatus,
    WeightRegistry,
};
use crate::mining::{MinSupport, MinerRegistry, MiningParams};
use crate::ratio::{parse_decimal, Ratio};
use crate::report::{compare, render_report};
use crate::rules::{mine_rules, parse_rules_file, RuleParams};
use crate::store::{parse_basket, parse_basket_with_dictionary, serialize_basket, TransactionDb};

#[derive(Debug, Parser)]
#[command(
    name = "rulehide",
    version,
    about = "Mine association rules and hide sensitive ones"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List frequent itemsets.
    Mine {
        #[command(flatten)]
        io: InputOutput,
        #[command(flatten)]
        support: SupportArgs,
        /// Frequent itemset miner.
        #[arg(long, default_value = "apriori")]
        miner: String,
    },
    /// List association rules.
    Rules {
        #[command(flatten)]
        io: InputOutput,
        #[command(flatten)]
        support: SupportArgs,
        #[arg(long, value_parser = ratio_arg)]
        min_confidence: Ratio,
        #[arg(long, default_value = "apriori")]
        miner: String,
    },
    /// Sanitize a basket file so the sensitive rules can no longer be mined.
    Hide {
        #[arg(long)]
        input: PathBuf,
        /// Rules file with one `X -> Y` per line.
        #[arg(long)]
        sensitive: PathBuf,
        /// Sanitized basket file.
        #[arg(long)]
        output: PathBuf,
        /// Modification log.
        #[arg(long)]
        log: PathBuf,
        #[command(flatten)]
        support: SupportArgs,
        #[arg(long, value_parser = ratio_arg)]
        min_confidence: Ratio,
        #[arg(long, value_parser = ratio_arg, default_value = "0")]
        safety_margin: Ratio,
        /// Rule weight used to rank candidate transactions.
        #[arg(long, default_value = "confidence")]
        weight: String,
    },
    /// Report side effects between an original and a sanitized basket file.
    Diff {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        sanitized: PathBuf,
        #[command(flatten)]
        support: SupportArgs,
        #[arg(long, value_parser = ratio_arg)]
        min_confidence: Ratio,
        /// Rules file naming the sensitive rules.
        #[arg(long)]
        sensitive: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputOutput {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SupportArgs {
    /// Minimum support as a fraction of the transaction count.
    #[arg(long, value_parser = ratio_arg)]
    min_support: Option<Ratio>,
    /// Minimum support as a transaction count.
    #[arg(long)]
    min_support_count: Option<u64>,
}

impl SupportArgs {
    fn resolve(&self) -> MinSupport {
        match (self.min_support, self.min_support_count) {
            (_, Some(c)) => MinSupport::Count(c),
            (Some(s), None) => MinSupport::Fraction(s),
            // The arg group requires one of the two.
            (None, None) => MinSupport::Count(1),
        }
    }
}

fn ratio_arg(s: &str) -> Result<Ratio, String> {
    parse_decimal(s).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Hiding(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Hiding(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Hiding(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Param(_) | Error::UnknownStrategy { .. } | Error::TooManyItems { .. } => {
                Failure::Usage(e.to_string())
            }
            Error::HidingFailed(_) => Failure::Hiding(e.to_string()),
            Error::Parse { .. }
            | Error::UnknownItem(_)
            | Error::Contract(_)
            | Error::UndefinedConfidence => Failure::Input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_db(path: &Path) -> Result<TransactionDb, Failure> {
    parse_basket(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(p) => write_file(p, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "rulehide: {}", f.message());
            f.code()
        }
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Mine { io, support, miner } => {
            let db = read_db(&io.input)?;
            let miners = MinerRegistry::default();
            let freq = miners.get(miner)?.mine(
                &db,
                &MiningParams {
                    min_support: support.resolve(),
                },
            )?;
            let mut out = String::new();
            for f in freq.iter() {
                out.push_str(&format!(
                    "{} support={}\n",
                    db.dictionary().display(&f.itemset),
                    f.support
                ));
            }
            out.push_str(&format!("scans={}\n", freq.scan_count));
            emit(io.output.as_deref(), &out, stdout)
        }
        Command::Rules {
            io,
            support,
            min_confidence,
            miner,
        } => {
            let params = RuleParams::new(
                MiningParams {
                    min_support: support.resolve(),
                },
                *min_confidence,
            )?;
            let db = read_db(&io.input)?;
            let freq = MinerRegistry::default()
                .get(miner)?
                .mine(&db, &params.mining)?;
            let rules = mine_rules(&freq, &db, &params)?;
            let mut out = String::new();
            for r in rules.iter() {
                out.push_str(&format!("{}\n", r.listing(db.dictionary())));
            }
            emit(io.output.as_deref(), &out, stdout)
        }
        Command::Hide {
            input,
            sensitive,
            output,
            log,
            support,
            min_confidence,
            safety_margin,
            weight,
        } => {
            let params = HidingParams::new(support.resolve(), *min_confidence, *safety_margin)?;
            let weights = WeightRegistry::default();
            let weight = weights.get(weight)?;
            let db = read_db(input)?;
            let specs = parse_rules_file(&read(sensitive)?, &db)
                .map_err(|e| Failure::Input(format!("{}: {e}", sensitive.display())))?;
            let result = sanitize_with(&db, &specs, &params, weight)?;
            verify_hidden(&result.sanitized, &specs, &params)?;

            write_file(output, &serialize_basket(&result.sanitized))?;
            write_file(
                log,
                &render_modification_log(db.dictionary(), &result.modifications),
            )?;

            let dict = db.dictionary();
            let conf =
                |c: Option<Ratio>| c.map_or_else(|| "undefined".to_string(), |c| c.to_string());
            let mut out = String::new();
            for o in &result.outcomes {
                let status = match o.status {
                    HidingStatus::Hidden => "hidden",
                    HidingStatus::AlreadyHidden => "already-hidden",
                };
                out.push_str(&format!(
                    "{} status={} deletions={} conf={}->{}\n",
                    o.rule.display(dict),
                    status,
                    o.touched.len(),
                    conf(o.initial_confidence),
                    conf(o.final_confidence)
                ));
            }
            out.push_str(&format!("deletions={}\n", result.modifications.len()));
            emit(None, &out, stdout)
        }
        Command::Diff {
            original,
            sanitized,
            support,
            min_confidence,
            sensitive,
        } => {
            // No margin: the diff mines at the public thresholds.
            let public = RuleParams::new(
                MiningParams {
                    min_support: support.resolve(),
                },
                *min_confidence,
            )?;
            let params = HidingParams {
                min_support: public.mining.min_support,
                min_confidence: public.min_confidence,
                safety_margin: Ratio::from_integer(0),
            };
            let before = read_db(original)?;
            let after = parse_basket_with_dictionary(&read(sanitized)?, before.dictionary())
                .map_err(|e| Failure::Input(format!("{}: {e}", sanitized.display())))?;
            let specs = match sensitive {
                Some(p) => parse_rules_file(&read(p)?, &before)
                    .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
                None => Vec::new(),
            };
            let report = compare(&before, &after, &params, &specs)?;
            emit(None, &render_report(&report, before.dictionary()), stdout)
        }
    }
}
