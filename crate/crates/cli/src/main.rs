use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dyadrep::commands::{run, Command, RunError};
use dyadrep::config::{ExperimentConfig, Settings};
use dyadrep::exit;

#[derive(Parser, Debug)]
#[command(name = "dyadrep", version, about = "Dyadic representation experiments for weak Calderon-Zygmund forms")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Reconstruction of the form from main term plus error term.
    VerifyBcr(Flags),
    /// Decay of the error term in a and b.
    ErrorDecay(Flags),
    /// Diagonal plus off-diagonal blocks against the main term.
    VerifySplit(Flags),
    /// Frequency of good cubes and its independence of position.
    GoodnessStats(Flags),
    /// Expectation of off-diagonal blocks against normalized shifts.
    VerifyAveraging(Flags),
    /// Monte-Carlo estimate of the full representation.
    VerifyRepresentation(Flags),
    /// Empirical shift norms against the logarithmic envelope.
    ShiftNorms(Flags),
    /// Dini norms of a modulus and the k-tail weight.
    Dini(Flags),
}

/// Every flag mirrors a config file key; flags win over the file.
#[derive(Args, Debug, Default)]
struct Flags {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `hilbert` or `power:<d>:<delta>`.
    #[arg(long)]
    kernel: Option<String>,
    /// Preset name, `random`, `zero`, inline JSON or a JSON file.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    k_max: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated dimensions (goodness-stats).
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated shift orders.
    #[arg(long)]
    k: Option<String>,
    /// `11`, `10`, `01`, a list of them or `all`.
    #[arg(long)]
    gamma: Option<String>,
    /// `power:<delta>` or `zero` (dini).
    #[arg(long)]
    omega: Option<String>,
    /// Comma-separated Dini exponents.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// `random`, `zero` or `separating`.
    #[arg(long)]
    theta: Option<String>,
    /// `averaged` or `plain`.
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    fast_t1: Option<String>,
}

impl Flags {
    fn settings(&self) -> Settings {
        let mut st = Settings::default();
        let pairs: [(&str, &Option<String>); 20] = [
            ("kernel", &self.kernel),
            ("f", &self.f),
            ("g", &self.g),
            ("a", &self.a),
            ("b", &self.b),
            ("k-max", &self.k_max),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("p", &self.p),
            ("threads", &self.threads),
            ("out", &self.out),
            ("d", &self.d),
            ("k", &self.k),
            ("gamma", &self.gamma),
            ("omega", &self.omega),
            ("s", &self.s),
            ("tol", &self.tol),
            ("theta", &self.theta),
            ("normalization", &self.normalization),
            ("fast-t1", &self.fast_t1),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                st.set(k, v.clone());
            }
        }
        st
    }
}

fn split(cmd: Cmd) -> (Command, Flags) {
    match cmd {
        Cmd::VerifyBcr(f) => (Command::VerifyBcr, f),
        Cmd::ErrorDecay(f) => (Command::ErrorDecay, f),
        Cmd::VerifySplit(f) => (Command::VerifySplit, f),
        Cmd::GoodnessStats(f) => (Command::GoodnessStats, f),
        Cmd::VerifyAveraging(f) => (Command::VerifyAveraging, f),
        Cmd::VerifyRepresentation(f) => (Command::VerifyRepresentation, f),
        Cmd::ShiftNorms(f) => (Command::ShiftNorms, f),
        Cmd::Dini(f) => (Command::Dini, f),
    }
}

fn load(flags: &Flags) -> anyhow::Result<ExperimentConfig> {
    let base = match &flags.config {
        Some(path) => Settings::read_file(path)?,
        None => Settings::default(),
    };
    ExperimentConfig::from_settings(&base.merge(&flags.settings()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (command, flags) = split(cli.command);
    let cfg = match load(&flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("dyadrep: configuration error: {e:#}");
            return ExitCode::from(exit::CONFIG as u8);
        }
    };
    match run(command, &cfg) {
        Ok(out) => {
            for v in &out.verdicts {
                println!("{}", v.line());
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e @ RunError::Config(_)) => {
            eprintln!("dyadrep: {e}");
            ExitCode::from(exit::CONFIG as u8)
        }
        Err(e @ RunError::Compute(_)) => {
            eprintln!("dyadrep: {e}");
            ExitCode::from(exit::FAIL as u8)
        }
    }
}
