use std::path::PathBuf;
use std::process::ExitCode;

use btt_cli::{
    render_error, run_check, run_eval, run_iso, run_j, run_sa_normalize, run_simplify, run_transport, CliError, Format,
    JArgs, Options, Pair,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Checker and isomorphism engine for Bourbaki-style dependent type theory.
#[derive(Parser, Debug)]
#[command(name = "btt", version)]
struct Cli {
    /// Largest set the evaluator may materialize, bijection candidates included.
    #[arg(long, global = true, env = "BTT_BUDGET")]
    budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Model file (.bttm) binding the free variables.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Instances {
    /// Model name of the first instance.
    #[arg(long, default_value = "N")]
    left: String,
    /// Model name of the second instance.
    #[arg(long, default_value = "N'")]
    right: String,
}

impl Instances {
    fn pair(&self) -> Pair {
        Pair { left: self.left.clone(), right: self.right.clone() }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the `#check`, `#check_fail` and `#eval` directives of source files.
    Check { files: Vec<PathBuf> },
    /// Evaluate an expression under the definitions of the sources and a model.
    Eval {
        expr: String,
        files: Vec<PathBuf>,
    },
    /// Print the signature-axiom normal form of a class.
    SaNormalize {
        files: Vec<PathBuf>,
        /// Class expression; defaults to the last definition.
        #[arg(long)]
        class: Option<String>,
    },
    /// Simplify a signature, or the signature of a class's normal form.
    Simplify {
        files: Vec<PathBuf>,
        #[arg(long)]
        class: Option<String>,
    },
    /// Enumerate the isomorphisms between two instances of a class.
    Iso {
        files: Vec<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        #[command(flatten)]
        instances: Instances,
    },
    /// Carry an instance along a bijection tuple.
    Transport {
        files: Vec<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value = "N")]
        instance: String,
        /// Model name of the bijection tuple.
        #[arg(long, default_value = "f")]
        bijection: String,
    },
    /// Tabulate J' for a three-parameter type macro.
    Jprime {
        files: Vec<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        #[command(flatten)]
        instances: Instances,
        /// Model name of the isomorphism; defaults to the first witness.
        #[arg(long)]
        bijection: Option<String>,
        #[arg(long)]
        tau: String,
    },
    /// Evaluate J on the value of a one-parameter macro.
    J {
        files: Vec<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        #[command(flatten)]
        instances: Instances,
        #[arg(long)]
        bijection: Option<String>,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        delta: String,
    },
}

fn dispatch(cli: Cli) -> Result<btt_cli::Output, CliError> {
    let opts = Options {
        budget: cli.budget,
        format: match cli.format {
            OutputFormat::Text => Format::Text,
            OutputFormat::Json => Format::Json,
        },
        model: cli.model,
    };
    match cli.command {
        Command::Check { files } => run_check(&files, &opts),
        Command::Eval { expr, files } => run_eval(&files, &expr, &opts),
        Command::SaNormalize { files, class } => run_sa_normalize(&files, class.as_deref(), &opts),
        Command::Simplify { files, class } => run_simplify(&files, class.as_deref(), &opts),
        Command::Iso { files, class, instances } => run_iso(&files, class.as_deref(), &instances.pair(), &opts),
        Command::Transport { files, class, instance, bijection } => {
            run_transport(&files, class.as_deref(), &instance, &bijection, &opts)
        }
        Command::Jprime { files, class, instances, bijection, tau } => {
            let args = JArgs { class, pair: instances.pair(), bijection, tau, delta: None };
            run_j(&files, &args, &opts)
        }
        Command::J { files, class, instances, bijection, tau, delta } => {
            let args = JArgs { class, pair: instances.pair(), bijection, tau, delta: Some(delta) };
            run_j(&files, &args, &opts)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = match cli.format {
        OutputFormat::Text => Format::Text,
        OutputFormat::Json => Format::Json,
    };
    match dispatch(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("{}", render_error(&e, format));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
