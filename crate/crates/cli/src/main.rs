mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use commands::{EnumerateArgs, Failure, Options, ReduceArgs, Session, Stage, Status};

#[derive(Parser)]
#[command(name = "linrec", about = "Certified solution of equations between two linear recurrences", version)]
struct Cli {
    /// Problem configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Working precision in bits for the bound chain.
    #[arg(long, global = true, value_name = "BITS")]
    precision: Option<u32>,

    /// Worker threads; output does not depend on this.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Campaign checkpoint directory.
    #[arg(long, global = true, value_name = "DIR")]
    checkpoint: Option<PathBuf>,

    /// Continue from an existing checkpoint.
    #[arg(long, global = true)]
    resume: bool,

    /// Also write certificates into this directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Admissibility and certified spectral data of both recurrences
    Analyze,
    /// Dominance certificates, or a witness when dominance fails
    Dominance,
    /// Explicit constant chain and the initial bound on n1
    Bound,
    /// Reduce one cell with Baker-Davenport or Legendre
    Reduce {
        /// Weight split (k,l) to use in numeration mode
        #[arg(long, value_parser = parse_pair)]
        split: Option<(usize, usize)>,
        /// Pair (K,L) of the cell
        #[arg(long, value_parser = parse_pair, default_value = "2,2")]
        pair: (usize, usize),
        /// Gaps n1 - n_i, comma separated
        #[arg(long, value_delimiter = ',')]
        n_gaps: Vec<u64>,
        /// Gaps m1 - m_j, comma separated
        #[arg(long, value_delimiter = ',')]
        m_gaps: Vec<u64>,
        /// Replace the derived bound on n1
        #[arg(long)]
        n1_bound: Option<String>,
    },
    /// Run the reduction campaign to a final bound
    Campaign,
    /// List the solutions inside given bounds
    Enumerate {
        #[arg(long)]
        n1_max: Option<u64>,
        #[arg(long)]
        m1_max: Option<u64>,
        /// Check every n up to this bound instead
        #[arg(long)]
        brute: Option<u64>,
        /// Show digit indices; Zeckendorf indices also in classical form
        #[arg(long)]
        annotate: bool,
    },
    /// Check the Zeckendorf/binary solution tables (no config needed)
    Verify {
        /// Tables to check instead of the built-in ones, one `M: values` line each
        #[arg(long, value_name = "FILE")]
        tables: Option<PathBuf>,
        /// Do not apply the known errata
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = 1_000_000)]
        bound: u64,
    },
    /// Run every stage in order and write the certificates
    Pipeline {
        /// Stop after this stage
        #[arg(long, value_enum, default_value = "enumerate")]
        stage: Stage,
        #[arg(long)]
        annotate: bool,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected two values `a,b`")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn run(cli: Cli) -> Result<Status, Failure> {
    if let Commands::Verify { tables, raw, bound } = &cli.command {
        let (report, ok) = commands::verify(tables.as_deref(), *raw, *bound)?;
        print!("{report}");
        return if ok { Ok(Status::Complete) } else { Err(Failure::Mismatch("tables disagree with the computed lists".into())) };
    }
    let path = cli.config.ok_or_else(|| Failure::Config("--config is required for this command".into()))?;
    let cfg = config::load(&path).map_err(|e| Failure::Config(e.to_string()))?;
    let jobs = cli.jobs.or(cfg.jobs).unwrap_or(0);
    let opts = Options { precision: cli.precision, checkpoint: cli.checkpoint, resume: cli.resume, out: cli.out };
    let session = Session::new(cfg, opts);
    linrec::par::with_jobs(jobs, move || match cli.command {
        Commands::Analyze => single(&session, Stage::Analyze, session.analyze()),
        Commands::Dominance => single(&session, Stage::Dominance, session.dominance()),
        Commands::Bound => single(&session, Stage::Bound, session.bound()),
        Commands::Reduce { split, pair, n_gaps, m_gaps, n1_bound } => {
            print!("{}", session.reduce(&ReduceArgs { split, pair, n_gaps, m_gaps, n1_bound })?);
            Ok(Status::Complete)
        }
        Commands::Campaign => {
            let (text, st) = session.campaign()?;
            session.emit_stage(Stage::Campaign, &text)?;
            Ok(st)
        }
        Commands::Enumerate { n1_max, m1_max, brute, annotate } => {
            single(&session, Stage::Enumerate, session.enumerate(&EnumerateArgs { n1_max, m1_max, brute, annotate }))
        }
        Commands::Pipeline { stage, annotate } => session.pipeline(stage, annotate),
        Commands::Verify { .. } => unreachable!(),
    })
}

fn single(session: &Session, stage: Stage, text: Result<String, Failure>) -> Result<Status, Failure> {
    session.emit_stage(stage, &text?)?;
    Ok(Status::Complete)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Status::Complete) => ExitCode::SUCCESS,
        Ok(Status::Conditional) => ExitCode::from(4),
        Err(f) => {
            eprintln!("error: {}", f.message().trim_end());
            ExitCode::from(f.exit_code())
        }
    }
}
