use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use fmbasis::Strategy;
use fmbasis_cli::{parse_shard, run, Command, OutputFormat, RunRequest, SearchOptions};

#[derive(Parser)]
#[command(name = "fmb", version, about = "Filtered multiplicative bases of modular group algebras")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// json or table
    #[arg(long, global = true, env = "FMB_OUTPUT", default_value = "json", value_parser = str::parse::<OutputFormat>)]
    output: OutputFormat,
}

#[derive(Args)]
struct Target {
    /// e.g. dihedral(n=3), quaternion8, metacyclic(2,2,2,2,3), product(abelian(2),abelian(4))
    #[arg(long)]
    group: Option<String>,
    /// e.g. gf(2), gf(4), gf(2^3;modulus=x^3+x+1); defaults to the prime field
    #[arg(long)]
    field: Option<String>,
}

#[derive(Args)]
struct CandidateArgs {
    #[command(flatten)]
    target: Target,
    /// Candidate basis as written by `construct` or `search`
    #[arg(long, conflicts_with = "construct")]
    basis: Option<PathBuf>,
    /// auto, abelian, dihedral, quaternion8, example16, product
    #[arg(long)]
    construct: Option<String>,
    /// Parameters of the example16 construction
    #[arg(long, num_args = 2, value_names = ["M1", "M2"], allow_hyphen_values = true)]
    mu: Option<Vec<String>>,
    /// Cube root of unity for quaternion8
    #[arg(long)]
    omega: Option<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    target: Target,
    /// structured or brute_pairs
    #[arg(long, default_value = "structured", value_parser = str::parse::<Strategy>)]
    strategy: Strategy,
    /// i/N
    #[arg(long, default_value = "0/1", value_parser = parse_shard)]
    shard: (usize, usize),
    #[arg(long)]
    record_all: bool,
    /// Maximum number of search nodes
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Seconds
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Group table, element orders and Jennings series
    GroupInfo(Target),
    /// Powers of the augmentation ideal and dimension subgroups
    Filtration(Target),
    /// Check a candidate basis
    Verify(CandidateArgs),
    /// Build a catalog basis
    Construct(CandidateArgs),
    /// Exhaustive basis search
    Search(SearchArgs),
    /// Compare the structured and brute-force searches
    OracleCheck(Target),
}

fn request(cli: Cli) -> Result<RunRequest, String> {
    let mut req = RunRequest::new(Command::GroupInfo, "", "");
    req.group = None;
    req.field = None;
    req.output = cli.output;
    let target = |req: &mut RunRequest, t: Target| {
        req.group = t.group;
        req.field = t.field;
    };
    match cli.command {
        Cmd::GroupInfo(t) => target(&mut req, t),
        Cmd::Filtration(t) => {
            req.command = Command::Filtration;
            target(&mut req, t);
        }
        Cmd::OracleCheck(t) => {
            req.command = Command::OracleCheck;
            target(&mut req, t);
        }
        Cmd::Verify(c) => {
            req.command = Command::Verify;
            candidate(&mut req, c);
        }
        Cmd::Construct(c) => {
            req.command = Command::Construct;
            candidate(&mut req, c);
        }
        Cmd::Search(s) => {
            req.command = Command::Search;
            target(&mut req, s.target);
            let time_limit = match s.time_limit {
                Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
                Some(t) => return Err(format!("bad --time-limit {t}")),
                None => None,
            };
            req.search = SearchOptions {
                strategy: s.strategy,
                shard: s.shard,
                record_all: s.record_all,
                budget: s.budget,
                jobs: s.jobs,
                time_limit,
            };
        }
    }
    Ok(req)
}

fn candidate(req: &mut RunRequest, c: CandidateArgs) {
    req.group = c.target.group;
    req.field = c.target.field;
    req.basis = c.basis;
    req.construct = c.construct;
    req.mu = c.mu.map(|m| (m[0].clone(), m[1].clone()));
    req.omega = c.omega;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // exit code 2 is reserved for negative results
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let req = match request(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = run(&req);
    print!("{}", out.stdout);
    ExitCode::from(out.exit_code as u8)
}
