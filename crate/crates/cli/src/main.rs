//! `schmidt`: command-line access to the majorization, catalysis and
//! multiple-copy tools.
//!
//! Verdicts go to stdout as one JSON document. Exit status: 0 affirmative,
//! 1 negative or certified never, 2 unknown within budget, 3 input error.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use schmidt_core::catalysis::{search_catalyst, verify_catalyst, verify_catalyst_prob, SearchBudget};
use schmidt_core::majorization::{majorizes, transform_probability};
use schmidt_core::multicopy::{
    in_m, in_m_lambda, multicopy_majorizes, multicopy_probability, never_certificate, prob_tail_certificate,
    Certificate, CopyBudget,
};
use schmidt_core::region::{classify, region_scan, write_scan_csv, ScanConfig};
use schmidt_core::spectrum::DEFAULT_RUN_CAP;
use schmidt_core::witness::{
    augment_target, construct_deterministic_witness, construct_probabilistic_witness, CatalysisEvidence,
};
use schmidt_core::{parse_rational, Error, Rational, SpectrumVector, Tri};

const AFFIRMATIVE: u8 = 0;
const NEGATIVE: u8 = 1;
const UNKNOWN: u8 = 2;
const INPUT_ERROR: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "schmidt", version, about = "Exact LOCC, catalysis and multiple-copy checks on Schmidt vectors")]
struct Cli {
    #[command(flatten)]
    budgets: BudgetArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct BudgetArgs {
    /// Largest catalyst dimension searched
    #[arg(long, global = true, default_value_t = 3)]
    cat_dim: usize,

    /// Largest common denominator of searched catalysts
    #[arg(long, global = true, default_value_t = 40)]
    cat_denom: u64,

    /// Largest copy number tried
    #[arg(long, global = true, default_value_t = 6)]
    kmax: u32,

    /// Cap on distinct values in a tensor power
    #[arg(long, global = true, default_value_t = DEFAULT_RUN_CAP)]
    run_cap: usize,
}

impl BudgetArgs {
    fn search(&self) -> Result<SearchBudget, Error> {
        if self.cat_dim == 0 || self.cat_denom == 0 {
            return Err(Error::PreconditionFailed("catalyst budgets must be positive".into()));
        }
        Ok(SearchBudget {
            max_dim: self.cat_dim,
            max_denominator: self.cat_denom,
        })
    }

    fn copies(&self) -> CopyBudget {
        CopyBudget {
            k_max: self.kmax,
            run_cap: self.run_cap,
        }
    }
}

/// Source vector and target vector, each inline JSON or `@path`.
#[derive(Args, Debug)]
struct Pair {
    /// Source, e.g. '["2/5","2/5","0.1","0.1"]' or @x.json
    #[arg(long)]
    x: String,

    /// Target
    #[arg(long)]
    y: String,
}

impl Pair {
    fn load(&self) -> Result<(SpectrumVector, SpectrumVector), Error> {
        Ok((load_vector(&self.x)?, load_vector(&self.y)?))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is x majorized by y?
    CheckMajorize(Pair),

    /// Maximal conversion probability P(x → y), optionally for k copies
    Prob {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 1)]
        copies: u32,
    },

    /// Verify a given catalyst or search for one
    #[command(group(ArgGroup::new("mode").required(true).args(["catalyst", "search"])))]
    Catalyze {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        catalyst: Option<String>,
        #[arg(long)]
        search: bool,
        /// Required probability (default 1)
        #[arg(long)]
        lambda: Option<String>,
    },

    /// Is some number of copies enough?
    Multicopy {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        lambda: Option<String>,
    },

    /// Look for a certificate that no number of copies suffices
    Certify {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        lambda: Option<String>,
    },

    /// Build a state reachable by catalysis but not by multiple copies
    #[command(group(ArgGroup::new("kind").required(true).args(["deterministic", "lambda"])))]
    Witness {
        #[arg(long)]
        y: String,
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        delta: Option<String>,
    },

    /// Prepend a large component to ȳ and normalize
    Augment {
        #[arg(long)]
        y: String,
        #[arg(long)]
        a: Option<String>,
    },

    /// Membership of x in every region of y
    Classify {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        lambda: Option<String>,
    },

    /// Classify every grid point of the simplex and write CSV
    Scan {
        #[arg(long)]
        y: String,
        #[arg(long)]
        resolution: u64,
        #[arg(long)]
        lambda: Option<String>,
        /// CSV destination; stdout when absent
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_vector(arg: &str) -> Result<SpectrumVector, Error> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?,
        None => arg.to_string(),
    };
    SpectrumVector::from_json(text.trim())
}

fn load_rational(arg: &Option<String>) -> Result<Option<Rational>, Error> {
    arg.as_deref().map(parse_rational).transpose()
}

fn tri_code<Y, N>(t: &Tri<Y, N>) -> u8 {
    match t {
        Tri::Yes(_) => AFFIRMATIVE,
        Tri::No(_) => NEGATIVE,
        Tri::Unknown => UNKNOWN,
    }
}

fn flag(b: bool) -> u8 {
    if b {
        AFFIRMATIVE
    } else {
        NEGATIVE
    }
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Parse(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let search = cli.budgets.search()?;
    let copies = cli.budgets.copies();
    match cli.command {
        Command::CheckMajorize(pair) => {
            let (x, y) = pair.load()?;
            let verdict = majorizes(&x, &y)?;
            emit(&verdict)?;
            Ok(flag(verdict.holds))
        }
        Command::Prob { pair, copies: k } => {
            let (x, y) = pair.load()?;
            let p = if k == 1 {
                transform_probability(&x, &y)?
            } else {
                multicopy_probability(&x, &y, k, copies.run_cap)?
            };
            emit(&json!({ "copies": k, "probability": p }))?;
            Ok(AFFIRMATIVE)
        }
        Command::Catalyze {
            pair,
            catalyst,
            search: _,
            lambda,
        } => {
            let (x, y) = pair.load()?;
            let lambda = load_rational(&lambda)?.unwrap_or_else(|| Rational::from_integer(1.into()));
            match catalyst {
                Some(c) => {
                    let c = load_vector(&c)?;
                    let verdict = verify_catalyst(&x, &y, &c)?;
                    let p = verify_catalyst_prob(&x, &y, &c)?;
                    let reached = p.value >= lambda;
                    emit(&json!({ "catalyst": c, "majorization": verdict, "probability": p, "reached": reached }))?;
                    Ok(flag(reached))
                }
                None => {
                    let outcome = search_catalyst(&x, &y, &lambda, &search)?;
                    emit(&json!({ "search": outcome, "budget": search }))?;
                    Ok(tri_code(&outcome))
                }
            }
        }
        Command::Multicopy { pair, lambda } => {
            let (x, y) = pair.load()?;
            let outcome = match load_rational(&lambda)? {
                Some(l) => in_m_lambda(&x, &y, &l, &copies)?,
                None => in_m(&x, &y, &copies)?,
            };
            let mut doc = json!({ "in_M": outcome, "budget": copies });
            if let Tri::Yes(k) = outcome {
                doc["majorization"] = serde_json::to_value(multicopy_majorizes(&x, &y, k, copies.run_cap)?)
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
            emit(&doc)?;
            Ok(tri_code(&outcome))
        }
        Command::Certify { pair, lambda } => {
            let (x, y) = pair.load()?;
            let cert = match load_rational(&lambda)? {
                Some(l) if l < Rational::from_integer(1.into()) => {
                    prob_tail_certificate(&x, &y, &l)?.map(Certificate::ProbTail)
                }
                _ => never_certificate(&x, &y),
            };
            emit(&json!({ "certificate": cert }))?;
            Ok(if cert.is_some() { NEGATIVE } else { UNKNOWN })
        }
        Command::Witness {
            y,
            deterministic: _,
            lambda,
            epsilon,
            delta,
        } => {
            let y = load_vector(&y)?;
            let epsilon = load_rational(&epsilon)?;
            let delta = load_rational(&delta)?;
            let bundle = match load_rational(&lambda)? {
                Some(l) => construct_probabilistic_witness(&y, &l, epsilon.as_ref(), delta.as_ref(), &search)?,
                None => construct_deterministic_witness(&y, epsilon.as_ref(), delta.as_ref(), &search)?,
            };
            emit(&bundle)?;
            Ok(match bundle.catalysis_evidence {
                CatalysisEvidence::Found(_) => AFFIRMATIVE,
                CatalysisEvidence::Unknown => UNKNOWN,
            })
        }
        Command::Augment { y, a } => {
            let y = load_vector(&y)?;
            let a = load_rational(&a)?;
            emit(&augment_target(&y, a.as_ref())?)?;
            Ok(AFFIRMATIVE)
        }
        Command::Classify { pair, lambda } => {
            let (x, y) = pair.load()?;
            let lambda = load_rational(&lambda)?;
            emit(&classify(&x, &y, lambda.as_ref(), &search, &copies)?)?;
            Ok(AFFIRMATIVE)
        }
        Command::Scan {
            y,
            resolution,
            lambda,
            output,
        } => {
            let config = ScanConfig {
                target: load_vector(&y)?,
                lambda: load_rational(&lambda)?,
                resolution,
                search,
                copies,
            };
            let rows = region_scan(&config)?;
            match output {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
                    write_scan_csv(&config, &rows, io::BufWriter::new(file))?;
                    emit(&json!({ "rows": rows.len(), "output": path, "config": config }))?;
                }
                None => write_scan_csv(&config, &rows, io::stdout().lock())?,
            }
            Ok(AFFIRMATIVE)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(INPUT_ERROR);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::BudgetExceeded(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(UNKNOWN)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
