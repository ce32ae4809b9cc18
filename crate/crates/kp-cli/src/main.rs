//! `kp`: exact open intersection numbers from the command line.

mod cache;
mod check;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kp_core::asymptotics::{a_matrix, p_poly_hypergeom, p_poly_product, PPolyKey};
use kp_core::correlators::{correlator_table, default_cap, extract, extract_with_cap, s_n_expansion, MAX_VARS};
use kp_core::{KpError, PolyN};
use serde::Serialize;

use cache::PolyCache;
use check::Suite;
use output::{json_line, Format, TableDocument, TableFormat};

#[derive(Parser)]
#[command(name = "kp", version, about = "Open intersection numbers as exact polynomials in N")]
struct Cli {
    /// Worker threads for the parallel engine.
    #[arg(long, global = true, value_name = "J", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Neither read nor write the P-polynomial cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One correlator; integer d stands for tau_{d/2}.
    Correlator {
        #[arg(required = true, value_name = "D")]
        d: Vec<u32>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
        /// Skip the cap-doubling confirmation.
        #[arg(long)]
        no_stability: bool,
    },
    /// All nonzero n-point correlators with every d_i <= dmax.
    Table {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=6))]
        n: u32,
        dmax: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: TableFormat,
        /// Output file, written atomically; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The polynomial P^k_{a,b}(N).
    #[command(allow_negative_numbers = true)]
    Ppoly {
        #[arg(value_parser = clap::value_parser!(i64).range(-1..=1))]
        a: i64,
        #[arg(value_parser = clap::value_parser!(i64).range(-1..=1))]
        b: i64,
        k: u64,
        #[arg(long, value_enum, default_value = "product")]
        method: Method,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Entries of A as series in x = lambda^(-1/2).
    Amatrix {
        #[arg(value_parser = clap::value_parser!(i64).range(2..))]
        order: i64,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Coefficients of S_n in the window 0 <= e_i <= dmax + 2.
    Series {
        #[arg(value_parser = clap::value_parser!(u32).range(2..=MAX_VARS as i64))]
        n: u32,
        dmax: u32,
        /// Geometric truncation order; defaults to dmax + 6.
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Run validation suites; exit status 1 if any check fails.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Reduced parameter grids.
        #[arg(long)]
        quick: bool,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Product,
    Hypergeom,
    Both,
}

#[derive(Debug)]
enum Failure {
    Compute(KpError),
    Io(std::io::Error),
    /// Already reported on stdout.
    Checks,
    Disagree(String),
}

impl From<KpError> for Failure {
    fn from(e: KpError) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_jobs(cli.jobs);
    let cache = if cli.no_cache { None } else { cache::default_dir().map(|d| PolyCache::open(&d)) };
    let result = run(cli.command);
    if let Some(c) = &cache {
        if let Err(e) = c.save() {
            log::warn!("could not write cache {}: {e}", c.path().display());
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match f {
                Failure::Compute(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
                Failure::Disagree(msg) => eprintln!("error: {msg}"),
                Failure::Checks => {}
            }
            ExitCode::from(1)
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_jobs(jobs: Option<u32>) {
    if let Some(j) = jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_jobs(jobs: Option<u32>) {
    if jobs.is_some_and(|j| j > 1) {
        log::warn!("built without the parallel feature; --jobs is ignored");
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Correlator { d, format, no_stability } => {
            let dmax = d.iter().copied().max().unwrap_or(0);
            let c = if no_stability { extract_with_cap(&d, dmax, default_cap(dmax))? } else { extract(&d, dmax)? };
            match format {
                Format::Human => println!("{}", c.value),
                Format::Json => print!("{}", json_line(&c)),
            }
        }
        Command::Table { n, dmax, format, out } => {
            let doc = TableDocument::new(n as usize, dmax, correlator_table(n as usize, dmax)?);
            let text = doc.render(format);
            match out {
                Some(path) => cache::write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Ppoly { a, b, k, method, format } => {
            let key = PPolyKey::new(a, b, k);
            let poly = match method {
                Method::Product => p_poly_product(key),
                Method::Hypergeom => p_poly_hypergeom(key)?,
                Method::Both => {
                    let p = p_poly_product(key);
                    let h = p_poly_hypergeom(key)?;
                    if p != h {
                        return Err(Failure::Disagree(format!("product {p} differs from hypergeometric {h}")));
                    }
                    p
                }
            };
            match format {
                Format::Human => println!("{poly}"),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc {
                        a: i64,
                        b: i64,
                        k: u64,
                        method: Method,
                        poly: PolyN,
                    }
                    print!("{}", json_line(&Doc { a, b, k, method, poly }));
                }
            }
        }
        Command::Amatrix { order, format } => {
            let m = a_matrix(order);
            #[derive(Serialize)]
            struct Term<'a> {
                exp: i64,
                coeff: &'a PolyN,
            }
            #[derive(Serialize)]
            struct Entry<'a> {
                row: usize,
                col: usize,
                terms: Vec<Term<'a>>,
            }
            let entries: Vec<Entry> = (0..3)
                .flat_map(|r| (0..3).map(move |c| (r, c)))
                .map(|(r, c)| Entry {
                    row: r + 1,
                    col: c + 1,
                    terms: m.entry(r, c).terms().map(|(exp, coeff)| Term { exp, coeff }).collect(),
                })
                .collect();
            match format {
                Format::Human => {
                    for e in &entries {
                        let terms: Vec<String> = e.terms.iter().map(|t| format!("({})*x^{}", t.coeff, t.exp)).collect();
                        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                        println!("A[{}][{}] = {body} + O(x^{})", e.row, e.col, m.entry(e.row - 1, e.col - 1).max_exp() + 1);
                    }
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        order: i64,
                        variable: &'static str,
                        entries: Vec<Entry<'a>>,
                    }
                    print!("{}", json_line(&Doc { order, variable: "x = lambda^(-1/2)", entries }));
                }
            }
        }
        Command::Series { n, dmax, cap, format } => {
            let cap = cap.unwrap_or_else(|| default_cap(dmax));
            let s = s_n_expansion(n as usize, dmax, cap)?;
            match format {
                Format::Human => print!("{}", s.debug_dump()),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Term<'a> {
                        exps: &'a [i64],
                        coeff: &'a PolyN,
                    }
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        n: u32,
                        dmax: u32,
                        cap: u32,
                        terms: Vec<Term<'a>>,
                    }
                    let terms = s.terms().map(|(exps, coeff)| Term { exps, coeff }).collect();
                    print!("{}", json_line(&Doc { n, dmax, cap, terms }));
                }
            }
        }
        Command::Check { suite, quick, format } => {
            let report = check::run(suite, quick);
            match format {
                Format::Human => print!("{}", report.human()),
                Format::Json => print!("{}", json_line(&report)),
            }
            if !report.passed {
                return Err(Failure::Checks);
            }
        }
    }
    Ok(())
}
