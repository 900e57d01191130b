use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use upcong_siegel::lattice::DEFAULT_BUDGET;

#[derive(Parser, Debug, Clone)]
#[command(name = "upcong", version, about = "U(p) congruences of Jacobi forms of lattice index and Siegel modular forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for the parallel parts (rayon); defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the report to this file instead of stdout. A manifest without
    /// the bulky payload is written next to it as `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Integral basis of J_{k,M}, found by restriction to scalar index.
    Basis {
        #[arg(short = 'k', long = "weight", allow_hyphen_values = true)]
        k: i64,
        /// `I<l>`, an inline 2M matrix such as `[[2,1],[1,2]]`, or a JSON file.
        #[arg(long, default_value = "I3")]
        index: String,
        /// Number of q-powers; raised to the Sturm requirement if lower.
        #[arg(long)]
        precision: Option<usize>,
    },
    /// The forms of weight k with phi | U_p = 0 mod p.
    UpSpace {
        #[arg(short = 'k', long = "weight", allow_hyphen_values = true)]
        k: i64,
        #[arg(long, default_value = "I3")]
        index: String,
        #[arg(short = 'p', long = "prime")]
        p: u64,
    },
    /// Filtrations along phi, L phi, ..., L^{p-1} phi mod p.
    HeatCycle {
        /// JSON file of a Jacobi expansion, or `table1:<name>`.
        #[arg(long)]
        form: String,
        #[arg(short = 'p', long = "prime")]
        p: u64,
        #[arg(long)]
        precision: Option<usize>,
    },
    /// Predicted congruence behaviour from weight, rank or degree and p.
    Criterion {
        #[command(subcommand)]
        family: Family,
    },
    /// Pullback phi(tau, z s) to scalar index.
    Restrict {
        #[arg(long)]
        form: String,
        /// Comma separated integer vector.
        #[arg(short = 's', long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        s: Vec<i64>,
    },
    /// Degree g theta series of an even lattice up to trace N.
    LatticeTheta {
        /// `e8`, `d16+`, `e8+e8`, an inline Gram matrix, or a JSON file.
        #[arg(long)]
        gram: String,
        #[arg(short = 'g', long)]
        degree: usize,
        #[arg(short = 'N', long)]
        trace_bound: i64,
        /// Work limit for the enumeration.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Checks the shipped integral basis table against computed spaces.
    #[command(name = "check-table1")]
    CheckTable1,
    /// Theta series difference of the two even unimodular rank 16 lattices
    /// in degree four, normalized and read off at the fixture matrix.
    Schottky {
        #[arg(short = 'p', long = "prime", default_value_t = 5)]
        p: u64,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum Family {
    Jacobi {
        #[arg(short = 'k', long = "weight", allow_hyphen_values = true)]
        k: i64,
        /// Rank of the index; the index defaults to I_l.
        #[arg(short = 'l', long)]
        rank: Option<usize>,
        #[arg(long)]
        index: Option<String>,
        #[arg(short = 'p', long = "prime", value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        /// Also check every prediction against computed congruence spaces.
        #[arg(long)]
        verify: bool,
    },
    Siegel {
        #[arg(short = 'k', long = "weight", allow_hyphen_values = true)]
        k: i64,
        #[arg(short = 'g', long)]
        degree: usize,
        #[arg(short = 'p', long = "prime", value_delimiter = ',', required = true)]
        primes: Vec<u64>,
    },
}
