use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::Point;

/// Herglotz representations, measure recovery and rational inner approximation.
///
/// Structured inputs (`--f`, `--rep`, `--domain`, ...) take inline JSON or a
/// path to a JSON file. Points are complex numbers such as `0.3+0.1i`;
/// coordinates of points in several variables are separated by commas.
///
/// Exit status: 0 when every check passes, 2 when a mathematical check fails,
/// 1 on usage errors (bad flags, malformed JSON, unreadable files).
/// HERGLOTZ_THREADS caps the worker pool.
#[derive(Debug, Parser)]
#[command(name = "herglotz", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Primary tolerance of the command (each command documents its default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Boundary grid size (points per circle).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Seed for Monte Carlo ν̂ backends; recorded in the report.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write a JSON run report here.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Write CSV plot data into this directory.
    #[arg(long = "plot-dir", global = true, value_name = "DIR")]
    pub plot_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Szegő, Poisson–Szegő and Herglotz kernels and the defect ψ.
    Kernel {
        #[command(subcommand)]
        cmd: KernelCmd,
    },
    /// Herglotz representation on the unit disc.
    Herglotz {
        #[command(subcommand)]
        cmd: DiscCmd,
    },
    /// Rational inner approximation and the Blaschke → atoms pipeline.
    Cara {
        #[command(subcommand)]
        cmd: CaraCmd,
    },
    /// Measure recovery on the polydisc and the symmetrized bidisc.
    Kp {
        #[command(subcommand)]
        cmd: KpCmd,
    },
    /// Hardy-space pipeline on the annulus q < |z| < 1.
    Annulus {
        #[command(subcommand)]
        cmd: AnnulusCmd,
    },
    /// Matrix-valued representing measure by polarization.
    Lift(LiftArgs),
    /// Run the built-in example suite.
    Selftest {
        /// Only the cheap examples.
        #[arg(long)]
        quick: bool,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel { cmd: KernelCmd::Eval { .. } } => "kernel eval",
            Command::Kernel { cmd: KernelCmd::Admissibility { .. } } => "kernel admissibility",
            Command::Herglotz { cmd: DiscCmd::Eval { .. } } => "herglotz eval",
            Command::Herglotz { cmd: DiscCmd::Recover { .. } } => "herglotz recover",
            Command::Herglotz { cmd: DiscCmd::Toeplitz { .. } } => "herglotz toeplitz",
            Command::Cara { cmd: CaraCmd::Approx { .. } } => "cara approx",
            Command::Cara { cmd: CaraCmd::BlaschkeAtoms { .. } } => "cara blaschke-atoms",
            Command::Cara { cmd: CaraCmd::Recover { .. } } => "cara recover",
            Command::Kp { cmd: KpCmd::Recover { .. } } => "kp recover",
            Command::Kp { cmd: KpCmd::Eval { .. } } => "kp eval",
            Command::Kp { cmd: KpCmd::Verify { .. } } => "kp verify",
            Command::Annulus { cmd: AnnulusCmd::Build { .. } } => "annulus build",
            Command::Annulus { cmd: AnnulusCmd::Recover { .. } } => "annulus recover",
            Command::Annulus { cmd: AnnulusCmd::Verify { .. } } => "annulus verify",
            Command::Lift(_) => "lift",
            Command::Selftest { .. } => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Szego,
    Poisson,
    Herglotz,
    Psi,
}

#[derive(Debug, Subcommand)]
pub enum KernelCmd {
    /// Evaluate one kernel at a pair of points.
    Eval {
        #[arg(long)]
        domain: String,
        #[arg(long)]
        z: Point,
        /// Second point (interior for szego, boundary for the others).
        #[arg(long)]
        w: Point,
        #[arg(long, value_enum, default_value = "szego")]
        kind: KernelKind,
    },
    /// Check S(w, z0) = 1 on interior samples (tol default 1e-10, grid 64).
    Admissibility {
        #[arg(long)]
        domain: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DiscCmd {
    /// Evaluate a representation (or a bare circle measure) at points.
    Eval {
        #[arg(long)]
        rep: String,
        #[arg(long, required = true)]
        z: Vec<Point>,
        /// Use the resolvent formula instead of the integral (atomic measures).
        #[arg(long)]
        realization: bool,
    },
    /// Recover μ_r = Re f(rζ) dζ (grid default 512; tol 1e-10 on the mass).
    Recover {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 0.99)]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest eigenvalue of the Toeplitz matrix of Taylor coefficients
    /// (order M gives the (M+1)×(M+1) matrix; tol default 1e-10).
    Toeplitz {
        #[arg(long)]
        f: String,
        #[arg(long)]
        order: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CaraCmd {
    /// Rational inner approximation of a Schur function with n atoms
    /// (tol default 1e-8 on the boundary unitarity).
    Approx {
        #[arg(long)]
        f: String,
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 0.0)]
        shrink: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Atoms of a finite Blaschke product B: the solutions of B(α) = −1.
    BlaschkeAtoms {
        #[arg(long = "B", alias = "b")]
        b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Herglotz f → Schur → Blaschke → atoms, for each degree
    /// (grid sets the recovery grid, default 65536).
    Recover {
        #[arg(long)]
        f: String,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        degrees: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KpCmd {
    /// Recover the representing measure on the distinguished boundary
    /// (grid default 256; tol 1e-10 on the mass).
    Recover {
        /// disc, polydisc2, polydisc3, symbidisc, or a domain JSON.
        #[arg(long, default_value = "polydisc2")]
        domain: String,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 0.95)]
        r: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a representation at points.
    Eval {
        #[arg(long)]
        rep: String,
        #[arg(long, required = true)]
        z: Vec<Point>,
    },
    /// Mass, determining test and (with --f) reconstruction error
    /// (tol default 1e-6).
    Verify {
        #[arg(long)]
        rep: String,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 8)]
        degree: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnnulusCmd {
    /// Orthonormalize Laurent monomials in L²(ω_z0) and save the basis
    /// (grid default 512).
    Build {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        z0: f64,
        #[arg(long = "N", alias = "n", default_value_t = 32)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a measure on both circles (tol default 1e-3 on the held-out
    /// residual).
    Recover {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        f: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a measure against f (tol default 1e-3).
    Verify {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        f: String,
    },
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Matrix-valued Herglotz function.
    #[arg(long = "F", alias = "f")]
    pub f: String,
    /// disc, polydisc2, polydisc3, or a domain JSON.
    #[arg(long, default_value = "disc")]
    pub domain: String,
    #[arg(long, default_value_t = 0.999)]
    pub r: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
