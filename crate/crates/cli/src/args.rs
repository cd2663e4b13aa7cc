use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "chordmink", version, about = "L_p chord Minkowski problem for convex polytopes")]
pub struct Cli {
    /// Worker threads for the quadrature sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Report destination; written atomically. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a polytope whose L_p chord measure matches a discrete measure.
    Solve(SolveArgs),
    /// Compare the L_p chord measure of a polytope with a discrete measure.
    Verify(VerifyArgs),
    /// Chord integrals of a polytope, with closed-form references where known.
    Integrals(IntegralsArgs),
    /// Write a measure file, either random or the forward map of a polytope.
    GenMeasure(GenMeasureArgs),
    /// Check that a measure is in general position.
    CheckGp(CheckGpArgs),
}

/// `--budget M,section,facet_order`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub directions: usize,
    pub section: usize,
    pub facet_order: usize,
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [m, section, order] = parts.as_slice() else {
            return Err(format!("expected M,section,facet_order, got {s:?}"));
        };
        let parse = |name: &str, text: &str| text.parse::<usize>().map_err(|e| format!("budget {name} {text:?}: {e}"));
        Ok(Self {
            directions: parse("M", m)?,
            section: parse("section", section)?,
            facet_order: parse("facet_order", order)?,
        })
    }
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Quadrature budget: sphere directions, section nodes, facet rule order.
    #[arg(long, value_name = "M,SECTION,FACET_ORDER")]
    pub budget: Option<Budget>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// Largest per-atom relative residual accepted as converged.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Outer iteration cap.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
}

#[derive(Debug, Args)]
pub struct IntegralsArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<f64>,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
}

#[derive(Debug, Args)]
pub struct GenMeasureArgs {
    /// Dimension of a random measure.
    #[arg(long, conflicts_with = "polytope", required_unless_present = "polytope", requires = "count")]
    pub dim: Option<usize>,
    /// Number of random atoms.
    #[arg(long, requires = "dim")]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit F_{p,q}(P, .) of this polytope instead of a random measure.
    #[arg(long, requires_all = ["p", "q"])]
    pub polytope: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
}

#[derive(Debug, Args)]
pub struct CheckGpArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// Threshold on |det| of n-subsets of normals.
    #[arg(long)]
    pub det_tol: Option<f64>,
    /// Seed for subset sampling on large measures.
    #[arg(long)]
    pub seed: Option<u64>,
}
