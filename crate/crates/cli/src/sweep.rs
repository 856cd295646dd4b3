use std::fmt::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use gptgeo_core::info::{self, CapacityOptions};
use gptgeo_core::lp::LpConfig;
use gptgeo_core::model::GpModel;
use gptgeo_core::{geometry, zoo, Result};

use crate::{usage, Failure};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Family {
    /// Regular k-gons.
    Polygon,
    /// d-outcome classical simplices.
    Simplex,
    /// Hypercubes of dimension D.
    Hypercube,
    /// Ball approximations with k vertices.
    Ball,
    /// Prisms over regular k-gons.
    Prism,
}

#[derive(clap::Args, Debug)]
pub struct SweepArgs {
    family: Family,
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
    /// Explicit comma-separated parameter values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<usize>,
    /// Ambient dimension of the ball family.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave the C_lb column empty.
    #[arg(long)]
    no_capacity: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn build(args: &SweepArgs, p: usize) -> Result<GpModel> {
    match args.family {
        Family::Polygon => zoo::regular_polygon(p),
        Family::Simplex => zoo::simplex(p),
        Family::Hypercube => zoo::hypercube(p),
        Family::Ball => zoo::ball_approx(args.dim, p, args.seed),
        Family::Prism => zoo::prism(&zoo::regular_polygon(p)?, 2.0),
    }
}

pub fn run(args: &SweepArgs, cfg: &LpConfig) -> Result<String, Failure> {
    let params: Vec<usize> = if !args.values.is_empty() {
        args.values.clone()
    } else {
        match (args.from, args.to) {
            (Some(a), Some(b)) if a <= b => (a..=b).collect(),
            _ => return Err(usage("give --values or --from A --to B with A <= B")),
        }
    };
    let mut csv = String::from("parameter,m,n,d,c_lb\n");
    for p in params {
        let m = build(args, p).map_err(|e| usage(e.to_string()))?.with_lp_config(*cfg);
        let mk = geometry::minkowski_measure(&m)?;
        let n = mk.measure + 1.0;
        let dist = info::distinguishable_number(m.vertices(), &m)?;
        let c = if args.no_capacity {
            String::new()
        } else {
            let store = info::storable_info(m.vertices(), &m)?;
            let cap = info::capacity_lower_bound_with(&m, &CapacityOptions::default(), Some(&dist), Some(&store))?;
            format!("{:.12}", cap.lower_bound)
        };
        writeln!(csv, "{p},{:.12},{:.12},{},{c}", mk.measure, n, dist.count).expect("write to string");
    }
    Ok(csv)
}
