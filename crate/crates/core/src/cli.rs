//! Command-line driver.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::comm::{compare_volumes, predict_volumes, stage, CommWorld};
use crate::distribute::{
    distribute, imbalance, partition, redistribute, CellGraph, DistributeOptions, DistributedMesh,
    PartitionMethod, Partitioner,
};
use crate::error::{Error, Result};
use crate::format::{read_distributed_sf, read_plex, write_distributed_sf, write_plex};
use crate::invariants::{check_distributed, check_plex, summarize};
use crate::meshgen::{gen_box_2d, gen_box_3d, gen_doublet};
use crate::plex::{uniform_refine_2d, Adjacency, Plex};

#[derive(Debug, Parser)]
#[command(name = "plexdist", version, about = "Generate, partition and distribute Hasse-diagram meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Shape {
    Box,
    Doublet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    Chunk,
    Random,
    GreedyBfs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AdjacencyArg {
    Fe,
    Fv,
}

impl From<AdjacencyArg> for Adjacency {
    fn from(a: AdjacencyArg) -> Self {
        match a {
            AdjacencyArg::Fe => Adjacency::Fe,
            AdjacencyArg::Fv => Adjacency::Fv,
        }
    }
}

fn method(m: Method, seed: u64) -> PartitionMethod {
    match m {
        Method::Chunk => PartitionMethod::Chunk,
        Method::Random => PartitionMethod::Random { seed },
        Method::GreedyBfs => PartitionMethod::GreedyBfs,
    }
}

#[derive(Debug, clap::Args)]
pub struct DistributionArgs {
    #[arg(long, default_value_t = 2)]
    pub ranks: usize,
    #[arg(long, value_enum, default_value_t = Method::Chunk)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub overlap: usize,
    #[arg(long, value_enum, default_value_t = AdjacencyArg::Fv)]
    pub adjacency: AdjacencyArg,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated mesh.
    Gen {
        #[arg(long, value_enum)]
        shape: Shape,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Uniformly refine a triangle mesh.
    Refine {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Partition the cells of a mesh and report balance and edge cut.
    Partition {
        input: PathBuf,
        #[arg(long)]
        parts: usize,
        #[arg(long, value_enum, default_value_t = Method::Chunk)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the mesh with a "partition" label.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distribute a serial mesh over simulated ranks.
    Distribute {
        input: PathBuf,
        #[command(flatten)]
        args: DistributionArgs,
    },
    /// Repartition a distributed mesh written by `distribute`.
    Redistribute {
        /// Directory holding rank<r>.plex files and sf.txt.
        input: PathBuf,
        #[command(flatten)]
        args: DistributionArgs,
    },
    /// Predicted distribution volume for stratum counts.
    VolumeModel {
        #[arg(long)]
        nc: u64,
        #[arg(long)]
        nf: u64,
        #[arg(long)]
        ne: u64,
        #[arg(long)]
        nv: u64,
    },
    /// Run the mesh invariant suite on a file.
    Check { input: PathBuf },
}

/// Parse `argv` (program name first) and run. Returns the exit status;
/// usage errors give 2, failed checks and runtime errors give 1.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests print to `out` and succeed.
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, out) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn read(path: &Path) -> Result<Plex> {
    read_plex(&fs::read_to_string(path)?)
}

fn write(path: &Path, m: &Plex) -> Result<()> {
    fs::write(path, write_plex(m)?)?;
    Ok(())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Gen { shape, dim, n, out: path } => {
            let m = match (shape, dim) {
                (Shape::Doublet, _) => gen_doublet(),
                (Shape::Box, 2) => gen_box_2d(n)?,
                (Shape::Box, 3) => gen_box_3d(n)?,
                (Shape::Box, d) => return Err(Error::UnsupportedShape(format!("no {d}D box generator"))),
            };
            write(&path, &m)?;
            let c = m.counts();
            writeln!(out, "cells {} faces {} edges {} vertices {}", c.cells, c.faces, c.edges, c.vertices)?;
        }
        Command::Refine { input, levels, out: path } => {
            let mut m = read(&input)?;
            for _ in 0..levels {
                m = uniform_refine_2d(&m)?;
            }
            write(&path, &m)?;
            writeln!(out, "cells {} euler {}", m.cells().len(), m.euler_characteristic())?;
        }
        Command::Partition { input, parts, method: mth, seed, out: path } => {
            let mut m = read(&input)?;
            let pm = method(mth, seed);
            let graph = CellGraph::from_plex(&m);
            let assignment = pm.partition(&graph, parts)?;
            let mut counts = vec![0usize; parts];
            for &r in &assignment {
                counts[r] += 1;
            }
            for (r, c) in counts.iter().enumerate() {
                writeln!(out, "part {r} cells {c}")?;
            }
            writeln!(out, "imbalance {:.4}", imbalance(&counts))?;
            writeln!(out, "edge-cut {}", graph.edge_cut(&assignment))?;
            if let Some(path) = path {
                let label = partition(&m, parts, &pm)?;
                m.set_label("partition", label)?;
                write(&path, &m)?;
            }
        }
        Command::Distribute { input, args } => {
            let m = read(&input)?;
            let world = CommWorld::new(args.ranks)?;
            let opts = DistributeOptions {
                method: method(args.method, args.seed),
                overlap: args.overlap,
                adjacency: args.adjacency.into(),
            };
            let d = distribute(&world, &m, &opts)?;
            save(&args.out_dir, &d)?;
            volume_table(out, &world)?;
            if m.depth() == 3 {
                let c = m.counts();
                let p = predict_volumes(c.cells as u64, c.faces as u64, c.edges as u64, c.vertices as u64);
                let cmp = compare_volumes(p.distribution_total(), &world, &[stage::PARTITION, stage::MIGRATION]);
                writeln!(
                    out,
                    "model partition+migration predicted {} measured {} relative-error {:.4}",
                    cmp.predicted,
                    cmp.measured,
                    cmp.relative_error.unwrap_or(0.0)
                )?;
            }
        }
        Command::Redistribute { input, args } => {
            let d = load(&input)?;
            let world = CommWorld::new(d.nranks())?;
            if args.ranks != d.nranks() {
                return Err(Error::InvalidArgument(format!(
                    "--ranks {} but the input has {} ranks",
                    args.ranks,
                    d.nranks()
                )));
            }
            let before = d.owned_cell_counts();
            let mut r = redistribute(&world, &d, &method(args.method, args.seed))?;
            if args.overlap > 0 {
                r = crate::overlap::distribute_overlap(&world, &r, args.overlap, args.adjacency.into())?;
            }
            save(&args.out_dir, &r)?;
            writeln!(out, "imbalance before {:.4} after {:.4}", imbalance(&before), imbalance(&r.owned_cell_counts()))?;
            volume_table(out, &world)?;
        }
        Command::VolumeModel { nc, nf, ne, nv } => {
            let p = predict_volumes(nc, nf, ne, nv);
            writeln!(out, "Vsf={}", p.sf)?;
            writeln!(out, "Vinversion={}", p.inversion)?;
            writeln!(out, "Vstratify={}", p.stratify)?;
            writeln!(out, "Vpartition={}", p.partition)?;
            writeln!(out, "Vtopology={}", p.topology)?;
            writeln!(out, "Vcoordinates={}", p.coordinates)?;
            writeln!(out, "Vmarkers={}", p.markers)?;
            writeln!(out, "Vmigration={}", p.migration)?;
        }
        Command::Check { input } => {
            let violations = if input.is_dir() {
                check_distributed(&load(&input)?, None)
            } else {
                check_plex(&read(&input)?)
            };
            for v in &violations {
                writeln!(out, "{v}")?;
            }
            if violations.is_empty() {
                writeln!(out, "ok")?;
            } else {
                for (check, n) in summarize(&violations) {
                    writeln!(out, "FAILED {check}: {n}")?;
                }
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn volume_table(out: &mut dyn Write, world: &CommWorld) -> Result<()> {
    writeln!(out, "{:<16} {:>5} {:>12} {:>12}", "stage", "rank", "sent", "received")?;
    let ledger = world.ledger();
    for s in ledger.stages() {
        for (r, v) in ledger.report(s).iter().enumerate() {
            writeln!(out, "{:<16} {:>5} {:>12} {:>12}", s, r, v.sent, v.received)?;
        }
    }
    Ok(())
}

fn save(dir: &Path, d: &DistributedMesh) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (r, m) in d.plexes.iter().enumerate() {
        write(&dir.join(format!("rank{r}.plex")), m)?;
    }
    fs::write(dir.join("sf.txt"), write_distributed_sf(&d.point_sf))?;
    Ok(())
}

fn load(dir: &Path) -> Result<DistributedMesh> {
    let mut plexes = Vec::new();
    loop {
        let path = dir.join(format!("rank{}.plex", plexes.len()));
        if !path.exists() {
            break;
        }
        plexes.push(read(&path)?);
    }
    if plexes.is_empty() {
        return Err(Error::InvalidArgument(format!("no rank0.plex in {}", dir.display())));
    }
    let sizes: Vec<usize> = plexes.iter().map(Plex::num_points).collect();
    let point_sf = read_distributed_sf(&fs::read_to_string(dir.join("sf.txt"))?, &sizes)?;
    Ok(DistributedMesh { plexes, point_sf })
}
