//! Command-line surface for the bottom-left strip packing toolkit: pack
//! instances, verify and render packings, analyze strip occupancy, compute
//! bounds, exact optima, and ratios, generate corpora, and probe the
//! span-occupancy program.
//!
//! Exit codes: 0 success; 1 a checked property failed (infeasible packing,
//! failed occupancy check or certificate, sampled value above the stated
//! optimum); 2 unreadable or invalid input; 3 internal invariant breach.

mod svg;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blstrip::analysis::qp::{optimal_point, optimal_value, qp_objective, qp_search};
use blstrip::analysis::{lemma_suite, region_occupancy, strip_partition, AnalysisError};
use blstrip::bounds::{certify_height, empirical_ratio, lower_bound, BoundsError, OptSource};
use blstrip::engine::bl_pack;
use blstrip::generators::{gen_corpus, CorpusManifest, FamilySpec};
use blstrip::model::{
    read_instance_file, read_packing_file, verify_feasible, write_json_file, Instance,
    PackingDoc, VerifyError,
};
use blstrip::oracle::{exact_opt, OptStatus, DEFAULT_NODE_BUDGET};
use blstrip::ordering::{fqw_partition, OrderingKind};
use blstrip::Scalar;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "blstrip", version, about = "Bottom-left strip packing toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pack an instance bottom-left in the given placement order
    Pack {
        /// Instance file (JSON)
        instance: PathBuf,
        /// Placement order
        #[arg(long, default_value_t = OrderingKind::Fqw)]
        order: OrderingKind,
        /// Write the packing here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the packing as SVG
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Also write the full placement trace
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Pixels per unit in the SVG
        #[arg(long, default_value_t = 20)]
        scale: u32,
    },
    /// Check a packing document for containment and overlaps
    Verify {
        /// Packing file (JSON)
        packing: PathBuf,
    },
    /// Print the shelf/leftover/wide split of an instance
    Partition {
        /// Instance file (JSON)
        instance: PathBuf,
    },
    /// Pack, then run the occupancy check suite and the height certificate
    Analyze {
        /// Instance file (JSON)
        instance: PathBuf,
        /// Placement order (must keep shelf rects first)
        #[arg(long, default_value_t = OrderingKind::Fqw)]
        order: OrderingKind,
    },
    /// Print the elementary lower bounds on the optimal height
    Bounds {
        /// Instance file (JSON)
        instance: PathBuf,
    },
    /// Solve an instance exactly by branch and bound
    Opt {
        /// Instance file (JSON)
        instance: PathBuf,
        /// Search nodes before giving up with the best incumbent
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Compare the packed height against a reference height
    Ratio {
        /// Instance file (JSON)
        instance: PathBuf,
        /// Placement order
        #[arg(long, default_value_t = OrderingKind::Fqw)]
        order: OrderingKind,
        /// Reference: the exact optimum (solves the instance)
        #[arg(long, conflicts_with = "lb")]
        exact: bool,
        /// Reference: the static lower bound
        #[arg(long)]
        lb: bool,
        /// Node budget for the exact reference
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Generate instances from a family-spec file into a corpus directory
    Gen {
        /// JSON file holding one family spec or a list of them
        specs: PathBuf,
        /// Directory for the instance files and manifest.json
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Search the span-occupancy program for values above the stated optimum
    QpCheck {
        /// Number of line-order terms
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        /// Random feasible points to evaluate (0 = stated point only)
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a packing document as SVG
    Render {
        /// Packing file (JSON)
        packing: PathBuf,
        /// Output SVG path
        #[arg(long)]
        out: PathBuf,
        /// Pixels per unit
        #[arg(long, default_value_t = 20)]
        scale: u32,
        /// Draw region boundaries
        #[arg(long)]
        regions: bool,
    },
    /// Pack a generated corpus under several orders and tabulate ratios
    Bench {
        /// Directory holding manifest.json and the instance files
        corpus_dir: PathBuf,
        /// Comma-separated order names, or `all`
        #[arg(long, default_value = "fqw,decreasing-width")]
        orders: String,
        /// Oracle node budget per instance (0 skips the exact reference)
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
    },
}

/// Largest instance the bench table hands to the exact oracle. Node cost
/// grows steeply with the number of placed rects, so beyond this size the
/// table reports only the lower-bound columns.
const EXACT_REFERENCE_LIMIT: usize = 9;

/// Failed run, carrying the exit code contract in the type.
enum Failure {
    /// A checked property did not hold.
    Violation(String),
    /// Bad path, unparsable file, or invalid parameters.
    Input(String),
    /// A library invariant broke mid-run.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Violation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Violation(m) | Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

fn internal(e: impl Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Pack { instance, order, out, svg, trace, scale } => {
            cmd_pack(&instance, order, out.as_deref(), svg.as_deref(), trace.as_deref(), scale)
        }
        Command::Verify { packing } => cmd_verify(&packing),
        Command::Partition { instance } => cmd_partition(&instance),
        Command::Analyze { instance, order } => cmd_analyze(&instance, order),
        Command::Bounds { instance } => cmd_bounds(&instance),
        Command::Opt { instance, budget } => cmd_opt(&instance, budget),
        Command::Ratio { instance, order, exact, lb, budget } => {
            cmd_ratio(&instance, order, exact, lb, budget)
        }
        Command::Gen { specs, out_dir } => cmd_gen(&specs, &out_dir),
        Command::QpCheck { k_max, samples, seed } => cmd_qp_check(k_max, samples, seed),
        Command::Render { packing, out, scale, regions } => {
            cmd_render(&packing, &out, scale, regions)
        }
        Command::Bench { corpus_dir, orders, budget } => cmd_bench(&corpus_dir, &orders, budget),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    println!("{text}");
    Ok(())
}

fn cmd_pack(
    instance: &Path,
    order: OrderingKind,
    out: Option<&Path>,
    svg: Option<&Path>,
    trace: Option<&Path>,
    scale: u32,
) -> Result<(), Failure> {
    let inst = read_instance_file(instance).map_err(input)?;
    let run = bl_pack(&inst, order);
    let doc = PackingDoc::inline(&run.packing);
    match out {
        Some(path) => {
            write_json_file(path, &doc).map_err(input)?;
            println!(
                "packed {} rects to height {} ({}); wrote {}",
                inst.len(),
                run.packing.height(),
                order,
                path.display()
            );
        }
        None => print_json(&doc)?,
    }
    if let Some(path) = trace {
        write_json_file(path, &run).map_err(input)?;
    }
    if let Some(path) = svg {
        let partition = fqw_partition(&inst);
        let image = svg::render(&run.packing, &partition, scale, &[]).map_err(internal)?;
        std::fs::write(path, image).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_verify(packing: &Path) -> Result<(), Failure> {
    let packing = read_packing_file(packing).map_err(input)?;
    match verify_feasible(&packing) {
        Ok(()) => {
            println!(
                "feasible: {} rects, height {}",
                packing.placements.len(),
                packing.height()
            );
            Ok(())
        }
        Err(VerifyError::Structural(e)) => Err(input(e)),
        Err(e @ VerifyError::Infeasible(_)) => Err(Failure::Violation(e.to_string())),
    }
}

fn cmd_partition(instance: &Path) -> Result<(), Failure> {
    let inst = read_instance_file(instance).map_err(input)?;
    print_json(&fqw_partition(&inst))
}

fn cmd_analyze(instance: &Path, order: OrderingKind) -> Result<(), Failure> {
    let inst = read_instance_file(instance).map_err(input)?;
    let run = bl_pack(&inst, order);
    let partition = fqw_partition(&inst);
    let regions = region_occupancy(&run.packing).map_err(internal)?;
    let suite = lemma_suite(&run.packing, &partition).map_err(|e| match e {
        AnalysisError::NotShelfOrdered { .. } => {
            input(format!("{e}; the occupancy suite needs a shelf-first order such as fqw"))
        }
        other => internal(other),
    })?;
    let certificate = certify_height(&run.packing, &partition).map_err(internal)?;
    let report = serde_json::json!({
        "ordering": order,
        "height": run.packing.height(),
        "regions": regions,
        "suite": suite,
        "certificate": certificate,
    });
    print_json(&report)?;
    let failed: Vec<&str> = suite.failures().map(|c| c.name).collect();
    if !failed.is_empty() {
        return Err(Failure::Violation(format!(
            "occupancy checks failed: {}",
            failed.join(", ")
        )));
    }
    if !certificate.holds {
        return Err(Failure::Violation(
            "height certificate inequality does not hold".into(),
        ));
    }
    Ok(())
}

fn cmd_bounds(instance: &Path) -> Result<(), Failure> {
    let inst = read_instance_file(instance).map_err(input)?;
    print_json(&lower_bound(&inst))
}

fn cmd_opt(instance: &Path, budget: u64) -> Result<(), Failure> {
    let inst = read_instance_file(instance).map_err(input)?;
    print_json(&exact_opt(&inst, budget))
}

fn cmd_ratio(
    instance: &Path,
    order: OrderingKind,
    exact: bool,
    lb: bool,
    budget: u64,
) -> Result<(), Failure> {
    if exact == lb {
        return Err(input("choose exactly one reference: --exact or --lb"));
    }
    let inst = read_instance_file(instance).map_err(input)?;
    let source = if exact { OptSource::Exact } else { OptSource::LowerBound };
    let report = empirical_ratio(&inst, order, source, budget).map_err(|e| match e {
        aborted @ BoundsError::OracleAborted { .. } => {
            input(format!("{aborted}; raise --budget or pass --lb"))
        }
        other => internal(other),
    })?;
    let reference = match source {
        OptSource::Exact => "exact optimum",
        OptSource::LowerBound => "lower bound",
    };
    println!("order {}", report.ordering);
    println!("packed height {}", report.packed_height);
    println!("reference {} {}", reference, report.reference);
    println!("ratio {} ≈ {:.4}", report.ratio, report.ratio.to_f64());
    Ok(())
}

fn cmd_gen(specs: &Path, out_dir: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(specs)
        .map_err(|e| input(format!("{}: {e}", specs.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: {e}", specs.display())))?;
    let list: Vec<FamilySpec> = if value.is_array() {
        serde_json::from_value(value).map_err(input)?
    } else {
        vec![serde_json::from_value(value).map_err(input)?]
    };
    let manifest = gen_corpus(&list, out_dir).map_err(input)?;
    print_json(&manifest)
}

fn cmd_qp_check(k_max: usize, samples: usize, seed: u64) -> Result<(), Failure> {
    let optimum = optimal_value();
    let (best, evaluated) = if samples == 0 {
        let point = optimal_point(k_max).map_err(input)?;
        (qp_objective(&point).map_err(internal)?, 1usize)
    } else {
        let report = qp_search(k_max, samples, seed).map_err(input)?;
        (report.best_value, report.evaluated)
    };
    println!("evaluated {evaluated} feasible points at k_max {k_max}");
    println!("best value {} ≈ {:.6}", best, best.to_f64());
    println!("stated optimum {} ≈ {:.6}", optimum, optimum.to_f64());
    if best > optimum {
        return Err(Failure::Violation(format!(
            "sampled value {best} exceeds the stated optimum {optimum}"
        )));
    }
    Ok(())
}

fn cmd_render(packing: &Path, out: &Path, scale: u32, regions: bool) -> Result<(), Failure> {
    let packing = read_packing_file(packing).map_err(input)?;
    let partition = fqw_partition(&packing.instance);
    let region_list = if regions {
        strip_partition(&packing).map_err(input)?
    } else {
        Vec::new()
    };
    let image = svg::render(&packing, &partition, scale, &region_list).map_err(input)?;
    std::fs::write(out, image).map_err(|e| input(format!("{}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn parse_orders(orders: &str) -> Result<Vec<OrderingKind>, Failure> {
    if orders == "all" {
        return Ok(OrderingKind::ALL.to_vec());
    }
    orders
        .split(',')
        .map(|name| name.trim().parse().map_err(input))
        .collect()
}

/// Height ratio with the empty-instance convention: 0/0 counts as 1.
fn ratio_or_one(packed: &Scalar, reference: &Scalar) -> Scalar {
    if reference.is_zero() {
        Scalar::one()
    } else {
        packed / reference
    }
}

fn cmd_bench(corpus_dir: &Path, orders: &str, budget: u64) -> Result<(), Failure> {
    let orders = parse_orders(orders)?;
    let manifest_path = corpus_dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| input(format!("{}: {e}", manifest_path.display())))?;
    let manifest: CorpusManifest = serde_json::from_str(&text)
        .map_err(|e| input(format!("{}: {e}", manifest_path.display())))?;

    let mut instances: Vec<(String, Instance)> = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let inst = read_instance_file(&corpus_dir.join(&entry.file)).map_err(input)?;
        instances.push((entry.file.clone(), inst));
    }
    // Reference heights are ordering-independent; compute them once.
    let references: Vec<(Scalar, Option<Scalar>)> = instances
        .iter()
        .map(|(_, inst)| {
            let lb = lower_bound(inst).lb;
            let opt = (budget > 0 && inst.len() <= EXACT_REFERENCE_LIMIT)
                .then(|| exact_opt(inst, budget));
            let exact = opt.and_then(|o| (o.status == OptStatus::Exact).then_some(o.height));
            (lb, exact)
        })
        .collect();

    println!(
        "{:<18} {:>9} {:>8} {:>8} {:>7} {:>9} {:>8}",
        "order", "instances", "mean/lb", "max/lb", "solved", "mean/opt", "max/opt"
    );
    for order in orders {
        if instances.is_empty() {
            continue;
        }
        let mut vs_lb: Vec<Scalar> = Vec::with_capacity(instances.len());
        let mut vs_opt: Vec<Scalar> = Vec::new();
        for ((_, inst), (lb, exact)) in instances.iter().zip(&references) {
            let packed = bl_pack(inst, order).packing.height();
            vs_lb.push(ratio_or_one(&packed, lb));
            if let Some(opt) = exact {
                vs_opt.push(ratio_or_one(&packed, opt));
            }
        }
        let stats = |ratios: &[Scalar]| -> Option<(Scalar, Scalar)> {
            let max = ratios.iter().cloned().reduce(Scalar::max)?;
            let mean = ratios.iter().sum::<Scalar>() / Scalar::from_int(ratios.len() as i64);
            Some((mean, max))
        };
        let (lb_mean, lb_max) = stats(&vs_lb).expect("nonempty corpus");
        let (opt_mean, opt_max) = match stats(&vs_opt) {
            Some((mean, max)) => (format!("{:.4}", mean.to_f64()), format!("{:.4}", max.to_f64())),
            None => ("-".into(), "-".into()),
        };
        println!(
            "{:<18} {:>9} {:>8.4} {:>8.4} {:>7} {:>9} {:>8}",
            order.name(),
            instances.len(),
            lb_mean.to_f64(),
            lb_max.to_f64(),
            vs_opt.len(),
            opt_mean,
            opt_max
        );
    }
    Ok(())
}
