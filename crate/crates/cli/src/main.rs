//! qdesign: subspace designs over GF(q) from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 search budget exhausted.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdesign_core::data::{BundledInstance, Q3_HALVING, Q3_OVERGROUP_WORDS, Q5_HALVING};
use qdesign_core::decomp::{make_decomposition, verify_identity, verify_partition, DecompKind};
use qdesign_core::design::{
    read_design, read_large_set, transform, verify_design, verify_large_set, LargeSet,
    LsTransform,
};
use qdesign_core::field::{frobenius_matrix, singer_matrix, Field, PrimitivePolynomial};
use qdesign_core::gaussian_binomial;
use qdesign_core::grassmann::{decode_block, encode_block, GrassmannianIter};
use qdesign_core::km::{
    assemble_design, group_closure, km_matrix, km_solve, orbits, parse_group_words,
    realize_words, selection_from_reps, verify_selection, KmInstance, ProjectiveGroup, SolveMode,
};
use qdesign_core::partition::{one_parameter_plan, to_large_set, two_parameter_plan};
use qdesign_core::subspace::{MatGf, Subspace};
use qdesign_core::tables::{admissibility_pattern, small_halvings, AdmissibilityEntry};
use qdesign_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "qdesign", version, about = "Subspace designs over GF(q): enumeration, decompositions, large-set recursion and Kramer-Mesner search")]
struct Cli {
    /// Worker threads for verification and orbit stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gaussian binomial coefficient [v, k]_q.
    Binom {
        #[arg(long)]
        v: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
    },
    /// Stream the k-subspaces of GF(q)^v as q-adic row codes.
    Enumerate {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        k: usize,
        /// Stop after this many subspaces.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Build a decomposition of [V,k]_q into joins; print cells and the
    /// counting identity, optionally verifying the partition by enumeration.
    Decompose {
        #[arg(long, value_enum)]
        kind: DecompKindArg,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u64,
        /// Cut dimension for the Vandermonde decomposition.
        #[arg(long)]
        u: Option<usize>,
        /// Offset parameter for the avoiding/covering decompositions.
        #[arg(long)]
        s: Option<usize>,
        /// Enumerate all cells and check disjoint exact coverage.
        #[arg(long)]
        verify: bool,
    },
    /// Verify a design or large-set file.
    Verify {
        file: PathBuf,
        /// Re-verify at this strength instead of the one in the header.
        #[arg(long)]
        t: Option<usize>,
        /// Expected lambda (designs only; default: header value).
        #[arg(long)]
        lambda: Option<String>,
        /// Machine-readable JSON-lines report.
        #[arg(long)]
        json: bool,
    },
    /// Check the divisibility conditions for LS_q[N](t,k,v).
    Admissible {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        v: usize,
    },
    /// Reproduce the parameter tables of the halving series.
    Tables {
        #[arg(value_enum)]
        which: TableArg,
        /// Restrict the smallest-halvings table to one q.
        #[arg(long)]
        q: Option<u64>,
        /// Largest v for the admissibility table.
        #[arg(long, default_value_t = 38)]
        v_max: usize,
    },
    /// Apply a parameter-transforming construction to a large set.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        op: TransformArg,
        /// Target part count for merge (must divide N).
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Kramer-Mesner pipeline on a prescribed matrix group.
    Km(KmArgs),
    /// Large-set recursion: build a construction plan for LS_q[2](2,k,v)
    /// from a base LS_q[2](2,3,6).
    Recurse {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        v: usize,
        /// Large-set file holding the base LS_q[2](2,3,6).
        #[arg(long)]
        base: PathBuf,
        #[arg(long, value_enum)]
        mode: RecurseMode,
        /// Number of random lambda spot-checks in sample mode.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file for materialize mode.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DecompKindArg {
    Pascal,
    Vandermonde,
    Avoid,
    Cover,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    SmallestHalvings,
    Admissibility,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Dual,
    Reduced,
    Derived,
    Residual,
    Merge,
    /// Read a design file and emit the halving {B, complement}.
    SupplementaryPair,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecurseMode {
    Plan,
    Materialize,
    Sample,
}

#[derive(Args)]
struct KmArgs {
    #[command(subcommand)]
    action: KmAction,
}

#[derive(Subcommand)]
enum KmAction {
    /// Orbit table of the group on the d-subspaces.
    Orbits(KmCommon),
    /// Print the orbit incidence matrix A.
    Matrix(KmCommon),
    /// Find one design as a union of orbits.
    Solve(KmCommon),
    /// Count all solutions (long-running; requires --long).
    Count(KmCommon),
    /// Verify a selection file of orbit-representative code triples.
    CheckSelection(KmCommon),
    /// Isomorphism-type count workflow for the q=3 halving
    /// (long-running; requires --long).
    Isotypes(KmCommon),
}

#[derive(Args)]
struct KmCommon {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 6)]
    v: usize,
    /// Primitive polynomial, comma-separated coefficients, constant last.
    /// Defaults to the bundled polynomial for q = 3 and q = 5.
    #[arg(long)]
    poly: Option<String>,
    /// Group generators as words in s (Singer) and f (Frobenius),
    /// e.g. "s^2,f^2". Defaults to the bundled subgroup.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Right-hand side; defaults to the halving value [v-t,k-t]_q / 2.
    #[arg(long)]
    lambda: Option<u64>,
    /// Subspace dimension for the orbits action (default k).
    #[arg(long)]
    d: Option<usize>,
    /// Selection file: one orbit-representative code tuple per line.
    #[arg(long)]
    selection: Option<PathBuf>,
    /// Node budget for the search.
    #[arg(long)]
    budget: Option<u64>,
    /// Acknowledge a long-running computation.
    #[arg(long)]
    long: bool,
    /// Write solutions to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // verification failures carry exit 1, budget exhaustion 3
            if let Some(core) = e.downcast_ref::<CoreError>() {
                match core {
                    CoreError::Verification(_) | CoreError::PartitionCheck(_) => {
                        return ExitCode::from(1)
                    }
                    CoreError::BudgetExhausted => return ExitCode::from(3),
                    _ => {}
                }
            }
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Binom { v, k, q } => {
            println!("{}", gaussian_binomial(v, k, q));
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { q, v, k, limit } => {
            let field = Field::gf(q)?;
            let stdout = std::io::stdout();
            let mut out = BufWriter::new(stdout.lock());
            let mut n = 0u64;
            for s in GrassmannianIter::new(&field, v, k) {
                let codes = encode_block(&s)?;
                let line: Vec<String> = codes.iter().map(u64::to_string).collect();
                writeln!(out, "{}", line.join(" "))?;
                n += 1;
                if limit.is_some_and(|l| n >= l) {
                    break;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose {
            kind,
            v,
            k,
            q,
            u,
            s,
            verify,
        } => cmd_decompose(kind, v, k, q, u, s, verify),
        Command::Verify {
            file,
            t,
            lambda,
            json,
        } => cmd_verify(&file, t, lambda, json),
        Command::Admissible { q, n, t, k, v } => {
            let ok = qdesign_core::design::admissible(q, n, t, k, v);
            println!(
                "LS_{q}[{n}]({t},{k},{v}) is {}",
                if ok { "admissible" } else { "not admissible" }
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Tables { which, q, v_max } => cmd_tables(which, q, v_max),
        Command::Transform {
            input,
            op,
            d,
            output,
        } => cmd_transform(&input, op, d, &output),
        Command::Km(args) => cmd_km(args),
        Command::Recurse {
            q,
            n,
            k,
            v,
            base,
            mode,
            samples,
            seed,
            output,
        } => cmd_recurse(q, n, k, v, &base, mode, samples, seed, output.as_deref()),
    }
}

fn cmd_decompose(
    kind: DecompKindArg,
    v: usize,
    k: usize,
    q: u64,
    u: Option<usize>,
    s: Option<usize>,
    verify: bool,
) -> Result<ExitCode> {
    let kind = match kind {
        DecompKindArg::Pascal => DecompKind::QPascal,
        DecompKindArg::Vandermonde => DecompKind::Vandermonde {
            u: u.ok_or_else(|| anyhow!("--u is required for the Vandermonde decomposition"))?,
        },
        DecompKindArg::Avoid => DecompKind::Avoid {
            s: s.ok_or_else(|| anyhow!("--s is required for the avoiding decomposition"))?,
        },
        DecompKindArg::Cover => DecompKind::Cover {
            s: s.ok_or_else(|| anyhow!("--s is required for the covering decomposition"))?,
        },
    };
    let plan = make_decomposition(kind, v, k, q)?;
    println!(
        "decomposition of [{v}, {k}]_{q} into {} cells:",
        plan.cells.len()
    );
    for cell in &plan.cells {
        let size = cell.size(v, q);
        println!(
            "  cell {:>2}: {:?} join, flag V_{} <= V_{}, left [{}, {}], right [{}, {}], size {}",
            cell.index,
            cell.kind,
            cell.u1,
            cell.u2,
            cell.u1,
            cell.k1,
            v - cell.u2,
            cell.kbar2,
            size
        );
    }
    let (lhs, rhs) = verify_identity(&plan)?;
    println!("identity: {lhs} = {rhs}");
    if verify {
        let field = Field::gf(q as u32)?;
        let report = verify_partition(&field, &plan)?;
        println!("partition verified: {} subspaces covered exactly once", report.total);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    path: &std::path::Path,
    t_override: Option<usize>,
    lambda_override: Option<String>,
    json: bool,
) -> Result<ExitCode> {
    let head = {
        use std::io::BufRead;
        let f = File::open(path).with_context(|| format!("open {}", path.display()))?;
        let mut line = String::new();
        BufReader::new(f).read_line(&mut line)?;
        line.split_whitespace().next().unwrap_or_default().to_string()
    };
    let reader = || -> Result<BufReader<File>> { Ok(BufReader::new(File::open(path)?)) };
    match head.as_str() {
        "design" => {
            let mut d = read_design(reader()?)?;
            if let Some(t) = t_override {
                // the lambda at a different strength is determined by the
                // design parameters; require it explicitly
                d.t = t;
            }
            if let Some(l) = &lambda_override {
                d.lambda = l
                    .parse::<BigUint>()
                    .map_err(|_| anyhow!("--lambda is not an integer"))?;
            }
            match verify_design(&d) {
                Ok(report) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "object": "design", "q": d.field.q(), "v": d.v, "k": d.k,
                                "t": d.t, "lambda": d.lambda.to_string(),
                                "blocks": report.blocks,
                                "t_subspaces": report.t_spaces_checked.to_string(),
                                "status": "pass",
                            })
                        );
                    } else {
                        println!(
                            "design {}-({},{},{})_{} with {} blocks: PASS",
                            d.t,
                            d.v,
                            d.k,
                            d.lambda,
                            d.field.q(),
                            report.blocks
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "object": "design", "status": "fail",
                                "reason": e.to_string(),
                            })
                        );
                    } else {
                        eprintln!("verification failed: {e}");
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        "largeset" => {
            let mut ls = read_large_set(reader()?)?;
            if let Some(t) = t_override {
                ls.t = t;
            }
            match verify_large_set(&ls) {
                Ok(report) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "object": "largeset", "q": ls.field.q(), "v": ls.v,
                                "k": ls.k, "t": ls.t, "N": ls.n(),
                                "lambda": report.lambda.to_string(),
                                "part_sizes": report.part_sizes,
                                "status": "pass",
                            })
                        );
                    } else {
                        println!(
                            "large set LS_{}[{}]({},{},{}) with lambda {}: PASS",
                            ls.field.q(),
                            ls.n(),
                            ls.t,
                            ls.k,
                            ls.v,
                            report.lambda
                        );
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    if json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "object": "largeset", "status": "fail",
                                "reason": e.to_string(),
                            })
                        );
                    } else {
                        eprintln!("verification failed: {e}");
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        other => bail!("unknown file header `{other}` (expected `design` or `largeset`)"),
    }
}

fn cmd_tables(which: TableArg, q: Option<u64>, v_max: usize) -> Result<ExitCode> {
    match which {
        TableArg::SmallestHalvings => {
            println!("{:>2} {:>3} {:>4} {:>40} {:>45}", "q", "v", "k", "lambda", "size");
            for row in small_halvings(q) {
                // the dual k shares the size; show both as the table does
                let duals = if row.v - row.k == row.k {
                    row.k.to_string()
                } else {
                    format!("{},{}", row.k, row.v - row.k)
                };
                println!(
                    "{:>2} {:>3} {:>4} {:>40} {:>45}",
                    row.q, row.v, duals, row.lambda, row.size
                );
            }
        }
        TableArg::Admissibility => {
            let qs = q.map(|x| vec![x]).unwrap_or_else(|| vec![3, 5]);
            let mut patterns = Vec::new();
            for &qq in &qs {
                patterns.push(admissibility_pattern(qq, v_max));
            }
            if patterns.windows(2).any(|w| w[0] != w[1]) {
                bail!("admissibility patterns differ between the requested q values");
            }
            println!(
                "admissibility/realizability of LS_q[2](2,k,v) for q in {qs:?}, k <= v/2:"
            );
            println!("(-: not admissible, ?: open, k: realized by the halving series)");
            for (v, row) in &patterns[0] {
                let cells: Vec<String> = row.iter().map(AdmissibilityEntry::symbol).collect();
                println!("v={v:>2}: {}", cells.join(" "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_transform(
    input: &std::path::Path,
    op: TransformArg,
    d: Option<usize>,
    output: &std::path::Path,
) -> Result<ExitCode> {
    let out_file = File::create(output)?;
    let mut w = BufWriter::new(out_file);
    if matches!(op, TransformArg::SupplementaryPair) {
        let design = read_design(BufReader::new(File::open(input)?))?;
        let ls = LargeSet::halving_from_design(&design)?;
        qdesign_core::design::write_large_set(&ls, &mut w)?;
        println!(
            "wrote halving LS_{}[2]({},{},{}) to {}",
            ls.field.q(),
            ls.t,
            ls.k,
            ls.v,
            output.display()
        );
        return Ok(ExitCode::SUCCESS);
    }
    let ls = read_large_set(BufReader::new(File::open(input)?))?;
    let op = match op {
        TransformArg::Dual => LsTransform::Dual,
        TransformArg::Reduced => LsTransform::Reduced,
        TransformArg::Derived => LsTransform::Derived,
        TransformArg::Residual => LsTransform::Residual,
        TransformArg::Merge => LsTransform::Merge(
            d.ok_or_else(|| anyhow!("--d is required for merge"))?,
        ),
        TransformArg::SupplementaryPair => unreachable!(),
    };
    let out = transform(&ls, op)?;
    qdesign_core::design::write_large_set(&out, &mut w)?;
    println!(
        "wrote LS_{}[{}]({},{},{}) to {}",
        out.field.q(),
        out.n(),
        out.t,
        out.k,
        out.v,
        output.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Resolves field, polynomial and group from the common km arguments,
/// falling back to the bundled instances for q = 3 and q = 5.
fn km_instance_parts(common: &KmCommon) -> Result<(Field, ProjectiveGroup)> {
    let bundled: Option<&BundledInstance> = match common.q {
        3 => Some(&Q3_HALVING),
        5 => Some(&Q5_HALVING),
        _ => None,
    };
    let field = Field::gf(common.q)?;
    let poly = match (&common.poly, bundled) {
        (Some(text), _) => {
            let coeffs: Vec<u8> = text
                .split(',')
                .map(|t| t.trim().parse::<u8>().map_err(|_| anyhow!("bad coefficient `{t}`")))
                .collect::<Result<_>>()?;
            PrimitivePolynomial::from_descending(&field, &coeffs)?
        }
        (None, Some(b)) if b.v == common.v => b.polynomial(),
        (None, _) => bail!("--poly is required for q = {} with v = {}", common.q, common.v),
    };
    let words = match (&common.group, bundled) {
        (Some(w), _) => w.clone(),
        (None, Some(b)) => b.group_words.to_string(),
        (None, None) => bail!("--group is required for q = {}", common.q),
    };
    let singer = singer_matrix(&poly);
    let frobenius = frobenius_matrix(&poly)?;
    let gens = realize_words(&field, &singer, &frobenius, &parse_group_words(&words)?);
    let group = group_closure(&field, &gens)?;
    Ok((field, group))
}

fn default_lambda(q: u64, v: usize, t: usize, k: usize) -> Result<u64> {
    let full = gaussian_binomial((v - t) as u64, (k - t) as u64, q);
    let two = BigUint::from(2u32);
    if &full % &two != BigUint::from(0u32) {
        bail!("[v-t, k-t]_q = {full} is odd; pass --lambda explicitly");
    }
    let half = full / two;
    u64::try_from(&half).map_err(|_| anyhow!("lambda {half} does not fit in 64 bits"))
}

fn build_instance(common: &KmCommon) -> Result<(ProjectiveGroup, KmInstance)> {
    let (_, group) = km_instance_parts(common)?;
    let lambda = match common.lambda {
        Some(l) => l,
        None => default_lambda(common.q as u64, common.v, common.t, common.k)?,
    };
    let inst = km_matrix(&group, common.t, common.k, lambda)?;
    Ok((group, inst))
}

fn print_solution<W: Write>(inst: &KmInstance, sol: &[u32], mut w: W) -> Result<()> {
    for &j in sol {
        let rep = &inst.k_orbits.transversal[j as usize];
        let codes = encode_block(rep)?;
        let line: Vec<String> = codes.iter().map(u64::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

fn cmd_km(args: KmArgs) -> Result<ExitCode> {
    match args.action {
        KmAction::Orbits(common) => {
            let (_, group) = km_instance_parts(&common)?;
            println!("group order {}", group.order());
            let d = common.d.unwrap_or(common.k);
            let table = orbits(&group, d);
            println!(
                "{} orbits on the {}-subspaces of GF({})^{}",
                table.orbit_count(),
                d,
                common.q,
                common.v
            );
            let profile: Vec<String> = table
                .size_profile()
                .iter()
                .map(|(size, mult)| format!("{size}^{mult}"))
                .collect();
            println!("size profile: {}", profile.join(" "));
            for (i, rep) in table.transversal.iter().enumerate() {
                let codes = encode_block(rep)?;
                let line: Vec<String> = codes.iter().map(u64::to_string).collect();
                println!("orbit {:>4} size {:>8}: {}", i, table.orbit_sizes[i], line.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        KmAction::Matrix(common) => {
            let (_, inst) = build_instance(&common)?;
            println!(
                "A is {} x {}; every row sums to [v-t, k-t]_q = {}",
                inst.a.len(),
                inst.k_orbits.orbit_count(),
                gaussian_binomial(
                    (common.v - common.t) as u64,
                    (common.k - common.t) as u64,
                    common.q as u64
                )
            );
            for row in &inst.a {
                let line: Vec<String> = row.iter().map(u64::to_string).collect();
                println!("{}", line.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        KmAction::Solve(common) => {
            let (group, inst) = build_instance(&common)?;
            let out = km_solve(&inst, SolveMode::First, common.budget);
            if let Some(sol) = out.solutions.first() {
                match &common.output {
                    Some(path) => {
                        print_solution(&inst, sol, BufWriter::new(File::create(path)?))?
                    }
                    None => print_solution(&inst, sol, std::io::stdout().lock())?,
                }
                let design = assemble_design(&group, &inst, sol)?;
                eprintln!(
                    "solution with {} orbits assembles to a verified {}-({},{},{})_{} design with {} blocks",
                    sol.len(),
                    inst.t,
                    inst.v,
                    inst.k,
                    inst.lambda,
                    common.q,
                    design.blocks.len()
                );
                Ok(ExitCode::SUCCESS)
            } else if !out.complete {
                eprintln!("budget exhausted after {} nodes without a solution", out.nodes);
                Ok(ExitCode::from(3))
            } else {
                eprintln!("no solution exists");
                Ok(ExitCode::from(1))
            }
        }
        KmAction::Count(common) => {
            if !common.long && common.budget.is_none() {
                bail!("counting all solutions is hours-class work; pass --long (or --budget)");
            }
            let (_, inst) = build_instance(&common)?;
            let out = km_solve(&inst, SolveMode::Count, common.budget);
            if out.complete {
                println!("{}", out.count);
                Ok(ExitCode::SUCCESS)
            } else {
                println!("at least {} (budget exhausted after {} nodes)", out.count, out.nodes);
                Ok(ExitCode::from(3))
            }
        }
        KmAction::CheckSelection(common) => {
            let path = common
                .selection
                .as_ref()
                .ok_or_else(|| anyhow!("--selection file is required"))?;
            let field = Field::gf(common.q)?;
            let text = std::fs::read_to_string(path)?;
            let mut reps = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim().trim_start_matches('(').trim_end_matches(')');
                if line.is_empty() {
                    continue;
                }
                let codes: Vec<u64> = line
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|t| {
                        t.parse::<u64>()
                            .map_err(|_| anyhow!("line {}: bad code `{t}`", i + 1))
                    })
                    .collect::<Result<_>>()?;
                reps.push(decode_block(&field, &codes, common.v)?);
            }
            let (group, inst) = build_instance(&common)?;
            let sel = selection_from_reps(&inst, &reps)?;
            verify_selection(&inst, &sel)?;
            println!(
                "selection of {} orbits solves A chi = {}",
                sel.len(),
                inst.lambda
            );
            let design = assemble_design(&group, &inst, &sel)?;
            println!(
                "assembled design verified: {}-({},{},{})_{} with {} blocks",
                inst.t,
                inst.v,
                inst.k,
                inst.lambda,
                common.q,
                design.blocks.len()
            );
            if let Some(path) = &common.output {
                qdesign_core::design::write_design(
                    &design,
                    BufWriter::new(File::create(path)?),
                )?;
                println!("wrote design file {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        KmAction::Isotypes(common) => {
            if !common.long {
                bail!("the isomorphism-type count is hours-class work; pass --long");
            }
            if common.q != 3 || common.v != 6 {
                bail!("the isotype workflow is specific to the q = 3, v = 6 halving");
            }
            let (_, inst) = build_instance(&common)?;
            let out = km_solve(&inst, SolveMode::Count, common.budget);
            if !out.complete {
                return Err(CoreError::BudgetExhausted.into());
            }
            println!("G-invariant designs: {}", out.count);
            for words in Q3_OVERGROUP_WORDS {
                let over = Q3_HALVING.group_with_words(words)?;
                let oinst = km_matrix(&over, common.t, common.k, inst.lambda)?;
                let oout = km_solve(&oinst, SolveMode::Count, None);
                if !oout.complete || oout.count != 0 {
                    bail!(
                        "overgroup <{words}> (order {}) admits {} designs; the orbit argument needs 0",
                        over.order(),
                        oout.count
                    );
                }
                println!(
                    "overgroup <{words}> (order {}): infeasible, certificate by exhaustive search",
                    over.order()
                );
            }
            if out.count % 4 != 0 {
                bail!("solution count {} is not divisible by 4", out.count);
            }
            println!("isomorphism types: {}", out.count / 4);
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_recurse(
    q: u32,
    n: usize,
    k: usize,
    v: usize,
    base_path: &std::path::Path,
    mode: RecurseMode,
    samples: usize,
    seed: u64,
    output: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let base = read_large_set(BufReader::new(File::open(base_path)?))?;
    if base.field.q() != q || base.n() != n {
        bail!(
            "base file is LS_{}[{}], requested LS_{}[{}]",
            base.field.q(),
            base.n(),
            q,
            n
        );
    }
    let base = Arc::new(base);
    let plan = if k == 3 {
        one_parameter_plan(&base, v)?
    } else {
        two_parameter_plan(&base, k, v)?
    };
    match mode {
        RecurseMode::Plan => {
            print!("{}", plan.describe());
            Ok(ExitCode::SUCCESS)
        }
        RecurseMode::Materialize => {
            let fam = plan.materialize()?;
            let ls = to_large_set(&fam)?;
            let path = output.ok_or_else(|| anyhow!("--output is required for materialize"))?;
            qdesign_core::design::write_large_set(&ls, BufWriter::new(File::create(path)?))?;
            println!(
                "materialized and verified LS_{}[{}]({},{},{}); wrote {}",
                q,
                n,
                ls.t,
                ls.k,
                ls.v,
                path.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        RecurseMode::Sample => {
            let field = base.field.clone();
            let t = 2usize;
            let expected = gaussian_binomial((v - t) as u64, (k - t) as u64, q as u64)
                / BigUint::from(n);
            let mut ev = plan.evaluator();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            println!("expected lambda per part: {expected}");
            let mut failures = 0u64;
            for _ in 0..samples {
                let t_sub = random_subspace(&mut rng, &field, v, t);
                let codes = encode_block(&t_sub)?;
                let code_text: Vec<String> = codes.iter().map(u64::to_string).collect();
                let mut values = Vec::with_capacity(n);
                for i in 0..n {
                    values.push(ev.lambda(i, &t_sub)?);
                }
                let ok = values.iter().all(|x| *x == expected);
                if !ok {
                    failures += 1;
                }
                let rendered: Vec<String> = values.iter().map(BigUint::to_string).collect();
                println!(
                    "T {} -> {} {}",
                    code_text.join(" "),
                    rendered.join(" "),
                    if ok { "ok" } else { "MISMATCH" }
                );
            }
            if failures > 0 {
                return Err(CoreError::Verification(format!(
                    "{failures} of {samples} sampled lambda values deviate"
                ))
                .into());
            }
            println!("{samples} samples, all parts at lambda = {expected}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn random_subspace(rng: &mut ChaCha8Rng, field: &Field, v: usize, k: usize) -> Subspace {
    loop {
        let mut mat = MatGf::zeros(k, v);
        for i in 0..k {
            for j in 0..v {
                mat.set(i, j, rng.gen_range(0..field.q()) as u8);
            }
        }
        let s = Subspace::canonicalize(field, &mat);
        if s.dim() == k {
            return s;
        }
    }
}
