//! `gm`: validation, invariant reports, the orthogonality criterion, and
//! the re-gluing / unwinding constructions over the gm/1 JSON format.
//!
//! Exit codes: 0 success/pass, 1 invalid manifold, 2 parse or usage
//! failure, 3 criterion refuted, 4 criterion not applicable, 5 transform
//! precondition failed, 6 internal assertion failure.

use clap::{Parser, Subcommand, ValueEnum};
use gm_core::charge::{orthogonality_criterion, OrthogonalityVerdict};
use gm_core::generators::{
    gen_cycle_example, gen_orthogonal, gen_random, with_generator_meta, GenOptions, GraphShape,
    PermAssignment, RandomTarget,
};
use gm_core::json::{basis_change_to_json, manifold_from_json, manifold_to_json};
use gm_core::report;
use gm_core::transform::{
    assertions_ok, orthogonality_witness, orthogonalize, reglue, unwind, TransformError,
    WitnessOutcome,
};
use gm_core::wstructure::GraphManifold;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INVALID: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_REFUTED: u8 = 3;
const EXIT_NOT_APPLICABLE: u8 = 4;
const EXIT_PRECONDITION: u8 = 5;
const EXIT_ASSERTION: u8 = 6;

#[derive(Parser)]
#[command(name = "gm", version, about = "4-dimensional graph-manifold W-structures: exact invariants, orthogonality, re-gluing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Read gluing matrices transposed (the alternative row/column reading).
    #[arg(long, global = true)]
    transpose_gluing: bool,
    /// Seed for the generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the produced manifold (or witness) to this file.
    #[arg(short = 'o', long, global = true)]
    output: Option<PathBuf>,
    /// Verbose diagnostics on standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural rules; exit 0 exactly when the manifold is valid.
    Validate { input: String },
    /// Per-edge and per-vertex invariants plus charge data.
    Report { input: String },
    /// Decide orthogonality by the three-condition criterion; on pass,
    /// construct the witness basis change.
    CheckOrthogonal { input: String },
    /// Re-glue an i=1, j=1, type<=2 manifold to signed-permutation form.
    Reglue { input: String },
    /// Build the finite-cover local model with i=1 and j=1.
    Unwind { input: String },
    /// Unwind, then re-glue.
    Orthogonalize { input: String },
    /// Emit a manifold from one of the built-in families.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// The cycle family: k torus blocks glued by slot exchanges.
    Cycle {
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Deform one gluing by the unipotent perturbation.
        #[arg(long)]
        perturbed: bool,
    },
    /// Orthogonal manifold from permutation data.
    Orthogonal {
        #[arg(long, value_enum, default_value_t = ShapeArg::Cycle)]
        shape: ShapeArg,
        /// Vertex count (cycle/complete) or strand count (theta).
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Alternate the two slot exchanges along the edges.
        #[arg(long)]
        alternating: bool,
        #[arg(long, value_enum)]
        assign: Option<AssignArg>,
    },
    /// Seeded random manifold.
    Random {
        #[arg(long, value_enum, default_value_t = ShapeArg::Cycle)]
        shape: ShapeArg,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_enum, default_value_t = TargetArg::Unconstrained)]
        target: TargetArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShapeArg {
    Cycle,
    Theta,
    Complete,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AssignArg {
    UniformZf2,
    UniformZf1,
    Alternating,
    AllTypeTwo,
    Mixed,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Unconstrained,
    I1j1type2,
    MixedJ,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gm: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate { input } => cmd_validate(cli, input),
        Command::Report { input } => cmd_report(cli, input),
        Command::CheckOrthogonal { input } => cmd_check_orthogonal(cli, input),
        Command::Reglue { input } => cmd_transform(cli, input, Stage::Reglue),
        Command::Unwind { input } => cmd_transform(cli, input, Stage::Unwind),
        Command::Orthogonalize { input } => cmd_transform(cli, input, Stage::Orthogonalize),
        Command::Generate { kind } => cmd_generate(cli, kind),
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| fail(EXIT_PARSE, format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| fail(EXIT_PARSE, format!("reading {path}: {e}")))
    }
}

fn load_manifold(cli: &Cli, path: &str) -> Result<GraphManifold, Failure> {
    let text = read_input(path)?;
    manifold_from_json(&text, cli.transpose_gluing)
        .map_err(|e| fail(EXIT_PARSE, format!("{path}: {e}")))
}

fn load_valid_manifold(cli: &Cli, path: &str) -> Result<GraphManifold, Failure> {
    let g = load_manifold(cli, path)?;
    let report = g.validate();
    if !report.is_valid() {
        return Err(fail(
            EXIT_INVALID,
            format!("invalid manifold:\n{report}"),
        ));
    }
    Ok(g)
}

fn write_output(cli: &Cli, content: &str) -> Result<(), Failure> {
    match &cli.output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| fail(EXIT_PARSE, format!("writing {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_validate(cli: &Cli, input: &str) -> Result<u8, Failure> {
    let g = load_manifold(cli, input)?;
    let r = g.validate();
    match cli.format {
        Format::Json => print!("{}", report::render(&report::validation_json(&r))),
        Format::Text => print!("{}", report::validation_text(&r)),
    }
    Ok(if r.is_valid() { 0 } else { EXIT_INVALID })
}

fn cmd_report(cli: &Cli, input: &str) -> Result<u8, Failure> {
    let g = load_valid_manifold(cli, input)?;
    let rendered = match cli.format {
        Format::Json => report::render(
            &report::full_report_json(&g)
                .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?,
        ),
        Format::Text => report::full_report_text(&g)
            .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?,
    };
    print!("{rendered}");
    Ok(0)
}

fn cmd_check_orthogonal(cli: &Cli, input: &str) -> Result<u8, Failure> {
    let g = load_valid_manifold(cli, input)?;
    let verdict = orthogonality_criterion(&g)
        .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?;
    let witness = if verdict == OrthogonalityVerdict::Pass {
        match orthogonality_witness(&g) {
            Ok(w @ WitnessOutcome::Witness { .. }) => Some(w),
            Ok(WitnessOutcome::Refutation { residuals }) => {
                return Err(fail(
                    EXIT_ASSERTION,
                    format!(
                        "criterion passed but the witness search failed (residuals {residuals:?})"
                    ),
                ))
            }
            Err(e) => return Err(fail(EXIT_ASSERTION, e.to_string())),
        }
    } else {
        None
    };
    match cli.format {
        Format::Json => print!(
            "{}",
            report::render(&report::verdict_json(&verdict, witness.as_ref()))
        ),
        Format::Text => print!("{}", report::verdict_text(&verdict, witness.as_ref())),
    }
    if let (Some(path), Some(WitnessOutcome::Witness { change, manifold, .. })) =
        (&cli.output, &witness)
    {
        let doc = format!(
            "{{\"schema\":\"gm/1\",\"kind\":\"witness\",\"change\":{},\"manifold\":{}}}\n",
            basis_change_to_json(&g, change),
            manifold_to_json(manifold)
        );
        std::fs::write(path, doc)
            .map_err(|e| fail(EXIT_PARSE, format!("writing {}: {e}", path.display())))?;
    }
    Ok(match verdict {
        OrthogonalityVerdict::Pass => 0,
        OrthogonalityVerdict::Refuted { .. } => EXIT_REFUTED,
        OrthogonalityVerdict::NotApplicable { .. } => EXIT_NOT_APPLICABLE,
    })
}

enum Stage {
    Reglue,
    Unwind,
    Orthogonalize,
}

fn transform_failure(e: TransformError) -> Failure {
    match &e {
        TransformError::PreconditionFailed(_)
        | TransformError::SecondaryIndexObstruction { .. }
        | TransformError::TypeObstruction { .. }
        | TransformError::SearchBudgetExceeded(_) => fail(EXIT_PRECONDITION, e.to_string()),
        _ => fail(EXIT_ASSERTION, e.to_string()),
    }
}

fn cmd_transform(cli: &Cli, input: &str, stage: Stage) -> Result<u8, Failure> {
    let g = load_valid_manifold(cli, input)?;
    let (rendered, ok, result_manifold) = match stage {
        Stage::Reglue => {
            let r = reglue(&g).map_err(transform_failure)?;
            let ok = assertions_ok(&r.assertions);
            let rendered = match cli.format {
                Format::Json => report::render(&report::reglue_json(&r)),
                Format::Text => report::reglue_text(&r),
            };
            (rendered, ok, r.manifold)
        }
        Stage::Unwind => {
            let u = unwind(&g).map_err(transform_failure)?;
            let ok = assertions_ok(&u.assertions);
            let rendered = match cli.format {
                Format::Json => report::render(&report::unwind_json(&u)),
                Format::Text => report::unwind_text(&u),
            };
            (rendered, ok, u.local_model)
        }
        Stage::Orthogonalize => {
            let p = orthogonalize(&g).map_err(transform_failure)?;
            let ok = p.all_assertions_ok();
            let rendered = match cli.format {
                Format::Json => report::render(&report::pipeline_json(&p)),
                Format::Text => report::pipeline_text(&p),
            };
            let m = p.manifold().clone();
            (rendered, ok, m)
        }
    };
    print!("{rendered}");
    if let Some(path) = &cli.output {
        let doc = format!("{}\n", manifold_to_json(&result_manifold));
        std::fs::write(path, doc)
            .map_err(|e| fail(EXIT_PARSE, format!("writing {}: {e}", path.display())))?;
    }
    Ok(if ok { 0 } else { EXIT_ASSERTION })
}

fn shape_of(shape: ShapeArg, k: usize) -> Result<GraphShape, Failure> {
    let s = match shape {
        ShapeArg::Cycle => GraphShape::Cycle(k),
        ShapeArg::Theta => GraphShape::Theta(k.max(3)),
        ShapeArg::Complete => GraphShape::Complete(k),
    };
    match s {
        GraphShape::Cycle(k) | GraphShape::Complete(k) if k < 3 => Err(fail(
            EXIT_PARSE,
            "shape needs at least 3 vertices".to_string(),
        )),
        other => Ok(other),
    }
}

fn cmd_generate(cli: &Cli, kind: &GenerateKind) -> Result<u8, Failure> {
    let g = match kind {
        GenerateKind::Cycle { k, perturbed } => {
            if *k < 3 {
                return Err(fail(EXIT_PARSE, "the cycle family needs --k >= 3"));
            }
            let g = gen_cycle_example(*k, *perturbed)
                .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?;
            with_generator_meta(
                g,
                if *perturbed { "cycle-perturbed" } else { "cycle" },
                None,
            )
        }
        GenerateKind::Orthogonal {
            shape,
            k,
            alternating,
            assign,
        } => {
            let assignment = match (assign, alternating) {
                (Some(AssignArg::UniformZf2), _) => PermAssignment::UniformZF2,
                (Some(AssignArg::UniformZf1), _) => PermAssignment::UniformZF1,
                (Some(AssignArg::Alternating), _) | (None, true) => PermAssignment::Alternating,
                (Some(AssignArg::AllTypeTwo), _) => PermAssignment::AllTypeTwo,
                (Some(AssignArg::Mixed), _) => PermAssignment::Mixed,
                (None, false) => PermAssignment::AllTypeTwo,
            };
            let g = gen_orthogonal(shape_of(*shape, *k)?, assignment, cli.seed)
                .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?;
            with_generator_meta(g, "orthogonal", Some(cli.seed))
        }
        GenerateKind::Random { shape, k, target } => {
            let target = match target {
                TargetArg::Unconstrained => RandomTarget::Unconstrained,
                TargetArg::I1j1type2 => RandomTarget::I1J1Type2,
                TargetArg::MixedJ => RandomTarget::MixedJ,
            };
            let g = gen_random(
                shape_of(*shape, *k)?,
                cli.seed,
                GenOptions {
                    target,
                    ..Default::default()
                },
            )
            .map_err(|e| fail(EXIT_ASSERTION, e.to_string()))?;
            with_generator_meta(g, "random", Some(cli.seed))
        }
    };
    let doc = format!("{}\n", manifold_to_json(&g));
    write_output(cli, &doc)?;
    Ok(0)
}
