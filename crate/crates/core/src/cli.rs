//! Command-line surface: ingest component files, run the analyses, and emit
//! deterministic reports.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::formats::{self, ParseError};
use crate::mixlayer::{is_proper, is_strongly_proper, BrickPartition, MixLayerError, Wall};
use crate::permgroup::{self, GroupError};
use crate::report::{object, sha256_hex, Report};
use crate::sboxprops::{
    self, anti_invariance_report, differential_uniformity, is_anti_crooked,
};
use crate::tbcipher::{
    self, desk_check, desk_scale_reduction, AltRule, CipherError, GroupIdentityVerdict,
    LayerProvenance, PrimitivityVerdict, Verdict,
};
use crate::vboolfn::{anf_degree, nonlinearity};

/// Process exit codes: 0 success, 1 input error, 2 property violations,
/// 3 resource cap refused.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser)]
#[command(
    name = "tbgroup",
    about = "Analyze S-boxes and mixing layers of substitution-permutation ciphers and the groups their round functions generate",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonFlags {
    /// Emit the report as JSON instead of structured text.
    #[arg(long)]
    pub json: bool,
    /// Read files with the opposite bit-numbering convention (bit 0 is the
    /// most significant state bit).
    #[arg(long)]
    pub msb0: bool,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Analyze a single S-box file.
    Sbox {
        path: PathBuf,
        /// Largest anti-invariance order to report (default: width - 1).
        #[arg(long)]
        max_r: Option<usize>,
        /// Also run the conjugate-translation group check (width <= 5).
        #[arg(long)]
        with_group_check: bool,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Analyze a mixing layer against a brick partition.
    Layer {
        path: PathBuf,
        /// Brick shape as m,n (width and count).
        #[arg(long, value_parser = parse_shape)]
        bricks: (usize, usize),
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run the theorem engine on a cipher spec file.
    Cipher {
        path: PathBuf,
        /// Reduce to this many bricks and verify the group directly.
        #[arg(long)]
        desk_check: Option<usize>,
        /// Seed for the auto-generated reduction layer.
        #[arg(long, default_value_t = 0x7b67)]
        seed: u64,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run one of the computational validation suites.
    Validate {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Sample count (suites have sensible defaults).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0xced)]
        seed: u64,
        /// S-box width for the nonlinearity-equivalence suite.
        #[arg(long, default_value_t = 4)]
        width: usize,
        /// State dimension for the two-subgroup suite (3..=5).
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[command(flatten)]
        common: CommonFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Suite {
    /// Every 4-uniform 4-bit permutation is strongly 1-anti-invariant.
    Fact4uniform,
    /// Nonzero nonlinearity coincides with strong 1-anti-invariance.
    NonlinEquiv,
    /// Primitive groups generated by two translation groups are giants.
    AffineProp,
    /// Subspace oracle agrees with the group-engine primitivity verdict.
    OracleXcheck,
}

fn parse_shape(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s.split_once(',').ok_or("expected m,n")?;
    Ok((
        m.trim().parse().map_err(|_| "invalid m".to_string())?,
        n.trim().parse().map_err(|_| "invalid n".to_string())?,
    ))
}

/// Error wrapper mapping every failure onto a process exit code.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl CliFailure {
    fn input(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INPUT, message: message.to_string() }
    }

    fn cap(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_CAP, message: message.to_string() }
    }
}

impl From<ParseError> for CliFailure {
    fn from(e: ParseError) -> Self {
        CliFailure::input(e)
    }
}

impl From<GroupError> for CliFailure {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::DegreeOverCap { .. } | GroupError::WidthOverBound { .. } => {
                CliFailure::cap(e)
            }
            other => CliFailure::input(other),
        }
    }
}

impl From<MixLayerError> for CliFailure {
    fn from(e: MixLayerError) -> Self {
        match e {
            MixLayerError::TooManyBricks { .. }
            | MixLayerError::StateTooWide { .. }
            | MixLayerError::OrderCapExceeded(_) => CliFailure::cap(e),
            other => CliFailure::input(other),
        }
    }
}

impl From<CipherError> for CliFailure {
    fn from(e: CipherError) -> Self {
        match e {
            CipherError::DegreeOverBound { .. } | CipherError::OracleOverBound { .. } => {
                CliFailure::cap(e)
            }
            CipherError::MixLayer(inner) => inner.into(),
            CipherError::Group(inner) => inner.into(),
            other => CliFailure::input(other),
        }
    }
}

impl From<crate::sboxprops::SboxPropsError> for CliFailure {
    fn from(e: crate::sboxprops::SboxPropsError) -> Self {
        CliFailure::input(e)
    }
}

/// Run a parsed command line; returns the rendered report and exit code.
pub fn run(cli: Cli) -> (String, i32) {
    let started = Instant::now();
    let result = match &cli.command {
        Command::Sbox { path, max_r, with_group_check, common } => {
            cmd_sbox(path, *max_r, *with_group_check, common)
        }
        Command::Layer { path, bricks, common } => cmd_layer(path, *bricks, common),
        Command::Cipher { path, desk_check, seed, common } => {
            cmd_cipher(path, *desk_check, *seed, common)
        }
        Command::Validate { suite, trials, seed, width, dim, common } => {
            cmd_validate(*suite, *trials, *seed, *width, *dim, common)
        }
    };
    let common = match &cli.command {
        Command::Sbox { common, .. }
        | Command::Layer { common, .. }
        | Command::Cipher { common, .. }
        | Command::Validate { common, .. } => common,
    };
    match result {
        Ok((mut report, code)) => {
            if common.timings {
                report.set("elapsed_ms", started.elapsed().as_millis() as u64);
            }
            let rendered = if common.json { report.to_json() } else { report.to_text() };
            (rendered, code)
        }
        Err(failure) => (format!("error: {}\n", failure.message), failure.code),
    }
}

fn input_echo(path: &PathBuf) -> Result<Value, CliFailure> {
    let bytes = std::fs::read(path).map_err(|e| {
        CliFailure::input(format!("cannot read {}: {e}", path.display()))
    })?;
    Ok(object(vec![
        ("path", path.display().to_string().into()),
        ("sha256", sha256_hex(&bytes).into()),
    ]))
}

fn wall_value(w: &Wall) -> Value {
    let indices: Vec<Value> =
        w.brick_indices().iter().map(|&i| Value::from(i as u64)).collect();
    object(vec![("bricks", Value::Array(indices)), ("dim", (w.dim() as u64).into())])
}

fn cmd_sbox(
    path: &PathBuf,
    max_r: Option<usize>,
    with_group_check: bool,
    common: &CommonFlags,
) -> Result<(Report, i32), CliFailure> {
    let sbox = formats::read_sbox_file(path, common.msb0)?;
    let m = sbox.m();
    let mut report = Report::new("sbox-analysis");
    report.set_value("input", input_echo(path)?);
    report.set("m", m as u64);
    report.set(
        "table",
        sbox.to_hex().unwrap_or_else(|| {
            sbox.table().iter().map(u16::to_string).collect::<Vec<_>>().join(" ")
        }),
    );
    report.set("bit_order", if common.msb0 { "msb0" } else { "lsb0" });
    report.set("is_permutation", sbox.is_permutation());

    let profile = differential_uniformity(&sbox);
    let anti = anti_invariance_report(&sbox)?;
    let ac = is_anti_crooked(&sbox);
    let nl = nonlinearity(&sbox);
    let max_r = max_r.unwrap_or(m - 1).min(m - 1);

    let weak: Vec<Value> = (1..=max_r)
        .map(|r| {
            object(vec![
                ("delta", (1u64 << r).into()),
                ("weakly_uniform", profile.is_weakly_uniform(1 << r).into()),
            ])
        })
        .collect();
    report.set_value(
        "uniformity",
        object(vec![
            ("delta", profile.delta().into()),
            ("min_derivative_image", profile.min_image_size().into()),
            ("weak", Value::Array(weak)),
        ]),
    );
    report.set_value(
        "anti_invariance",
        object(vec![
            ("normalized_to_fix_zero", anti.normalized.into()),
            ("max_r_strong", (anti.max_r_strong as u64).into()),
            ("max_r_plain", (anti.max_r_plain as u64).into()),
        ]),
    );
    report.set_value(
        "anti_crooked",
        object(vec![
            ("holds", ac.holds.into()),
            (
                "witness_direction",
                ac.witness.map(|a| Value::from(a as u64)).unwrap_or(Value::Null),
            ),
        ]),
    );
    report.set("nonlinearity", nl);
    let degrees: Vec<Value> = (1..sbox.size() as u16)
        .map(|v| Value::from(anf_degree(&sbox.component(v)) as u64))
        .collect();
    let min_degree = degrees.iter().map(|d| d.as_u64().unwrap()).min().unwrap_or(0);
    report.set_value(
        "component_degrees",
        object(vec![("min", min_degree.into()), ("per_component", Value::Array(degrees))]),
    );

    if with_group_check {
        let ok = permgroup::check_condition_2(&sbox.as_permutation().map_err(CliFailure::input)?)?;
        report.set("conjugate_translation_condition", ok);
    }
    Ok((report, EXIT_OK))
}

fn cmd_layer(
    path: &PathBuf,
    (m, n): (usize, usize),
    common: &CommonFlags,
) -> Result<(Report, i32), CliFailure> {
    let layer = formats::read_layer_file(path, common.msb0)?;
    let partition = BrickPartition::new(m, n).map_err(CliFailure::from)?;
    if layer.dim() != partition.dim() {
        return Err(CliFailure::input(format!(
            "layer dimension {} does not match bricks {m},{n} (d = {})",
            layer.dim(),
            partition.dim()
        )));
    }
    let mut report = Report::new("layer-analysis");
    report.set_value("input", input_echo(path)?);
    report.set("d", layer.dim() as u64);
    report.set("bricks", format!("{m},{n}"));
    report.set("bit_order", if common.msb0 { "msb0" } else { "lsb0" });
    report.set("wall_count", partition.wall_count());

    let proper = is_proper(&layer, &partition)?;
    report.set_value(
        "proper",
        object(vec![
            ("holds", proper.holds.into()),
            (
                "invariant_wall",
                proper.invariant_wall.as_ref().map(wall_value).unwrap_or(Value::Null),
            ),
        ]),
    );
    let strong = is_strongly_proper(&layer, &partition)?;
    report.set_value(
        "strongly_proper",
        object(vec![
            ("holds", strong.holds.into()),
            (
                "witness",
                strong
                    .witness
                    .as_ref()
                    .map(|(w, w2)| {
                        object(vec![("from", wall_value(w)), ("to", wall_value(w2))])
                    })
                    .unwrap_or(Value::Null),
            ),
        ]),
    );
    Ok((report, EXIT_OK))
}

fn verdict_value(verdict: &Verdict) -> Value {
    let primitivity = match &verdict.primitivity {
        PrimitivityVerdict::Proven(rule) => object(vec![
            ("status", "proven_primitive".into()),
            ("rule", rule.to_string().into()),
        ]),
        PrimitivityVerdict::Unknown => object(vec![("status", "unknown".into())]),
    };
    let identity = match &verdict.group_identity {
        GroupIdentityVerdict::ProvenAlt(rule) => object(vec![
            ("status", "proven_alt".into()),
            ("rule", alt_rule_value(rule)),
        ]),
        GroupIdentityVerdict::NotAffine(rule) => object(vec![
            ("status", "not_affine_only".into()),
            ("rule", alt_rule_value(rule)),
        ]),
        GroupIdentityVerdict::Unknown => object(vec![("status", "unknown".into())]),
    };
    let satisfied: Vec<Value> = verdict
        .satisfied_primitivity_rules
        .iter()
        .map(|r| Value::String(r.to_string()))
        .collect();
    let bricks: Vec<Value> = verdict
        .bricks
        .iter()
        .map(|e| {
            object(vec![
                ("index", (e.index as u64).into()),
                ("delta", e.delta.into()),
                ("min_derivative_image", e.min_image_size.into()),
                ("max_r_strong", (e.max_r_strong as u64).into()),
                ("nonlinearity", e.nonlinearity.into()),
                ("anti_crooked", e.anti_crooked.into()),
                (
                    "conjugate_translation_condition",
                    e.condition2.map(Value::from).unwrap_or(Value::Null),
                ),
                ("normalized", e.normalized.into()),
            ])
        })
        .collect();
    object(vec![
        ("model_applicable", verdict.model_applicable.into()),
        ("layer_proper", verdict.layer_proper.holds.into()),
        ("layer_strongly_proper", verdict.layer_strongly_proper.holds.into()),
        (
            "strongly_proper_witness",
            verdict
                .layer_strongly_proper
                .witness
                .as_ref()
                .map(|(w, w2)| object(vec![("from", wall_value(w)), ("to", wall_value(w2))]))
                .unwrap_or(Value::Null),
        ),
        ("primitivity", primitivity),
        ("group_identity", identity),
        ("satisfied_primitivity_rules", Value::Array(satisfied)),
        ("bricks", Value::Array(bricks)),
    ])
}

fn alt_rule_value(rule: &AltRule) -> Value {
    rule.to_string().into()
}

fn cmd_cipher(
    path: &PathBuf,
    desk_n: Option<usize>,
    seed: u64,
    common: &CommonFlags,
) -> Result<(Report, i32), CliFailure> {
    let spec_file = formats::read_spec_file(path, common.msb0)?;
    let mut report = Report::new("cipher-analysis");
    report.set_value("input", input_echo(path)?);
    report.set("bit_order", if common.msb0 { "msb0" } else { "lsb0" });
    fill_cipher_report(&mut report, &spec_file.spec, desk_n, seed)?;
    Ok((report, EXIT_OK))
}

/// Shared by the `cipher` subcommand and the Python bindings.
pub fn fill_cipher_report(
    report: &mut Report,
    spec: &crate::tbcipher::CipherSpec,
    desk_n: Option<usize>,
    seed: u64,
) -> Result<(), CliFailure> {
    report.set("m", spec.m() as u64);
    report.set("n", spec.n() as u64);
    report.set("d", spec.dim() as u64);
    report.set("key_schedule_surjective", spec.key_schedule_surjective());

    let verdict = tbcipher::apply_alternating_theorems(spec)?;
    report.set_value("verdict", verdict_value(&verdict));

    if let Some(target_n) = desk_n {
        let reduction = desk_scale_reduction(spec, target_n, None, seed)?;
        let check = desk_check(&reduction.spec)?;
        let provenance = match reduction.provenance {
            LayerProvenance::Supplied => object(vec![("layer", "supplied".into())]),
            LayerProvenance::AutoGenerated { seed, attempts } => object(vec![
                ("layer", "auto-generated strongly proper".into()),
                ("seed", seed.into()),
                ("attempts", attempts.into()),
            ]),
        };
        report.set_value(
            "desk_check",
            object(vec![
                ("reduced_n", (target_n as u64).into()),
                ("degree", (check.degree as u64).into()),
                ("provenance", provenance),
                ("transitive", check.transitive.into()),
                ("primitive", check.primitive.into()),
                (
                    "block_size",
                    check
                        .block_witness
                        .as_ref()
                        .map(|b| Value::from(b.block_size() as u64))
                        .unwrap_or(Value::Null),
                ),
                ("round_parity_even", check.round_parity.is_even().into()),
                (
                    "order",
                    check.order.as_ref().map(|o| Value::String(o.to_string())).unwrap_or(Value::Null),
                ),
                (
                    "alternating",
                    check
                        .alternating
                        .map(|a| {
                            Value::String(
                                match a {
                                    permgroup::AltContainment::No => "no",
                                    permgroup::AltContainment::Alt => "alt",
                                    permgroup::AltContainment::Sym => "sym",
                                }
                                .into(),
                            )
                        })
                        .unwrap_or(Value::Null),
                ),
                (
                    "classification",
                    check
                        .classification
                        .map(|c| Value::String(c.as_str().into()))
                        .unwrap_or(Value::Null),
                ),
            ]),
        );
    }
    Ok(())
}

fn cmd_validate(
    suite: Suite,
    trials: Option<usize>,
    seed: u64,
    width: usize,
    dim: usize,
    _common: &CommonFlags,
) -> Result<(Report, i32), CliFailure> {
    let mut report = Report::new("validation-suite");
    report.set("seed", seed);
    let violations = match suite {
        Suite::Fact4uniform => {
            let trials = trials.unwrap_or(1_000_000);
            let sweep = sboxprops::check_fact_4uniform_random(trials, seed);
            report.set("suite", "fact-4uniform");
            report.set("trials", trials as u64);
            report.set("four_uniform", sweep.four_uniform as u64);
            report.set("violations", sweep.violations.len() as u64);
            sweep.violations.len()
        }
        Suite::NonlinEquiv => {
            report.set("suite", "nonlin-equiv");
            report.set("width", width as u64);
            if width == 3 {
                let sweep = sboxprops::nonlinearity_equivalence_exhaustive_m3();
                report.set("mode", "exhaustive");
                report.set("checked", sweep.checked as u64);
                report.set("discrepancies", sweep.discrepancies.len() as u64);
                sweep.discrepancies.len()
            } else {
                let trials = trials.unwrap_or(10_000);
                let sweep = sboxprops::nonlinearity_equivalence_random(width, trials, seed);
                report.set("mode", "random");
                report.set("checked", sweep.checked as u64);
                report.set("discrepancies", sweep.discrepancies.len() as u64);
                sweep.discrepancies.len()
            }
        }
        Suite::AffineProp => {
            let trials = trials.unwrap_or(1_000);
            let sweep = permgroup::validate_affine_proposition(dim, trials, seed)?;
            report.set("suite", "affine-prop");
            report.set("dim", dim as u64);
            report.set("trials", trials as u64);
            report.set("primitive_count", sweep.primitive_count as u64);
            report.set("violations", sweep.violations as u64);
            sweep.violations
        }
        Suite::OracleXcheck => {
            let trials = trials.unwrap_or(100);
            let sweep = tbcipher::oracle_cross_validation(trials, seed)?;
            report.set("suite", "oracle-xcheck");
            report.set("specs", sweep.specs as u64);
            report.set("imprimitive_specs", sweep.imprimitive_count as u64);
            report.set("disagreements", sweep.disagreements as u64);
            sweep.disagreements
        }
    };
    let code = if violations == 0 { EXIT_OK } else { EXIT_VIOLATION };
    report.set("passed", violations == 0);
    Ok((report, code))
}
