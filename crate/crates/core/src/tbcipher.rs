//! The cipher model and theorem engine: assemble rounds, build the group
//! generated by a round together with the translations, and apply the
//! sufficient conditions for primitivity and for the alternating group.

use std::fmt;

use num_bigint::BigUint;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::gf2::{self, Gf2Matrix, Gf2Subspace};
use crate::mixlayer::{
    is_proper, is_strongly_proper, BrickPartition, LinearLayer, MixLayerError, ProperVerdict,
    StronglyProperVerdict,
};
use crate::permgroup::{
    check_condition_2, classify_primitive, translation_generators, AltContainment, BlockSystem,
    Group, GroupError, Parity, Permutation, PrimitiveClass,
};
use crate::sboxprops::{
    anti_invariance_report, differential_uniformity, is_anti_crooked, SboxPropsError,
};
use crate::vboolfn::{nonlinearity, normalize_zero, SBox, SboxError};

/// Explicit round permutations are materialized up to this state dimension.
pub const MAX_EXPLICIT_DIM: usize = 16;

/// Subspace enumeration bound for the independent imprimitivity oracle.
pub const MAX_ORACLE_DIM: usize = 12;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CipherError {
    #[error("expected 1 or {n} bricks, got {got}")]
    BrickCount { n: usize, got: usize },
    #[error("brick {index} has width {got}, expected {expected}")]
    BrickWidth { index: usize, expected: usize, got: usize },
    #[error("brick {0} is not a permutation")]
    BrickNotBijective(usize),
    #[error("state dimension {d} exceeds {max} for explicit round construction")]
    DegreeOverBound { d: usize, max: usize },
    #[error("state dimension {d} exceeds {max} for the subspace oracle")]
    OracleOverBound { d: usize, max: usize },
    #[error("round-key map is flagged non-surjective: the round group model does not apply")]
    ModelNotApplicable,
    #[error("no strongly proper layer found after {0} attempts")]
    NoLayerFound(u64),
    #[error("reduction needs at least 2 bricks, got {0}")]
    ReductionTooSmall(usize),
    #[error(transparent)]
    MixLayer(#[from] MixLayerError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Props(#[from] SboxPropsError),
    #[error(transparent)]
    Sbox(#[from] SboxError),
}

/// A one-round cipher model: n bricks of width m, a mixing layer, and the
/// surjectivity flag for the round-key schedule. Bricks are stored
/// 0-normalized (the flags record which tables were translated).
#[derive(Debug, Clone)]
pub struct CipherSpec {
    m: usize,
    n: usize,
    bricks: Vec<SBox>,
    bricks_normalized: Vec<bool>,
    layer: LinearLayer,
    key_schedule_surjective: bool,
}

impl CipherSpec {
    /// `bricks` holds either one table (replicated across all positions) or
    /// one per position.
    pub fn new(
        m: usize,
        n: usize,
        bricks: Vec<SBox>,
        layer: LinearLayer,
        key_schedule_surjective: bool,
    ) -> Result<Self, CipherError> {
        let partition = BrickPartition::new(m, n)?;
        if layer.dim() != partition.dim() {
            return Err(MixLayerError::LayerPartitionMismatch {
                layer: layer.dim(),
                partition: partition.dim(),
            }
            .into());
        }
        let bricks = if bricks.len() == 1 {
            vec![bricks.into_iter().next().expect("length checked"); n]
        } else if bricks.len() == n {
            bricks
        } else {
            return Err(CipherError::BrickCount { n, got: bricks.len() });
        };
        for (i, b) in bricks.iter().enumerate() {
            if b.m() != m {
                return Err(CipherError::BrickWidth { index: i, expected: m, got: b.m() });
            }
            if !b.is_permutation() {
                return Err(CipherError::BrickNotBijective(i));
            }
        }
        let bricks_normalized: Vec<bool> = bricks.iter().map(|b| !b.fixes_zero()).collect();
        let bricks = bricks.iter().map(normalize_zero).collect();
        Ok(Self { m, n, bricks, bricks_normalized, layer, key_schedule_surjective })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    pub fn partition(&self) -> BrickPartition {
        BrickPartition::new(self.m, self.n).expect("validated at construction")
    }

    pub fn bricks(&self) -> &[SBox] {
        &self.bricks
    }

    pub fn bricks_normalized(&self) -> &[bool] {
        &self.bricks_normalized
    }

    pub fn layer(&self) -> &LinearLayer {
        &self.layer
    }

    pub fn key_schedule_surjective(&self) -> bool {
        self.key_schedule_surjective
    }

    /// Distinct brick tables (most specs replicate a single S-box).
    pub fn distinct_bricks(&self) -> Vec<&SBox> {
        let mut out: Vec<&SBox> = Vec::new();
        for b in &self.bricks {
            if !out.contains(&b) {
                out.push(b);
            }
        }
        out
    }

    /// Apply the parallel bricks to a packed state.
    pub fn apply_bricks(&self, x: u64) -> u64 {
        let mask = (1u64 << self.m) - 1;
        let mut y = 0u64;
        for (i, brick) in self.bricks.iter().enumerate() {
            let shift = self.m * i;
            y |= (brick.apply(((x >> shift) & mask) as u16) as u64) << shift;
        }
        y
    }
}

/// The round permutation x -> (x through the bricks) through the layer.
/// Fixes 0 because the bricks are normalized and the layer is linear.
pub fn build_round(spec: &CipherSpec) -> Result<Permutation, CipherError> {
    let d = spec.dim();
    if d > MAX_EXPLICIT_DIM {
        return Err(CipherError::DegreeOverBound { d, max: MAX_EXPLICIT_DIM });
    }
    let n = 1usize << d;
    let images: Vec<u32> =
        (0..n as u64).map(|x| spec.layer.apply_bits(spec.apply_bricks(x)) as u32).collect();
    Ok(Permutation::from_images(images).expect("bijective bricks and layer"))
}

/// The group generated by one proper round: the round permutation together
/// with all translations.
pub fn round_group(spec: &CipherSpec) -> Result<Group, CipherError> {
    if !spec.key_schedule_surjective {
        return Err(CipherError::ModelNotApplicable);
    }
    let rho = build_round(spec)?;
    let d = spec.dim();
    let mut gens = translation_generators(d);
    gens.push(rho);
    Ok(Group::new(1 << d, gens)?)
}

// ---------------------------------------------------------------------------
// Theorem engine
// ---------------------------------------------------------------------------

/// The two sufficient conditions for primitivity, indexed by the uniformity
/// exponent r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitivityRule {
    /// Every brick is 2^r-uniform and strongly (r-1)-anti-invariant.
    DeltaUniform { r: usize },
    /// Every brick is weakly 2^r-uniform and strongly r-anti-invariant.
    WeakDeltaUniform { r: usize },
}

impl fmt::Display for PrimitivityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitivityRule::DeltaUniform { r } => {
                write!(f, "2^{r}-uniform + strongly {}-anti-invariant bricks", r - 1)
            }
            PrimitivityRule::WeakDeltaUniform { r } => {
                write!(f, "weakly 2^{r}-uniform + strongly {r}-anti-invariant bricks")
            }
        }
    }
}

/// The routes that upgrade a primitive verdict to the alternating group
/// (all additionally require a strongly proper layer), or exclude the
/// affine case when the layer is merely proper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltRule {
    /// Brick width 3, 4 or 5 with at least two bricks.
    SmallBrickWidth { m: usize },
    /// Every brick is anti-crooked.
    AllBricksAntiCrooked,
    /// Some brick's conjugated translations cover the alternating group of
    /// the brick space.
    BrickConjugatesCoverAlt { brick: usize },
}

impl fmt::Display for AltRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AltRule::SmallBrickWidth { m } => write!(f, "brick width {m} in 3..=5"),
            AltRule::AllBricksAntiCrooked => write!(f, "all bricks anti-crooked"),
            AltRule::BrickConjugatesCoverAlt { brick } => {
                write!(f, "brick {brick} conjugate-translation condition")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimitivityVerdict {
    Proven(PrimitivityRule),
    Unknown,
}

impl PrimitivityVerdict {
    pub fn is_proven(&self) -> bool {
        matches!(self, PrimitivityVerdict::Proven(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupIdentityVerdict {
    /// The group generated by the round functions is the alternating group.
    ProvenAlt(AltRule),
    /// Primitive and provably not of affine type, but the wreath case is
    /// not excluded (the layer is not strongly proper).
    NotAffine(AltRule),
    Unknown,
}

impl GroupIdentityVerdict {
    pub fn is_proven_alt(&self) -> bool {
        matches!(self, GroupIdentityVerdict::ProvenAlt(_))
    }
}

/// Per-brick property evidence backing a verdict.
#[derive(Debug, Clone)]
pub struct BrickEvidence {
    pub index: usize,
    pub delta: u32,
    pub min_image_size: u32,
    pub max_r_strong: usize,
    pub nonlinearity: u32,
    pub anti_crooked: bool,
    pub ac_witness: Option<u16>,
    /// Whether the conjugate-translation condition holds; None when the
    /// width exceeds the instant-check bound.
    pub condition2: Option<bool>,
    pub normalized: bool,
}

/// Everything the engine derived on the way to a verdict.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub model_applicable: bool,
    pub layer_proper: ProperVerdict,
    pub layer_strongly_proper: StronglyProperVerdict,
    pub primitivity: PrimitivityVerdict,
    pub group_identity: GroupIdentityVerdict,
    pub satisfied_primitivity_rules: Vec<PrimitivityRule>,
    pub bricks: Vec<BrickEvidence>,
}

fn brick_evidence(spec: &CipherSpec) -> Result<Vec<BrickEvidence>, CipherError> {
    let m = spec.m();
    spec.bricks
        .iter()
        .enumerate()
        .map(|(index, brick)| {
            let profile = differential_uniformity(brick);
            let anti = anti_invariance_report(brick)?;
            let ac = is_anti_crooked(brick);
            let condition2 = if m <= 5 {
                Some(check_condition_2(&brick.as_permutation()?)?)
            } else {
                None
            };
            Ok(BrickEvidence {
                index,
                delta: profile.delta(),
                min_image_size: profile.min_image_size(),
                max_r_strong: anti.max_r_strong,
                nonlinearity: nonlinearity(brick),
                anti_crooked: ac.holds,
                ac_witness: ac.witness,
                condition2,
                normalized: spec.bricks_normalized[index],
            })
        })
        .collect()
}

/// Scan the uniformity exponents in increasing order; within one exponent
/// the plain-uniformity route is tried before the weak one. Requires a
/// proper layer and brick width at least 3.
fn primitivity_rules(spec: &CipherSpec, evidence: &[BrickEvidence]) -> Vec<PrimitivityRule> {
    let m = spec.m();
    let mut satisfied = Vec::new();
    if m < 3 {
        return satisfied;
    }
    let threshold = 1u64 << (m - 1);
    for r in 1..m {
        if r >= 2 {
            let ok = evidence
                .iter()
                .all(|e| e.delta <= (1 << r) && e.max_r_strong >= r - 1);
            if ok {
                satisfied.push(PrimitivityRule::DeltaUniform { r });
            }
        }
        let ok = evidence.iter().all(|e| {
            (e.min_image_size as u64) * (1u64 << r) > threshold && e.max_r_strong >= r
        });
        if ok {
            satisfied.push(PrimitivityRule::WeakDeltaUniform { r });
        }
    }
    satisfied
}

/// Apply the sufficient conditions for primitivity of the round group.
pub fn apply_primitivity_theorems(spec: &CipherSpec) -> Result<Verdict, CipherError> {
    let partition = spec.partition();
    let layer_proper = is_proper(spec.layer(), &partition)?;
    let layer_strongly_proper = is_strongly_proper(spec.layer(), &partition)?;
    let bricks = brick_evidence(spec)?;
    let model_applicable = spec.key_schedule_surjective();

    let satisfied = if layer_proper.holds && model_applicable {
        primitivity_rules(spec, &bricks)
    } else {
        Vec::new()
    };
    let primitivity = match satisfied.first() {
        Some(&rule) => PrimitivityVerdict::Proven(rule),
        None => PrimitivityVerdict::Unknown,
    };
    Ok(Verdict {
        model_applicable,
        layer_proper,
        layer_strongly_proper,
        primitivity,
        group_identity: GroupIdentityVerdict::Unknown,
        satisfied_primitivity_rules: satisfied,
        bricks,
    })
}

/// Apply the alternating-group conditions on top of the primitivity ones.
pub fn apply_alternating_theorems(spec: &CipherSpec) -> Result<Verdict, CipherError> {
    let mut verdict = apply_primitivity_theorems(spec)?;
    if !verdict.primitivity.is_proven() {
        return Ok(verdict);
    }
    let m = spec.m();
    let n = spec.n();

    // Candidate affine-exclusion routes, cheapest first. The small-width
    // route additionally needs the strongly proper layer, so it only yields
    // the full alternating conclusion.
    let all_ac = verdict.bricks.iter().all(|e| e.anti_crooked);
    let cond2_brick =
        verdict.bricks.iter().find(|e| e.condition2 == Some(true)).map(|e| e.index);

    if verdict.layer_strongly_proper.holds {
        let rule = if (3..=5).contains(&m) && n >= 2 {
            Some(AltRule::SmallBrickWidth { m })
        } else if all_ac {
            Some(AltRule::AllBricksAntiCrooked)
        } else if m >= 3 && n >= 2 {
            cond2_brick.map(|brick| AltRule::BrickConjugatesCoverAlt { brick })
        } else {
            None
        };
        if let Some(rule) = rule {
            verdict.group_identity = GroupIdentityVerdict::ProvenAlt(rule);
        }
    } else {
        // Without a strongly proper layer the wreath case stays open, but
        // the affine case can still be excluded.
        let rule = if all_ac {
            Some(AltRule::AllBricksAntiCrooked)
        } else if m >= 3 && n >= 2 {
            cond2_brick.map(|brick| AltRule::BrickConjugatesCoverAlt { brick })
        } else {
            None
        };
        if let Some(rule) = rule {
            verdict.group_identity = GroupIdentityVerdict::NotAffine(rule);
        }
    }
    Ok(verdict)
}

// ---------------------------------------------------------------------------
// Desk-scale group checks
// ---------------------------------------------------------------------------

/// Direct computation on the round group of a (small) spec.
#[derive(Debug, Clone)]
pub struct DeskCheck {
    pub degree: usize,
    pub transitive: bool,
    pub primitive: bool,
    pub block_witness: Option<BlockSystem>,
    pub round_parity: Parity,
    /// None when the degree exceeds the stabilizer-chain cap.
    pub order: Option<BigUint>,
    pub alternating: Option<AltContainment>,
    pub classification: Option<PrimitiveClass>,
}

pub fn desk_check(spec: &CipherSpec) -> Result<DeskCheck, CipherError> {
    let group = round_group(spec)?;
    let rho = build_round(spec)?;
    let degree = group.degree();
    let transitive = group.is_transitive();
    let (primitive, block_witness) = group.is_primitive()?;
    let round_parity = rho.parity();

    let mut order = None;
    let mut alternating = None;
    let mut classification = None;
    if degree <= crate::permgroup::DEFAULT_BSGS_CAP {
        order = Some(group.order()?);
        alternating = Some(group.contains_alternating()?);
        if primitive {
            let t = Group::new(degree, translation_generators(spec.dim()))?;
            classification = Some(classify_primitive(&group, &t)?);
        }
    }
    Ok(DeskCheck {
        degree,
        transitive,
        primitive,
        block_witness,
        round_parity,
        order,
        alternating,
        classification,
    })
}

// ---------------------------------------------------------------------------
// Independent imprimitivity oracle
// ---------------------------------------------------------------------------

/// Exhaustive subspace scan for a block-system witness: a nontrivial proper
/// subspace U is returned iff rho(u + v) + rho(v) lies in U for all u in U
/// and v in V, which happens iff {U + v} is a block system of the round
/// group. Independent of the stabilizer-chain machinery.
pub fn brute_force_imprimitivity(spec: &CipherSpec) -> Result<Option<Gf2Subspace>, CipherError> {
    let d = spec.dim();
    if d > MAX_ORACLE_DIM {
        return Err(CipherError::OracleOverBound { d, max: MAX_ORACLE_DIM });
    }
    let rho = build_round(spec)?;
    let table: Vec<u16> = rho.images().iter().map(|&y| y as u16).collect();
    let size = table.len();

    let mut witness = None;
    gf2::for_each_subspace_in(d, 1..=(d - 1), |rows| {
        // Cheap rejection: u = first basis vector, v = 0 (rho fixes 0).
        let u0 = rows[0];
        if !contained_after_reduce(rows, table[u0 as usize] as u64) {
            return true;
        }
        // Full condition over all u in U, v in V.
        let dim = rows.len();
        let mut u = 0u64;
        for mask in 1u64..(1 << dim) {
            u ^= rows[mask.trailing_zeros() as usize];
            for v in 0..size as u64 {
                let lhs = table[(u ^ v) as usize] ^ table[v as usize];
                if !contained_after_reduce(rows, lhs as u64) {
                    return true;
                }
            }
        }
        witness = Some(Gf2Subspace::from_canonical_rows(d, rows.to_vec()));
        false
    });
    Ok(witness)
}

#[inline]
fn contained_after_reduce(rows: &[u64], mut v: u64) -> bool {
    for &b in rows.iter().rev() {
        if v ^ b < v {
            v ^= b;
        }
    }
    v == 0
}

// ---------------------------------------------------------------------------
// Desk-scale reduction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerProvenance {
    Supplied,
    AutoGenerated { seed: u64, attempts: u64 },
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub spec: CipherSpec,
    pub provenance: LayerProvenance,
}

/// Rejection-sample random invertible matrices until one is strongly proper.
pub fn random_strongly_proper_layer(
    m: usize,
    n: usize,
    seed: u64,
) -> Result<(LinearLayer, u64), CipherError> {
    let partition = BrickPartition::new(m, n)?;
    let d = partition.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
    for attempt in 1..=10_000u64 {
        let rows: Vec<u64> = (0..d).map(|_| rng.random_range(0..=top)).collect();
        let matrix = Gf2Matrix::from_row_bits(d, rows).expect("rows fit the dimension");
        if !matrix.is_invertible() {
            continue;
        }
        let layer = LinearLayer::from_matrix(matrix).expect("invertibility checked");
        if is_strongly_proper(&layer, &partition)?.holds {
            return Ok((layer, attempt));
        }
    }
    Err(CipherError::NoLayerFound(10_000))
}

/// Shrink a spec to `target_n` bricks at the same width, keeping the brick
/// tables (cycled) and either the supplied layer or a seeded auto-generated
/// strongly proper one.
pub fn desk_scale_reduction(
    spec: &CipherSpec,
    target_n: usize,
    layer: Option<LinearLayer>,
    seed: u64,
) -> Result<Reduction, CipherError> {
    if target_n < 2 {
        return Err(CipherError::ReductionTooSmall(target_n));
    }
    let bricks: Vec<SBox> =
        (0..target_n).map(|i| spec.bricks[i % spec.n()].clone()).collect();
    let (layer, provenance) = match layer {
        Some(layer) => (layer, LayerProvenance::Supplied),
        None => {
            let (layer, attempts) = random_strongly_proper_layer(spec.m(), target_n, seed)?;
            (layer, LayerProvenance::AutoGenerated { seed, attempts })
        }
    };
    let spec = CipherSpec::new(spec.m(), target_n, bricks, layer, spec.key_schedule_surjective())?;
    Ok(Reduction { spec, provenance })
}

// ---------------------------------------------------------------------------
// Randomized sweeps
// ---------------------------------------------------------------------------

/// A random spec at the given shape: random brick permutations and a random
/// invertible (not necessarily proper) layer.
pub fn random_cipher_spec(m: usize, n: usize, rng: &mut impl Rng) -> CipherSpec {
    let d = m * n;
    let bricks: Vec<SBox> = (0..n).map(|_| crate::sboxprops::random_sbox(m, rng)).collect();
    let layer = loop {
        let top = (1u64 << d) - 1;
        let rows: Vec<u64> = (0..d).map(|_| rng.random_range(0..=top)).collect();
        let matrix = Gf2Matrix::from_row_bits(d, rows).expect("rows fit");
        if matrix.is_invertible() {
            break LinearLayer::from_matrix(matrix).expect("invertible");
        }
    };
    CipherSpec::new(m, n, bricks, layer, true).expect("valid random spec")
}

#[derive(Debug, Clone, Default)]
pub struct CrossValidation {
    pub specs: usize,
    pub imprimitive_count: usize,
    pub disagreements: usize,
}

/// Compare the subspace oracle against the group-engine primitivity verdict
/// on random specs with state dimension at most 10.
pub fn oracle_cross_validation(count: usize, seed: u64) -> Result<CrossValidation, CipherError> {
    // Shapes weighted toward the cheap dimensions; all have d <= 10.
    const SHAPES: [(usize, usize); 10] =
        [(3, 2), (3, 2), (2, 3), (2, 4), (4, 2), (4, 2), (2, 2), (3, 3), (3, 3), (5, 2)];
    let results: Vec<(bool, bool)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (m, n) = SHAPES[rng.random_range(0..SHAPES.len())];
            let spec = random_cipher_spec(m, n, &mut rng);
            let oracle_witness =
                brute_force_imprimitivity(&spec).expect("d <= 10 within oracle bound");
            let group = round_group(&spec).expect("surjective flag set");
            let (primitive, _) = group.is_primitive().expect("contains translations");
            (oracle_witness.is_some(), !primitive)
        })
        .collect();
    let mut report = CrossValidation { specs: count, ..Default::default() };
    for (oracle_imprimitive, group_imprimitive) in results {
        if oracle_imprimitive {
            report.imprimitive_count += 1;
        }
        if oracle_imprimitive != group_imprimitive {
            report.disagreements += 1;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct EvennessSweep {
    pub rounds_checked: usize,
    pub odd_rounds: usize,
}

/// Every constructed round permutation must be even.
pub fn evenness_sweep(trials: usize, seed: u64) -> Result<EvennessSweep, CipherError> {
    const SHAPES: [(usize, usize); 8] =
        [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3), (2, 4), (5, 2), (4, 3)];
    let odd: usize = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let (m, n) = SHAPES[rng.random_range(0..SHAPES.len())];
            let spec = random_cipher_spec(m, n, &mut rng);
            let rho = build_round(&spec).expect("d <= 16");
            usize::from(!rho.parity().is_even())
        })
        .sum();
    Ok(EvennessSweep { rounds_checked: trials, odd_rounds: odd })
}
