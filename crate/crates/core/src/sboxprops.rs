//! The S-box predicates driving the theorem engine: differential uniformity,
//! weak uniformity, (strong) anti-invariance, anti-crookedness, and the
//! derivative-hull formula relating them to nonlinearity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::gf2::{self, AffineSubspace, Gf2Subspace};
use crate::vboolfn::{derivative_image, nonlinearity, normalize_zero, SBox, SboxError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SboxPropsError {
    #[error("anti-invariance order {r} out of range (1..={max})")]
    OrderOutOfRange { r: usize, max: usize },
    #[error("predicate requires f(0) = 0; normalize the table first")]
    RequiresNormalization,
    #[error(transparent)]
    Sbox(#[from] SboxError),
}

/// Full differential profile of an S-box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityProfile {
    m: usize,
    delta: u32,
    /// |Im(f^_u)| for u = 1, ..., 2^m - 1.
    image_sizes: Vec<u32>,
}

impl UniformityProfile {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Maximum entry of the difference distribution table over u != 0.
    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn image_size(&self, u: u16) -> u32 {
        self.image_sizes[u as usize - 1]
    }

    pub fn image_sizes(&self) -> &[u32] {
        &self.image_sizes
    }

    pub fn min_image_size(&self) -> u32 {
        *self.image_sizes.iter().min().expect("m >= 2 gives nonempty directions")
    }

    /// Weak delta-uniformity: |Im(f^_u)| > 2^{m-1} / delta for every u != 0.
    pub fn is_weakly_uniform(&self, delta: u32) -> bool {
        assert!(delta >= 1);
        let threshold = 1u64 << (self.m - 1);
        self.image_sizes.iter().all(|&s| (s as u64) * (delta as u64) > threshold)
    }

    /// Plain delta-uniformity is an upper bound on the DDT maximum.
    pub fn is_uniform(&self, delta: u32) -> bool {
        self.delta <= delta
    }
}

/// Compute the full difference distribution table and derivative image sizes.
pub fn differential_uniformity(f: &SBox) -> UniformityProfile {
    let n = f.size();
    let mut delta = 0u32;
    let mut image_sizes = Vec::with_capacity(n - 1);
    let mut row = vec![0u32; n];
    for u in 1..n as u16 {
        row.fill(0);
        for x in 0..n as u16 {
            row[(f.apply(x ^ u) ^ f.apply(x)) as usize] += 1;
        }
        let mut nonzero = 0u32;
        for &c in &row {
            if c > 0 {
                nonzero += 1;
                delta = delta.max(c);
            }
        }
        image_sizes.push(nonzero);
    }
    UniformityProfile { m: f.m(), delta, image_sizes }
}

/// Convenience wrapper matching the predicate as used by the theorems.
pub fn is_weakly_delta_uniform(f: &SBox, delta: u32) -> bool {
    differential_uniformity(f).is_weakly_uniform(delta)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongAntiInvariance {
    pub holds: bool,
    /// A pair (U, W) with f(U) = W and dim at least m - r, if one exists.
    pub witness: Option<(Gf2Subspace, Gf2Subspace)>,
    /// Whether the table had to be translated to fix 0 first.
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiInvariance {
    pub holds: bool,
    /// A subspace U with f(U) = U and dim at least m - r, if one exists.
    pub witness: Option<Gf2Subspace>,
}

/// Does the image point set of `sub_rows`'s span under `f` form a subspace?
/// Returns its canonical form if so. `f` fixes 0 and is a permutation, so
/// the image has full cardinality 2^dim and is a subspace exactly when its
/// span does not exceed dimension dim.
fn subspace_image_set(f: &SBox, sub_rows: &[u64]) -> Option<Gf2Subspace> {
    let dim = sub_rows.len();
    let mut basis: Vec<u64> = Vec::with_capacity(dim); // distinct high bits, descending
    let count = 1u64 << dim;
    let mut x = 0u64; // Gray-code walk over the span
    for mask in 1..count {
        x ^= sub_rows[mask.trailing_zeros() as usize];
        let mut red = f.apply(x as u16) as u64;
        for &b in &basis {
            red = red.min(red ^ b);
        }
        if red != 0 {
            if basis.len() == dim {
                return None;
            }
            basis.push(red);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    if basis.len() == dim {
        Some(Gf2Subspace::span_bits(f.m(), basis.iter().copied()))
    } else {
        None
    }
}

/// Strong r-anti-invariance: no pair of subspaces U, W with f(U) = W and
/// m - r <= dim(U) < m. The table is translated to fix 0 first, as the
/// companion predicates require; this does not change the property.
pub fn is_strongly_r_anti_invariant(f: &SBox, r: usize) -> Result<StrongAntiInvariance, SboxPropsError> {
    let m = f.m();
    if r < 1 || r >= m {
        return Err(SboxPropsError::OrderOutOfRange { r, max: m - 1 });
    }
    if !f.is_permutation() {
        return Err(SboxPropsError::Sbox(SboxError::RequiresBijective));
    }
    let normalized = !f.fixes_zero();
    let g = normalize_zero(f);
    let mut witness = None;
    gf2::for_each_subspace_in(m, (m - r)..=(m - 1), |rows| {
        if let Some(image) = subspace_image_set(&g, rows) {
            witness = Some((Gf2Subspace::from_canonical_rows(m, rows.to_vec()), image));
            return false;
        }
        true
    });
    Ok(StrongAntiInvariance { holds: witness.is_none(), witness, normalized })
}

/// Plain r-anti-invariance: requires f(0) = 0; no subspace U with f(U) = U
/// and m - r <= dim(U) < m.
pub fn is_r_anti_invariant(f: &SBox, r: usize) -> Result<AntiInvariance, SboxPropsError> {
    let m = f.m();
    if r < 1 || r >= m {
        return Err(SboxPropsError::OrderOutOfRange { r, max: m - 1 });
    }
    if !f.fixes_zero() {
        return Err(SboxPropsError::RequiresNormalization);
    }
    let mut witness = None;
    gf2::for_each_subspace_in(m, (m - r)..=(m - 1), |rows| {
        let sub = Gf2Subspace::from_canonical_rows(m, rows.to_vec());
        let fixed = sub.iter_points().all(|x| sub.contains_bits(f.apply(x as u16) as u64));
        if fixed {
            witness = Some(sub);
            return false;
        }
        true
    });
    Ok(AntiInvariance { holds: witness.is_none(), witness })
}

/// Largest orders at which the two anti-invariance notions hold, with the
/// witnesses blocking the next order.
#[derive(Debug, Clone)]
pub struct AntiInvarianceReport {
    pub m: usize,
    pub max_r_strong: usize,
    pub max_r_plain: usize,
    pub strong_blocking_witness: Option<(Gf2Subspace, Gf2Subspace)>,
    pub normalized: bool,
}

pub fn anti_invariance_report(f: &SBox) -> Result<AntiInvarianceReport, SboxPropsError> {
    let m = f.m();
    let normalized = !f.fixes_zero();
    let g = normalize_zero(f);
    let mut max_r_strong = 0;
    let mut strong_blocking_witness = None;
    for r in 1..m {
        let res = is_strongly_r_anti_invariant(&g, r)?;
        if res.holds {
            max_r_strong = r;
        } else {
            strong_blocking_witness = res.witness;
            break;
        }
    }
    let mut max_r_plain = 0;
    for r in 1..m {
        if is_r_anti_invariant(&g, r)?.holds {
            max_r_plain = r;
        } else {
            break;
        }
    }
    // Strong anti-invariance specializes (take W = U).
    debug_assert!(max_r_strong <= max_r_plain);
    Ok(AntiInvarianceReport { m, max_r_strong, max_r_plain, strong_blocking_witness, normalized })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntiCrookedness {
    pub holds: bool,
    /// A direction whose derivative image is an affine subspace, if any.
    pub witness: Option<u16>,
}

/// Anti-crooked: no derivative image Im(f^_a), a != 0, is an affine subspace.
pub fn is_anti_crooked(f: &SBox) -> AntiCrookedness {
    let m = f.m();
    for a in 1..f.size() as u16 {
        let image = derivative_image(f, a).expect("a != 0 in range");
        let hull = gf2::affine_hull_bits(m, &image.iter().map(|&p| p as u64).collect::<Vec<_>>())
            .expect("derivative image is nonempty");
        if image.len() as u128 == hull.size() {
            return AntiCrookedness { holds: false, witness: Some(a) };
        }
    }
    AntiCrookedness { holds: true, witness: None }
}

/// The space V_a = {v : <v, f^_a(.)> is constant} and the induced hull
/// f(a) + V_a^perp of the derivative image (computed on the 0-normalized
/// table, whose value at `a` lies in the image).
#[derive(Debug, Clone)]
pub struct VaSpace {
    pub a: u16,
    pub va: Gf2Subspace,
    pub hull: AffineSubspace,
    pub normalized: bool,
}

pub fn va_space(f: &SBox, a: u16) -> Result<VaSpace, SboxPropsError> {
    if a == 0 {
        return Err(SboxPropsError::Sbox(SboxError::ZeroDirection));
    }
    if a as usize >= f.size() {
        return Err(SboxPropsError::Sbox(SboxError::DirectionOutOfRange { m: f.m(), dir: a as u32 }));
    }
    let m = f.m();
    let n = f.size();
    let normalized = !f.fixes_zero();
    let g = normalize_zero(f);
    let deriv: Vec<u16> = (0..n as u16).map(|x| g.apply(x ^ a) ^ g.apply(x)).collect();
    // v lies in V_a iff the component <v, f^_a(x)> is constant in x.
    let mut members = Vec::new();
    for v in 0..n as u16 {
        let first = (v & deriv[0]).count_ones() & 1;
        if deriv.iter().all(|&d| (v & d).count_ones() & 1 == first) {
            members.push(v as u64);
        }
    }
    let va = Gf2Subspace::span_bits(m, members.iter().copied());
    // Constant components are closed under addition, so this always holds.
    assert_eq!(1usize << va.dim(), members.len(), "constancy set must be a subspace");
    let hull = AffineSubspace::new(g.apply(a) as u64, va.orthogonal_complement());
    Ok(VaSpace { a, va, hull, normalized })
}

/// Outcome of the 4-bit corpus sweep relating 4-uniformity to strong
/// 1-anti-invariance.
#[derive(Debug, Clone, Default)]
pub struct FourUniformSweep {
    pub checked: usize,
    pub skipped_non_4bit: usize,
    pub four_uniform: usize,
    pub violations: Vec<SBox>,
}

/// For every 4-uniform member of the corpus, assert strong 1-anti-invariance.
pub fn check_fact_4uniform(corpus: impl IntoIterator<Item = SBox>) -> FourUniformSweep {
    let mut sweep = FourUniformSweep::default();
    for f in corpus {
        if f.m() != 4 {
            sweep.skipped_non_4bit += 1;
            continue;
        }
        sweep.checked += 1;
        if differential_uniformity(&f).delta() <= 4 {
            sweep.four_uniform += 1;
            let strong = is_strongly_r_anti_invariant(&f, 1).expect("r=1 valid for m=4");
            if !strong.holds {
                sweep.violations.push(f);
            }
        }
    }
    sweep
}

/// Seeded random corpus sweep, sharded across threads. Equivalent to feeding
/// [`check_fact_4uniform`] `count` uniformly random 4-bit permutations.
pub fn check_fact_4uniform_random(count: usize, seed: u64) -> FourUniformSweep {
    let shard = 1usize << 14;
    let shards: Vec<FourUniformSweep> = (0..count.div_ceil(shard))
        .into_par_iter()
        .map(|s| {
            let lo = s * shard;
            let hi = ((s + 1) * shard).min(count);
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
            check_fact_4uniform((lo..hi).map(|_| random_sbox(4, &mut rng)))
        })
        .collect();
    let mut total = FourUniformSweep::default();
    for s in shards {
        total.checked += s.checked;
        total.skipped_non_4bit += s.skipped_non_4bit;
        total.four_uniform += s.four_uniform;
        total.violations.extend(s.violations);
    }
    total
}

/// Uniformly random m-bit S-box (a permutation).
pub fn random_sbox(m: usize, rng: &mut impl rand::Rng) -> SBox {
    use rand::seq::SliceRandom;
    let mut table: Vec<u16> = (0..(1u16 << m)).collect();
    table.shuffle(rng);
    SBox::new(m, table).expect("shuffled table is a permutation")
}

/// Uniformly random m-bit S-box fixing 0.
pub fn random_sbox_fixing_zero(m: usize, rng: &mut impl rand::Rng) -> SBox {
    use rand::seq::SliceRandom;
    let mut table: Vec<u16> = (0..(1u16 << m)).collect();
    table[1..].shuffle(rng);
    SBox::new(m, table).expect("shuffled table is a permutation")
}

/// Outcome of the dual-path equivalence sweep between nonzero nonlinearity
/// (Walsh route) and strong 1-anti-invariance (subspace route).
#[derive(Debug, Clone, Default)]
pub struct EquivalenceSweep {
    pub checked: usize,
    pub discrepancies: Vec<SBox>,
}

/// Exhaustive sweep over all permutations of (F_2)^3 (every table is
/// 0-normalized by the predicates, so the full 8! tables are covered).
pub fn nonlinearity_equivalence_exhaustive_m3() -> EquivalenceSweep {
    let mut sweep = EquivalenceSweep::default();
    let mut table: Vec<u16> = (0..8).collect();
    permute_all(&mut table, 0, &mut |t| {
        let f = SBox::new(3, t.to_vec()).expect("permutation");
        sweep.checked += 1;
        if !equivalence_holds(&f) {
            sweep.discrepancies.push(f);
        }
    });
    sweep
}

fn permute_all(table: &mut Vec<u16>, k: usize, visit: &mut impl FnMut(&[u16])) {
    if k == table.len() {
        visit(table);
        return;
    }
    for i in k..table.len() {
        table.swap(k, i);
        permute_all(table, k + 1, visit);
        table.swap(k, i);
    }
}

fn equivalence_holds(f: &SBox) -> bool {
    let g = normalize_zero(f);
    let nonzero_nl = nonlinearity(&g) != 0;
    let strong = is_strongly_r_anti_invariant(&g, 1).expect("r=1 valid").holds;
    nonzero_nl == strong
}

/// Random sweep at the given width.
pub fn nonlinearity_equivalence_random(m: usize, trials: usize, seed: u64) -> EquivalenceSweep {
    let results: Vec<Option<SBox>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let f = random_sbox(m, &mut rng);
            if equivalence_holds(&f) {
                None
            } else {
                Some(f)
            }
        })
        .collect();
    let mut sweep = EquivalenceSweep { checked: trials, discrepancies: Vec::new() };
    sweep.discrepancies.extend(results.into_iter().flatten());
    sweep
}

/// Check the hull formula f(a) + V_a^perp against the directly computed
/// affine hull of the derivative image, for all a != 0.
pub fn va_hull_matches_affine_hull(f: &SBox) -> bool {
    let m = f.m();
    let g = normalize_zero(f);
    (1..f.size() as u16).all(|a| {
        let va = va_space(&g, a).expect("a != 0");
        let image = derivative_image(&g, a).expect("a != 0");
        let pts: Vec<u64> = image.iter().map(|&p| p as u64).collect();
        let hull = gf2::affine_hull_bits(m, &pts).expect("nonempty");
        hull == va.hull
    })
}
