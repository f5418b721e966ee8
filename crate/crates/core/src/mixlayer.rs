//! Mixing-layer analysis: walls of a brick partition, proper and strongly
//! proper layer tests.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::gf2::{Gf2Error, Gf2Matrix, Gf2Subspace};
use crate::permgroup::Parity;

/// Wall enumeration bound: 2^n - 2 walls are scanned explicitly.
pub const MAX_BRICK_COUNT: usize = 24;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MixLayerError {
    #[error("mixing layer must be invertible")]
    Singular,
    #[error("brick partition requires m > 1 and n > 1 (got m={m}, n={n})")]
    DegenerateBricks { m: usize, n: usize },
    #[error("state dimension {d} exceeds {max}")]
    StateTooWide { d: usize, max: usize },
    #[error("brick count {n} exceeds the wall enumeration bound {max}")]
    TooManyBricks { n: usize, max: usize },
    #[error("layer dimension {layer} does not match partition dimension {partition}")]
    LayerPartitionMismatch { layer: usize, partition: usize },
    #[error("bit permutation of length {0} is not a permutation")]
    BadBitPermutation(usize),
    #[error("matrix order exceeded the iteration cap {0}; parity not computed")]
    OrderCapExceeded(usize),
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

/// The decomposition of (F_2)^{mn} into n bricks of width m; brick i spans
/// bits m*i .. m*(i+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrickPartition {
    m: usize,
    n: usize,
}

impl BrickPartition {
    pub fn new(m: usize, n: usize) -> Result<Self, MixLayerError> {
        if m <= 1 || n <= 1 {
            return Err(MixLayerError::DegenerateBricks { m, n });
        }
        let d = m * n;
        if d > crate::gf2::MAX_DIM {
            return Err(MixLayerError::StateTooWide { d, max: crate::gf2::MAX_DIM });
        }
        Ok(Self { m, n })
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

    pub fn wall_count(&self) -> u64 {
        (1u64 << self.n) - 2
    }

    /// Bit mask of the bricks selected by `index_set`.
    pub fn bit_mask(&self, index_set: u32) -> u64 {
        let brick = (1u64 << self.m) - 1;
        let mut mask = 0u64;
        let mut rest = index_set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            mask |= brick << (self.m * i);
            rest &= rest - 1;
        }
        mask
    }
}

/// A wall: the direct sum of a nonempty proper subset of the bricks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    index_set: u32,
    subspace: Gf2Subspace,
}

impl Wall {
    pub fn new(p: &BrickPartition, index_set: u32) -> Self {
        assert!(index_set != 0 && index_set < (1u32 << p.n) - 1, "wall index set must be a nonempty proper subset");
        let mask = p.bit_mask(index_set);
        let basis = (0..p.dim()).filter(|&b| (mask >> b) & 1 == 1).map(|b| 1u64 << b);
        Wall { index_set, subspace: Gf2Subspace::span_bits(p.dim(), basis) }
    }

    pub fn index_set(&self) -> u32 {
        self.index_set
    }

    pub fn brick_indices(&self) -> Vec<usize> {
        (0..32).filter(|&i| (self.index_set >> i) & 1 == 1).collect()
    }

    pub fn as_subspace(&self) -> &Gf2Subspace {
        &self.subspace
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}

/// All 2^n - 2 walls, canonical, ordered by index set.
pub fn walls(p: &BrickPartition) -> Result<Vec<Wall>, MixLayerError> {
    if p.n > MAX_BRICK_COUNT {
        return Err(MixLayerError::TooManyBricks { n: p.n, max: MAX_BRICK_COUNT });
    }
    Ok((1..(1u32 << p.n) - 1).map(|s| Wall::new(p, s)).collect())
}

/// An invertible linear map on the cipher state, with its inverse cached.
/// Layers ingested as bit permutations are converted to permutation matrices
/// once; all analysis runs on the matrix form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearLayer {
    matrix: Gf2Matrix,
    inverse: Gf2Matrix,
    bit_permutation: Option<Vec<u32>>,
}

impl LinearLayer {
    pub fn from_matrix(matrix: Gf2Matrix) -> Result<Self, MixLayerError> {
        if matrix.nrows() != matrix.ncols() {
            return Err(MixLayerError::Singular);
        }
        let inverse = matrix.inverse().map_err(|_| MixLayerError::Singular)?;
        Ok(Self { matrix, inverse, bit_permutation: None })
    }

    /// `perm[i]` is the output position of input bit i.
    pub fn from_bit_permutation(perm: &[u32]) -> Result<Self, MixLayerError> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &q in perm {
            if q as usize >= d || seen[q as usize] {
                return Err(MixLayerError::BadBitPermutation(d));
            }
            seen[q as usize] = true;
        }
        let rows: Vec<u64> = perm.iter().map(|&q| 1u64 << q).collect();
        let matrix = Gf2Matrix::from_row_bits(d, rows)?;
        let inverse = matrix.inverse().expect("permutation matrices are invertible");
        Ok(Self { matrix, inverse, bit_permutation: Some(perm.to_vec()) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &Gf2Matrix {
        &self.inverse
    }

    pub fn bit_permutation(&self) -> Option<&[u32]> {
        self.bit_permutation.as_deref()
    }

    pub fn apply_bits(&self, v: u64) -> u64 {
        self.matrix.apply_bits(v)
    }

    /// Sign of the layer as a permutation of the full state space, computed
    /// without materializing 2^d points: the number of orbits of the cyclic
    /// group generated by the matrix follows from fixed-point counts of its
    /// powers, and the parity is (2^d - #orbits) mod 2.
    pub fn parity(&self) -> Result<Parity, MixLayerError> {
        let d = self.dim();
        let cap = 1 << 20;
        // Find the multiplicative order of the matrix.
        let id = Gf2Matrix::identity(d);
        let mut power = self.matrix.clone();
        let mut fixed_counts: Vec<BigUint> = Vec::new();
        let mut order = 0usize;
        for k in 1..=cap {
            if power == id {
                order = k;
                break;
            }
            // Fixed points of M^k: kernel of M^k + I.
            let plus_i: Vec<u64> =
                (0..d).map(|i| power.row_bits(i) ^ (1u64 << i)).collect();
            let rank = Gf2Matrix::from_row_bits(d, plus_i)?.rank();
            fixed_counts.push(BigUint::from(1u8) << (d - rank));
            power = power.mul(&self.matrix)?;
        }
        if order == 0 {
            return Err(MixLayerError::OrderCapExceeded(cap));
        }
        // Identity power fixes everything.
        let mut total: BigUint = BigUint::from(1u8) << d;
        for c in fixed_counts {
            total += c;
        }
        let orbits = total / BigUint::from(order);
        // 2^d is even for d >= 1, so the transposition count is orbits mod 2.
        let odd = (orbits % 2u8) != BigUint::zero();
        Ok(if odd { Parity::Odd } else { Parity::Even })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperVerdict {
    pub holds: bool,
    /// A wall fixed by the layer, if any.
    pub invariant_wall: Option<Wall>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StronglyProperVerdict {
    pub holds: bool,
    /// A pair (W, W') with W * layer = W', if any.
    pub witness: Option<(Wall, Wall)>,
}

fn check_compatible(layer: &LinearLayer, p: &BrickPartition) -> Result<(), MixLayerError> {
    if layer.dim() != p.dim() {
        return Err(MixLayerError::LayerPartitionMismatch { layer: layer.dim(), partition: p.dim() });
    }
    if p.n > MAX_BRICK_COUNT {
        return Err(MixLayerError::TooManyBricks { n: p.n, max: MAX_BRICK_COUNT });
    }
    Ok(())
}

/// If the image of the wall `index_set` under the layer is again a wall,
/// return that wall's index set. The image of a coordinate subspace is a
/// wall exactly when its canonical basis consists of unit vectors covering
/// whole bricks, which the reduced form detects in one pass per wall.
fn wall_image_as_wall(layer: &LinearLayer, p: &BrickPartition, index_set: u32) -> Option<u32> {
    let mask = p.bit_mask(index_set);
    let dim = mask.count_ones() as usize;
    let rows = (0..p.dim()).filter(|&b| (mask >> b) & 1 == 1).map(|b| layer.matrix().row_bits(b));
    let image = Gf2Subspace::span_bits(p.dim(), rows);
    debug_assert_eq!(image.dim(), dim);
    let unit_weight: u32 = image.basis_bits().iter().map(|b| b.count_ones()).sum();
    if unit_weight as usize != dim {
        return None; // some basis row mixes coordinates
    }
    let support: u64 = image.basis_bits().iter().fold(0, |acc, &b| acc | b);
    let brick_mask = (1u64 << p.m) - 1;
    let mut target = 0u32;
    for i in 0..p.n {
        let slice = (support >> (p.m * i)) & brick_mask;
        if slice == brick_mask {
            target |= 1 << i;
        } else if slice != 0 {
            return None; // partial brick coverage
        }
    }
    Some(target)
}

/// Proper: no wall is invariant under the layer.
pub fn is_proper(layer: &LinearLayer, p: &BrickPartition) -> Result<ProperVerdict, MixLayerError> {
    check_compatible(layer, p)?;
    for s in 1..(1u32 << p.n) - 1 {
        if wall_image_as_wall(layer, p, s) == Some(s) {
            return Ok(ProperVerdict { holds: false, invariant_wall: Some(Wall::new(p, s)) });
        }
    }
    Ok(ProperVerdict { holds: true, invariant_wall: None })
}

/// Strongly proper: no wall maps onto any wall. Linear in the wall count:
/// each wall image is tested directly for being a wall via its canonical
/// basis, instead of pairwise comparison.
pub fn is_strongly_proper(
    layer: &LinearLayer,
    p: &BrickPartition,
) -> Result<StronglyProperVerdict, MixLayerError> {
    check_compatible(layer, p)?;
    for s in 1..(1u32 << p.n) - 1 {
        if let Some(t) = wall_image_as_wall(layer, p, s) {
            return Ok(StronglyProperVerdict {
                holds: false,
                witness: Some((Wall::new(p, s), Wall::new(p, t))),
            });
        }
    }
    Ok(StronglyProperVerdict { holds: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gf2::subspace_image;

    #[test]
    fn wall_counts() {
        let p = BrickPartition::new(4, 2).unwrap();
        assert_eq!(walls(&p).unwrap().len(), 2);
        let p = BrickPartition::new(4, 4).unwrap();
        assert_eq!(walls(&p).unwrap().len(), 14);
        let p = BrickPartition::new(4, 16).unwrap();
        assert_eq!(p.wall_count(), 65534);
        assert_eq!(walls(&p).unwrap().len(), 65534);
    }

    #[test]
    fn degenerate_partitions_rejected() {
        assert!(matches!(BrickPartition::new(1, 4), Err(MixLayerError::DegenerateBricks { .. })));
        assert!(matches!(BrickPartition::new(4, 1), Err(MixLayerError::DegenerateBricks { .. })));
    }

    #[test]
    fn identity_layer_fixes_first_brick() {
        let p = BrickPartition::new(4, 2).unwrap();
        let layer = LinearLayer::from_matrix(Gf2Matrix::identity(8)).unwrap();
        let verdict = is_proper(&layer, &p).unwrap();
        assert!(!verdict.holds);
        assert_eq!(verdict.invariant_wall.unwrap().index_set(), 1);
    }

    #[test]
    fn singular_layer_rejected() {
        let m = Gf2Matrix::from_row_bits(4, vec![0b0011, 0b0110, 0b0101, 0b1000]).unwrap();
        assert!(!m.is_invertible());
        assert_eq!(LinearLayer::from_matrix(m).unwrap_err(), MixLayerError::Singular);
    }

    #[test]
    fn present_layer_is_proper_but_not_strongly_proper() {
        let p = BrickPartition::new(4, 16).unwrap();
        let layer = fixtures::present_layer();
        assert!(is_proper(&layer, &p).unwrap().holds);
        // The published bit permutation sends the wall of bricks {0,1,2,3}
        // exactly onto the wall of bricks {0,4,8,12}: bit m*j+t of brick j
        // lands at position j + 16t, so four consecutive bricks fill four
        // aligned bricks.
        let verdict = is_strongly_proper(&layer, &p).unwrap();
        assert!(!verdict.holds);
        let (w, w2) = verdict.witness.unwrap();
        assert_eq!(w.index_set(), 0b1111);
        assert_eq!(w2.index_set(), 0b0001_0001_0001_0001);
    }

    #[test]
    fn rotation_layer_is_proper_but_not_strongly_proper() {
        let p = BrickPartition::new(4, 4).unwrap();
        let layer = fixtures::block_rotation_layer(4, 4);
        assert!(is_proper(&layer, &p).unwrap().holds);
        let verdict = is_strongly_proper(&layer, &p).unwrap();
        assert!(!verdict.holds);
        let (w, w2) = verdict.witness.unwrap();
        assert_eq!(w.index_set(), 0b0001);
        assert_eq!(w2.index_set(), 0b0010);
    }

    #[test]
    fn rectangle_layer_is_strongly_proper() {
        let p = BrickPartition::new(4, 16).unwrap();
        let layer = fixtures::rectangle_layer();
        assert!(is_proper(&layer, &p).unwrap().holds);
        assert!(is_strongly_proper(&layer, &p).unwrap().holds);
    }

    #[test]
    fn printcipher_layer_is_strongly_proper() {
        let p = BrickPartition::new(3, 16).unwrap();
        let layer = fixtures::printcipher_layer();
        assert!(is_proper(&layer, &p).unwrap().holds);
        assert!(is_strongly_proper(&layer, &p).unwrap().holds);
    }

    #[test]
    fn brick_swapping_layer_is_not_strongly_proper() {
        // Block-diagonal layer permuting the two bricks.
        let p = BrickPartition::new(4, 2).unwrap();
        let layer = fixtures::block_rotation_layer(4, 2);
        assert!(is_proper(&layer, &p).unwrap().holds);
        assert!(!is_strongly_proper(&layer, &p).unwrap().holds);
    }

    #[test]
    fn strongly_proper_implies_proper() {
        // On random invertible layers: a strongly proper verdict must come
        // with a proper verdict.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let p = BrickPartition::new(3, 3).unwrap();
        for _ in 0..200 {
            let rows: Vec<u64> = (0..9).map(|_| rand::Rng::random_range(&mut rng, 0..512u64)).collect();
            let Ok(m) = Gf2Matrix::from_row_bits(9, rows) else { continue };
            let Ok(layer) = LinearLayer::from_matrix(m) else { continue };
            let strong = is_strongly_proper(&layer, &p).unwrap().holds;
            let proper = is_proper(&layer, &p).unwrap().holds;
            if strong {
                assert!(proper);
            }
        }
    }

    #[test]
    fn wall_images_match_generic_subspace_images() {
        // Dual path: the index-set tracking in wall_image_as_wall must agree
        // with the generic subspace image computation.
        let p = BrickPartition::new(4, 16).unwrap();
        let layer = fixtures::present_layer();
        for s in [1u32, 0b11, 0b1111, 0b1010101, 0xfffe] {
            let wall = Wall::new(&p, s);
            let generic = subspace_image(wall.as_subspace(), layer.matrix()).unwrap();
            match wall_image_as_wall(&layer, &p, s) {
                Some(t) => assert_eq!(&generic, Wall::new(&p, t).as_subspace()),
                None => {
                    // Not a wall: the generic image must differ from every
                    // wall subspace.
                    for t in 1..(1u32 << p.n()) - 1 {
                        assert_ne!(&generic, Wall::new(&p, t).as_subspace());
                    }
                }
            }
        }
    }

    #[test]
    fn layer_parity_is_even_for_fixture_layers() {
        // Linear permutations of (F_2)^d are even for d >= 3; the orbit-count
        // route verifies it without touching 2^64 points.
        assert_eq!(fixtures::present_layer().parity().unwrap(), Parity::Even);
        assert_eq!(fixtures::rectangle_layer().parity().unwrap(), Parity::Even);
        assert_eq!(fixtures::printcipher_layer().parity().unwrap(), Parity::Even);
        assert_eq!(fixtures::block_rotation_layer(4, 4).parity().unwrap(), Parity::Even);
    }

    #[test]
    fn layer_parity_matches_explicit_permutation_at_small_dims() {
        use crate::permgroup::Permutation;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for d in [3usize, 4, 6, 8] {
            for _ in 0..20 {
                let rows: Vec<u64> =
                    (0..d).map(|_| rand::Rng::random_range(&mut rng, 0..(1u64 << d))).collect();
                let Ok(m) = Gf2Matrix::from_row_bits(d, rows) else { continue };
                if !m.is_invertible() {
                    continue;
                }
                let layer = LinearLayer::from_matrix(m).unwrap();
                let explicit = Permutation::from_images(
                    (0..1u32 << d).map(|x| layer.apply_bits(x as u64) as u32).collect(),
                )
                .unwrap();
                assert_eq!(layer.parity().unwrap(), explicit.parity(), "d={d}");
            }
        }
    }

    #[test]
    fn gl2_contains_odd_maps() {
        // For d = 2 linear permutations can be odd: the coordinate swap is a
        // transposition of two points.
        let swap = Gf2Matrix::from_row_bits(2, vec![0b10, 0b01]).unwrap();
        let layer = LinearLayer::from_matrix(swap).unwrap();
        assert_eq!(layer.parity().unwrap(), Parity::Odd);
    }
}
