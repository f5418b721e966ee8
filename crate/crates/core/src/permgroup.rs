//! Permutations of {0, ..., N-1} and finite permutation groups: stabilizer
//! chains (Schreier-Sims), order, membership, block systems, primitivity,
//! and the classification of the primitive groups that arise here.
//!
//! Composition is written left to right: `x^(ab) = (x^a)^b`, matching the
//! postfix action used throughout the crate.

use std::collections::HashSet;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Default cap on the degree for which a full stabilizer chain is built.
pub const DEFAULT_BSGS_CAP: usize = 4096;

/// Transitivity, block systems, parity and affinity checks stay available up
/// to this degree even though order computation is refused.
pub const MAX_DEGREE: usize = 1 << 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("degree {degree} exceeds the stabilizer-chain cap {cap}")]
    DegreeOverCap { degree: usize, cap: usize },
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("images of length {0} do not form a permutation")]
    NotAPermutation(usize),
    #[error("group is not transitive")]
    NotTransitive,
    #[error("degree {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("S-box width {m} exceeds bound {max} for this check")]
    WidthOverBound { m: usize, max: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}

/// Sign of a permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_even(self) -> bool {
        self == Parity::Even
    }
}

/// A permutation of {0, ..., N-1} stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<u32>,
}

impl std::fmt::Debug for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.degree() <= 16 {
            write!(f, "Permutation({:?})", self.images)
        } else {
            write!(f, "Permutation(degree {})", self.degree())
        }
    }
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Self { images: (0..degree as u32).collect() }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self, GroupError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            if y as usize >= n || seen[y as usize] {
                return Err(GroupError::NotAPermutation(n));
            }
            seen[y as usize] = true;
        }
        Ok(Self { images })
    }

    /// Product of cycles, for tests and fixtures.
    pub fn from_cycles(degree: usize, cycles: &[&[u32]]) -> Self {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        for cycle in cycles {
            for i in 0..cycle.len() {
                images[cycle[i] as usize] = cycle[(i + 1) % cycle.len()];
            }
        }
        Self { images }
    }

    /// The translation x -> x XOR v on {0, ..., 2^d - 1}.
    pub fn translation(d: usize, v: u64) -> Self {
        let n = 1usize << d;
        Self { images: (0..n as u64).map(|x| (x ^ v) as u32).collect() }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.images[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &y)| i as u32 == y)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: self.images.iter().map(|&y| other.images[y as usize]).collect(),
        }
    }

    fn then_into(&self, other: &Permutation, out: &mut Vec<u32>) {
        out.clear();
        out.extend(self.images.iter().map(|&y| other.images[y as usize]));
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0u32; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            images[y as usize] = x as u32;
        }
        Permutation { images }
    }

    /// Sign via cycle decomposition.
    pub fn parity(&self) -> Parity {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut transpositions = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0usize;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize;
                len += 1;
            }
            transpositions += len - 1;
        }
        if transpositions.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// True when the degree is 2^d and x -> p(x) + p(0) is F_2-linear.
    pub fn is_affine(&self) -> bool {
        let n = self.degree();
        if !n.is_power_of_two() {
            return false;
        }
        let d = n.trailing_zeros() as usize;
        let c = self.images[0];
        let rows: Vec<u32> = (0..d).map(|i| self.images[1usize << i] ^ c).collect();
        (0..n).all(|x| {
            let mut acc = c;
            for (i, &row) in rows.iter().enumerate() {
                if (x >> i) & 1 == 1 {
                    acc ^= row;
                }
            }
            acc == self.images[x]
        })
    }
}

/// The d translation generators sigma_{e_i} of T(V) on {0, ..., 2^d - 1}.
pub fn translation_generators(d: usize) -> Vec<Permutation> {
    assert!(d >= 1 && (1usize << d) <= MAX_DEGREE);
    (0..d).map(|i| Permutation::translation(d, 1 << i)).collect()
}

/// Generators f sigma_{e_i} f^{-1} of the conjugate group f T(V) f^{-1}
/// (postfix composition: x -> f^{-1}(f(x) + e_i)).
pub fn conjugate_translations(f: &Permutation) -> Result<Vec<Permutation>, GroupError> {
    let n = f.degree();
    if !n.is_power_of_two() {
        return Err(GroupError::NotPowerOfTwo(n));
    }
    let d = n.trailing_zeros() as usize;
    let finv = f.inverse();
    Ok((0..d)
        .map(|i| {
            let v = 1u32 << i;
            Permutation {
                images: (0..n as u32).map(|x| finv.images[(f.images[x as usize] ^ v) as usize]).collect(),
            }
        })
        .collect())
}

pub fn factorial(n: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= BigUint::from(i);
    }
    acc
}

// ---------------------------------------------------------------------------
// Stabilizer chain
// ---------------------------------------------------------------------------

const EDGE_ABSENT: i64 = -2;
const EDGE_ROOT: i64 = -1;

struct Level {
    beta: u32,
    /// Indices into the generator pool; all fix the base points above.
    gens: Vec<usize>,
    orbit: Vec<u32>,
    /// Per point: EDGE_ABSENT, EDGE_ROOT, or (pool_idx << 1 | inverted) with
    /// the predecessor point in `prev`.
    edge: Vec<i64>,
    prev: Vec<u32>,
}

impl Level {
    fn new(degree: usize, beta: u32) -> Self {
        Level {
            beta,
            gens: Vec::new(),
            orbit: Vec::new(),
            edge: vec![EDGE_ABSENT; degree],
            prev: vec![0; degree],
        }
    }

    fn in_orbit(&self, p: u32) -> bool {
        self.edge[p as usize] != EDGE_ABSENT
    }
}

struct PermPair {
    perm: Permutation,
    inv: Permutation,
}

pub(crate) struct StabilizerChain {
    degree: usize,
    pool: Vec<PermPair>,
    pool_index: HashSet<Vec<u32>>,
    levels: Vec<Level>,
    order: BigUint,
}

enum SiftStop {
    /// Residue became the identity.
    Identity,
    /// Base image left the orbit at this level.
    Stuck(usize),
    /// All levels passed but the residue is not the identity.
    Fixes,
}

impl StabilizerChain {
    fn build(
        degree: usize,
        generators: &[Permutation],
        order_bound: Option<&BigUint>,
    ) -> Result<Self, GroupError> {
        let mut chain = StabilizerChain {
            degree,
            pool: Vec::new(),
            pool_index: HashSet::new(),
            levels: Vec::new(),
            order: BigUint::one(),
        };
        for g in generators {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch { expected: degree, got: g.degree() });
            }
            if !g.is_identity() {
                chain.insert_generator(g.clone(), 0);
            }
        }
        if chain.levels.is_empty() {
            return Ok(chain); // trivial group
        }
        if !chain.bound_reached(order_bound) {
            chain.randomized_warmup(order_bound);
        }
        if !chain.bound_reached(order_bound) {
            chain.verify(order_bound);
        }
        chain.order = chain.orbit_product();
        Ok(chain)
    }

    fn orbit_product(&self) -> BigUint {
        let mut acc = BigUint::one();
        for level in &self.levels {
            acc *= BigUint::from(level.orbit.len());
        }
        acc
    }

    fn bound_reached(&self, bound: Option<&BigUint>) -> bool {
        match bound {
            Some(b) => &self.orbit_product() == b,
            None => false,
        }
    }

    /// Register `h` as a strong generator for levels `lo..=hi` (h must fix
    /// the first `lo` base points and lie in the group generated by level
    /// `lo - 1`, or the whole group for lo = 0). Creates a new level when h
    /// fixes every existing base point.
    fn insert_generator(&mut self, h: Permutation, lo: usize) -> usize {
        debug_assert!((0..lo.min(self.levels.len()))
            .all(|ell| h.apply(self.levels[ell].beta) == self.levels[ell].beta));
        let mut hi = self.levels.len();
        for (ell, level) in self.levels.iter().enumerate().skip(lo) {
            if h.apply(level.beta) != level.beta {
                hi = ell;
                break;
            }
        }
        if hi == self.levels.len() {
            // Fixes all current base points: open a new level on a moved point.
            let beta = (0..self.degree as u32)
                .find(|&x| h.apply(x) != x)
                .expect("non-identity permutation moves a point");
            self.levels.push(Level::new(self.degree, beta));
        }
        let idx = if self.pool_index.contains(h.images.as_slice()) {
            // Already pooled; find its index (rare path).
            self.pool
                .iter()
                .position(|p| p.perm.images == h.images)
                .expect("pool index is consistent")
        } else {
            self.pool_index.insert(h.images.clone());
            let inv = h.inverse();
            self.pool.push(PermPair { perm: h, inv });
            self.pool.len() - 1
        };
        let hi = hi.min(self.levels.len() - 1);
        for ell in lo..=hi {
            if !self.levels[ell].gens.contains(&idx) {
                self.levels[ell].gens.push(idx);
            }
        }
        for ell in lo..=hi {
            self.rebuild_orbit(ell);
        }
        hi
    }

    fn rebuild_orbit(&mut self, ell: usize) {
        let beta = self.levels[ell].beta;
        let gens = self.levels[ell].gens.clone();
        let level = &mut self.levels[ell];
        level.orbit.clear();
        level.edge.fill(EDGE_ABSENT);
        level.orbit.push(beta);
        level.edge[beta as usize] = EDGE_ROOT;
        let mut head = 0;
        while head < level.orbit.len() {
            let q = level.orbit[head];
            head += 1;
            for &gi in &gens {
                let pair = &self.pool[gi];
                for (dir, perm) in [(0u32, &pair.perm), (1u32, &pair.inv)] {
                    let r = perm.apply(q);
                    if level.edge[r as usize] == EDGE_ABSENT {
                        level.edge[r as usize] = ((gi as i64) << 1) | dir as i64;
                        level.prev[r as usize] = q;
                        level.orbit.push(r);
                    }
                }
            }
        }
    }

    /// Compose the transversal representative u_p with beta^{u_p} = p.
    fn representative(&self, ell: usize, p: u32) -> Permutation {
        let level = &self.levels[ell];
        let mut path: Vec<i64> = Vec::new();
        let mut x = p;
        while level.edge[x as usize] != EDGE_ROOT {
            let e = level.edge[x as usize];
            debug_assert!(e != EDGE_ABSENT);
            path.push(e);
            x = level.prev[x as usize];
        }
        let mut u = Permutation::identity(self.degree);
        let mut scratch = Vec::with_capacity(self.degree);
        for &e in path.iter().rev() {
            let pair = &self.pool[(e >> 1) as usize];
            let step = if e & 1 == 0 { &pair.perm } else { &pair.inv };
            u.then_into(step, &mut scratch);
            std::mem::swap(&mut u.images, &mut scratch);
        }
        u
    }

    /// Strip `h` through levels `start..`, mutating it into the residue.
    fn sift_in_place(&self, start: usize, h: &mut Permutation, scratch: &mut Vec<u32>) -> SiftStop {
        for ell in start..self.levels.len() {
            let level = &self.levels[ell];
            let mut p = h.apply(level.beta);
            if p == level.beta {
                continue;
            }
            if !level.in_orbit(p) {
                return SiftStop::Stuck(ell);
            }
            // Multiply by the inverse representative by walking the tree.
            while level.edge[p as usize] != EDGE_ROOT {
                let e = level.edge[p as usize];
                let pair = &self.pool[(e >> 1) as usize];
                let step = if e & 1 == 0 { &pair.inv } else { &pair.perm };
                h.then_into(step, scratch);
                std::mem::swap(&mut h.images, scratch);
                p = level.prev[p as usize];
            }
        }
        if h.is_identity() {
            SiftStop::Identity
        } else {
            SiftStop::Fixes
        }
    }

    /// Seeded random-word warm-up: discovers most strong generators far
    /// cheaper than the quadratic Schreier scans. Purely an accelerator; the
    /// deterministic verification below establishes correctness, except when
    /// an exact order bound is reached (which certifies the chain on its own,
    /// by counting: the transversal products already exhibit `bound` distinct
    /// elements and the bound is an upper bound on the order).
    fn randomized_warmup(&mut self, order_bound: Option<&BigUint>) {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
        let initial: Vec<usize> = self.levels[0].gens.clone();
        if initial.is_empty() {
            return;
        }
        let mut word = Permutation::identity(self.degree);
        let mut scratch = Vec::with_capacity(self.degree);
        let mut stall = 0usize;
        let mut rounds = 0usize;
        let max_rounds = 200 + 40 * self.degree;
        while stall < 64 && rounds < max_rounds {
            rounds += 1;
            // Extend the random word by a pool element (prefer originals).
            let idx = if rng.random_range(0..4) == 0 && self.pool.len() > initial.len() {
                rng.random_range(0..self.pool.len())
            } else {
                initial[rng.random_range(0..initial.len())]
            };
            word.then_into(&self.pool[idx].perm, &mut scratch);
            std::mem::swap(&mut word.images, &mut scratch);

            let mut h = word.clone();
            match self.sift_in_place(0, &mut h, &mut scratch) {
                SiftStop::Identity => {
                    stall += 1;
                }
                SiftStop::Stuck(j) => {
                    debug_assert!(j >= 1, "level-0 orbit is complete for the full generating set");
                    self.insert_generator(h, 1);
                    stall = 0;
                    if self.bound_reached(order_bound) {
                        return;
                    }
                }
                SiftStop::Fixes => {
                    self.insert_generator(h, 1);
                    stall = 0;
                    if self.bound_reached(order_bound) {
                        return;
                    }
                }
            }
        }
    }

    /// Deterministic Schreier-Sims verification: every Schreier generator of
    /// every level must sift to the identity through the levels below.
    fn verify(&mut self, order_bound: Option<&BigUint>) {
        let mut scratch = Vec::with_capacity(self.degree);
        let mut ell = self.levels.len() as isize - 1;
        'outer: while ell >= 0 {
            let i = ell as usize;
            let mut point_idx = 0;
            while point_idx < self.levels[i].orbit.len() {
                let p = self.levels[i].orbit[point_idx];
                let u_p = self.representative(i, p);
                let gen_indices = self.levels[i].gens.clone();
                for gi in gen_indices {
                    let q = self.pool[gi].perm.apply(p);
                    // Tree edges give trivial Schreier generators.
                    let e = self.levels[i].edge[q as usize];
                    if e >= 0 && (e >> 1) as usize == gi && e & 1 == 0 && self.levels[i].prev[q as usize] == p {
                        continue;
                    }
                    let mut h = u_p.then(&self.pool[gi].perm);
                    match self.sift_in_place(i, &mut h, &mut scratch) {
                        SiftStop::Identity => {}
                        SiftStop::Stuck(_) => {
                            let added_at = self.insert_generator(h, i + 1);
                            if self.bound_reached(order_bound) {
                                return;
                            }
                            ell = added_at as isize;
                            continue 'outer;
                        }
                        SiftStop::Fixes => {
                            let added_at = self.insert_generator(h, i + 1);
                            if self.bound_reached(order_bound) {
                                return;
                            }
                            ell = added_at as isize;
                            continue 'outer;
                        }
                    }
                }
                point_idx += 1;
            }
            ell -= 1;
        }
    }

    pub(crate) fn order(&self) -> &BigUint {
        &self.order
    }

    fn contains(&self, p: &Permutation) -> bool {
        if p.degree() != self.degree {
            return false;
        }
        if self.levels.is_empty() {
            return p.is_identity();
        }
        let mut h = p.clone();
        let mut scratch = Vec::with_capacity(self.degree);
        matches!(self.sift_in_place(0, &mut h, &mut scratch), SiftStop::Identity)
    }
}

// ---------------------------------------------------------------------------
// Group handle
// ---------------------------------------------------------------------------

/// Outcome of the alternating-group containment test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AltContainment {
    No,
    /// Exactly the alternating group.
    Alt,
    /// The full symmetric group.
    Sym,
}

/// Classification of a primitive group containing an elementary abelian
/// regular subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveClass {
    Affine,
    GiantAlt,
    GiantSym,
    ProductAction,
}

impl PrimitiveClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrimitiveClass::Affine => "affine",
            PrimitiveClass::GiantAlt => "giant_alt",
            PrimitiveClass::GiantSym => "giant_sym",
            PrimitiveClass::ProductAction => "product_action",
        }
    }
}

/// A partition of the domain into blocks of a block system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSystem {
    block_of: Vec<u32>,
    block_count: usize,
    block_size: usize,
}

impl BlockSystem {
    pub fn block_of(&self) -> &[u32] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// True for the one-block partition (the trivial outcome of the minimal
    /// block system computation when the seeds generate everything).
    pub fn is_full(&self) -> bool {
        self.block_count == 1
    }

    /// Points of the block containing `x`, in increasing order.
    pub fn block_containing(&self, x: u32) -> Vec<u32> {
        let id = self.block_of[x as usize];
        (0..self.block_of.len() as u32).filter(|&y| self.block_of[y as usize] == id).collect()
    }
}

/// A permutation group given by generators, with a lazily built stabilizer
/// chain. Immutable once constructed; safe to share.
pub struct Group {

    degree: usize,
    generators: Vec<Permutation>,
    bsgs_cap: usize,
    chain: OnceLock<Result<StabilizerChain, GroupError>>,
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Group")
            .field("degree", &self.degree)
            .field("generators", &self.generators.len())
            .finish()
    }
}

impl Group {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self, GroupError> {
        for g in &generators {
            if g.degree() != degree {
                return Err(GroupError::DegreeMismatch { expected: degree, got: g.degree() });
            }
        }
        Ok(Self { degree, generators, bsgs_cap: DEFAULT_BSGS_CAP, chain: OnceLock::new() })
    }

    pub fn with_bsgs_cap(mut self, cap: usize) -> Self {
        self.bsgs_cap = cap;
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// All generators even: the group is confined to the alternating group,
    /// which gives the chain builder a sharp order bound.
    fn alternating_bound(&self) -> BigUint {
        let full = factorial(self.degree);
        if self.degree >= 2 && self.generators.iter().all(|g| g.parity().is_even()) {
            full / 2u32
        } else {
            full
        }
    }

    fn chain(&self) -> Result<&StabilizerChain, GroupError> {
        if self.degree > self.bsgs_cap {
            return Err(GroupError::DegreeOverCap { degree: self.degree, cap: self.bsgs_cap });
        }
        let result = self.chain.get_or_init(|| {
            let bound = self.alternating_bound();
            StabilizerChain::build(self.degree, &self.generators, Some(&bound))
        });
        result.as_ref().map_err(|e| e.clone())
    }

    /// Group order via the stabilizer chain.
    pub fn order(&self) -> Result<BigUint, GroupError> {
        Ok(self.chain()?.order().clone())
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool, GroupError> {
        Ok(self.chain()?.contains(p))
    }

    pub fn orbit_of(&self, start: u32) -> Vec<u32> {
        let mut seen = vec![false; self.degree];
        let mut orbit = vec![start];
        seen[start as usize] = true;
        let mut head = 0;
        while head < orbit.len() {
            let q = orbit[head];
            head += 1;
            for g in &self.generators {
                let r = g.apply(q);
                if !seen[r as usize] {
                    seen[r as usize] = true;
                    orbit.push(r);
                }
            }
        }
        orbit
    }

    pub fn is_transitive(&self) -> bool {
        self.degree == 0 || self.orbit_of(0).len() == self.degree
    }

    /// Finest block system whose blocks merge the two seed points
    /// (union-find propagation).
    pub fn minimal_block_system(&self, seeds: (u32, u32)) -> Result<BlockSystem, GroupError> {
        if !self.is_transitive() {
            return Err(GroupError::NotTransitive);
        }
        let n = self.degree;
        let (a, b) = seeds;
        assert!(a != b && (a as usize) < n && (b as usize) < n);

        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                let up = parent[parent[x as usize] as usize];
                parent[x as usize] = up;
                x = up;
            }
            x
        }

        parent[b as usize] = a;
        let mut queue = vec![b];
        while let Some(gamma) = queue.pop() {
            let delta = find(&mut parent, gamma);
            for g in &self.generators {
                let r1 = find(&mut parent, g.apply(gamma));
                let r2 = find(&mut parent, g.apply(delta));
                if r1 != r2 {
                    parent[r1 as usize] = r2;
                    queue.push(r1);
                }
            }
        }

        let mut ids: Vec<u32> = vec![u32::MAX; n];
        let mut next = 0u32;
        let mut block_of = vec![0u32; n];
        for x in 0..n as u32 {
            let root = find(&mut parent, x);
            if ids[root as usize] == u32::MAX {
                ids[root as usize] = next;
                next += 1;
            }
            block_of[x as usize] = ids[root as usize];
        }
        let block_count = next as usize;
        let block_size = n / block_count;
        debug_assert!({
            let mut sizes = vec![0usize; block_count];
            for &id in &block_of {
                sizes[id as usize] += 1;
            }
            sizes.iter().all(|&s| s == block_size)
        });
        Ok(BlockSystem { block_of, block_count, block_size })
    }

    /// Primitivity via minimal block systems over all seed pairs (0, beta).
    /// Returns a proper block system as a witness when imprimitive.
    pub fn is_primitive(&self) -> Result<(bool, Option<BlockSystem>), GroupError> {
        if !self.is_transitive() {
            return Err(GroupError::NotTransitive);
        }
        if self.degree <= 2 {
            return Ok((true, None));
        }
        let witness = (1..self.degree as u32)
            .into_par_iter()
            .find_map_first(|beta| {
                let system = self
                    .minimal_block_system((0, beta))
                    .expect("transitivity already checked");
                if system.is_full() {
                    None
                } else {
                    Some(system)
                }
            });
        Ok((witness.is_none(), witness))
    }

    /// Compare the order against N!/2 and N!.
    pub fn contains_alternating(&self) -> Result<AltContainment, GroupError> {
        let order = self.order()?;
        let full = factorial(self.degree);
        let half = &full / 2u32;
        Ok(if order == full {
            AltContainment::Sym
        } else if order == half {
            AltContainment::Alt
        } else {
            AltContainment::No
        })
    }
}

/// Check that `t` is an elementary abelian regular subgroup of `g`'s
/// symmetric group and contained in `g`.
fn check_elementary_abelian_regular(g: &Group, t: &Group) -> Result<(), GroupError> {
    if t.degree() != g.degree() {
        return Err(GroupError::DegreeMismatch { expected: g.degree(), got: t.degree() });
    }
    for a in t.generators() {
        if !a.then(a).is_identity() {
            return Err(GroupError::Precondition("subgroup is not of exponent 2".into()));
        }
        for b in t.generators() {
            if a.then(b) != b.then(a) {
                return Err(GroupError::Precondition("subgroup is not abelian".into()));
            }
        }
    }
    if !t.is_transitive() {
        return Err(GroupError::Precondition("subgroup is not transitive".into()));
    }
    // Abelian and transitive imply regular.
    for a in t.generators() {
        if !g.contains(a)? {
            return Err(GroupError::Precondition("subgroup is not contained in the group".into()));
        }
    }
    Ok(())
}

/// Classify a primitive group `g` containing the elementary abelian regular
/// subgroup `t`: affine, a giant, or a wreath product in the product action.
/// For degree 2^d with d <= 5 the product action outcome cannot occur; it is
/// reported as an invariant violation.
pub fn classify_primitive(g: &Group, t: &Group) -> Result<PrimitiveClass, GroupError> {
    let (primitive, _) = g.is_primitive()?;
    if !primitive {
        return Err(GroupError::Precondition("group is not primitive".into()));
    }
    check_elementary_abelian_regular(g, t)?;
    if g.generators().iter().all(|p| p.is_affine()) {
        return Ok(PrimitiveClass::Affine);
    }
    match g.contains_alternating()? {
        AltContainment::Sym => Ok(PrimitiveClass::GiantSym),
        AltContainment::Alt => Ok(PrimitiveClass::GiantAlt),
        AltContainment::No => {
            let d = g.degree().trailing_zeros() as usize;
            if g.degree().is_power_of_two() && d <= 5 {
                return Err(GroupError::InvariantViolation(format!(
                    "product-action verdict at degree 2^{d} contradicts the classification of \
                     primitive groups with an elementary abelian regular subgroup"
                )));
            }
            Ok(PrimitiveClass::ProductAction)
        }
    }
}

/// Does <T(V), f T(V) f^{-1}> contain the alternating group on (F_2)^m?
/// The S-box width is capped at 5 (degree 32) where the chain is instant.
pub fn check_condition_2(f: &Permutation) -> Result<bool, GroupError> {
    let n = f.degree();
    if !n.is_power_of_two() {
        return Err(GroupError::NotPowerOfTwo(n));
    }
    let m = n.trailing_zeros() as usize;
    if m > 5 {
        return Err(GroupError::WidthOverBound { m, max: 5 });
    }
    let mut gens = translation_generators(m);
    gens.extend(conjugate_translations(f)?);
    let group = Group::new(n, gens)?;
    Ok(group.contains_alternating()? != AltContainment::No)
}

/// Uniformly random permutation of {0, ..., n-1}.
pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Permutation {
    let mut images: Vec<u32> = (0..n as u32).collect();
    images.shuffle(rng);
    Permutation { images }
}

/// Uniformly random permutation fixing 0.
pub fn random_permutation_fixing_zero(n: usize, rng: &mut impl Rng) -> Permutation {
    let mut images: Vec<u32> = (0..n as u32).collect();
    images[1..].shuffle(rng);
    Permutation { images }
}

/// Result of the random <T, gTg^{-1}> sweep.
#[derive(Debug, Clone)]
pub struct TwoRegularSweep {
    pub d: usize,
    pub trials: usize,
    pub primitive_count: usize,
    pub violations: usize,
}

/// For random permutations g of (F_2)^d fixing 0, build <T, g T g^{-1}> and
/// check that every primitive instance has order (2^d)!/2 or (2^d)!.
pub fn validate_affine_proposition(
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<TwoRegularSweep, GroupError> {
    if !(3..=5).contains(&d) {
        return Err(GroupError::Precondition(format!(
            "dimension {d} outside the validated range 3..=5"
        )));
    }
    let n = 1usize << d;
    let full = factorial(n);
    let half = &full / 2u32;

    let results: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let g = random_permutation_fixing_zero(n, &mut rng);
            let mut gens = translation_generators(d);
            gens.extend(conjugate_translations(&g).expect("degree is a power of two"));
            let group = Group::new(n, gens).expect("consistent degrees");
            let (primitive, _) = group.is_primitive().expect("translations act transitively");
            if !primitive {
                return (false, false);
            }
            let order = group.order().expect("degree far below the cap");
            (true, !(order == half || order == full))
        })
        .collect();

    let primitive_count = results.iter().filter(|r| r.0).count();
    let violations = results.iter().filter(|r| r.1).count();
    Ok(TwoRegularSweep { d, trials, primitive_count, violations })
}
