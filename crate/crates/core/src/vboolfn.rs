//! Vectorial Boolean functions: S-box tables, derivatives, components,
//! algebraic normal form, Walsh spectra and nonlinearity.

use thiserror::Error;

use crate::permgroup::Permutation;

/// Widths above this make the dense tables and spectra pointless here.
pub const MAX_WIDTH: usize = 12;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SboxError {
    #[error("S-box width {0} out of range (2..={MAX_WIDTH})")]
    WidthOutOfRange(usize),
    #[error("table length {got} does not match width {m} (expected {expected})")]
    TableLength { m: usize, expected: usize, got: usize },
    #[error("table entry {entry} out of range for width {m}")]
    EntryOutOfRange { m: usize, entry: u32 },
    #[error("table is not a permutation of 0..2^{0} (pass the non-bijective flag to accept it)")]
    NotAPermutation(usize),
    #[error("operation requires a bijective S-box")]
    RequiresBijective,
    #[error("derivative direction must be nonzero")]
    ZeroDirection,
    #[error("direction {dir} out of range for width {m}")]
    DirectionOutOfRange { m: usize, dir: u32 },
    #[error("{0}-character hex shorthand is only defined for width 4 (16 nibbles)")]
    HexShorthand(usize),
}

/// An m-bit S-box as a lookup table on {0, ..., 2^m - 1}.
///
/// Tables are permutations by default; non-bijective tables must be admitted
/// explicitly via [`SBox::new_allowing_non_bijective`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SBox {
    m: usize,
    table: Vec<u16>,
    bijective: bool,
}

impl SBox {
    pub fn new(m: usize, table: Vec<u16>) -> Result<Self, SboxError> {
        let s = Self::new_allowing_non_bijective(m, table)?;
        if !s.bijective {
            return Err(SboxError::NotAPermutation(m));
        }
        Ok(s)
    }

    pub fn new_allowing_non_bijective(m: usize, table: Vec<u16>) -> Result<Self, SboxError> {
        if !(2..=MAX_WIDTH).contains(&m) {
            return Err(SboxError::WidthOutOfRange(m));
        }
        let n = 1usize << m;
        if table.len() != n {
            return Err(SboxError::TableLength { m, expected: n, got: table.len() });
        }
        let mut seen = vec![false; n];
        let mut bijective = true;
        for &y in &table {
            if y as usize >= n {
                return Err(SboxError::EntryOutOfRange { m, entry: y as u32 });
            }
            if seen[y as usize] {
                bijective = false;
            }
            seen[y as usize] = true;
        }
        Ok(Self { m, table, bijective })
    }

    /// Parse the 16-nibble hex shorthand, e.g. "C56B90AD3EF84712".
    pub fn from_hex(hex: &str) -> Result<Self, SboxError> {
        let digits: Vec<u16> = hex
            .trim()
            .chars()
            .map(|c| c.to_digit(16).map(|d| d as u16))
            .collect::<Option<_>>()
            .ok_or_else(|| SboxError::HexShorthand(hex.trim().len()))?;
        if digits.len() != 16 {
            return Err(SboxError::HexShorthand(digits.len()));
        }
        Self::new(4, digits)
    }

    /// Hex shorthand for width-4 tables.
    pub fn to_hex(&self) -> Option<String> {
        if self.m != 4 {
            return None;
        }
        Some(self.table.iter().map(|&y| char::from_digit(y as u32, 16).unwrap().to_ascii_uppercase()).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }

    pub fn table(&self) -> &[u16] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: u16) -> u16 {
        self.table[x as usize]
    }

    pub fn is_permutation(&self) -> bool {
        self.bijective
    }

    pub fn is_identity(&self) -> bool {
        self.table.iter().enumerate().all(|(x, &y)| x as u16 == y)
    }

    pub fn fixes_zero(&self) -> bool {
        self.table[0] == 0
    }

    pub fn inverse(&self) -> Result<SBox, SboxError> {
        if !self.bijective {
            return Err(SboxError::RequiresBijective);
        }
        let mut table = vec![0u16; self.size()];
        for (x, &y) in self.table.iter().enumerate() {
            table[y as usize] = x as u16;
        }
        Ok(SBox { m: self.m, table, bijective: true })
    }

    pub fn as_permutation(&self) -> Result<Permutation, SboxError> {
        if !self.bijective {
            return Err(SboxError::RequiresBijective);
        }
        Ok(Permutation::from_images(self.table.iter().map(|&y| y as u32).collect())
            .expect("bijective table"))
    }

    /// The component function x -> <v, f(x)>.
    pub fn component(&self, v: u16) -> BoolComponent {
        BoolComponent::from_fn(self.m, |x| parity16(v & self.table[x as usize]))
    }
}

#[inline]
fn parity16(x: u16) -> bool {
    x.count_ones() & 1 == 1
}

/// x -> f(x) + f(0): the output translate of `f` that fixes 0.
///
/// Every quantity in this crate that depends only on derivatives or on
/// distances to affine functions is invariant under this translate.
pub fn normalize_zero(f: &SBox) -> SBox {
    let c = f.table[0];
    if c == 0 {
        return f.clone();
    }
    SBox {
        m: f.m,
        table: f.table.iter().map(|&y| y ^ c).collect(),
        bijective: f.bijective,
    }
}

/// Im(f^_u) = {f(x+u) + f(x) : x}, sorted and deduplicated.
/// For a permutation the image never contains 0.
pub fn derivative_image(f: &SBox, u: u16) -> Result<Vec<u16>, SboxError> {
    if u == 0 {
        return Err(SboxError::ZeroDirection);
    }
    if u as usize >= f.size() {
        return Err(SboxError::DirectionOutOfRange { m: f.m, dir: u as u32 });
    }
    let mut seen = vec![false; f.size()];
    for x in 0..f.size() as u16 {
        seen[(f.table[(x ^ u) as usize] ^ f.table[x as usize]) as usize] = true;
    }
    Ok((0..f.size() as u16).filter(|&v| seen[v as usize]).collect())
}

/// A single Boolean function on m variables as a packed truth table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolComponent {
    m: usize,
    bits: Vec<u64>,
}

impl BoolComponent {
    pub fn from_fn(m: usize, f: impl Fn(u16) -> bool) -> Self {
        let n = 1usize << m;
        let mut bits = vec![0u64; n.div_ceil(64)];
        for x in 0..n {
            if f(x as u16) {
                bits[x >> 6] |= 1 << (x & 63);
            }
        }
        Self { m, bits }
    }

    pub fn from_truth_table(m: usize, table: &[bool]) -> Result<Self, SboxError> {
        let n = 1usize << m;
        if table.len() != n {
            return Err(SboxError::TableLength { m, expected: n, got: table.len() });
        }
        Ok(Self::from_fn(m, |x| table[x as usize]))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, x: u16) -> bool {
        (self.bits[(x >> 6) as usize] >> (x & 63)) & 1 == 1
    }

    pub fn is_constant(&self) -> bool {
        let first = self.get(0);
        (0..1u32 << self.m).all(|x| self.get(x as u16) == first)
    }
}

/// Degree of the algebraic normal form, computed with the binary Moebius
/// transform. The zero (and constant-one) function has degree 0.
pub fn anf_degree(c: &BoolComponent) -> usize {
    let n = 1usize << c.m;
    let mut coeffs: Vec<u8> = (0..n).map(|x| c.get(x as u16) as u8).collect();
    let mut step = 1usize;
    while step < n {
        for x in 0..n {
            if x & step != 0 {
                coeffs[x] ^= coeffs[x ^ step];
            }
        }
        step <<= 1;
    }
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 1)
        .map(|(x, _)| x.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Walsh coefficients W(v, a) = sum_x (-1)^{<v, f(x)> + <a, x>} for every
/// nonzero output mask v and every input mask a.
#[derive(Debug, Clone)]
pub struct WalshSpectrum {
    m: usize,
    /// rows[v - 1][a] = W(v, a)
    rows: Vec<Vec<i32>>,
}

impl WalshSpectrum {
    pub fn m(&self) -> usize {
        self.m
    }

    /// v must be nonzero.
    pub fn get(&self, v: u16, a: u16) -> i32 {
        self.rows[v as usize - 1][a as usize]
    }

    pub fn max_abs(&self) -> i32 {
        self.rows.iter().flatten().map(|w| w.abs()).max().unwrap_or(0)
    }

    pub fn row(&self, v: u16) -> &[i32] {
        &self.rows[v as usize - 1]
    }
}

/// Fast transform: per component, the (-1)^<v,f(x)> sign table run through
/// the Walsh-Hadamard butterfly.
pub fn walsh_spectrum(f: &SBox) -> WalshSpectrum {
    let n = f.size();
    let rows = (1..n as u16)
        .map(|v| {
            let mut row: Vec<i32> =
                (0..n).map(|x| if parity16(v & f.table[x]) { -1 } else { 1 }).collect();
            let mut step = 1usize;
            while step < n {
                let mut base = 0;
                while base < n {
                    for i in base..base + step {
                        let (a, b) = (row[i], row[i + step]);
                        row[i] = a + b;
                        row[i + step] = a - b;
                    }
                    base += 2 * step;
                }
                step <<= 1;
            }
            row
        })
        .collect();
    WalshSpectrum { m: f.m, rows }
}

/// N(f) = 2^{m-1} - max |W| / 2; zero exactly when some component is affine.
pub fn nonlinearity(f: &SBox) -> u32 {
    let spectrum = walsh_spectrum(f);
    (1u32 << (f.m - 1)) - spectrum.max_abs() as u32 / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn present() -> SBox {
        fixtures::present_sbox()
    }

    #[test]
    fn rejects_non_permutation_by_default() {
        let err = SBox::new(2, vec![0, 1, 1, 3]).unwrap_err();
        assert_eq!(err, SboxError::NotAPermutation(2));
        let s = SBox::new_allowing_non_bijective(2, vec![0, 1, 1, 3]).unwrap();
        assert!(!s.is_permutation());
    }

    #[test]
    fn hex_roundtrip() {
        let s = present();
        assert_eq!(s.to_hex().unwrap(), "C56B90AD3EF84712");
        assert_eq!(SBox::from_hex("C56B90AD3EF84712").unwrap(), s);
    }

    #[test]
    fn derivative_of_identity_is_singleton_direction() {
        let id = SBox::new(4, (0..16).collect()).unwrap();
        for u in 1..16u16 {
            assert_eq!(derivative_image(&id, u).unwrap(), vec![u]);
        }
    }

    #[test]
    fn derivative_rejects_zero_direction() {
        let id = SBox::new(3, (0..8).collect()).unwrap();
        assert_eq!(derivative_image(&id, 0).unwrap_err(), SboxError::ZeroDirection);
    }

    #[test]
    fn derivative_images_match_double_loop_oracle() {
        // Cube map x -> x^3 in GF(8) with modulus x^3 + x + 1, plus a couple
        // of structured tables.
        let tables: Vec<Vec<u16>> = vec![
            vec![0, 1, 3, 2, 6, 7, 5, 4],
            vec![0, 1, 2, 4, 3, 6, 7, 5],
            (0..8).rev().collect(),
        ];
        for t in tables {
            let f = SBox::new_allowing_non_bijective(3, t).unwrap();
            for u in 1..8u16 {
                let fast = derivative_image(&f, u).unwrap();
                let mut slow: Vec<u16> =
                    (0..8u16).map(|x| f.apply(x ^ u) ^ f.apply(x)).collect();
                slow.sort_unstable();
                slow.dedup();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn present_derivative_images_have_more_than_two_points() {
        // Weak 4-uniformity demands |Im| > 2^{m-1}/4 = 2 in every direction.
        let f = present();
        for u in 1..16u16 {
            assert!(derivative_image(&f, u).unwrap().len() > 2);
        }
    }

    #[test]
    fn derivative_image_of_permutation_never_contains_zero() {
        let f = present();
        for u in 1..16u16 {
            assert!(!derivative_image(&f, u).unwrap().contains(&0));
        }
    }

    #[test]
    fn normalize_zero_behaviour() {
        let id = SBox::new(3, (0..8).collect()).unwrap();
        assert_eq!(normalize_zero(&id), id);

        let p = present();
        let n = normalize_zero(&p);
        assert_eq!(n.apply(0), 0);
        assert_eq!(n.table(), &p.table().iter().map(|&y| y ^ 0xC).collect::<Vec<_>>()[..]);

        let xor_c = SBox::new(4, (0..16).map(|x| x ^ 0b1011).collect()).unwrap();
        assert!(normalize_zero(&xor_c).is_identity());
    }

    #[test]
    fn normalization_preserves_derivative_images_and_nonlinearity() {
        let f = present();
        let n = normalize_zero(&f);
        for u in 1..16u16 {
            assert_eq!(derivative_image(&f, u).unwrap(), derivative_image(&n, u).unwrap());
        }
        assert_eq!(nonlinearity(&f), nonlinearity(&n));
    }

    #[test]
    fn walsh_of_identity_is_diagonal() {
        let id = SBox::new(4, (0..16).collect()).unwrap();
        let spec = walsh_spectrum(&id);
        for v in 1..16u16 {
            for a in 0..16u16 {
                let expected = if a == v { 16 } else { 0 };
                assert_eq!(spec.get(v, a), expected, "v={v} a={a}");
            }
        }
    }

    #[test]
    fn parseval_holds_per_component() {
        for f in [present(), fixtures::rectangle_sbox(), fixtures::inversion_sbox()] {
            let spec = walsh_spectrum(&f);
            let m = f.m();
            for v in 1..(1 << m) as u16 {
                let sum: i64 = spec.row(v).iter().map(|&w| (w as i64) * (w as i64)).sum();
                assert_eq!(sum, 1i64 << (2 * m));
            }
        }
    }

    #[test]
    fn walsh_matches_direct_summation_on_present() {
        let f = present();
        let spec = walsh_spectrum(&f);
        let mut direct_max = 0i32;
        for v in 1..16u16 {
            for a in 0..16u16 {
                let direct: i32 = (0..16u16)
                    .map(|x| {
                        let sign = parity16(v & f.apply(x)) ^ parity16(a & x);
                        if sign { -1 } else { 1 }
                    })
                    .sum();
                assert_eq!(spec.get(v, a), direct);
                direct_max = direct_max.max(direct.abs());
            }
        }
        assert_eq!(direct_max, 8);
        assert_eq!(spec.max_abs(), 8);
    }

    #[test]
    fn nonlinearity_values() {
        // Affine permutation: some component is affine, distance 0.
        let affine = SBox::new(4, (0..16).map(|x| x ^ 0b0101).collect()).unwrap();
        assert_eq!(nonlinearity(&affine), 0);
        assert_eq!(nonlinearity(&present()), 4);
        assert!(nonlinearity(&fixtures::inversion_sbox()) > 0);
    }

    #[test]
    fn anf_degree_conventions() {
        let zero = BoolComponent::from_fn(3, |_| false);
        assert_eq!(anf_degree(&zero), 0);
        let one = BoolComponent::from_fn(3, |_| true);
        assert_eq!(anf_degree(&one), 0);
        let product = BoolComponent::from_fn(2, |x| x & 1 == 1 && x & 2 == 2);
        assert_eq!(anf_degree(&product), 2);
        let linear = BoolComponent::from_fn(4, |x| parity16(x & 0b1101));
        assert_eq!(anf_degree(&linear), 1);
    }

    /// Moebius oracle on an unpacked table.
    fn anf_degree_oracle(m: usize, f: impl Fn(u16) -> bool) -> usize {
        let n = 1usize << m;
        let mut c: Vec<u8> = (0..n).map(|x| f(x as u16) as u8).collect();
        for i in 0..m {
            for x in 0..n {
                if x & (1 << i) != 0 {
                    c[x] ^= c[x ^ (1 << i)];
                }
            }
        }
        (0..n).filter(|&x| c[x] == 1).map(|x| x.count_ones() as usize).max().unwrap_or(0)
    }

    #[test]
    fn present_component_degrees() {
        let f = present();
        let mut min_deg = usize::MAX;
        for v in 1..16u16 {
            let comp = f.component(v);
            let deg = anf_degree(&comp);
            assert_eq!(deg, anf_degree_oracle(4, |x| comp.get(x)));
            assert!(deg == 2 || deg == 3, "v={v} deg={deg}");
            min_deg = min_deg.min(deg);
        }
        // Nonzero nonlinearity forces every component away from degree <= 1.
        assert!(min_deg >= 2);
    }

    #[test]
    fn derivative_image_sizes_respect_uniformity_bound() {
        // |Im(f^_u)| >= 2^m / delta for every direction.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let f = crate::sboxprops::random_sbox(4, &mut rng);
            let profile = crate::sboxprops::differential_uniformity(&f);
            for u in 1..16u16 {
                let im = derivative_image(&f, u).unwrap().len() as u32;
                assert!(im * profile.delta() >= 16);
            }
        }
    }

    #[test]
    fn zero_nonlinearity_iff_some_component_is_affine() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for m in [4usize, 5] {
            for _ in 0..100 {
                let f = crate::sboxprops::random_sbox(m, &mut rng);
                let has_affine_component = (1..f.size() as u16)
                    .any(|v| anf_degree(&f.component(v)) <= 1);
                assert_eq!(nonlinearity(&f) == 0, has_affine_component);
            }
        }
    }

    #[test]
    fn bricklayer_of_odd_brick_is_even() {
        // A transposition-only brick is odd; two parallel copies are even.
        let mut t: Vec<u16> = (0..4).collect();
        t.swap(0, 1);
        let brick = SBox::new(2, t).unwrap();
        assert_eq!(brick.as_permutation().unwrap().parity(), crate::permgroup::Parity::Odd);
        let images: Vec<u32> = (0..16u32)
            .map(|x| {
                let lo = brick.apply((x & 3) as u16) as u32;
                let hi = brick.apply((x >> 2) as u16) as u32;
                lo | (hi << 2)
            })
            .collect();
        let parallel = Permutation::from_images(images).unwrap();
        assert_eq!(parallel.parity(), crate::permgroup::Parity::Even);
    }
}
