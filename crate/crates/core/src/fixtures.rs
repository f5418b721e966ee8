//! Bundled component tables for the ciphers analyzed out of the box.

use crate::mixlayer::LinearLayer;
use crate::tbcipher::CipherSpec;
use crate::vboolfn::SBox;

/// PRESENT 4-bit S-box.
pub const PRESENT_SBOX: [u16; 16] = [0xC, 5, 6, 0xB, 9, 0, 0xA, 0xD, 3, 0xE, 0xF, 8, 4, 7, 1, 2];

/// RECTANGLE 4-bit S-box.
pub const RECTANGLE_SBOX: [u16; 16] = [6, 5, 0xC, 0xA, 1, 0xE, 7, 9, 0xB, 0, 3, 0xD, 8, 0xF, 4, 2];

/// PRINTcipher 3-bit S-box.
pub const PRINTCIPHER_SBOX: [u16; 8] = [0, 1, 3, 6, 7, 4, 5, 2];

/// Inversion in GF(2^4) with modulus x^4 + x + 1, as a table (0 maps to 0).
pub const INVERSION_SBOX: [u16; 16] = [0, 1, 9, 14, 13, 11, 7, 6, 15, 2, 12, 5, 10, 4, 3, 8];

pub fn present_sbox() -> SBox {
    SBox::new(4, PRESENT_SBOX.to_vec()).expect("fixture is a permutation")
}

pub fn rectangle_sbox() -> SBox {
    SBox::new(4, RECTANGLE_SBOX.to_vec()).expect("fixture is a permutation")
}

pub fn printcipher_sbox() -> SBox {
    SBox::new(3, PRINTCIPHER_SBOX.to_vec()).expect("fixture is a permutation")
}

pub fn inversion_sbox() -> SBox {
    SBox::new(4, INVERSION_SBOX.to_vec()).expect("fixture is a permutation")
}

/// PRESENT bit permutation: bit i of the state moves to bit 16*i mod 63
/// (bit 63 is fixed).
pub fn present_layer_permutation() -> Vec<u32> {
    let mut p: Vec<u32> = (0..64u32).map(|i| (16 * i) % 63).collect();
    p[63] = 63;
    p
}

pub fn present_layer() -> LinearLayer {
    LinearLayer::from_bit_permutation(&present_layer_permutation()).expect("fixture is invertible")
}

/// RECTANGLE row rotations (0, 1, 12, 13) on the 4x16 bit matrix, written on
/// a column-major state where brick c occupies bits 4c..4c+3 (bit r of a
/// brick is matrix row r).
pub fn rectangle_layer_permutation() -> Vec<u32> {
    let rot = [0u32, 1, 12, 13];
    let mut p = vec![0u32; 64];
    for c in 0..16u32 {
        for (r, &ro) in rot.iter().enumerate() {
            p[(4 * c + r as u32) as usize] = 4 * ((c + ro) % 16) + r as u32;
        }
    }
    p
}

pub fn rectangle_layer() -> LinearLayer {
    LinearLayer::from_bit_permutation(&rectangle_layer_permutation()).expect("fixture is invertible")
}

/// PRINTcipher-48 bit permutation: bit i moves to 3*i mod 47 (bit 47 fixed).
pub fn printcipher_layer_permutation() -> Vec<u32> {
    let mut p: Vec<u32> = (0..48u32).map(|i| (3 * i) % 47).collect();
    p[47] = 47;
    p
}

pub fn printcipher_layer() -> LinearLayer {
    LinearLayer::from_bit_permutation(&printcipher_layer_permutation()).expect("fixture is invertible")
}

/// Block rotation on n blocks of width m: block i maps onto block i+1
/// (indices mod n), i.e. e_j -> e_{(j + m) mod mn}.
pub fn block_rotation_layer(m: usize, n: usize) -> LinearLayer {
    let d = m * n;
    let p: Vec<u32> = (0..d as u32).map(|j| (j + m as u32) % d as u32).collect();
    LinearLayer::from_bit_permutation(&p).expect("rotation is invertible")
}

pub fn present_spec() -> CipherSpec {
    CipherSpec::new(4, 16, vec![present_sbox()], present_layer(), true).expect("valid fixture")
}

pub fn rectangle_spec() -> CipherSpec {
    CipherSpec::new(4, 16, vec![rectangle_sbox()], rectangle_layer(), true).expect("valid fixture")
}

pub fn printcipher_spec() -> CipherSpec {
    CipherSpec::new(3, 16, vec![printcipher_sbox()], printcipher_layer(), true).expect("valid fixture")
}

/// The worked counterexample: inversion bricks with the block rotation on
/// four 4-bit blocks (proper but not strongly proper).
pub fn rotation_example_spec() -> CipherSpec {
    CipherSpec::new(4, 4, vec![inversion_sbox()], block_rotation_layer(4, 4), true)
        .expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_table_is_field_inversion() {
        // Multiplication in GF(2^4) modulo x^4 + x + 1.
        fn mul(a: u16, b: u16) -> u16 {
            let mut p: u32 = 0;
            for i in 0..4 {
                if (b >> i) & 1 == 1 {
                    p ^= (a as u32) << i;
                }
            }
            for i in (4..8).rev() {
                if (p >> i) & 1 == 1 {
                    p ^= 0b10011 << (i - 4);
                }
            }
            p as u16
        }
        assert_eq!(INVERSION_SBOX[0], 0);
        for x in 1..16u16 {
            assert_eq!(mul(x, INVERSION_SBOX[x as usize]), 1, "x={x}");
        }
    }

    #[test]
    fn present_permutation_matches_published_table() {
        let p = present_layer_permutation();
        assert_eq!(&p[0..16], &[0, 16, 32, 48, 1, 17, 33, 49, 2, 18, 34, 50, 3, 19, 35, 51]);
        assert_eq!(&p[48..64], &[12, 28, 44, 60, 13, 29, 45, 61, 14, 30, 46, 62, 15, 31, 47, 63]);
    }
}
