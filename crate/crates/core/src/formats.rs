//! File formats for S-boxes, layers and cipher specs.
//!
//! S-box file: a `m=<int>` header line followed by either a hex string of
//! 2^m nibbles (width-4 shorthand) or 2^m whitespace-separated decimals.
//!
//! Layer file: a `d=<int>` header, then either `perm:` followed by d
//! integers (i -> perm[i], bit 0 is the least significant state bit) or
//! `matrix:` followed by d binary rows; row i is the image of basis vector
//! e_i, leftmost character is coordinate 0.
//!
//! Spec file: `key: value` lines naming m, n, one or n `brick:` paths
//! (relative to the spec file), a `layer:` path, and
//! `key_schedule_surjective: true|false`.
//!
//! Lines starting with `#` are comments throughout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mixlayer::LinearLayer;
use crate::tbcipher::CipherSpec;
use crate::vboolfn::SBox;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Content { path: String, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(path: &str, line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { path: path.to_string(), line, msg: msg.into() }
}

fn content(path: &str, msg: impl std::fmt::Display) -> ParseError {
    ParseError::Content { path: path.to_string(), msg: msg.to_string() }
}

/// Non-comment, non-empty lines with their 1-based numbers.
fn meaningful_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_header(path: &str, line_no: usize, line: &str, key: &str) -> Result<usize, ParseError> {
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix('='))
        .ok_or_else(|| syntax(path, line_no, format!("expected `{key}=<int>` header")))?;
    rest.trim()
        .parse::<usize>()
        .map_err(|_| syntax(path, line_no, format!("invalid integer in `{key}=` header")))
}

/// Reverse the low `width` bits of `x`.
fn reverse_bits(x: u64, width: usize) -> u64 {
    let mut out = 0u64;
    for i in 0..width {
        if (x >> i) & 1 == 1 {
            out |= 1 << (width - 1 - i);
        }
    }
    out
}

/// Reindex an S-box to the opposite bit-numbering convention:
/// f'(x) = rev(f(rev(x))).
pub fn sbox_reverse_bits(sbox: &SBox) -> SBox {
    let m = sbox.m();
    let table: Vec<u16> = (0..sbox.size() as u16)
        .map(|x| reverse_bits(sbox.apply(reverse_bits(x as u64, m) as u16) as u64, m) as u16)
        .collect();
    SBox::new_allowing_non_bijective(m, table).expect("reindexing preserves validity")
}

/// Reindex a layer to the opposite bit-numbering convention.
pub fn layer_reverse_bits(layer: &LinearLayer) -> LinearLayer {
    let d = layer.dim();
    if let Some(perm) = layer.bit_permutation() {
        let mut flipped = vec![0u32; d];
        for (i, &q) in perm.iter().enumerate() {
            flipped[d - 1 - i] = (d - 1) as u32 - q;
        }
        return LinearLayer::from_bit_permutation(&flipped).expect("still a permutation");
    }
    let rows: Vec<u64> =
        (0..d).rev().map(|i| reverse_bits(layer.matrix().row_bits(i), d)).collect();
    let matrix = crate::gf2::Gf2Matrix::from_row_bits(d, rows).expect("row width preserved");
    LinearLayer::from_matrix(matrix).expect("invertibility preserved")
}

pub fn parse_sbox_text(path: &str, text: &str, msb0: bool) -> Result<SBox, ParseError> {
    let mut lines = meaningful_lines(text);
    let (line_no, header) =
        lines.next().ok_or_else(|| syntax(path, 1, "empty S-box file"))?;
    let m = parse_header(path, line_no, header, "m")?;
    let body: Vec<(usize, &str)> = lines.collect();
    if body.is_empty() {
        return Err(syntax(path, line_no, "missing S-box table after header"));
    }
    let joined: String = body.iter().map(|(_, l)| *l).collect::<Vec<_>>().join(" ");
    let tokens: Vec<&str> = joined.split_whitespace().collect();

    let table: Vec<u16> = if m == 4 && tokens.len() == 1 && tokens[0].len() == 16 {
        tokens[0]
            .chars()
            .map(|c| {
                c.to_digit(16).map(|d| d as u16).ok_or_else(|| {
                    syntax(path, body[0].0, format!("invalid hex digit {c:?} in shorthand"))
                })
            })
            .collect::<Result<_, _>>()?
    } else {
        tokens
            .iter()
            .map(|t| {
                t.parse::<u16>()
                    .map_err(|_| syntax(path, body[0].0, format!("invalid table entry {t:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    let sbox = SBox::new(m, table).map_err(|e| content(path, e))?;
    Ok(if msb0 { sbox_reverse_bits(&sbox) } else { sbox })
}

pub fn parse_layer_text(path: &str, text: &str, msb0: bool) -> Result<LinearLayer, ParseError> {
    let mut lines = meaningful_lines(text);
    let (line_no, header) =
        lines.next().ok_or_else(|| syntax(path, 1, "empty layer file"))?;
    let d = parse_header(path, line_no, header, "d")?;
    let body: Vec<(usize, &str)> = lines.collect();
    let (first_no, first) = *body
        .first()
        .ok_or_else(|| syntax(path, line_no, "missing `perm:` or `matrix:` section"))?;

    let layer = if let Some(rest) = first.strip_prefix("perm:") {
        let mut tokens: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        for (_, l) in &body[1..] {
            tokens.extend(l.split_whitespace().map(str::to_string));
        }
        if tokens.len() != d {
            return Err(syntax(path, first_no, format!("expected {d} images, got {}", tokens.len())));
        }
        let perm: Vec<u32> = tokens
            .iter()
            .map(|t| {
                t.parse::<u32>().map_err(|_| syntax(path, first_no, format!("invalid image {t:?}")))
            })
            .collect::<Result<_, _>>()?;
        LinearLayer::from_bit_permutation(&perm).map_err(|e| content(path, e))?
    } else if first == "matrix:" || first.starts_with("matrix:") {
        let mut rows: Vec<u64> = Vec::with_capacity(d);
        let tail = first.strip_prefix("matrix:").unwrap_or("").trim();
        let mut row_lines: Vec<(usize, &str)> = Vec::new();
        if !tail.is_empty() {
            row_lines.push((first_no, tail));
        }
        row_lines.extend(body[1..].iter().copied());
        for (no, l) in row_lines {
            for token in l.split_whitespace() {
                if token.len() != d || !token.chars().all(|c| c == '0' || c == '1') {
                    return Err(syntax(path, no, format!("expected a {d}-character binary row, got {token:?}")));
                }
                let mut bits = 0u64;
                for (i, c) in token.chars().enumerate() {
                    if c == '1' {
                        bits |= 1 << i;
                    }
                }
                rows.push(bits);
            }
        }
        if rows.len() != d {
            return Err(content(path, format!("expected {d} matrix rows, got {}", rows.len())));
        }
        let matrix =
            crate::gf2::Gf2Matrix::from_row_bits(d, rows).map_err(|e| content(path, e))?;
        LinearLayer::from_matrix(matrix).map_err(|e| content(path, e))?
    } else {
        return Err(syntax(path, first_no, "expected `perm:` or `matrix:` section"));
    };
    Ok(if msb0 { layer_reverse_bits(&layer) } else { layer })
}

pub fn read_sbox_file(path: &Path, msb0: bool) -> Result<SBox, ParseError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ParseError::Io { path: shown.clone(), source })?;
    parse_sbox_text(&shown, &text, msb0)
}

pub fn read_layer_file(path: &Path, msb0: bool) -> Result<LinearLayer, ParseError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ParseError::Io { path: shown.clone(), source })?;
    parse_layer_text(&shown, &text, msb0)
}

/// Serialize an S-box in the file format (hex shorthand at width 4).
pub fn sbox_to_text(sbox: &SBox) -> String {
    let mut out = format!("m={}\n", sbox.m());
    match sbox.to_hex() {
        Some(hex) => {
            out.push_str(&hex);
            out.push('\n');
        }
        None => {
            let entries: Vec<String> = sbox.table().iter().map(|y| y.to_string()).collect();
            out.push_str(&entries.join(" "));
            out.push('\n');
        }
    }
    out
}

/// Serialize a layer in the file format (bit-permutation form when known).
pub fn layer_to_text(layer: &LinearLayer) -> String {
    let d = layer.dim();
    let mut out = format!("d={d}\n");
    match layer.bit_permutation() {
        Some(perm) => {
            let images: Vec<String> = perm.iter().map(|q| q.to_string()).collect();
            let _ = writeln!(out, "perm: {}", images.join(" "));
        }
        None => {
            out.push_str("matrix:\n");
            for i in 0..d {
                let row = layer.matrix().row_bits(i);
                let chars: String =
                    (0..d).map(|j| if (row >> j) & 1 == 1 { '1' } else { '0' }).collect();
                out.push_str(&chars);
                out.push('\n');
            }
        }
    }
    out
}

/// A parsed cipher spec file, with the resolved input paths retained for
/// report echoing.
#[derive(Debug)]
pub struct SpecFile {
    pub spec: CipherSpec,
    pub brick_paths: Vec<PathBuf>,
    pub layer_path: PathBuf,
}

pub fn read_spec_file(path: &Path, msb0: bool) -> Result<SpecFile, ParseError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ParseError::Io { path: shown.clone(), source })?;
    let dir = path.parent().unwrap_or(Path::new("."));

    let mut m: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut brick_paths: Vec<PathBuf> = Vec::new();
    let mut layer_path: Option<PathBuf> = None;
    let mut surjective: Option<bool> = None;

    for (no, line) in meaningful_lines(&text) {
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| syntax(&shown, no, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "m" => {
                m = Some(value.parse().map_err(|_| syntax(&shown, no, "invalid m"))?);
            }
            "n" => {
                n = Some(value.parse().map_err(|_| syntax(&shown, no, "invalid n"))?);
            }
            "brick" | "sbox" => brick_paths.push(dir.join(value)),
            "layer" => layer_path = Some(dir.join(value)),
            "key_schedule_surjective" => {
                surjective = Some(match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(syntax(&shown, no, format!("expected true|false, got {other:?}")))
                    }
                });
            }
            other => return Err(syntax(&shown, no, format!("unknown key {other:?}"))),
        }
    }

    let m = m.ok_or_else(|| content(&shown, "missing `m:`"))?;
    let n = n.ok_or_else(|| content(&shown, "missing `n:`"))?;
    let layer_path = layer_path.ok_or_else(|| content(&shown, "missing `layer:`"))?;
    let surjective = surjective.ok_or_else(|| content(&shown, "missing `key_schedule_surjective:`"))?;
    if brick_paths.is_empty() {
        return Err(content(&shown, "missing `brick:`"));
    }

    let bricks: Vec<SBox> = brick_paths
        .iter()
        .map(|p| read_sbox_file(p, msb0))
        .collect::<Result<_, _>>()?;
    let layer = read_layer_file(&layer_path, msb0)?;
    let spec = CipherSpec::new(m, n, bricks, layer, surjective).map_err(|e| content(&shown, e))?;
    Ok(SpecFile { spec, brick_paths, layer_path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::mixlayer::{is_proper, is_strongly_proper, BrickPartition};
    use crate::sboxprops::{differential_uniformity, is_strongly_r_anti_invariant};

    #[test]
    fn parse_hex_shorthand() {
        let s = parse_sbox_text("t", "m=4\nC56B90AD3EF84712\n", false).unwrap();
        assert_eq!(s, fixtures::present_sbox());
    }

    #[test]
    fn parse_decimal_table_with_comments() {
        let text = "# three-bit table\nm=3\n0 1 3 6\n7 4 5 2\n";
        let s = parse_sbox_text("t", text, false).unwrap();
        assert_eq!(s, fixtures::printcipher_sbox());
    }

    #[test]
    fn sbox_parse_errors_carry_location() {
        let err = parse_sbox_text("t", "m=4\nC56B90AD3EF8471Z\n", false).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err}");
        let err = parse_sbox_text("t", "m=4\n0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 14\n", false)
            .unwrap_err();
        assert!(matches!(err, ParseError::Content { .. }));
    }

    #[test]
    fn parse_perm_layer() {
        let perm = fixtures::present_layer_permutation();
        let text = layer_to_text(&fixtures::present_layer());
        let parsed = parse_layer_text("t", &text, false).unwrap();
        assert_eq!(parsed.bit_permutation().unwrap(), &perm[..]);
    }

    #[test]
    fn parse_matrix_layer() {
        let text = "d=4\nmatrix:\n0100\n0010\n0001\n1100\n";
        let layer = parse_layer_text("t", text, false).unwrap();
        assert_eq!(layer.matrix().row_bits(0), 0b0010);
        assert_eq!(layer.matrix().row_bits(3), 0b0011);
        assert!(layer.matrix().is_invertible());
    }

    #[test]
    fn roundtrip_through_text() {
        for sbox in [fixtures::present_sbox(), fixtures::printcipher_sbox()] {
            let text = sbox_to_text(&sbox);
            assert_eq!(parse_sbox_text("t", &text, false).unwrap(), sbox);
        }
        for layer in [fixtures::present_layer(), fixtures::rectangle_layer()] {
            let text = layer_to_text(&layer);
            assert_eq!(parse_layer_text("t", &text, false).unwrap(), layer);
        }
        // Matrix-form roundtrip.
        let rot = fixtures::block_rotation_layer(4, 2);
        let matrix_only = LinearLayer::from_matrix(rot.matrix().clone()).unwrap();
        let text = layer_to_text(&matrix_only);
        assert_eq!(parse_layer_text("t", &text, false).unwrap().matrix(), rot.matrix());
    }

    #[test]
    fn msb0_preserves_analyzed_properties() {
        // The properties at issue are invariant under bit reversal, so the
        // alternative convention must reproduce the same verdicts.
        let s = fixtures::present_sbox();
        let flipped = sbox_reverse_bits(&s);
        assert_ne!(s, flipped);
        assert_eq!(
            differential_uniformity(&s).delta(),
            differential_uniformity(&flipped).delta()
        );
        assert_eq!(
            is_strongly_r_anti_invariant(&s, 1).unwrap().holds,
            is_strongly_r_anti_invariant(&flipped, 1).unwrap().holds
        );

        let p = BrickPartition::new(4, 16).unwrap();
        let layer = fixtures::present_layer();
        let flipped_layer = layer_reverse_bits(&layer);
        assert_eq!(
            is_proper(&layer, &p).unwrap().holds,
            is_proper(&flipped_layer, &p).unwrap().holds
        );
        assert_eq!(
            is_strongly_proper(&layer, &p).unwrap().holds,
            is_strongly_proper(&flipped_layer, &p).unwrap().holds
        );
    }

    #[test]
    fn msb0_reversal_is_involutive() {
        let s = fixtures::rectangle_sbox();
        assert_eq!(sbox_reverse_bits(&sbox_reverse_bits(&s)), s);
        let layer = fixtures::rectangle_layer();
        assert_eq!(layer_reverse_bits(&layer_reverse_bits(&layer)), layer);
    }
}
