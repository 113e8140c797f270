//! Plain and raw PGM (P2/P5) grayscale images, mapped to `[0, 1]` by the
//! declared maximum value. Pixel `(i, j)` is column `i` of row `j`.

use std::fmt::Write as _;

use tvsr::torus::{Image, TorusGrid};

use crate::error::CliError;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Io(format!("pgm: {}", msg.into()))
}

/// Splits the header into whitespace tokens, skipping `#` comments, and
/// returns the tokens together with the offset just past the last one.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize), CliError> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < count {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        if bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    Ok((tokens, pos))
}

/// Decodes a square P2 or P5 image.
pub fn read_pgm(bytes: &[u8]) -> Result<Image, CliError> {
    let (tokens, pos) = header_tokens(bytes, 4)?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad header field {s:?}")));
    let (width, height, maxval) = (num(&tokens[1])?, num(&tokens[2])?, num(&tokens[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(bad("bad dimensions or maximum value"));
    }
    if width != height {
        return Err(CliError::Config(format!("image must be square, got {width}x{height}")));
    }
    let count = width * height;
    let raw: Vec<usize> = match tokens[0].as_str() {
        "P2" => {
            let text = String::from_utf8_lossy(&bytes[pos..]);
            let vals: Result<Vec<usize>, _> = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
                .map(|t| t.parse::<usize>())
                .collect();
            vals.map_err(|_| bad("bad sample"))?
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
            if maxval < 256 {
                data.iter().take(count).map(|&b| b as usize).collect()
            } else {
                data.chunks_exact(2).take(count).map(|c| ((c[0] as usize) << 8) | c[1] as usize).collect()
            }
        }
        other => return Err(bad(format!("unsupported magic {other:?}"))),
    };
    if raw.len() != count {
        return Err(bad(format!("expected {count} samples, found {}", raw.len())));
    }
    if raw.iter().any(|&v| v > maxval) {
        return Err(bad("sample exceeds maximum value"));
    }
    let grid = TorusGrid::new(width).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Image::from_fn(grid, |i, j| raw[j * width + i] as f64 / maxval as f64))
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Encodes as 8-bit P5, clamping to `[0, 1]`.
pub fn write_pgm_binary(image: &Image) -> Vec<u8> {
    let n = image.grid().n_pixels();
    let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in 0..n {
        for i in 0..n {
            out.push(quantize(image.at(i, j)));
        }
    }
    out
}

/// Encodes as 8-bit P2, clamping to `[0, 1]`.
pub fn write_pgm_plain(image: &Image) -> String {
    let n = image.grid().n_pixels();
    let mut out = format!("P2\n{n} {n}\n255\n");
    for j in 0..n {
        let row: Vec<String> = (0..n).map(|i| quantize(image.at(i, j)).to_string()).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
