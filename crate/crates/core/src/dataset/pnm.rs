//! Binary PPM (`P6`) and PGM (`P5`) with maxval 255.
//!
//! The encoder always writes the canonical header `P6\n<w> <h>\n255\n`; the decoder
//! accepts any single whitespace byte between header tokens and `#` comments before
//! the maxval.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnmKind {
    /// `P6`, three bytes per pixel.
    Rgb,
    /// `P5`, one byte per pixel.
    Gray,
}

impl PnmKind {
    pub fn channels(self) -> usize {
        match self {
            PnmKind::Rgb => 3,
            PnmKind::Gray => 1,
        }
    }
}

/// A decoded 8-bit image, row-major, interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PnmImage {
    pub kind: PnmKind,
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Image(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Image(format!("{what} out of range")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<PnmImage> {
    let kind = match bytes.get(..2) {
        Some(b"P6") => PnmKind::Rgb,
        Some(b"P5") => PnmKind::Gray,
        _ => return Err(Error::Image("bad magic, expected P6 or P5".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Image(format!("maxval {maxval} unsupported, expected 255")));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Image("missing whitespace after maxval".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::Image(format!("empty image {width}x{height}")));
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(kind.channels()))
        .ok_or_else(|| Error::Image("dimensions overflow".into()))?;
    let data = bytes
        .get(cur.pos..cur.pos + len)
        .ok_or_else(|| Error::Image(format!("truncated raster: need {len} bytes")))?;
    Ok(PnmImage {
        kind,
        width,
        height,
        data: data.to_vec(),
    })
}

pub fn encode(img: &PnmImage) -> Vec<u8> {
    let magic = match img.kind {
        PnmKind::Rgb => "P6",
        PnmKind::Gray => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}
