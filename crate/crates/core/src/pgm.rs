//! PGM (P2 ASCII / P5 binary) reader and writer.
//!
//! Samples are scaled to `[0, 1]` by `maxval`. 16-bit binary samples are
//! big-endian. The writer emits `P5\n<w> <h>\n<maxval>\n` followed by the
//! payload; ASCII bodies put one image row per line, single-space separated.

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PgmMode {
    Ascii,
    Binary,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self, field: &'static str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::format(field, "unexpected end of data")
            } else {
                Error::format(
                    field,
                    format!("expected an unsigned integer, found byte {:#04x}", self.bytes[self.pos]),
                )
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(field, "integer out of range"))
    }
}

/// Decodes a P2 or P5 grayscale image.
pub fn read_pgm(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < 2 {
        return Err(Error::format("magic", "file shorter than the magic number"));
    }
    let binary = match &bytes[..2] {
        b"P2" => false,
        b"P5" => true,
        b"P3" | b"P6" => {
            return Err(Error::format(
                "magic",
                "color PPM input is not supported; convert to grayscale (luminance) first",
            ))
        }
        other => {
            return Err(Error::format(
                "magic",
                format!("expected \"P2\" or \"P5\", found {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.token("width")? as usize;
    let height = cur.token("height")? as usize;
    let maxval = cur.token("maxval")?;
    if width == 0 {
        return Err(Error::format("width", "must be positive"));
    }
    if height == 0 {
        return Err(Error::format("height", "must be positive"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format("maxval", format!("{maxval} not in 1..=65535")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::format("width", "image too large"))?;
    let scale = maxval as f64;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates maxval from the raster
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(Error::format("payload", "missing separator after maxval"));
        }
        let data = &bytes[cur.pos + 1..];
        let wide = maxval > 255;
        let needed = if wide { count * 2 } else { count };
        if data.len() < needed {
            return Err(Error::format(
                "payload",
                format!("truncated: need {needed} bytes, found {}", data.len()),
            ));
        }
        for i in 0..count {
            let s = if wide {
                u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as u64
            } else {
                data[i] as u64
            };
            pixels.push(sample(s, maxval, scale)?);
        }
    } else {
        for _ in 0..count {
            let s = cur.token("payload")?;
            pixels.push(sample(s, maxval, scale)?);
        }
    }
    Image::new(width, height, pixels)
}

fn sample(s: u64, maxval: u64, scale: f64) -> Result<f64> {
    if s > maxval {
        return Err(Error::format("payload", format!("sample {s} exceeds maxval {maxval}")));
    }
    Ok(s as f64 / scale)
}

/// Encodes `img` with samples `round(v * maxval)`.
pub fn write_pgm(img: &Image, mode: PgmMode, maxval: u16) -> Vec<u8> {
    assert!(maxval >= 1, "maxval must be at least 1");
    let quantize = |v: f64| -> u16 { (v * maxval as f64).round().clamp(0.0, maxval as f64) as u16 };
    let magic = match mode {
        PgmMode::Ascii => "P2",
        PgmMode::Binary => "P5",
    };
    let mut out = format!("{magic}\n{} {}\n{maxval}\n", img.width(), img.height()).into_bytes();
    match mode {
        PgmMode::Binary => {
            for &v in img.pixels() {
                let s = quantize(v);
                if maxval > 255 {
                    out.extend_from_slice(&s.to_be_bytes());
                } else {
                    out.push(s as u8);
                }
            }
        }
        PgmMode::Ascii => {
            for row in img.pixels().chunks(img.width()) {
                let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
                out.extend_from_slice(line.join(" ").as_bytes());
                out.push(b'\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_example() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 128, 64]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn ascii_example_and_comments() {
        let img = read_pgm(b"P2\n1 1\n255\n255").unwrap();
        assert_eq!(img.pixels(), &[1.0]);
        let img = read_pgm(b"P2 # comment\n2 1\n# another\n4\n0 2\n").unwrap();
        assert_eq!(img.pixels(), &[0.0, 0.5]);
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let mut bytes = b"P5 1 2 65535\n".to_vec();
        bytes.extend_from_slice(&[0xff, 0xff, 0x80, 0x00]);
        let img = read_pgm(&bytes).unwrap();
        assert_eq!(img.pixels()[0], 1.0);
        assert_eq!(img.pixels()[1], 32768.0 / 65535.0);
        let back = write_pgm(&img, PgmMode::Binary, 65535);
        assert_eq!(&back[..13], b"P5\n1 2\n65535\n");
        assert_eq!(&back[13..], &[0xff, 0xff, 0x80, 0x00]);
    }

    #[test]
    fn errors_name_the_field() {
        let field = |r: Result<Image>| match r {
            Err(Error::Format { field, .. }) => field,
            other => panic!("expected format error, got {other:?}"),
        };
        assert_eq!(field(read_pgm(b"P7\n1 1\n255\n")), "magic");
        assert_eq!(field(read_pgm(b"P6\n1 1\n255\n")), "magic");
        assert_eq!(field(read_pgm(b"P5\n2 2\n255\n\x00\x01")), "payload");
        assert_eq!(field(read_pgm(b"P2\n1 1\n0\n0")), "maxval");
        assert_eq!(field(read_pgm(b"P2\n1 1\n70000\n0")), "maxval");
        assert_eq!(field(read_pgm(b"P2\nx 1\n255\n0")), "width");
        assert_eq!(field(read_pgm(b"P2\n1 1\n255\n")), "payload");
    }

    #[test]
    fn writer_examples() {
        let half = Image::new(1, 1, vec![0.5]).unwrap();
        assert_eq!(write_pgm(&half, PgmMode::Binary, 255), b"P5\n1 1\n255\n\x80");
        let pair = Image::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(write_pgm(&pair, PgmMode::Ascii, 255), b"P2\n2 1\n255\n0 255\n");
    }
}
