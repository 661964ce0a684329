//! 8-bit binary PGM (`P5`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::image::Image;
use crate::error::{Error, Result};

fn header_token(bytes: &[u8], pos: &mut usize) -> Result<String> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(Error::Parse("truncated PGM header".into())),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|c| !c.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = header_token(bytes, pos)?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad PGM {what}: {tok:?}")))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image<u8>> {
    let mut pos = 0;
    let magic = header_token(bytes, &mut pos)?;
    if magic != "P5" {
        return Err(Error::Parse(format!("expected P5 magic, got {magic:?}")));
    }
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("only 8-bit PGM is supported, maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let len = width * height;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Parse(format!("PGM raster truncated: need {len} bytes")))?;
    Image::from_vec(width, height, raster.to_vec())
}

pub fn encode_pgm(img: &Image<u8>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_pgm(path: &Path) -> Result<Image<u8>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_pgm(&bytes)
}

pub fn write_pgm(path: &Path, img: &Image<u8>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_pgm(img))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n3 2\n# depth\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 2, 253, 254, 255]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.dims(), (3, 2));
        assert_eq!(img.row(1), &[253, 254, 255]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(decode_pgm(b"P5\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(w in 0usize..12, h in 0usize..12, seed in any::<u64>()) {
            let data: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 7) >> 13) as u8).collect();
            let img = Image::from_vec(w, h, data).unwrap();
            prop_assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
        }
    }
}
