//! Binary PGM (P5) reading and writing for bit-exact corpus storage.

use std::io::{Read, Write};
use std::path::Path;

use super::{Image, VisionError};

/// Serializes an image as binary PGM with maxval 255.
pub fn write_pgm<W: Write>(img: &Image, mut out: W) -> Result<(), VisionError> {
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())?;
    out.write_all(img.pixels())?;
    Ok(())
}

pub fn write_pgm_file(img: &Image, path: &Path) -> Result<(), VisionError> {
    let file = std::fs::File::create(path)?;
    write_pgm(img, std::io::BufWriter::new(file))
}

/// Parses binary PGM; comments (`#`) in the header are tolerated.
pub fn read_pgm<R: Read>(mut input: R) -> Result<Image, VisionError> {
    let mut data = Vec::new();
    input.read_to_end(&mut data)?;
    let mut pos = 0usize;

    let mut token = |data: &[u8]| -> Result<String, VisionError> {
        // Skip whitespace and comment lines.
        loop {
            while pos < data.len() && data[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < data.len() && data[pos] == b'#' {
                while pos < data.len() && data[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(VisionError::PgmFormat("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&data[start..pos]).into_owned())
    };

    let magic = token(&data)?;
    if magic != "P5" {
        return Err(VisionError::PgmFormat(format!(
            "expected magic P5, found {magic:?}"
        )));
    }
    let width: usize = token(&data)?
        .parse()
        .map_err(|_| VisionError::PgmFormat("bad width".into()))?;
    let height: usize = token(&data)?
        .parse()
        .map_err(|_| VisionError::PgmFormat("bad height".into()))?;
    let maxval: usize = token(&data)?
        .parse()
        .map_err(|_| VisionError::PgmFormat("bad maxval".into()))?;
    if maxval != 255 {
        return Err(VisionError::PgmFormat(format!(
            "unsupported maxval {maxval} (expected 255)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(VisionError::PgmFormat("zero dimension".into()));
    }
    // Exactly one whitespace byte separates the header from raster data.
    pos += 1;
    let need = width * height;
    if data.len() < pos + need {
        return Err(VisionError::PgmFormat(format!(
            "truncated raster: need {need} bytes, have {}",
            data.len().saturating_sub(pos)
        )));
    }
    Ok(Image::from_pixels(
        width,
        height,
        data[pos..pos + need].to_vec(),
    ))
}

pub fn read_pgm_file(path: &Path) -> Result<Image, VisionError> {
    let file = std::fs::File::open(path)?;
    read_pgm(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let img = Image::from_fn(37, 23, |x, y| ((x * 11 + y * 3) % 256) as u8);
        let mut buf = Vec::new();
        write_pgm(&img, &mut buf).unwrap();
        let back = read_pgm(buf.as_slice()).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn rejects_wrong_magic() {
        assert!(read_pgm(&b"P2\n2 2\n255\n aaaa"[..]).is_err());
    }

    #[test]
    fn tolerates_header_comments() {
        let mut buf: Vec<u8> = b"P5\n# generated\n2 2\n255\n".to_vec();
        buf.extend_from_slice(&[1, 2, 3, 4]);
        let img = read_pgm(buf.as_slice()).unwrap();
        assert_eq!(img.width(), 2);
        assert_eq!(img.get(1, 1), 4);
    }
}
