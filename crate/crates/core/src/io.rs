//! Binary stack files.
//!
//! Layout, little-endian throughout:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `LDH1`                            |
//! | 4      | 4    | `u32` nx                                |
//! | 8      | 4    | `u32` ny                                |
//! | 12     | 4    | `u32` nt_total                          |
//! | 16     | 4    | `f32` fs in Hz                          |
//! | 20     | ...  | frames, each `nx * ny` pairs `(re, im)` of `f32`, row-major (y outer, x inner) |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};
use crate::holo::HologramStack;

pub const MAGIC: &[u8; 4] = b"LDH1";
pub const HEADER_LEN: u64 = 20;

fn format_err(offset: u64, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

pub fn write_stack_to<W: Write>(stack: &HologramStack, mut w: W) -> Result<()> {
    let dim = |n: usize, name: &str| {
        u32::try_from(n).map_err(|_| Error::InvalidInput(format!("{name} = {n} does not fit in u32")))
    };
    w.write_all(MAGIC)?;
    w.write_all(&dim(stack.nx(), "nx")?.to_le_bytes())?;
    w.write_all(&dim(stack.ny(), "ny")?.to_le_bytes())?;
    w.write_all(&dim(stack.nt_total(), "nt_total")?.to_le_bytes())?;
    w.write_all(&(stack.fs() as f32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(stack.n_pixels() * 8);
    for t in 0..stack.nt_total() {
        buf.clear();
        for z in stack.frame(t) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_stack(stack: &HologramStack, path: impl AsRef<Path>) -> Result<()> {
    write_stack_to(stack, BufWriter::new(File::create(path)?))
}

pub fn read_stack_from<R: Read>(mut r: R) -> Result<HologramStack> {
    let mut header = [0u8; HEADER_LEN as usize];
    let got = read_full(&mut r, &mut header)?;
    if got < header.len() {
        return Err(format_err(
            got as u64,
            format!("truncated header: {got} of {HEADER_LEN} bytes"),
        ));
    }
    if &header[0..4] != MAGIC {
        return Err(format_err(
            0,
            format!(
                "bad magic {:?}, expected \"LDH1\"",
                String::from_utf8_lossy(&header[0..4])
            ),
        ));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
    let (nx, ny, nt) = (u32_at(4) as usize, u32_at(8) as usize, u32_at(12) as usize);
    let fs = f32::from_le_bytes(header[16..20].try_into().unwrap());
    for (off, name, v) in [(4, "nx", nx), (8, "ny", ny), (12, "nt_total", nt)] {
        if v == 0 {
            return Err(format_err(off, format!("{name} must be positive")));
        }
    }
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(format_err(16, format!("sampling frequency must be positive, got {fs}")));
    }
    let samples = nx
        .checked_mul(ny)
        .and_then(|n| n.checked_mul(nt))
        .ok_or_else(|| format_err(4, "stack dimensions overflow"))?;
    let expected = samples as u64 * 8;

    let mut payload = vec![0u8; samples * 8];
    let got = read_full(&mut r, &mut payload)? as u64;
    if got < expected {
        return Err(format_err(
            HEADER_LEN + got,
            format!("truncated payload: expected {expected} bytes, found {got}"),
        ));
    }
    let mut extra = [0u8; 1];
    if read_full(&mut r, &mut extra)? > 0 {
        return Err(format_err(HEADER_LEN + expected, "trailing bytes after payload"));
    }

    let mut data = Vec::with_capacity(samples);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let re = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        if !(re.is_finite() && im.is_finite()) {
            return Err(format_err(HEADER_LEN + 8 * i as u64, "non-finite sample"));
        }
        data.push(Complex32::new(re, im));
    }
    HologramStack::new(nx, ny, nt, fs as f64, data)
}

pub fn read_stack(path: impl AsRef<Path>) -> Result<HologramStack> {
    read_stack_from(BufReader::new(File::open(path)?))
}

fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn encode(stack: &HologramStack) -> Vec<u8> {
        let mut bytes = Vec::new();
        write_stack_to(stack, &mut bytes).unwrap();
        bytes
    }

    fn sample_stack() -> HologramStack {
        let data = (0..4 * 4 * 8)
            .map(|i| Complex32::new(i as f32 * 0.5, -(i as f32) / 3.0))
            .collect();
        HologramStack::new(4, 4, 8, 60_000.0, data).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample_stack());
        assert_eq!(&bytes[0..4], b"LDH1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 4);
        assert_eq!(f32::from_le_bytes(bytes[16..20].try_into().unwrap()), 60_000.0);
        assert_eq!(bytes.len(), 20 + 4 * 4 * 8 * 8);
        assert_eq!(f32::from_le_bytes(bytes[28..32].try_into().unwrap()), 0.5);
        assert_eq!(f32::from_le_bytes(bytes[32..36].try_into().unwrap()), -1.0 / 3.0);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = encode(&sample_stack());
        bytes[0..4].copy_from_slice(b"XXXX");
        assert!(matches!(
            read_stack_from(&bytes[..]),
            Err(Error::Format { offset: 0, .. })
        ));
    }

    #[test]
    fn one_byte_short() {
        let bytes = encode(&sample_stack());
        let err = read_stack_from(&bytes[..bytes.len() - 1]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("expected 1024 bytes, found 1023"), "{msg}");
    }

    #[test]
    fn non_finite_sample_offset() {
        let mut bytes = encode(&sample_stack());
        bytes[20 + 8 * 3 + 4..20 + 8 * 3 + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        match read_stack_from(&bytes[..]) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 20 + 24),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_dimension_and_trailing_bytes() {
        let mut bytes = encode(&sample_stack());
        bytes.push(0);
        assert!(read_stack_from(&bytes[..]).is_err());
        let mut bytes = encode(&sample_stack());
        bytes[8..12].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            read_stack_from(&bytes[..]),
            Err(Error::Format { offset: 8, .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            nx in 1usize..5, ny in 1usize..5, nt in 1usize..6,
            fs in 1.0f32..1e6,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data = (0..nx * ny * nt)
                .map(|_| Complex32::new(rng.random::<f32>() * 1e3 - 5e2, rng.random::<f32>() - 0.5))
                .collect();
            let stack = HologramStack::new(nx, ny, nt, fs as f64, data).unwrap();
            let back = read_stack_from(&encode(&stack)[..]).unwrap();
            prop_assert_eq!(back, stack);
        }
    }
}
