//! File formats.
//!
//! * Signal text: one `index value` pair per line, `#` starts a comment.
//!   Missing indices between the smallest and largest one are zero.
//! * Signal binary (little endian): `i64` offset, `u64` length, then that
//!   many `f64` values.
//! * Mesh binary (little endian): `f64` x0, `f64` h, `u64` count, then
//!   `count` pairs of `f64` (real part, imaginary part).
//!
//! Weights use the signal formats.

use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::Signal;
use crate::oscillatory::MeshSignal;

fn parse_err(line: usize, msg: impl std::fmt::Display) -> LabError {
    LabError::Parse(format!("line {line}: {msg}"))
}

pub fn signal_to_text(s: &Signal) -> String {
    let mut out = String::with_capacity(24 * s.len());
    for (x, v) in s.iter() {
        // {:?} prints the shortest representation that round-trips
        let _ = writeln!(out, "{x} {v:?}");
    }
    out
}

pub fn signal_from_text(text: &str) -> Result<Signal> {
    let mut pairs: Vec<(i64, f64)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err(n + 1, "expected `index value`"));
        };
        let x: i64 = a.parse().map_err(|e| parse_err(n + 1, e))?;
        let v: f64 = b.parse().map_err(|e| parse_err(n + 1, e))?;
        pairs.push((x, v));
    }
    if pairs.is_empty() {
        return Ok(Signal::new(0, Vec::new()));
    }
    let lo = pairs.iter().map(|p| p.0).min().unwrap_or(0);
    let hi = pairs.iter().map(|p| p.0).max().unwrap_or(0);
    let mut values = vec![0.0; (hi - lo + 1) as usize];
    let mut seen = vec![false; values.len()];
    for (x, v) in pairs {
        let i = (x - lo) as usize;
        if seen[i] {
            return Err(LabError::Parse(format!("index {x} appears twice")));
        }
        seen[i] = true;
        values[i] = v;
    }
    Ok(Signal::new(lo, values))
}

pub fn write_signal_binary(s: &Signal, mut w: impl Write) -> Result<()> {
    w.write_all(&s.offset().to_le_bytes())?;
    w.write_all(&(s.len() as u64).to_le_bytes())?;
    for v in s.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_signal_binary(mut r: impl Read) -> Result<Signal> {
    let offset = i64::from_le_bytes(read_array(&mut r)?);
    let len = u64::from_le_bytes(read_array(&mut r)?);
    let mut values = Vec::new();
    for _ in 0..len {
        values.push(f64::from_le_bytes(read_array(&mut r)?));
    }
    Ok(Signal::new(offset, values))
}

pub fn write_mesh_binary(m: &MeshSignal, mut w: impl Write) -> Result<()> {
    w.write_all(&m.x0.to_le_bytes())?;
    w.write_all(&m.h.to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    for z in &m.values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_mesh_binary(mut r: impl Read) -> Result<MeshSignal> {
    let x0 = f64::from_le_bytes(read_array(&mut r)?);
    let h = f64::from_le_bytes(read_array(&mut r)?);
    let count = u64::from_le_bytes(read_array(&mut r)?);
    let mut values = Vec::new();
    for _ in 0..count {
        let re = f64::from_le_bytes(read_array(&mut r)?);
        let im = f64::from_le_bytes(read_array(&mut r)?);
        values.push(Complex64::new(re, im));
    }
    MeshSignal::new(x0, h, values)
}

/// Read a signal from a path, choosing the format by extension (`.bin`
/// is binary, anything else text).
pub fn load_signal(path: &std::path::Path) -> Result<Signal> {
    if path.extension().is_some_and(|e| e == "bin") {
        read_signal_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    } else {
        signal_from_text(&std::fs::read_to_string(path)?)
    }
}

pub fn save_signal(s: &Signal, path: &std::path::Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_signal_binary(s, &mut w)?;
        w.flush()?;
        Ok(())
    } else {
        Ok(std::fs::write(path, signal_to_text(s))?)
    }
}
