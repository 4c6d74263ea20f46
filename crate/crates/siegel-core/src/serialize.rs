//! Self-describing binary container for Hermite fields and forms, plus a
//! JSON fixture format for small cases.
//!
//! Layout (all little-endian): magic `SGTH`, version u32, g u32, d u32,
//! k u32, cutoff u32, h f64, then the component fields as complex64 pairs
//! (two f64: re, im) in lexicographic multi-index order. A bare field is
//! stored with `d = k = 0` and one component.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::cohomology::{HermiteField, HermiteTruncation, PForm};
use crate::{Result, SiegelError};

const MAGIC: &[u8; 4] = b"SGTH";
const VERSION: u32 = 1;

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn write_header(w: &mut impl Write, g: u32, d: u32, k: u32, cutoff: u32, h: f64) -> Result<()> {
    w.write_all(MAGIC)?;
    write_u32(w, VERSION)?;
    write_u32(w, g)?;
    write_u32(w, d)?;
    write_u32(w, k)?;
    write_u32(w, cutoff)?;
    write_f64(w, h)
}

fn read_header(r: &mut impl Read) -> Result<(u32, u32, u32, u32, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SiegelError::Serde("bad magic; not a field container".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(SiegelError::Serde(format!("unsupported version {version}")));
    }
    let g = read_u32(r)?;
    let d = read_u32(r)?;
    let k = read_u32(r)?;
    let cutoff = read_u32(r)?;
    let h = read_f64(r)?;
    Ok((g, d, k, cutoff, h))
}

fn write_coeffs(w: &mut impl Write, coeffs: &[Complex64]) -> Result<()> {
    for c in coeffs {
        write_f64(w, c.re)?;
        write_f64(w, c.im)?;
    }
    Ok(())
}

fn read_coeffs(r: &mut impl Read, len: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

pub fn write_field(w: &mut impl Write, f: &HermiteField) -> Result<()> {
    write_header(w, f.trunc.g as u32, 0, 0, f.trunc.cutoff as u32, f.trunc.h)?;
    write_coeffs(w, &f.coeffs)
}

pub fn read_field(r: &mut impl Read) -> Result<HermiteField> {
    let (g, d, k, cutoff, h) = read_header(r)?;
    if d != 0 || k != 0 {
        return Err(SiegelError::Serde("container holds a form, not a field".into()));
    }
    let trunc = HermiteTruncation::new(g as usize, cutoff as usize, h)?;
    let coeffs = read_coeffs(r, trunc.len())?;
    HermiteField::from_coeffs(trunc, coeffs)
}

pub fn write_form(w: &mut impl Write, form: &PForm) -> Result<()> {
    let t = form.trunc();
    write_header(
        w,
        t.g as u32,
        form.d as u32,
        form.k as u32,
        t.cutoff as u32,
        t.h,
    )?;
    for comp in &form.comps {
        write_coeffs(w, &comp.coeffs)?;
    }
    Ok(())
}

pub fn read_form(r: &mut impl Read) -> Result<PForm> {
    let (g, d, k, cutoff, h) = read_header(r)?;
    let trunc = HermiteTruncation::new(g as usize, cutoff as usize, h)?;
    let shape = PForm::zeros(d as usize, k as usize, trunc)?;
    let mut comps = Vec::with_capacity(shape.comps.len());
    for _ in 0..shape.comps.len() {
        let coeffs = read_coeffs(r, trunc.len())?;
        comps.push(HermiteField::from_coeffs(trunc, coeffs)?);
    }
    PForm::from_components(d as usize, k as usize, comps)
}

/// JSON fixture for small fields.
#[derive(Serialize, Deserialize)]
pub struct FieldFixture {
    pub g: usize,
    pub cutoff: usize,
    pub h: f64,
    /// `[re, im]` pairs in lexicographic multi-index order.
    pub coeffs: Vec<[f64; 2]>,
}

impl FieldFixture {
    pub fn from_field(f: &HermiteField) -> Self {
        Self {
            g: f.trunc.g,
            cutoff: f.trunc.cutoff,
            h: f.trunc.h,
            coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn to_field(&self) -> Result<HermiteField> {
        let trunc = HermiteTruncation::new(self.g, self.cutoff, self.h)?;
        HermiteField::from_coeffs(
            trunc,
            self.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect(),
        )
    }
}
