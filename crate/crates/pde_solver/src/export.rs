//! Snapshot export: CSV and the ABWF binary dump.
//!
//! ABWF layout, little-endian: magic "ABWF", u32 version, u64 nx, u64 ny,
//! f64 spacing, f64 origin x1, f64 origin x2, then nx·ny (re, im) f64 pairs in
//! row-major order (x1 fastest).

use std::io::{Read, Write};

use abw_core::{Complex64, GridField, GridSpec, Vec2};

use crate::SolverError;

pub const ABWF_MAGIC: &[u8; 4] = b"ABWF";
pub const ABWF_VERSION: u32 = 1;

pub fn write_csv<W: Write>(field: &GridField, mut w: W) -> Result<(), SolverError> {
    writeln!(w, "x1,x2,re_u,im_u,abs_u_sq")?;
    for j in 0..field.spec.ny {
        for i in 0..field.spec.nx {
            let p = field.spec.point(i, j);
            let u = field.get(i, j);
            writeln!(w, "{},{},{},{},{}", p.x1, p.x2, u.re, u.im, u.norm_sqr())?;
        }
    }
    Ok(())
}

pub fn write_abwf<W: Write>(field: &GridField, mut w: W) -> Result<(), SolverError> {
    let s = &field.spec;
    w.write_all(ABWF_MAGIC)?;
    w.write_all(&ABWF_VERSION.to_le_bytes())?;
    w.write_all(&(s.nx as u64).to_le_bytes())?;
    w.write_all(&(s.ny as u64).to_le_bytes())?;
    for v in [s.spacing, s.origin.x1, s.origin.x2] {
        w.write_all(&v.to_le_bytes())?;
    }
    for z in field.values.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], SolverError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| SolverError::Format(format!("truncated: {e}")))?;
    Ok(buf)
}

/// Reads an ABWF dump; the mask is not stored, so every cell comes back active.
pub fn read_abwf<R: Read>(mut r: R) -> Result<GridField, SolverError> {
    if &read_exact::<4, _>(&mut r)? != ABWF_MAGIC {
        return Err(SolverError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_exact(&mut r)?);
    if version != ABWF_VERSION {
        return Err(SolverError::Format(format!("unsupported version {version}")));
    }
    let nx = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let ny = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let spacing = f64::from_le_bytes(read_exact(&mut r)?);
    let ox = f64::from_le_bytes(read_exact(&mut r)?);
    let oy = f64::from_le_bytes(read_exact(&mut r)?);
    let spec = GridSpec::new(Vec2::new(ox, oy), spacing, nx, ny)?;
    let mut field = GridField::unmasked(spec);
    for z in field.values.iter_mut() {
        let re = f64::from_le_bytes(read_exact(&mut r)?);
        let im = f64::from_le_bytes(read_exact(&mut r)?);
        *z = Complex64::new(re, im);
    }
    Ok(field)
}
