//! Flat binary field snapshots.
//!
//! Little-endian layout: `n` three times as `u64`, then `h`, `r0`, `R_box`
//! as `f64`, then the `phi` and `u` node arrays with x fastest.

use std::io::{Read, Write};

use super::ScalarField3D;
use crate::error::{Error, Result};

pub fn write_snapshot<W: Write>(mut w: W, f: &ScalarField3D) -> Result<()> {
    for _ in 0..3 {
        w.write_all(&(f.n as u64).to_le_bytes())?;
    }
    for v in [f.h, f.r0, f.r_box] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in f.phi.iter().chain(&f.u) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<ScalarField3D> {
    let mut buf = [0u8; 8];
    let mut dims = [0u64; 3];
    for d in &mut dims {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("header: {e}")))?;
        *d = u64::from_le_bytes(buf);
    }
    if dims[0] != dims[1] || dims[1] != dims[2] || dims[0] < 3 {
        return Err(Error::Snapshot(format!("unsupported dimensions {dims:?}")));
    }
    let mut head = [0f64; 3];
    for v in &mut head {
        r.read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("header: {e}")))?;
        *v = f64::from_le_bytes(buf);
    }
    let [h, r0, r_box] = head;
    let n = dims[0] as usize;
    if !(h > 0.0 && r0 > 0.0) || ((n - 1) as f64 * h - 2.0 * r_box).abs() > 1e-9 * r_box {
        return Err(Error::Snapshot(format!(
            "inconsistent geometry n={n}, h={h}, R={r_box}"
        )));
    }
    let total = n * n * n;
    let mut data = vec![0u8; 16 * total];
    r.read_exact(&mut data)
        .map_err(|e| Error::Snapshot(format!("body: {e}")))?;
    let vals: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    Ok(ScalarField3D {
        n,
        h,
        r0,
        r_box,
        phi: vals[..total].to_vec(),
        u: vals[total..].to_vec(),
        residual: f64::NAN,
        iterations: 0,
        source: None,
    })
}
