//! Binary MPS checkpoints.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "CMPSCKPT"
//! version    u32      1
//! n          u64      number of sites
//! chi_max    u64      bond cap (u64::MAX when unbounded)
//! center     i64      orthogonality center, -1 when unknown
//! bonds      (n+1) × u64
//! tensors    for each site, row-major (left, phys, right), each entry re f64 then im f64
//! ```

use std::io::{Read, Write};

use ndarray::Array3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

use super::Mps;

const MAGIC: &[u8; 8] = b"CMPSCKPT";
const VERSION: u32 = 1;

pub fn write_mps<W: Write>(m: &Mps, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(m.n() as u64).to_le_bytes())?;
    let chi = if m.chi_max() == usize::MAX { u64::MAX } else { m.chi_max() as u64 };
    w.write_all(&chi.to_le_bytes())?;
    let center = m.center().map(|c| c as i64).unwrap_or(-1);
    w.write_all(&center.to_le_bytes())?;
    for d in m.bond_dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for t in m.tensors() {
        for x in t.iter() {
            w.write_all(&x.re.to_le_bytes())?;
            w.write_all(&x.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn bad(msg: &str) -> Error {
    Error::InvalidArgument(format!("checkpoint: {msg}"))
}

pub fn read_mps<R: Read>(mut r: R) -> Result<Mps> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut v = [0u8; 4];
    r.read_exact(&mut v)?;
    if u32::from_le_bytes(v) != VERSION {
        return Err(bad("unsupported version"));
    }
    let n = read_u64(&mut r)? as usize;
    if n == 0 || n > 1 << 20 {
        return Err(bad("implausible site count"));
    }
    let chi = read_u64(&mut r)?;
    let center = read_u64(&mut r)? as i64;
    let mut bonds = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        bonds.push(read_u64(&mut r)? as usize);
    }
    let mut tensors = Vec::with_capacity(n);
    for k in 0..n {
        let (dl, dr) = (bonds[k], bonds[k + 1]);
        let len = dl.checked_mul(2 * dr).filter(|&l| l <= 1 << 28).ok_or_else(|| bad("bond too large"))?;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            let re = f64::from_bits(read_u64(&mut r)?);
            let im = f64::from_bits(read_u64(&mut r)?);
            data.push(C64::new(re, im));
        }
        tensors.push(Array3::from_shape_vec((dl, 2, dr), data).map_err(|_| bad("shape"))?);
    }
    let mut m = Mps::from_tensors(tensors)?;
    m.set_chi_max(if chi == u64::MAX { usize::MAX } else { chi as usize });
    if center >= 0 {
        if center as usize >= n {
            return Err(bad("center out of range"));
        }
        m.set_center(Some(center as usize));
    }
    Ok(m)
}

pub fn save(m: &Mps, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_mps(m, std::io::BufWriter::new(f))
}

pub fn load(path: &std::path::Path) -> Result<Mps> {
    let f = std::fs::File::open(path)?;
    read_mps(std::io::BufReader::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = Mps::random(7, 5, &mut rng);
        let mut buf = Vec::new();
        write_mps(&m, &mut buf).unwrap();
        assert_eq!(&buf[..8], b"CMPSCKPT");
        let back = read_mps(buf.as_slice()).unwrap();
        assert_eq!(back.center(), m.center());
        assert_eq!(back.chi_max(), 5);
        assert_eq!(back.bond_dims(), m.bond_dims());
        for (a, b) in back.tensors().iter().zip(m.tensors()) {
            assert_eq!(a, b);
        }
        let mut broken = buf.clone();
        broken[0] = b'X';
        assert!(read_mps(broken.as_slice()).is_err());
        assert!(read_mps(&buf[..buf.len() - 3]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.ckpt");
        let m = Mps::zero_state(3);
        save(&m, &path).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back.tensors(), m.tensors());
    }
}
