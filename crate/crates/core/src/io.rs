//! Lossless binary storage of grid fields and CSV export.
//!
//! Binary layout, all little endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `NLWF6\0v1` |
//! | 8 | `n1` as `u64` |
//! | 8 | `n2` as `u64` |
//! | 8 | `h` as `f64` |
//! | 8 | `k` as `f64` |
//! | 48·n1·n2 | components 1..6, each `n1·n2` values, row-major in `(i, j)` |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field6, Grid2D, RadialProfile};

const MAGIC: &[u8; 8] = b"NLWF6\0v1";

pub fn write_field6(w: &mut impl Write, u: &Field6<f64>, k: f64) -> Result<()> {
    let g = u.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.n1() as u64).to_le_bytes())?;
    w.write_all(&(g.n2() as u64).to_le_bytes())?;
    w.write_all(&g.h().to_le_bytes())?;
    w.write_all(&k.to_le_bytes())?;
    let mut buf = Vec::with_capacity(48 * g.len());
    for c in &u.comps {
        for x in c {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Returns the field and the `k` it was stored with.
pub fn read_field6(r: &mut impl Read) -> Result<(Field6<f64>, f64)> {
    let mut head = [0u8; 40];
    r.read_exact(&mut head).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if &head[..8] != MAGIC {
        return Err(Error::Format("not a Field6 file".into()));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&head[8 * i..8 * i + 8]).expect("8 bytes");
    let n1 = u64::from_le_bytes(word(1)) as usize;
    let n2 = u64::from_le_bytes(word(2)) as usize;
    let h = f64::from_le_bytes(word(3));
    let k = f64::from_le_bytes(word(4));
    let g = Grid2D::new(n1, n2, h)?;
    let n = g.len();
    let mut body = vec![0u8; 48 * n];
    r.read_exact(&mut body).map_err(|e| Error::Format(format!("truncated body: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    let vals: Vec<f64> = body.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    let comps = std::array::from_fn(|c| vals[c * n..(c + 1) * n].to_vec());
    Ok((Field6::from_comps(g, comps)?, k))
}

pub fn save_field6(path: &Path, u: &Field6<f64>, k: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field6(&mut f, u, k)?;
    f.flush()?;
    Ok(())
}

pub fn load_field6(path: &Path) -> Result<(Field6<f64>, f64)> {
    read_field6(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One row per grid point: `x1,x2,U1,U2,U3,Ut1,Ut2,Ut3`.
pub fn write_field_csv(w: &mut impl Write, u: &Field6<f64>) -> Result<()> {
    writeln!(w, "x1,x2,U1,U2,U3,Ut1,Ut2,Ut3")?;
    let g = u.grid();
    for p in 0..g.len() {
        let (x, y) = g.point(p);
        let v = u.at(p);
        writeln!(w, "{x:e},{y:e},{:e},{:e},{:e},{:e},{:e},{:e}", v[0], v[1], v[2], v[3], v[4], v[5])?;
    }
    Ok(())
}

/// Columns sampled on the radii of the first profile.
pub fn write_profiles_csv(w: &mut impl Write, names: &[&str], profiles: &[&RadialProfile<f64>]) -> Result<()> {
    let Some(first) = profiles.first() else {
        return Err(Error::Format("no profiles to write".into()));
    };
    if names.len() != profiles.len() {
        return Err(Error::Format("one name per profile".into()));
    }
    writeln!(w, "r,{}", names.join(","))?;
    for &r in &first.r {
        let row: Vec<String> = profiles.iter().map(|p| format!("{:e}", p.eval(r))).collect();
        writeln!(w, "{r:e},{}", row.join(","))?;
    }
    Ok(())
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
