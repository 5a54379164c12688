//! Flat binary parameter container.
//!
//! Layout: magic `DBSC`, version `u32` LE, then per-tensor records:
//! name length `u32` LE, UTF-8 name, rank `u32` LE, dims as `u64` LE each,
//! and the row-major payload as little-endian `f64`. Records run to EOF.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, ArrayViewD, IxDyn};

use crate::error::{NnError, Result};
use crate::scalar::Scalar;
use crate::tensor::TensorSet;

const MAGIC: &[u8; 4] = b"DBSC";
const VERSION: u32 = 1;

pub fn save<S: Scalar, W: Write>(mut w: W, tensors: &[(String, ArrayViewD<'_, S>)]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for (name, t) in tensors {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&(t.ndim() as u32).to_le_bytes())?;
        for d in t.shape() {
            w.write_all(&(*d as u64).to_le_bytes())?;
        }
        for v in t.iter() {
            w.write_all(&crate::scalar::lower(*v).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn load<S: Scalar, R: Read>(mut r: R) -> Result<Vec<(String, ArrayD<S>)>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| NnError::Checkpoint("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(NnError::Checkpoint(format!(
            "bad magic {:?}, expected \"DBSC\"",
            magic
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(NnError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }

    let mut out = Vec::new();
    loop {
        let mut len_buf = [0u8; 4];
        match r.read(&mut len_buf)? {
            0 => break,
            4 => {}
            n => {
                // partial read at a record boundary: pull the rest or fail
                r.read_exact(&mut len_buf[n..])
                    .map_err(|_| NnError::Checkpoint("truncated record header".into()))?;
            }
        }
        let name_len = u32::from_le_bytes(len_buf) as usize;
        let mut name_buf = vec![0u8; name_len];
        r.read_exact(&mut name_buf)
            .map_err(|_| NnError::Checkpoint("truncated tensor name".into()))?;
        let name = String::from_utf8(name_buf)
            .map_err(|_| NnError::Checkpoint("tensor name is not UTF-8".into()))?;
        let rank = read_u32(&mut r)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(read_u64(&mut r)? as usize);
        }
        let n: usize = dims.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut buf = [0u8; 8];
        for _ in 0..n {
            r.read_exact(&mut buf)
                .map_err(|_| NnError::Checkpoint(format!("truncated payload for `{name}`")))?;
            data.push(crate::scalar::c::<S>(f64::from_le_bytes(buf)));
        }
        let arr = ArrayD::from_shape_vec(IxDyn(&dims), data)
            .map_err(|e| NnError::Checkpoint(format!("bad shape for `{name}`: {e}")))?;
        out.push((name, arr));
    }
    Ok(out)
}

pub fn save_path<S: Scalar>(
    path: impl AsRef<Path>,
    tensors: &[(String, ArrayViewD<'_, S>)],
) -> Result<()> {
    let f = File::create(path)?;
    save(BufWriter::new(f), tensors)
}

pub fn load_path<S: Scalar>(path: impl AsRef<Path>) -> Result<Vec<(String, ArrayD<S>)>> {
    let f = File::open(path)?;
    load(BufReader::new(f))
}

/// Copy loaded tensors into `target` by name; every target tensor must be
/// present with a matching shape.
pub fn assign_into<S: Scalar>(
    loaded: &[(String, ArrayD<S>)],
    target: &mut impl TensorSet<S>,
) -> Result<()> {
    for (name, mut dst) in target.tensors_mut() {
        let src = loaded
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| NnError::Checkpoint(format!("missing tensor `{name}`")))?;
        if src.1.shape() != dst.shape() {
            return Err(NnError::dim(
                "checkpoint tensor shape",
                format!("{:?}", dst.shape()),
                format!("`{name}` {:?}", src.1.shape()),
            ));
        }
        dst.assign(&src.1);
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| NnError::Checkpoint("truncated u32".into()))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)
        .map_err(|_| NnError::Checkpoint("truncated u64".into()))?;
    Ok(u64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn roundtrip_preserves_names_shapes_and_values() {
        let a = array![[1.0f64, 2.5], [-3.0, 0.0]].into_dyn();
        let b = array![9.0f64, -0.125].into_dyn();
        let tensors = vec![("layer/w".to_string(), a.view()), ("layer/b".to_string(), b.view())];
        let mut buf = Vec::new();
        save(&mut buf, &tensors).unwrap();
        let loaded = load::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].0, "layer/w");
        assert_eq!(loaded[0].1, a);
        assert_eq!(loaded[1].0, "layer/b");
        assert_eq!(loaded[1].1, b);
    }

    #[test]
    fn bad_magic_is_rejected() {
        let buf = b"NOPE\x01\x00\x00\x00".to_vec();
        assert!(matches!(
            load::<f64, _>(buf.as_slice()),
            Err(NnError::Checkpoint(_))
        ));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let a = array![1.0f64, 2.0].into_dyn();
        let mut buf = Vec::new();
        save(&mut buf, &[("t".to_string(), a.view())]).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(matches!(
            load::<f64, _>(buf.as_slice()),
            Err(NnError::Checkpoint(_))
        ));
    }
}
