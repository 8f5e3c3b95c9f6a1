//! Binary STL.

use crate::mesh::TriMesh;
use thiserror::Error;

pub const STL_HEADER_TAG: &[u8] = b"mechforge";
const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

/// 80-byte header, little-endian `u32` count, then per triangle the normal
/// and three vertices as little-endian `f32` and a zero attribute word.
pub fn write_stl(mesh: &TriMesh) -> Vec<u8> {
    let n = mesh.triangles.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * n);
    out.extend_from_slice(STL_HEADER_TAG);
    out.resize(HEADER_LEN, 0);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for (t, nrm) in mesh.triangles.iter().zip(&mesh.normals) {
        for c in nrm {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for &i in t {
            for c in mesh.vertices[i as usize] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StlError {
    #[error("STL is {0} bytes, shorter than the 84-byte header")]
    TooShort(usize),
    #[error("STL declares {declared} triangles but is {len} bytes")]
    LengthMismatch { declared: u32, len: usize },
}

/// One facet as stored: normal then three corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StlFacet {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

/// Reads a binary STL written by [`write_stl`] (or any binary STL).
pub fn read_stl(bytes: &[u8]) -> Result<Vec<StlFacet>, StlError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(StlError::TooShort(bytes.len()));
    }
    let declared = u32::from_le_bytes(
        bytes[HEADER_LEN..HEADER_LEN + 4]
            .try_into()
            .expect("4 bytes"),
    );
    if bytes.len() != HEADER_LEN + 4 + RECORD_LEN * declared as usize {
        return Err(StlError::LengthMismatch {
            declared,
            len: bytes.len(),
        });
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let v3 = |o: usize| [f(o), f(o + 4), f(o + 8)];
    Ok(bytes[HEADER_LEN + 4..]
        .chunks_exact(RECORD_LEN)
        .enumerate()
        .map(|(k, _)| {
            let o = HEADER_LEN + 4 + k * RECORD_LEN;
            StlFacet {
                normal: v3(o),
                vertices: [v3(o + 12), v3(o + 24), v3(o + 36)],
            }
        })
        .collect())
}
