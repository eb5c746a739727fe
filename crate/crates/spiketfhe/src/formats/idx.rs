//! IDX image and label files (the MNIST distribution format), uncompressed.

use std::path::Path;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub images: Vec<Vec<u8>>,
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Format("truncated IDX header".into()))
}

pub fn parse_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Format(format!("IDX image magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}")));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() != count * size {
        return Err(Error::Format(format!("IDX holds {} pixel bytes, expected {}", body.len(), count * size)));
    }
    let images = if size == 0 { vec![Vec::new(); count] } else { body.chunks_exact(size).map(<[u8]>::to_vec).collect() };
    Ok(IdxImages { rows, cols, images })
}

pub fn parse_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABELS_MAGIC {
        return Err(Error::Format(format!("IDX label magic {magic:#010x}, expected {LABELS_MAGIC:#010x}")));
    }
    let count = be_u32(bytes, 4)? as usize;
    let body = &bytes[8..];
    if body.len() != count {
        return Err(Error::Format(format!("IDX holds {} labels, header says {count}", body.len())));
    }
    Ok(body.to_vec())
}

pub fn images_to_bytes(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.images.len() * images.rows * images.cols);
    for v in [IMAGES_MAGIC, images.images.len() as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in &images.images {
        out.extend_from_slice(img);
    }
    out
}

pub fn labels_to_bytes(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub fn read_images(path: &Path) -> Result<IdxImages> {
    parse_images(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn read_labels(path: &Path) -> Result<Vec<u8>> {
    parse_labels(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
