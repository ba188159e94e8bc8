//! Little-endian binary encoding helpers shared by the dataset and
//! checkpoint formats. Files carry a 4-byte magic, a u32 version, an
//! endianness tag byte, and CRC32 protection.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const ENDIAN_TAG_LE: u8 = 1;

#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn put_usize(&mut self, v: usize) {
        self.put_u64(v as u64);
    }
    pub fn put_f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn put_f64_slice(&mut self, vs: &[f64]) {
        self.put_usize(vs.len());
        for v in vs {
            self.put_f64(*v);
        }
    }
    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }
    /// Bools packed 8 per byte, LSB first.
    pub fn put_bools(&mut self, bits: &[bool]) {
        self.put_usize(bits.len());
        for chunk in bits.chunks(8) {
            let mut byte = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    byte |= 1 << i;
                }
            }
            self.buf.push(byte);
        }
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8], path: &str) -> Self {
        Self {
            buf,
            pos: 0,
            path: path.to_string(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format {
                path: self.path.clone(),
                reason: format!(
                    "truncated data: need {} bytes at offset {}, have {}",
                    n,
                    self.pos,
                    self.buf.len() - self.pos
                ),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn take_slice(&mut self, n: usize) -> Result<&'a [u8]> {
        self.take(n)
    }
    pub fn get_u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    pub fn get_u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn get_u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn get_usize(&mut self) -> Result<usize> {
        Ok(self.get_u64()? as usize)
    }
    pub fn get_f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn get_f64_vec(&mut self) -> Result<Vec<f64>> {
        let n = self.get_usize()?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.get_f64()?);
        }
        Ok(out)
    }
    pub fn get_bools(&mut self) -> Result<Vec<bool>> {
        let n = self.get_usize()?;
        let bytes = self.take(n.div_ceil(8))?;
        Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
    }

    pub fn finished(&self) -> bool {
        self.pos == self.buf.len()
    }
}

/// Write magic | version | endian tag | payload | crc32(payload).
pub fn write_file(path: &Path, magic: &[u8; 4], version: u32, payload: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(magic)?;
    f.write_all(&version.to_le_bytes())?;
    f.write_all(&[ENDIAN_TAG_LE])?;
    f.write_all(payload)?;
    f.write_all(&crc32fast::hash(payload).to_le_bytes())?;
    Ok(())
}

/// Read and verify a file written by [`write_file`]; returns the payload.
pub fn read_file(path: &Path, magic: &[u8; 4], version: u32) -> Result<Vec<u8>> {
    let display = path.display().to_string();
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 13 {
        return Err(Error::Format {
            path: display,
            reason: "file too short for header and CRC".into(),
        });
    }
    if &buf[..4] != magic {
        return Err(Error::Format {
            path: display,
            reason: format!("bad magic {:?}, expected {:?}", &buf[..4], magic),
        });
    }
    let got_version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if got_version != version {
        return Err(Error::Format {
            path: display,
            reason: format!("unsupported version {got_version}, expected {version}"),
        });
    }
    if buf[8] != ENDIAN_TAG_LE {
        return Err(Error::Format {
            path: display,
            reason: format!("unsupported endianness tag {}", buf[8]),
        });
    }
    let payload = &buf[9..buf.len() - 4];
    let stored_crc = u32::from_le_bytes(buf[buf.len() - 4..].try_into().unwrap());
    let crc = crc32fast::hash(payload);
    if crc != stored_crc {
        return Err(Error::Format {
            path: display,
            reason: format!("CRC mismatch: stored {stored_crc:#010x}, computed {crc:#010x}"),
        });
    }
    Ok(payload.to_vec())
}
