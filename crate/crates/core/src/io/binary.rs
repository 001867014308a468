//! Little-endian record reading with byte-offset diagnostics.

use std::io::Cursor;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::{Error, Result};

pub(crate) struct Reader<'a> {
    format: &'static str,
    cur: Cursor<&'a [u8]>,
}

impl<'a> Reader<'a> {
    pub fn new(format: &'static str, bytes: &'a [u8]) -> Self {
        Reader {
            format,
            cur: Cursor::new(bytes),
        }
    }

    pub fn offset(&self) -> u64 {
        self.cur.position()
    }

    pub fn error(&self, msg: impl Into<String>) -> Error {
        Error::Format {
            format: self.format,
            offset: self.offset(),
            msg: msg.into(),
        }
    }

    fn truncated(&mut self, at: u64, want: usize) -> Error {
        self.cur.set_position(at);
        self.error(format!("truncated: needed {want} more bytes"))
    }

    pub fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let mut m = [0u8; 4];
        for b in &mut m {
            *b = self.u8()?;
        }
        if &m != expected {
            self.cur.set_position(0);
            return Err(self.error(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&m),
                String::from_utf8_lossy(expected)
            )));
        }
        Ok(())
    }

    pub fn version(&mut self, expected: u32) -> Result<()> {
        let at = self.offset();
        let v = self.u32()?;
        if v != expected {
            self.cur.set_position(at);
            return Err(self.error(format!("unsupported version {v}, expected {expected}")));
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        let at = self.offset();
        self.cur.read_u8().map_err(|_| self.truncated(at, 1))
    }

    pub fn u32(&mut self) -> Result<u32> {
        let at = self.offset();
        self.cur
            .read_u32::<LittleEndian>()
            .map_err(|_| self.truncated(at, 4))
    }

    pub fn u64(&mut self) -> Result<u64> {
        let at = self.offset();
        self.cur
            .read_u64::<LittleEndian>()
            .map_err(|_| self.truncated(at, 8))
    }

    pub fn f64(&mut self) -> Result<f64> {
        let at = self.offset();
        self.cur
            .read_f64::<LittleEndian>()
            .map_err(|_| self.truncated(at, 8))
    }

    /// Reads a length prefix and checks that at least `len * elem_size`
    /// bytes remain, so corrupt counts fail before allocating.
    pub fn len(&mut self, elem_size: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        let remaining =
            self.cur.get_ref().len() as u64 - self.offset().min(self.cur.get_ref().len() as u64);
        if (n as u64) * (elem_size as u64) > remaining {
            let at = self.offset();
            return Err(self.truncated(at, n * elem_size));
        }
        Ok(n)
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn finish(&self) -> Result<()> {
        let total = self.cur.get_ref().len() as u64;
        if self.offset() != total {
            return Err(self.error(format!("{} trailing bytes", total - self.offset())));
        }
        Ok(())
    }
}

/// Writing into a `Vec` cannot fail, so these helpers swallow the `io::Result`.
pub(crate) trait Put {
    fn put_u8(&mut self, v: u8);
    fn put_u32(&mut self, v: u32);
    fn put_u64(&mut self, v: u64);
    fn put_f64(&mut self, v: f64);
}

impl Put for Vec<u8> {
    fn put_u8(&mut self, v: u8) {
        self.push(v);
    }

    fn put_u32(&mut self, v: u32) {
        let _ = self.write_u32::<LittleEndian>(v);
    }

    fn put_u64(&mut self, v: u64) {
        let _ = self.write_u64::<LittleEndian>(v);
    }

    fn put_f64(&mut self, v: f64) {
        let _ = self.write_f64::<LittleEndian>(v);
    }
}

pub(crate) fn checked_u32(what: &str, n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::input(format!("{what} count {n} does not fit in 32 bits")))
}
