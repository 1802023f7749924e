//! Canonical length-prefixed byte encoding.
//!
//! Every signed or hashed payload (statements, transactions, attestation
//! memos) is a flat sequence of chunks: 4-byte big-endian length followed by
//! the value bytes, fields in declared order, integers fixed-width big-endian.
//! Field-equal values always encode to identical bytes.

use crate::error::CryptoError;

#[derive(Default)]
pub struct CanonWriter {
    buf: Vec<u8>,
}

impl CanonWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn chunk(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.chunk(s.as_bytes())
    }

    pub fn uint(&mut self, v: u64) -> &mut Self {
        self.chunk(&v.to_be_bytes())
    }

    pub fn byte(&mut self, b: u8) -> &mut Self {
        self.chunk(&[b])
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct CanonReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> CanonReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn chunk(&mut self) -> Result<&'a [u8], CryptoError> {
        let header_end = self.pos.checked_add(4).filter(|&end| end <= self.data.len());
        let Some(header_end) = header_end else {
            return Err(CryptoError::BadEncoding("truncated length prefix".into()));
        };
        let mut len_bytes = [0u8; 4];
        len_bytes.copy_from_slice(&self.data[self.pos..header_end]);
        let len = u32::from_be_bytes(len_bytes) as usize;
        let end = header_end.checked_add(len).filter(|&end| end <= self.data.len());
        let Some(end) = end else {
            return Err(CryptoError::BadEncoding("truncated chunk".into()));
        };
        self.pos = end;
        Ok(&self.data[header_end..end])
    }

    pub fn text(&mut self) -> Result<String, CryptoError> {
        let bytes = self.chunk()?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| CryptoError::BadEncoding("chunk is not utf-8".into()))
    }

    pub fn uint(&mut self) -> Result<u64, CryptoError> {
        let bytes = self.chunk()?;
        let arr: [u8; 8] = bytes
            .try_into()
            .map_err(|_| CryptoError::BadEncoding("integer chunk is not 8 bytes".into()))?;
        Ok(u64::from_be_bytes(arr))
    }

    pub fn byte(&mut self) -> Result<u8, CryptoError> {
        let bytes = self.chunk()?;
        if bytes.len() != 1 {
            return Err(CryptoError::BadEncoding("byte chunk is not 1 byte".into()));
        }
        Ok(bytes[0])
    }

    /// Fails unless the whole input was consumed.
    pub fn expect_end(&self) -> Result<(), CryptoError> {
        if self.pos == self.data.len() {
            Ok(())
        } else {
            Err(CryptoError::BadEncoding("trailing bytes".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut w = CanonWriter::new();
        w.text("hello").uint(42).byte(7).chunk(b"");
        let bytes = w.finish();

        let mut r = CanonReader::new(&bytes);
        assert_eq!(r.text().unwrap(), "hello");
        assert_eq!(r.uint().unwrap(), 42);
        assert_eq!(r.byte().unwrap(), 7);
        assert_eq!(r.chunk().unwrap(), b"");
        r.expect_end().unwrap();
    }

    #[test]
    fn truncated_input_rejected() {
        let mut w = CanonWriter::new();
        w.text("hello");
        let bytes = w.finish();
        let mut r = CanonReader::new(&bytes[..bytes.len() - 1]);
        assert!(r.text().is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut w = CanonWriter::new();
        w.uint(1);
        let mut bytes = w.finish();
        bytes.push(0);
        let mut r = CanonReader::new(&bytes);
        r.uint().unwrap();
        assert!(r.expect_end().is_err());
    }
}
