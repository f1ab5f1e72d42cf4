//! MSB-first bit packing.

/// Accumulates fields most-significant bit first into whole bytes.
#[derive(Debug, Default)]
pub struct BitWriter {
    buf: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, high bit first.
    pub fn write_bits(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        if width == 0 {
            return;
        }
        let masked = (value as u64) & ((1u64 << width) - 1);
        self.acc = (self.acc << width) | masked;
        self.filled += width;
        while self.filled >= 8 {
            self.filled -= 8;
            self.buf.push((self.acc >> self.filled) as u8);
        }
        self.acc &= (1u64 << self.filled) - 1;
    }

    /// Pads the final partial byte with zero bits and returns the buffer.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.buf.push((self.acc << (8 - self.filled)) as u8);
        }
        self.buf
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0 }
    }

    /// Reads `width` bits; `None` once the data is exhausted.
    pub fn read_bits(&mut self, width: u32) -> Option<u32> {
        debug_assert!(width <= 32);
        if self.pos + width as usize > self.data.len() * 8 {
            return None;
        }
        let mut out = 0u32;
        let mut remaining = width;
        while remaining > 0 {
            let byte = self.data[self.pos / 8];
            let offset = (self.pos % 8) as u32;
            let take = remaining.min(8 - offset);
            let chunk = (byte >> (8 - offset - take)) & ((1u16 << take) - 1) as u8;
            out = (out << take) | chunk as u32;
            remaining -= take;
            self.pos += take as usize;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn msb_first_layout() {
        let mut w = BitWriter::new();
        w.write_bits(0b1, 1);
        w.write_bits(0b00101, 5);
        w.write_bits(0b11, 2);
        w.write_bits(0b101, 3);
        assert_eq!(w.finish(), vec![0b1001_0111, 0b1010_0000]);
    }

    #[test]
    fn mixed_width_roundtrip() {
        let fields = [(1u32, 1u32), (0x1F, 5), (0x7FFFFF, 23), (0, 0), (0xDEADBEEF, 32), (3, 7)];
        let mut w = BitWriter::new();
        for &(v, width) in &fields {
            w.write_bits(v, width);
        }
        let bytes = w.finish();
        assert_eq!(bytes.len(), (1 + 5 + 23 + 32 + 7usize).div_ceil(8));
        let mut r = BitReader::new(&bytes);
        for &(v, width) in &fields {
            assert_eq!(r.read_bits(width), Some(v));
        }
    }

    #[test]
    fn read_past_end() {
        let mut r = BitReader::new(&[0xFF]);
        assert_eq!(r.read_bits(6), Some(0x3F));
        assert_eq!(r.read_bits(3), None);
        assert_eq!(r.read_bits(2), Some(0b11));
    }
}
