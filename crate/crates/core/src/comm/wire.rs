/// Fixed-width little-endian encoding of items moved by collectives.
///
/// Point indices travel as 4-byte integers, coordinates as 8-byte reals.
pub trait Wire: Copy {
    const WIDTH: usize;
    fn put(&self, out: &mut Vec<u8>);
    fn get(bytes: &[u8]) -> Self;
}

impl Wire for i32 {
    const WIDTH: usize = 4;
    fn put(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get(bytes: &[u8]) -> Self {
        i32::from_le_bytes(bytes[..4].try_into().unwrap())
    }
}

impl Wire for f64 {
    const WIDTH: usize = 8;
    fn put(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn get(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes[..8].try_into().unwrap())
    }
}

/// A `(rank, index)` pair, the 2-int item used for ownership bids and
/// remote point references. `(-1, -1)` means "no owner yet".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Owner {
    pub rank: i32,
    pub index: i32,
}

impl Owner {
    pub const NONE: Owner = Owner { rank: -1, index: -1 };

    pub fn new(rank: usize, index: usize) -> Self {
        Self {
            rank: rank as i32,
            index: index as i32,
        }
    }

    pub fn is_none(&self) -> bool {
        self.rank < 0
    }
}

impl Default for Owner {
    fn default() -> Self {
        Self::NONE
    }
}

impl Wire for Owner {
    const WIDTH: usize = 8;
    fn put(&self, out: &mut Vec<u8>) {
        self.rank.put(out);
        self.index.put(out);
    }
    fn get(bytes: &[u8]) -> Self {
        Owner {
            rank: i32::get(&bytes[..4]),
            index: i32::get(&bytes[4..8]),
        }
    }
}

pub fn encode<T: Wire>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::with_capacity(items.len() * T::WIDTH);
    for it in items {
        it.put(&mut out);
    }
    out
}

pub fn decode<T: Wire>(bytes: &[u8]) -> Vec<T> {
    bytes.chunks_exact(T::WIDTH).map(T::get).collect()
}
