//! Zigzag reordering between natural (row-major) and frequency order.

/// `ZIGZAG_TO_NATURAL[k]` is the row-major index of zigzag position `k`.
pub const ZIGZAG_TO_NATURAL: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, //
    17, 24, 32, 25, 18, 11, 4, 5, //
    12, 19, 26, 33, 40, 48, 41, 34, //
    27, 20, 13, 6, 7, 14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, //
    29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, //
    53, 60, 61, 54, 47, 55, 62, 63,
];

/// `NATURAL_TO_ZIGZAG[n]` is the zigzag position of row-major index `n`.
pub const NATURAL_TO_ZIGZAG: [usize; 64] = {
    let mut inv = [0usize; 64];
    let mut k = 0;
    while k < 64 {
        inv[ZIGZAG_TO_NATURAL[k]] = k;
        k += 1;
    }
    inv
};

/// Reads a row-major 8x8 grid in zigzag order.
pub fn zigzag_scan<T: Copy>(grid: &[T; 64]) -> [T; 64] {
    std::array::from_fn(|k| grid[ZIGZAG_TO_NATURAL[k]])
}

/// Places a zigzag-ordered vector back into a row-major 8x8 grid.
pub fn zigzag_unscan<T: Copy>(vector: &[T; 64]) -> [T; 64] {
    std::array::from_fn(|n| vector[NATURAL_TO_ZIGZAG[n]])
}
