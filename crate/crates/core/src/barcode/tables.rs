//! EAN-13 symbol tables.
//!
//! Each digit pattern is 7 modules, stored MSB-first in the low 7 bits of a
//! byte; a set bit is a bar. Only the L table is written out. R is the
//! bitwise complement of L and G is R read backwards.

pub const SYMBOL_MODULES: usize = 95;

pub const START_GUARD: [bool; 3] = [true, false, true];
pub const MIDDLE_GUARD: [bool; 5] = [false, true, false, true, false];
pub const END_GUARD: [bool; 3] = [true, false, true];

pub const L_CODES: [u8; 10] = [
    0b0001101, 0b0011001, 0b0010011, 0b0111101, 0b0100011, 0b0110001, 0b0101111, 0b0111011,
    0b0110111, 0b0001011,
];

const fn complement7(bits: u8) -> u8 {
    !bits & 0x7F
}

const fn reverse7(bits: u8) -> u8 {
    let mut out = 0u8;
    let mut i = 0;
    while i < 7 {
        if bits & (1 << i) != 0 {
            out |= 1 << (6 - i);
        }
        i += 1;
    }
    out
}

const fn derive_r() -> [u8; 10] {
    let mut out = [0u8; 10];
    let mut d = 0;
    while d < 10 {
        out[d] = complement7(L_CODES[d]);
        d += 1;
    }
    out
}

const fn derive_g() -> [u8; 10] {
    let r = derive_r();
    let mut out = [0u8; 10];
    let mut d = 0;
    while d < 10 {
        out[d] = reverse7(r[d]);
        d += 1;
    }
    out
}

pub const R_CODES: [u8; 10] = derive_r();
pub const G_CODES: [u8; 10] = derive_g();

/// Odd parity is the L set, even parity is G (left half) or R (right half).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

/// Leading digit → parity of the six left-half digits.
pub const PARITY_TABLE: [[Parity; 6]; 10] = {
    use Parity::{Even as E, Odd as O};
    [
        [O, O, O, O, O, O],
        [O, O, E, O, E, E],
        [O, O, E, E, O, E],
        [O, O, E, E, E, O],
        [O, E, O, O, E, E],
        [O, E, E, O, O, E],
        [O, E, E, E, O, O],
        [O, E, O, E, O, E],
        [O, E, O, E, E, O],
        [O, E, E, O, E, O],
    ]
};

/// Module bits of a 7-bit pattern, leftmost first.
pub fn pattern_bits(bits: u8) -> [bool; 7] {
    std::array::from_fn(|i| bits & (1 << (6 - i)) != 0)
}

/// Run lengths of a 7-bit pattern, in modules. Every digit pattern has
/// exactly four runs.
pub fn pattern_runs(bits: u8) -> Vec<u8> {
    let modules = pattern_bits(bits);
    let mut runs = Vec::with_capacity(4);
    let mut current = modules[0];
    let mut len = 0u8;
    for &m in &modules {
        if m == current {
            len += 1;
        } else {
            runs.push(len);
            current = m;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

/// Run-length form of every digit pattern, indexed by digit.
#[derive(Debug, Clone)]
pub struct RunTables {
    pub l: [[u8; 4]; 10],
    pub g: [[u8; 4]; 10],
    pub r: [[u8; 4]; 10],
}

impl RunTables {
    pub fn build() -> Self {
        let runs4 = |codes: &[u8; 10]| -> [[u8; 4]; 10] {
            std::array::from_fn(|d| {
                let runs = pattern_runs(codes[d]);
                [runs[0], runs[1], runs[2], runs[3]]
            })
        };
        Self {
            l: runs4(&L_CODES),
            g: runs4(&G_CODES),
            r: runs4(&R_CODES),
        }
    }
}

/// The 95 module bits of a symbol for the given digits. The check digit is
/// not verified.
pub fn symbol_modules(digits: &[u8; 13]) -> [bool; SYMBOL_MODULES] {
    let mut out = [false; SYMBOL_MODULES];
    let mut pos = 0;
    let mut put = |bits: &[bool]| {
        out[pos..pos + bits.len()].copy_from_slice(bits);
        pos += bits.len();
    };
    put(&START_GUARD);
    let parity = PARITY_TABLE[digits[0] as usize];
    for (i, &d) in digits[1..7].iter().enumerate() {
        let code = match parity[i] {
            Parity::Odd => L_CODES[d as usize],
            Parity::Even => G_CODES[d as usize],
        };
        put(&pattern_bits(code));
    }
    put(&MIDDLE_GUARD);
    for &d in &digits[7..13] {
        put(&pattern_bits(R_CODES[d as usize]));
    }
    put(&END_GUARD);
    out
}

/// Checks the structural relations between the tables. Returns a
/// description of the first violated relation.
pub fn check_table_invariants() -> Result<(), String> {
    for d in 0..10 {
        let l = L_CODES[d];
        let runs = pattern_runs(l);
        if runs.len() != 4 {
            return Err(format!("L({d}) has {} runs", runs.len()));
        }
        if runs.iter().map(|&r| r as u32).sum::<u32>() != 7 {
            return Err(format!("L({d}) runs do not sum to 7"));
        }
        let bits = pattern_bits(l);
        if bits[0] || !bits[6] {
            return Err(format!("L({d}) must start white and end black"));
        }
        if l.count_ones() % 2 != 1 {
            return Err(format!("L({d}) has even bit parity"));
        }
        if R_CODES[d] != complement7(l) {
            return Err(format!("R({d}) is not the complement of L({d})"));
        }
        if G_CODES[d] != reverse7(R_CODES[d]) {
            return Err(format!("G({d}) is not the reversal of R({d})"));
        }
        if !R_CODES[d].count_ones().is_multiple_of(2) || !G_CODES[d].count_ones().is_multiple_of(2) {
            return Err(format!("G({d}) or R({d}) has odd bit parity"));
        }
    }
    for (a, entry) in PARITY_TABLE.iter().enumerate() {
        for (b, other) in PARITY_TABLE.iter().enumerate().skip(a + 1) {
            if entry == other {
                return Err(format!("parity entries {a} and {b} coincide"));
            }
        }
    }
    for (d, entry) in PARITY_TABLE.iter().enumerate() {
        if entry[0] != Parity::Odd {
            return Err(format!("parity entry {d} does not start odd"));
        }
        let evens = entry.iter().filter(|&&p| p == Parity::Even).count();
        if d > 0 && evens != 3 {
            return Err(format!("parity entry {d} has {evens} even flags"));
        }
    }
    Ok(())
}
