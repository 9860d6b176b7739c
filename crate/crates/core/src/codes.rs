//! Constructors for the small codes used throughout the crate, and the
//! shipped code-definition files they are checked against.

use crate::bits::BitVector;
use crate::code::{CssCode, Layout};
use crate::error::{Error, Result};
use crate::gf2::BinMatrix;
use crate::pauli::PauliOp;
use crate::toric;

/// Identifiers of the shipped code files.
pub const SHIPPED: [&str; 6] = [
    "bit-flip-3",
    "rotated-surface-5",
    "toric-3",
    "toric-5",
    "toric-7",
    "toric-9",
];

/// Raw text of a shipped code file.
pub fn shipped_text(id: &str) -> Option<&'static str> {
    Some(match id {
        "bit-flip-3" => include_str!("../codes/bit-flip-3.code"),
        "rotated-surface-5" => include_str!("../codes/rotated-surface-5.code"),
        "toric-3" => include_str!("../codes/toric-3.code"),
        "toric-5" => include_str!("../codes/toric-5.code"),
        "toric-7" => include_str!("../codes/toric-7.code"),
        "toric-9" => include_str!("../codes/toric-9.code"),
        _ => return None,
    })
}

/// Loads a shipped code from its file and attaches the planar layout of the
/// matching constructor when it has one.
pub fn load_shipped(id: &str) -> Result<CssCode> {
    let text = shipped_text(id).ok_or_else(|| Error::InvalidParameter(format!("unknown code {id:?}")))?;
    let code = CssCode::from_file_str(id, text)?;
    let layout = match id {
        "rotated-surface-5" => rotated_surface(5).layout().cloned(),
        _ => match id.strip_prefix("toric-") {
            Some(l) => toric::build_toric(l.parse().unwrap())?.layout().cloned(),
            None => None,
        },
    };
    match layout {
        Some(l) => code.with_layout(l),
        None => Ok(code),
    }
}

/// Three-qubit repetition code against bit flips: checks `Z0Z1`, `Z1Z2`.
pub fn bit_flip() -> CssCode {
    let n = 3;
    let hz = BinMatrix::from_rows(
        n,
        vec![BitVector::from_indices(n, [0, 1]), BitVector::from_indices(n, [1, 2])],
    );
    CssCode::new(
        "bit-flip-3",
        BinMatrix::zeros(0, n),
        hz,
        vec![PauliOp::x_type(BitVector::from_indices(n, [0, 1, 2]))],
        vec![PauliOp::z_type(BitVector::from_indices(n, [0]))],
    )
    .expect("bit-flip code is valid")
}

/// Rotated surface code of odd distance `d` on a `d x d` grid of data
/// qubits, qubit `(r, c)` at index `r * d + c`.
///
/// Checks sit on the corners `(r, c)` for `r, c in -1..d`, covering the up to
/// four data qubits `(r..=r+1, c..=c+1)`; X-type when `r + c` is even. Weight-2
/// X checks live on the top and bottom edges, Z checks on the left and right.
pub fn rotated_surface(d: usize) -> CssCode {
    assert!(d >= 3 && d % 2 == 1, "distance must be odd and at least 3");
    let n = d * d;
    let di = d as i64;
    let mut hx = Vec::new();
    let mut hz = Vec::new();
    let mut x_pos = Vec::new();
    let mut z_pos = Vec::new();
    for r in -1..di {
        for c in -1..di {
            let is_x = (r + c).rem_euclid(2) == 0;
            let interior = (0..di - 1).contains(&r) && (0..di - 1).contains(&c);
            let top_bottom = (r == -1 || r == di - 1) && (0..di - 1).contains(&c) && is_x;
            let left_right = (c == -1 || c == di - 1) && (0..di - 1).contains(&r) && !is_x;
            if !(interior || top_bottom || left_right) {
                continue;
            }
            let mut cells = Vec::new();
            for a in [r, r + 1] {
                for b in [c, c + 1] {
                    if (0..di).contains(&a) && (0..di).contains(&b) {
                        cells.push((a * di + b) as usize);
                    }
                }
            }
            let row = BitVector::from_indices(n, cells);
            let pos = (2 * r + 1, 2 * c + 1);
            if is_x {
                hx.push(row);
                x_pos.push(pos);
            } else {
                hz.push(row);
                z_pos.push(pos);
            }
        }
    }
    let lx = BitVector::from_indices(n, (0..d).map(|r| r * d));
    let lz = BitVector::from_indices(n, 0..d);
    let layout = Layout {
        qubits: (0..n).map(|q| (2 * (q / d) as i64, 2 * (q % d) as i64)).collect(),
        x_generators: x_pos,
        z_generators: z_pos,
        period: None,
    };
    CssCode::new(
        format!("rotated-surface-{d}"),
        BinMatrix::from_rows(n, hx),
        BinMatrix::from_rows(n, hz),
        vec![PauliOp::x_type(lx)],
        vec![PauliOp::z_type(lz)],
    )
    .and_then(|c| c.with_layout(layout))
    .expect("rotated surface code is valid")
}
