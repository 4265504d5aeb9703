//! First Betti number by two independent routes.

use crate::error::{Error, Result};
use crate::geometry::dec::{build_dec, DecOperators, Incidence};
use crate::geometry::mesh::TriangleMesh;
use crate::measure::{self_adjoint_spectrum, zero_count};

/// The Mersenne prime `2⁶¹ - 1`. Surface boundary matrices have no torsion,
/// so their rank modulo a prime equals their rational rank.
const PRIME: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        exp >>= 1;
    }
    acc
}

fn inverse(a: u64) -> u64 {
    pow_mod(a, PRIME - 2)
}

/// `row - factor · pivot`; both sparse and sorted by column.
fn eliminate(row: &[(usize, u64)], pivot: &[(usize, u64)], factor: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < pivot.len() {
        let take_row = j == pivot.len() || (i < row.len() && row[i].0 < pivot[j].0);
        let take_pivot = i == row.len() || (j < pivot.len() && pivot[j].0 < row[i].0);
        if take_row {
            out.push(row[i]);
            i += 1;
        } else if take_pivot {
            let v = mul_mod(factor, pivot[j].1);
            out.push((pivot[j].0, (PRIME - v) % PRIME));
            j += 1;
        } else {
            let v = (row[i].1 + PRIME - mul_mod(factor, pivot[j].1)) % PRIME;
            if v != 0 {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of an integer incidence matrix over `GF(2⁶¹ - 1)` by sparse row
/// reduction.
pub fn modular_rank(m: &Incidence) -> usize {
    let mut rows: Vec<Vec<(usize, u64)>> = vec![Vec::new(); m.rows];
    for &(r, c, s) in &m.entries {
        rows[r].push((c, if s > 0 { s as u64 } else { PRIME - (-s) as u64 }));
    }
    // Pivot rows, normalized so the leading entry is 1.
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; m.cols];
    let mut rank = 0;
    for mut row in rows {
        row.sort_unstable_by_key(|e| e.0);
        while let Some(&(lead, value)) = row.first() {
            match &pivots[lead] {
                Some(p) => row = eliminate(&row, p, value),
                None => {
                    let inv = inverse(value);
                    pivots[lead] = Some(row.iter().map(|&(c, v)| (c, mul_mod(v, inv))).collect());
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// `b₁ = E - rank d0 - rank d1`.
pub fn betti1_homology(dec: &DecOperators) -> usize {
    dec.edge_count() - modular_rank(&dec.d0) - modular_rank(&dec.d1)
}

/// `dim ker Δ¹` under the rank rule.
pub fn betti1_hodge(dec: &DecOperators) -> Result<usize> {
    Ok(zero_count(&self_adjoint_spectrum(&dec.laplacian1())?))
}

/// Both values of `b₁`, computed independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Betti1 {
    pub hodge: usize,
    pub homology: usize,
}

impl Betti1 {
    pub fn agree(&self) -> bool {
        self.hodge == self.homology
    }
}

pub fn betti1_both(dec: &DecOperators) -> Result<Betti1> {
    Ok(Betti1 {
        hodge: betti1_hodge(dec)?,
        homology: betti1_homology(dec),
    })
}

/// `b₁` of a mesh; fails if the two methods disagree.
pub fn betti1_oracle(mesh: &TriangleMesh) -> Result<usize> {
    let b = betti1_both(&build_dec(mesh)?)?;
    if b.agree() {
        Ok(b.hodge)
    } else {
        Err(Error::OracleDisagreement {
            hodge: b.hodge,
            homology: b.homology,
        })
    }
}
