//! Pairwise signs `ε_ij` of read-once formulas.
//!
//! For each pair `(i, j)` every other variable is replaced by `X` or `∅` in
//! all possible ways and the result is reduced to the two-variable algebra.
//! Results that do not depend on both `x_i` and `x_j` are discarded; all
//! remaining results must coincide with one of `x_i ∩ x_j`, `x_i ∖ x_j`,
//! `x_j ∖ x_i` or `x_i ∪ x_j`. The sign is `-1` for the intersection and
//! `+1` otherwise.

use crate::error::{Error, Result};
use crate::expr::BoolExpr;

// Two-variable atom sets as 4-bit masks; bit b is the atom whose excluded set
// has bit 0 = "outside x_i" and bit 1 = "outside x_j".
const XI: u8 = 0b0101;
const XJ: u8 = 0b0011;
const INTER: u8 = XI & XJ;
const XI_MINUS_XJ: u8 = XI & !XJ & 0xF;
const XJ_MINUS_XI: u8 = XJ & !XI & 0xF;
const UNION: u8 = XI | XJ;

/// Signs for all pairs `1 ≤ i < j ≤ n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    signs: Vec<i8>,
}

impl SignMatrix {
    /// Uniform signs, useful for hand-built hypotheses.
    pub fn uniform(n: usize, sign: i8) -> Self {
        SignMatrix {
            n,
            signs: vec![sign; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j && j < self.n, "pair ({i},{j}) out of range");
        // row-major upper triangle over 0-based positions
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Sign of the pair at 0-based positions `i != j`.
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.signs[self.slot(i, j)]
    }

    /// `((i, j), ε_ij)` with 0-based `i < j`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), i8)> + '_ {
        (0..self.n)
            .flat_map(move |i| (i + 1..self.n).map(move |j| (i, j)))
            .map(move |(i, j)| ((i, j), self.get(i, j)))
    }
}

/// Checks that `expr` uses only `∪ ∩ ∖` and each of `x1..xn` exactly once,
/// returning `n`.
pub fn check_read_once(expr: &BoolExpr) -> Result<usize> {
    fn walk(e: &BoolExpr) -> Result<()> {
        match e {
            BoolExpr::Var(_) => Ok(()),
            BoolExpr::Union(a, b) | BoolExpr::Inter(a, b) | BoolExpr::Diff(a, b) => {
                walk(a)?;
                walk(b)
            }
            BoolExpr::Universe => Err(Error::NotReadOnce("uses the constant X".into())),
            BoolExpr::Empty => Err(Error::NotReadOnce("uses the constant E".into())),
            BoolExpr::Compl(_) => Err(Error::NotReadOnce("uses complement".into())),
        }
    }
    walk(expr)?;
    let mut vars = Vec::new();
    expr.collect_vars(&mut vars);
    let n = expr.max_var() as usize;
    let mut seen = vec![0usize; n + 1];
    for v in vars {
        seen[v as usize] += 1;
    }
    for (i, &count) in seen.iter().enumerate().skip(1) {
        if count != 1 {
            return Err(Error::NotReadOnce(format!("x{i} occurs {count} times")));
        }
    }
    if n > crate::algebra::MAX_VARS {
        return Err(Error::VariableCount(n));
    }
    Ok(n)
}

fn eval_pair(e: &BoolExpr, i: usize, j: usize, others: u32) -> u8 {
    match e {
        BoolExpr::Var(v) => {
            let p = *v as usize - 1;
            if p == i {
                XI
            } else if p == j {
                XJ
            } else if others >> p & 1 == 1 {
                0xF
            } else {
                0
            }
        }
        BoolExpr::Union(a, b) => eval_pair(a, i, j, others) | eval_pair(b, i, j, others),
        BoolExpr::Inter(a, b) => eval_pair(a, i, j, others) & eval_pair(b, i, j, others),
        BoolExpr::Diff(a, b) => eval_pair(a, i, j, others) & !eval_pair(b, i, j, others) & 0xF,
        BoolExpr::Universe => 0xF,
        BoolExpr::Empty => 0,
        BoolExpr::Compl(a) => !eval_pair(a, i, j, others) & 0xF,
    }
}

fn depends_on(g: u8, flip: u8) -> bool {
    (0..4u8).any(|b| (g >> b & 1) != (g >> (b ^ flip) & 1))
}

/// Computes `ε_ij` for every pair of a read-once formula.
pub fn epsilon_signs(expr: &BoolExpr) -> Result<SignMatrix> {
    let n = check_read_once(expr)?;
    let mut matrix = SignMatrix::uniform(n, 0);
    for i in 0..n {
        for j in i + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            let mut survivor: Option<u8> = None;
            for choice in 0u32..(1 << rest.len()) {
                let others = rest
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| choice >> bit & 1 == 1)
                    .fold(0u32, |acc, (_, &k)| acc | 1 << k);
                let g = eval_pair(expr, i, j, others);
                if !(depends_on(g, 1) && depends_on(g, 2)) {
                    continue;
                }
                match survivor {
                    None => survivor = Some(g),
                    Some(s) if s == g => {}
                    Some(_) => {
                        return Err(Error::SignStructure {
                            i: i + 1,
                            j: j + 1,
                            reason: "substitutions disagree".into(),
                        })
                    }
                }
            }
            let sign = match survivor {
                Some(INTER) => -1,
                Some(XI_MINUS_XJ | XJ_MINUS_XI | UNION) => 1,
                Some(g) => {
                    return Err(Error::SignStructure {
                        i: i + 1,
                        j: j + 1,
                        reason: format!("reduced form {g:04b} is not one of the four normal forms"),
                    })
                }
                None => {
                    return Err(Error::SignStructure {
                        i: i + 1,
                        j: j + 1,
                        reason: "no substitution depends on both variables".into(),
                    })
                }
            };
            let slot = matrix.slot(i, j);
            matrix.signs[slot] = sign;
        }
    }
    Ok(matrix)
}
