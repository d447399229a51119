//! Moment polynomials: canonical normal forms and numeric evaluation.
//!
//! For a linear map `phi` the bracket `[n1,...,nk; a1,...,ak]` is the unique
//! multilinear family satisfying
//!
//! * applying `phi` raises every index by one, and
//! * a zero index splits the bracket into a product around that slot.
//!
//! The reduction strategy is fixed: split at the leftmost zero; otherwise
//! subtract the minimum index from every entry and wrap the result in one
//! batched `phi` power. Any strategy yields the same value; fixing one makes
//! normal forms canonical and rendering deterministic.

use crate::algebra::{CMatrix, Channel};
use crate::error::{Error, Result};
use crate::words::IndexTuple;

/// Normal-form expression tree for a moment polynomial.
///
/// `Phi` nodes never wrap `Phi` nodes directly (powers merge) and `Prod`
/// nodes never contain `Prod` nodes directly (products flatten).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MomentExpr {
    /// A reference to input slot `i` (the `i`-th name or matrix).
    Leaf(usize),
    /// `phi^power` applied to the child; `power >= 1`.
    Phi { power: u32, arg: Box<MomentExpr> },
    /// An ordered product of at least two factors.
    Prod(Vec<MomentExpr>),
}

fn make_phi(power: u32, arg: MomentExpr) -> MomentExpr {
    debug_assert!(power >= 1);
    match arg {
        MomentExpr::Phi { power: q, arg } => MomentExpr::Phi { power: power + q, arg },
        other => MomentExpr::Phi {
            power,
            arg: Box::new(other),
        },
    }
}

fn make_prod(parts: Vec<MomentExpr>) -> MomentExpr {
    let mut flat = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            MomentExpr::Prod(children) => flat.extend(children),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().expect("one element")
    } else {
        MomentExpr::Prod(flat)
    }
}

fn normal_form_slice(indices: &[u32], base: usize) -> MomentExpr {
    debug_assert!(!indices.is_empty());
    if indices.len() == 1 && indices[0] == 0 {
        return MomentExpr::Leaf(base);
    }
    if let Some(l) = indices.iter().position(|&n| n == 0) {
        let mut parts = Vec::with_capacity(3);
        if l > 0 {
            parts.push(normal_form_slice(&indices[..l], base));
        }
        parts.push(MomentExpr::Leaf(base + l));
        if l + 1 < indices.len() {
            parts.push(normal_form_slice(&indices[l + 1..], base + l + 1));
        }
        make_prod(parts)
    } else {
        let m = *indices.iter().min().expect("nonempty");
        let reduced: Vec<u32> = indices.iter().map(|&n| n - m).collect();
        // The recursion is well-founded: the total index sum strictly drops.
        debug_assert!(
            reduced.iter().map(|&n| n as u64).sum::<u64>()
                < indices.iter().map(|&n| n as u64).sum::<u64>()
        );
        make_phi(m, normal_form_slice(&reduced, base))
    }
}

/// The canonical normal form of the bracket with the given index tuple.
/// Leaves refer to argument slots `0..k`.
pub fn normal_form(indices: &IndexTuple) -> MomentExpr {
    normal_form_slice(indices.entries(), 0)
}

/// Renders an expression over the given slot names.
///
/// Grammar: `expr := atom | "phi(" expr ")" | "phi^" INT "(" expr ")" |
/// expr "*" expr` with left-associative `*`; `phi^1` prints as `phi`.
pub fn render(expr: &MomentExpr, names: &[&str]) -> String {
    match expr {
        MomentExpr::Leaf(i) => names[*i].to_string(),
        MomentExpr::Phi { power: 1, arg } => format!("phi({})", render(arg, names)),
        MomentExpr::Phi { power, arg } => format!("phi^{power}({})", render(arg, names)),
        MomentExpr::Prod(parts) => parts
            .iter()
            .map(|p| render(p, names))
            .collect::<Vec<_>>()
            .join("*"),
    }
}

/// Normal form rendered directly from an index tuple and slot names.
pub fn normal_form_string(indices: &IndexTuple, names: &[&str]) -> Result<String> {
    if indices.len() != names.len() {
        return Err(Error::LengthMismatch {
            indices: indices.len(),
            items: names.len(),
        });
    }
    Ok(render(&normal_form(indices), names))
}

fn check_args(indices: &IndexTuple, mats: &[CMatrix], phi: &Channel) -> Result<()> {
    if indices.len() != mats.len() {
        return Err(Error::LengthMismatch {
            indices: indices.len(),
            items: mats.len(),
        });
    }
    for m in mats {
        phi.check_elem(m)?;
    }
    Ok(())
}

fn eval_slice(indices: &[u32], mats: &[CMatrix], phi: &Channel) -> CMatrix {
    debug_assert_eq!(indices.len(), mats.len());
    if indices.len() == 1 && indices[0] == 0 {
        return mats[0].clone();
    }
    if let Some(l) = indices.iter().position(|&n| n == 0) {
        eval_around_zero(indices, mats, phi, l)
    } else {
        let m = *indices.iter().min().expect("nonempty");
        let reduced: Vec<u32> = indices.iter().map(|&n| n - m).collect();
        let inner = eval_slice(&reduced, mats, phi);
        phi.apply_power(m, &inner).expect("dimension already checked")
    }
}

fn eval_around_zero(indices: &[u32], mats: &[CMatrix], phi: &Channel, l: usize) -> CMatrix {
    let mut acc = if l > 0 {
        eval_slice(&indices[..l], &mats[..l], phi) * &mats[l]
    } else {
        mats[l].clone()
    };
    if l + 1 < indices.len() {
        acc *= eval_slice(&indices[l + 1..], &mats[l + 1..], phi);
    }
    acc
}

/// Numeric value of the bracket by direct recursion.
pub fn eval(indices: &IndexTuple, mats: &[CMatrix], phi: &Channel) -> Result<CMatrix> {
    check_args(indices, mats, phi)?;
    Ok(eval_slice(indices.entries(), mats, phi))
}

/// Numeric value obtained by first splitting at the chosen zero position,
/// then continuing with the standard recursion. Used to confirm that the
/// value does not depend on which zero is split first.
pub fn eval_split_at(
    indices: &IndexTuple,
    mats: &[CMatrix],
    phi: &Channel,
    zero_pos: usize,
) -> Result<CMatrix> {
    check_args(indices, mats, phi)?;
    let e = indices.entries();
    if zero_pos >= e.len() || e[zero_pos] != 0 {
        return Err(Error::InvalidParams(format!(
            "position {zero_pos} is not a zero slot of {indices}"
        )));
    }
    Ok(eval_around_zero(e, mats, phi, zero_pos))
}

/// Interprets a normal-form tree against concrete matrices.
pub fn eval_expr(expr: &MomentExpr, mats: &[CMatrix], phi: &Channel) -> Result<CMatrix> {
    for m in mats {
        phi.check_elem(m)?;
    }
    Ok(eval_expr_inner(expr, mats, phi))
}

fn eval_expr_inner(expr: &MomentExpr, mats: &[CMatrix], phi: &Channel) -> CMatrix {
    match expr {
        MomentExpr::Leaf(i) => mats[*i].clone(),
        MomentExpr::Phi { power, arg } => phi
            .apply_power(*power, &eval_expr_inner(arg, mats, phi))
            .expect("dimension already checked"),
        MomentExpr::Prod(parts) => {
            let mut acc = eval_expr_inner(&parts[0], mats, phi);
            for p in &parts[1..] {
                acc *= eval_expr_inner(p, mats, phi);
            }
            acc
        }
    }
}

/// Operator-norm distance between the adjoint of the bracket and the bracket
/// of the reversed tuple with reversed, adjointed arguments.
pub fn symmetry_residual(indices: &IndexTuple, mats: &[CMatrix], phi: &Channel) -> Result<f64> {
    check_args(indices, mats, phi)?;
    let forward = eval_slice(indices.entries(), mats, phi);
    let rev_idx: Vec<u32> = indices.entries().iter().rev().cloned().collect();
    let rev_mats: Vec<CMatrix> = mats.iter().rev().map(|m| m.adjoint()).collect();
    let reversed = eval_slice(&rev_idx, &rev_mats, phi);
    Ok(crate::algebra::op_norm(&(forward.adjoint() - reversed)))
}

/// Parses a bracket literal `[n1,...,nk; s1,...,sk]` into the index tuple and
/// the raw slot strings. Whitespace-insensitive.
pub fn parse_bracket(input: &str) -> Result<(IndexTuple, Vec<String>)> {
    let t: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected bracket literal, got {input:?}")))?;
    let (idx_part, name_part) = inner
        .split_once(';')
        .ok_or_else(|| Error::Parse("bracket literal needs a ';' separator".into()))?;
    let entries = idx_part
        .split(',')
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad index {p:?}")))
        })
        .collect::<Result<Vec<u32>>>()?;
    let indices = IndexTuple::new(entries)?;
    let names: Vec<String> = name_part.split(',').map(str::to_string).collect();
    if names.iter().any(String::is_empty) {
        return Err(Error::Parse("empty name slot in bracket literal".into()));
    }
    if indices.len() != names.len() {
        return Err(Error::LengthMismatch {
            indices: indices.len(),
            items: names.len(),
        });
    }
    Ok((indices, names))
}
