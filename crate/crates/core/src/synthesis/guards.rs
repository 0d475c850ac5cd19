//! Two-level guard minimization over finite variable domains.

use std::collections::BTreeSet;

use crate::terms::{BoolExpr, CmpOp, Declarations, Value, VarId};

type Point = Vec<Value>;
type Cube = Vec<BTreeSet<Value>>;

fn in_cube(cube: &Cube, p: &[Value]) -> bool {
    cube.iter().zip(p).all(|(set, v)| set.contains(v))
}

fn hits(cube: &Cube, forbidden: &BTreeSet<Point>) -> bool {
    forbidden.iter().any(|p| in_cube(cube, p))
}

/// Grows the single-point cube of `m` one variable at a time, in declaration
/// order, as long as it stays clear of `forbidden`.
fn expand(m: &[Value], domains: &[Vec<Value>], forbidden: &BTreeSet<Point>) -> Cube {
    let mut cube: Cube = m.iter().map(|v| BTreeSet::from([*v])).collect();
    for (i, dom) in domains.iter().enumerate() {
        let own = cube[i].clone();
        cube[i] = dom.iter().copied().collect();
        if !hits(&cube, forbidden) {
            continue;
        }
        cube[i] = own;
        for v in dom {
            if cube[i].insert(*v) && hits(&cube, forbidden) {
                cube[i].remove(v);
            }
        }
    }
    cube
}

/// A formula true on every `allowed` point and false on every `forbidden`
/// point; all other valuations are don't-cares. The two sets must be
/// disjoint.
pub fn minimize(
    allowed: &BTreeSet<Point>,
    forbidden: &BTreeSet<Point>,
    decls: &Declarations,
) -> BoolExpr {
    debug_assert!(allowed.is_disjoint(forbidden));
    let domains: Vec<Vec<Value>> = decls.variables.iter().map(|v| v.domain.values()).collect();
    let mut cubes: Vec<Cube> = Vec::new();
    for m in allowed {
        if !cubes.iter().any(|c| in_cube(c, m)) {
            cubes.push(expand(m, &domains, forbidden));
        }
    }
    // Drop cubes whose allowed points are all covered by the others.
    let mut k = cubes.len();
    while k > 0 {
        k -= 1;
        let redundant = allowed
            .iter()
            .filter(|p| in_cube(&cubes[k], p))
            .all(|p| cubes.iter().enumerate().any(|(j, c)| j != k && in_cube(c, p)));
        if redundant {
            cubes.remove(k);
        }
    }
    BoolExpr::disjunction(cubes.iter().map(|c| cube_formula(c, &domains)))
}

fn cube_formula(cube: &Cube, domains: &[Vec<Value>]) -> BoolExpr {
    let mut lits = Vec::new();
    for (i, (set, dom)) in cube.iter().zip(domains).enumerate() {
        if set.len() == dom.len() {
            continue;
        }
        let x = VarId(i as u32);
        let missing: Vec<Value> = dom.iter().copied().filter(|v| !set.contains(v)).collect();
        let lit = if set.len() == 1 {
            BoolExpr::var_cmp(x, CmpOp::Eq, *set.iter().next().unwrap())
        } else if missing.len() == 1 {
            BoolExpr::var_cmp(x, CmpOp::Ne, missing[0])
        } else if set.len() <= missing.len() {
            BoolExpr::disjunction(set.iter().map(|v| BoolExpr::var_cmp(x, CmpOp::Eq, *v)))
        } else {
            BoolExpr::conjunction(missing.iter().map(|v| BoolExpr::var_cmp(x, CmpOp::Ne, *v)))
        };
        lits.push(lit);
    }
    BoolExpr::conjunction(lits)
}

/// The conjunction `x1 = v1 && ... && xn = vn` identifying one valuation.
pub fn valuation_formula(alpha: &[Value]) -> BoolExpr {
    BoolExpr::conjunction(
        alpha.iter().enumerate().map(|(i, v)| BoolExpr::var_cmp(VarId(i as u32), CmpOp::Eq, *v)),
    )
}
