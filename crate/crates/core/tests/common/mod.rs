//! Oracles shared by the integration tests. Everything here recomputes from
//! raw weights or closed forms and never calls the library's evaluators.
#![allow(dead_code)]

use vcsp_landscape::{Instance, Sign};

pub fn fitness(inst: &Instance, x: &[bool]) -> i128 {
    let mut f = inst.constant();
    for (i, w) in inst.unaries() {
        if x[i] {
            f += w;
        }
    }
    for ((a, b), w) in inst.binaries() {
        if x[a] && x[b] {
            f += w;
        }
    }
    f
}

pub fn gradient(inst: &Instance, i: usize, x: &[bool]) -> i128 {
    let mut hi = x.to_vec();
    let mut lo = x.to_vec();
    hi[i] = true;
    lo[i] = false;
    fitness(inst, &hi) - fitness(inst, &lo)
}

/// Does `target`'s gradient change sign (zero counted as its own sign) when
/// `source` flips, for some assignment of every other variable?
pub fn sign_depends(inst: &Instance, target: usize, source: usize) -> bool {
    let n = inst.num_vars();
    let others: Vec<usize> = (0..n).filter(|&v| v != target && v != source).collect();
    assert!(others.len() <= 16, "brute-force oracle is for small instances");
    (0u32..1 << others.len()).any(|mask| {
        let mut x = vec![false; n];
        for (b, &v) in others.iter().enumerate() {
            x[v] = mask >> b & 1 == 1;
        }
        let g0 = gradient(inst, target, &x).signum();
        x[source] = true;
        g0 != gradient(inst, target, &x).signum()
    })
}

/// Labels flipped by steepest ascent on the chain of sign `sign` with `k`
/// gadgets, from the opposite peak, unrolled from the two-call recursion.
pub fn recursion_sequence(k: u32, sign: Sign, out: &mut Vec<(u32, u32)>) {
    if k == 0 {
        return;
    }
    let (head, tail) = match sign {
        Sign::Plus => ([1, 2, 3, 6], [4, 5, 6]),
        Sign::Minus => ([1, 4, 5, 6], [2, 3, 6]),
    };
    out.extend(head.iter().map(|&i| (k, i)));
    recursion_sequence(k - 1, Sign::Plus, out);
    out.extend(tail.iter().map(|&i| (k, i)));
    recursion_sequence(k - 1, Sign::Minus, out);
}

pub struct Params {
    pub big_m: i128,
    pub big_s: i128,
    pub small_s: i128,
}

pub fn params(n: u32, k: u32) -> Params {
    Params {
        big_m: 6 * ((1i128 << k) - 2),
        big_s: 2 * n as i128 + 1,
        small_s: n as i128 + 1 - k as i128,
    }
}

/// Gradient of `(k,h)` inside a lone gadget against its two gadget
/// neighbours `(k,i)`, `(k,j)`, as closed forms in M, S and s. Rows 1 and 6
/// are stated for the (x_i, x_j) column order used here.
pub fn gadget_gradient_closed_form(n: u32, k: u32, sign: Sign, h: u32, xi: bool, xj: bool) -> i128 {
    let Params {
        big_m: m,
        big_s: s,
        small_s: t,
    } = params(n, k);
    let col = (xi as usize) << 1 | xj as usize;
    let row: [i128; 4] = match (h, sign) {
        (1, Sign::Plus) => [s, (m + 6) * s, (m + 6) * s + t, (2 * m + 11) * s + t],
        (1, Sign::Minus) => [-(2 * (m + 5) + 1) * s, -(m + 6) * s, -(m + 6) * s + t, -s + t],
        (2, _) => [-(m + 4) * s - t, -t, s - t, (m + 5) * s - t],
        (3, _) => [-(m + 3) * s, -s, s, (m + 3) * s],
        (4, _) => [-(m + 5) * s, -s, t, (m + 4) * s + t],
        (5, _) => [-s, -(m + 3) * s, (m + 3) * s, s],
        (6, _) => [-(m + 1) * s, -(2 * m + 3) * s, s, -(m + 1) * s],
        _ => unreachable!(),
    };
    row[col]
}

/// `(h, i, j)`: each gadget variable with its two gadget neighbours.
pub const GADGET_ROWS: [(u32, u32, u32); 6] =
    [(1, 4, 2), (2, 1, 3), (3, 2, 6), (4, 1, 5), (5, 4, 6), (6, 3, 5)];
