//! The chained six-variable gadget family on which steepest ascent takes
//! `7(2^m - 1)` steps.
//!
//! A chain `C±(n, ≤m)` is a path of gadgets `m, m-1, ..., 1`. Gadget `k`
//! lives on variables `(k,1)..(k,6)` arranged in the cycle
//! `1-2-3-6-5-4-1`, and consecutive gadgets are joined by a single binary
//! constraint on `{(k,6), (k-1,1)}`. Only the top gadget `k = m` carries the
//! `±` distinction, which changes the unary weight on `(m,1)`.
//!
//! Variable `(k,i)` lives at dense index `6(m-k) + (i-1)`, so dense order and
//! the labeled string order coincide for generated chains.

use std::fmt;
use std::str::FromStr;

use crate::assignment::Assignment;
use crate::error::{Error, Result};
use crate::instance::{Instance, Label};
use crate::structure::PathDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn opposite(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Range(format!("sign must be + or -, got {other:?}"))),
        }
    }
}

/// Parameters of a chain `C±(n, ≤m)`; always `1 <= m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilyParams {
    n: u32,
    m: u32,
    sign: Sign,
}

impl FamilyParams {
    pub fn new(n: u32, m: u32, sign: Sign) -> Result<Self> {
        if n == 0 || m == 0 || m > n {
            return Err(Error::Range(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
        }
        Ok(FamilyParams { n, m, sign })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn with_sign(self, sign: Sign) -> Self {
        FamilyParams { sign, ..self }
    }

    pub fn num_vars(&self) -> usize {
        6 * self.m as usize
    }
}

/// `M_k = 6(2^k - 2)`, `S = 2n + 1`, `s_k = n + 1 - k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetParams {
    pub big_m: i128,
    pub big_s: i128,
    pub small_s: i128,
}

fn m_coefficient(k: u32) -> Result<i128> {
    2i128
        .checked_pow(k)
        .and_then(|p| p.checked_sub(2))
        .and_then(|p| p.checked_mul(6))
        .ok_or(Error::Overflow("computing M_k"))
}

pub fn derived_params(n: u32, k: u32) -> Result<GadgetParams> {
    if k == 0 || k > n {
        return Err(Error::Range(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    Ok(GadgetParams {
        big_m: m_coefficient(k)?,
        big_s: 2 * n as i128 + 1,
        small_s: (n + 1 - k) as i128,
    })
}

/// One constraint of a gadget, addressed by labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetConstraint {
    Unary { var: Label, weight: i128 },
    Binary { a: Label, b: Label, weight: i128 },
}

/// Weights of one gadget, named by scope positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GadgetWeights {
    /// Unary weights on positions 1..=6 (index 0 is position 1).
    pub unary: [i128; 6],
    pub c12: i128,
    pub c23: i128,
    pub c36: i128,
    pub c14: i128,
    pub c45: i128,
    pub c56: i128,
    /// Weight on `{(k,6), (k-1,1)}`; zero for `k = 1`.
    pub link_down: i128,
    /// Weight gadget `k+1` places on `{(k+1,6), (k,1)}`.
    pub link_up: i128,
}

impl GadgetWeights {
    /// Intra-gadget binaries as `(position, position, weight)`.
    pub fn binaries(&self) -> [(u32, u32, i128); 6] {
        [
            (1, 2, self.c12),
            (2, 3, self.c23),
            (3, 6, self.c36),
            (1, 4, self.c14),
            (4, 5, self.c45),
            (5, 6, self.c56),
        ]
    }
}

/// Evaluates the weight schedule for gadget `k`, each weight defined from
/// the magnitudes of the ones before it.
pub fn gadget_weights(n: u32, k: u32, sign: Sign) -> Result<GadgetWeights> {
    let GadgetParams {
        big_m,
        big_s: s_big,
        small_s: s,
    } = derived_params(n, k)?;
    let of = || Error::Overflow("computing gadget weights");
    let add = |a: i128, b: i128| a.checked_add(b).ok_or_else(of);
    let sub = |a: i128, b: i128| a.checked_sub(b).ok_or_else(of);
    let abs = |a: i128| a.checked_abs().ok_or_else(of);

    let link_down = big_m.checked_mul(s_big).ok_or_else(of)?;
    let c6 = -add(abs(link_down)?, s_big)?;
    let c36 = add(abs(c6)?, s_big)?;
    let c56 = -abs(c36)?;
    let c3 = -add(abs(c36)?, s_big)?;
    let c23 = add(abs(c3)?, s_big)?;
    let c2 = -add(abs(c23)?, s)?;
    let c12 = sub(add(abs(c2)?, s_big)?, s)?;
    let c5 = -s_big;
    let c45 = add(abs(add(c5, c56)?)?, s_big)?;
    let c4 = -add(abs(c45)?, s_big)?;
    let c14 = add(abs(c4)?, s)?;
    let c1_minus = -sub(add(abs(add(c12, c14)?)?, s_big)?, s)?;
    let link_up = add(abs(c1_minus)?, s_big)?;
    let c1 = match sign {
        Sign::Minus => c1_minus,
        Sign::Plus => add(c1_minus, link_up)?,
    };

    Ok(GadgetWeights {
        unary: [c1, c2, c3, c4, c5, c6],
        c12,
        c23,
        c36,
        c14,
        c45,
        c56,
        link_down,
        link_up,
    })
}

/// The constraints gadget `k` contributes to a chain.
///
/// Emits six unaries, six intra-gadget binaries and, for `k >= 2`, the link
/// `{(k,6), (k-1,1)}`. `Sign::Plus` is only valid on the top gadget.
pub fn gadget_constraints(n: u32, k: u32, sign: Sign, is_top: bool) -> Result<Vec<GadgetConstraint>> {
    if sign == Sign::Plus && !is_top {
        return Err(Error::Range(
            "only the top gadget of a chain may carry the + sign".into(),
        ));
    }
    let w = gadget_weights(n, k, sign)?;
    let at = |i| Label::new(k, i);
    let mut out: Vec<GadgetConstraint> = (1..=6)
        .map(|i| GadgetConstraint::Unary {
            var: at(i),
            weight: w.unary[i as usize - 1],
        })
        .collect();
    out.extend(
        w.binaries()
            .iter()
            .map(|&(a, b, weight)| GadgetConstraint::Binary {
                a: at(a),
                b: at(b),
                weight,
            }),
    );
    if k >= 2 {
        out.push(GadgetConstraint::Binary {
            a: at(6),
            b: Label::new(k - 1, 1),
            weight: w.link_down,
        });
    }
    Ok(out)
}

/// Dense index of `(k, i)` in a chain of `m` gadgets.
pub fn chain_index(m: u32, label: Label) -> usize {
    6 * (m - label.gadget) as usize + (label.position - 1) as usize
}

fn chain_labels(m: u32) -> Vec<Label> {
    (0..6 * m)
        .map(|idx| Label::new(m - idx / 6, idx % 6 + 1))
        .collect()
}

/// Standalone gadget `C±(n,k)` on its six variables, without links.
pub fn gadget_instance(n: u32, k: u32, sign: Sign) -> Result<Instance> {
    let constraints = gadget_constraints(n, k, sign, true)?;
    let idx = |l: Label| (l.position - 1) as usize;
    let mut unaries = Vec::new();
    let mut binaries = Vec::new();
    for c in constraints {
        match c {
            GadgetConstraint::Unary { var, weight } => unaries.push((idx(var), weight)),
            GadgetConstraint::Binary { a, b, weight } if a.gadget == k && b.gadget == k => {
                binaries.push((idx(a), idx(b), weight))
            }
            GadgetConstraint::Binary { .. } => {}
        }
    }
    Instance::new(6, 0, &unaries, &binaries)?.with_labels((1..=6).map(|i| Label::new(k, i)).collect())
}

/// Builds `C±(n, ≤m)` and runs the self-validation checks.
pub fn build_chain(params: FamilyParams) -> Result<Instance> {
    build_chain_with(params, true)
}

/// Builds `C±(n, ≤m)`; `validate = false` skips the self-validation pass.
pub fn build_chain_with(params: FamilyParams, validate: bool) -> Result<Instance> {
    let (n, m) = (params.n, params.m);
    let mut unaries = Vec::with_capacity(6 * m as usize);
    let mut binaries = Vec::with_capacity(7 * m as usize);
    for k in (1..=m).rev() {
        let (sign, is_top) = if k == m {
            (params.sign, true)
        } else {
            (Sign::Minus, false)
        };
        for c in gadget_constraints(n, k, sign, is_top)? {
            match c {
                GadgetConstraint::Unary { var, weight } => unaries.push((chain_index(m, var), weight)),
                GadgetConstraint::Binary { a, b, weight } => {
                    binaries.push((chain_index(m, a), chain_index(m, b), weight))
                }
            }
        }
    }
    let inst = Instance::new(6 * m as usize, 0, &unaries, &binaries)?.with_labels(chain_labels(m))?;
    if validate {
        validate_chain(&inst, params)?;
    }
    Ok(inst)
}

fn fail(msg: String) -> Error {
    Error::SelfValidationFailed(msg)
}

fn checked_sum(values: impl IntoIterator<Item = i128>) -> Result<i128> {
    values
        .into_iter()
        .try_fold(0i128, |acc, v| acc.checked_add(v))
        .ok_or(Error::Overflow("validating chain weights"))
}

/// Checks a built chain against the structural and weight properties the
/// ascent argument relies on:
///
/// * constraint counts `6m` and `7m - 1`;
/// * every unary of a `-` gadget is negative;
/// * each unary outweighs its outgoing binaries;
/// * every subset of incoming binaries is non-positive or exceeds the unary
///   together with any negative outgoing binaries;
/// * the `+` unary on `(m,1)` equals the `-` unary plus the upward link, i.e. `S`;
/// * every improving flip inside a gadget gains exactly `s_k` or at least `S - s_k`.
pub fn validate_chain(inst: &Instance, params: FamilyParams) -> Result<()> {
    let (n, m) = (params.n, params.m);
    if inst.num_vars() != 6 * m as usize {
        return Err(fail(format!("expected {} variables", 6 * m)));
    }
    if inst.num_unaries() != 6 * m as usize || inst.num_binaries() != 7 * m as usize - 1 {
        return Err(fail(format!(
            "expected {} unaries and {} binaries, found {} and {}",
            6 * m,
            7 * m - 1,
            inst.num_unaries(),
            inst.num_binaries()
        )));
    }
    let at = |k: u32, i: u32| chain_index(m, Label::new(k, i));

    for k in 1..=m {
        let gp = derived_params(n, k)?;
        let plus_top = k == m && params.sign == Sign::Plus;
        let w = |a: u32, b: u32| inst.binary(at(k, a), at(k, b)).unwrap_or(0);
        let mut unary: [i128; 6] = std::array::from_fn(|i| inst.unary(at(k, i as u32 + 1)));

        if plus_top {
            let minus = gadget_weights(n, k, Sign::Minus)?;
            let expected = minus.unary[0]
                .checked_add(minus.link_up)
                .ok_or(Error::Overflow("checking the + unary"))?;
            if unary[0] != expected || unary[0] != gp.big_s {
                return Err(fail(format!(
                    "unary on ({k},1) is {}, expected c- + link = {expected} = S = {}",
                    unary[0], gp.big_s
                )));
            }
            // The remaining checks are stated for the - weights.
            unary[0] = minus.unary[0];
        }

        for (i, &u) in unary.iter().enumerate() {
            if u >= 0 {
                return Err(fail(format!("unary on ({k},{}) = {u} is not negative", i + 1)));
            }
        }

        // Neighbours inside the gadget split by position order.
        let adjacency: [(u32, &[u32], &[u32]); 6] = [
            (1, &[], &[2, 4]),
            (2, &[1], &[3]),
            (3, &[2], &[6]),
            (4, &[1], &[5]),
            (5, &[4], &[6]),
            (6, &[3, 5], &[]),
        ];
        for (pos, incoming, outgoing) in adjacency {
            let u = unary[pos as usize - 1];
            let out_sum = checked_sum(outgoing.iter().map(|&o| w(pos, o)))?;
            if !outgoing.is_empty() && u.abs() <= out_sum {
                return Err(fail(format!(
                    "|unary| on ({k},{pos}) does not exceed its outgoing binaries"
                )));
            }
            let neg_out = checked_sum(outgoing.iter().map(|&o| w(pos, o)).filter(|&v| v < 0))?;
            let threshold = checked_sum([u, neg_out])?.abs();
            for subset in 1u32..(1 << incoming.len()) {
                let sum = checked_sum(
                    incoming
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| subset >> b & 1 == 1)
                        .map(|(_, &src)| w(src, pos)),
                )?;
                if sum > 0 && sum <= threshold {
                    return Err(fail(format!(
                        "incoming binaries on ({k},{pos}) sum to {sum}, within (0, {threshold}]"
                    )));
                }
            }
        }

        check_step_dichotomy(inst, m, k, gp)?;
    }
    Ok(())
}

/// Every improving flip of a gadget variable, over all assignments to the
/// gadget and its boundary neighbours, gains exactly `s_k` or at least `S - s_k`.
fn check_step_dichotomy(inst: &Instance, m: u32, k: u32, gp: GadgetParams) -> Result<()> {
    let mut local: Vec<usize> = (1..=6).map(|i| chain_index(m, Label::new(k, i))).collect();
    if k < m {
        local.push(chain_index(m, Label::new(k + 1, 6)));
    }
    if k > 1 {
        local.push(chain_index(m, Label::new(k - 1, 1)));
    }
    let mut value = vec![false; inst.num_vars()];
    for mask in 0u32..(1 << local.len()) {
        for (b, &v) in local.iter().enumerate() {
            value[v] = mask >> b & 1 == 1;
        }
        for &v in &local[..6] {
            let grad = checked_sum(
                std::iter::once(inst.unary(v)).chain(
                    inst.neighbors(v)
                        .iter()
                        .filter(|&&(j, _)| value[j])
                        .map(|&(_, w)| w),
                ),
            )?;
            let gain = if value[v] { -grad } else { grad };
            if gain > 0 && gain != gp.small_s && gain < gp.big_s - gp.small_s {
                return Err(fail(format!(
                    "flip of {} gains {gain}, neither s_k = {} nor >= S - s_k = {}",
                    inst.var_name(v),
                    gp.small_s,
                    gp.big_s - gp.small_s
                )));
            }
        }
    }
    Ok(())
}

/// The unique peak: `0^{6m}` for `-`, `111110 0^{6(m-1)}` for `+`.
pub fn expected_peak(params: FamilyParams) -> Assignment {
    let mut x = Assignment::zeros(params.num_vars());
    if params.sign == Sign::Plus {
        for i in 1..=5 {
            x.set(chain_index(params.m, Label::new(params.m, i)), true);
        }
    }
    x
}

/// Sign-dependence arcs of a chain as dense index pairs, sorted: inside
/// each gadget 1→2→3→6 and 1→4→5→6, and (k+1,6)→(k,1) between gadgets.
pub fn expected_arcs(m: u32) -> Vec<(usize, usize)> {
    let mut arcs = Vec::new();
    for k in 1..=m {
        let at = |i| chain_index(m, Label::new(k, i));
        for (a, b) in [(1, 2), (2, 3), (3, 6), (1, 4), (4, 5), (5, 6)] {
            arcs.push((at(a), at(b)));
        }
        if k < m {
            arcs.push((chain_index(m, Label::new(k + 1, 6)), at(1)));
        }
    }
    arcs.sort_unstable();
    arcs
}

/// `7(2^m - 1)`, the steepest-ascent length between the two peaks.
pub fn predicted_ascent_length(m: u32) -> Result<u64> {
    2u64.checked_pow(m)
        .and_then(|p| (p - 1).checked_mul(7))
        .ok_or(Error::Overflow("computing the predicted ascent length"))
}

/// Width-2 path decomposition of a chain with `m` gadgets.
///
/// Per gadget, from `k = m` down to `1`: the link bag into `(k,1)`, then
/// `{1,2,4}`, `{2,3,4}`, `{3,4,5}`, `{3,5,6}`. Link bags that would reach
/// outside the chain are dropped, and each link bag appears once.
pub fn canonical_decomposition(m: u32) -> PathDecomposition {
    let at = |k: u32, i: u32| chain_index(m, Label::new(k, i));
    let mut bags = Vec::with_capacity(5 * m as usize);
    for k in (1..=m).rev() {
        if k < m {
            bags.push(vec![at(k + 1, 6), at(k, 1)]);
        }
        bags.push(vec![at(k, 1), at(k, 2), at(k, 4)]);
        bags.push(vec![at(k, 2), at(k, 3), at(k, 4)]);
        bags.push(vec![at(k, 3), at(k, 4), at(k, 5)]);
        bags.push(vec![at(k, 3), at(k, 5), at(k, 6)]);
    }
    PathDecomposition::new(bags)
}
