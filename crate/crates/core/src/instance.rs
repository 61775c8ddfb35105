//! Binary Boolean VCSP instances and exact fitness evaluation.
//!
//! An instance is a constant term plus weighted unary and binary constraints.
//! It implements the pseudo-Boolean fitness function
//!
//! ```text
//! f(x) = c0 + sum_i c_i x_i + sum_{i<j} c_ij x_i x_j
//! ```
//!
//! All weights are nonzero `i128` values; every sum is checked, so overflow
//! surfaces as [`Error::Overflow`] instead of wrapping.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::assignment::Assignment;
use crate::error::{Error, Result};

/// Gadget-style variable label `(k, i)`: gadget index `k >= 1`, position `i` in `1..=6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub gadget: u32,
    pub position: u32,
}

impl Label {
    pub fn new(gadget: u32, position: u32) -> Self {
        Label { gadget, position }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.gadget, self.position)
    }
}

/// How assignment strings map characters to variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitOrder {
    /// Labeled instances: decreasing gadget, then increasing position.
    /// Unlabeled instances fall back to dense order.
    #[default]
    Labeled,
    /// Increasing dense index.
    Raw,
}

/// A variable whose flip strictly increases fitness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub var: usize,
    pub gain: i128,
}

/// A constraint given as a full value table over its scope.
///
/// For a binary scope `[a, b]` the values are ordered
/// `C(0,0), C(1,0), C(0,1), C(1,1)` where the first coordinate is `x_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintTable {
    pub scope: Vec<usize>,
    pub values: Vec<i128>,
}

impl ConstraintTable {
    pub fn unary(var: usize, values: [i128; 2]) -> Self {
        ConstraintTable {
            scope: vec![var],
            values: values.to_vec(),
        }
    }

    pub fn binary(a: usize, b: usize, values: [i128; 4]) -> Self {
        ConstraintTable {
            scope: vec![a, b],
            values: values.to_vec(),
        }
    }

    /// Value of the table at `x`.
    pub fn eval(&self, x: &Assignment) -> i128 {
        let idx = self
            .scope
            .iter()
            .enumerate()
            .fold(0usize, |acc, (pos, &v)| acc | (x.get(v) as usize) << pos);
        self.values[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    num_vars: usize,
    constant: i128,
    unaries: Vec<i128>,
    binaries: BTreeMap<(usize, usize), i128>,
    neighbors: Vec<Vec<(usize, i128)>>,
    labels: Option<Vec<Label>>,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl Instance {
    /// Builds an instance from unary `(var, weight)` and binary `(a, b, weight)` lists.
    ///
    /// Zero weights, self-loops, out-of-range indices and repeated scopes are
    /// rejected; repeated scopes are never summed.
    pub fn new(
        num_vars: usize,
        constant: i128,
        unaries: &[(usize, i128)],
        binaries: &[(usize, usize, i128)],
    ) -> Result<Self> {
        let check = |i: usize| {
            if i < num_vars {
                Ok(())
            } else {
                Err(Error::IndexOutOfRange { index: i, num_vars })
            }
        };

        let mut unary = vec![0i128; num_vars];
        let mut seen_unary = vec![false; num_vars];
        for &(i, w) in unaries {
            check(i)?;
            if w == 0 {
                return Err(Error::ZeroWeight { scope: vec![i] });
            }
            if seen_unary[i] {
                return Err(Error::DuplicateScope { scope: vec![i] });
            }
            seen_unary[i] = true;
            unary[i] = w;
        }

        let mut pairs = BTreeMap::new();
        for &(a, b, w) in binaries {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let key = ordered(a, b);
            if w == 0 {
                return Err(Error::ZeroWeight {
                    scope: vec![key.0, key.1],
                });
            }
            if pairs.insert(key, w).is_some() {
                return Err(Error::DuplicateScope {
                    scope: vec![key.0, key.1],
                });
            }
        }

        let mut neighbors = vec![Vec::new(); num_vars];
        for (&(a, b), &w) in &pairs {
            neighbors[a].push((b, w));
            neighbors[b].push((a, w));
        }
        for list in &mut neighbors {
            list.sort_unstable_by_key(|&(j, _)| j);
        }

        Ok(Instance {
            num_vars,
            constant,
            unaries: unary,
            binaries: pairs,
            neighbors,
            labels: None,
        })
    }

    /// Attaches `(k, i)` labels, one per variable, which must be pairwise distinct.
    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.num_vars {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} variables",
                labels.len(),
                self.num_vars
            )));
        }
        let mut seen = HashMap::with_capacity(labels.len());
        for (idx, l) in labels.iter().enumerate() {
            if l.gadget == 0 || !(1..=6).contains(&l.position) {
                return Err(Error::InvalidLabels(format!(
                    "label {l} on variable {idx} is outside k >= 1, 1 <= i <= 6"
                )));
            }
            if let Some(prev) = seen.insert(*l, idx) {
                return Err(Error::InvalidLabels(format!(
                    "label {l} used by variables {prev} and {idx}"
                )));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Converts table constraints into monomial weights by summing alike
    /// monomials. Coefficients that cancel to zero are dropped.
    pub fn from_constraint_tables(num_vars: usize, tables: &[ConstraintTable]) -> Result<Self> {
        let overflow = || Error::Overflow("aggregating constraint tables");
        let mut constant = 0i128;
        let mut unary = vec![0i128; num_vars];
        let mut pairs: BTreeMap<(usize, usize), i128> = BTreeMap::new();

        for (t_idx, t) in tables.iter().enumerate() {
            for &v in &t.scope {
                if v >= num_vars {
                    return Err(Error::MalformedTable(format!(
                        "table {t_idx}: variable {v} out of range"
                    )));
                }
            }
            match t.scope.as_slice() {
                &[v] => {
                    if t.values.len() != 2 {
                        return Err(Error::MalformedTable(format!(
                            "table {t_idx}: unary table needs 2 values, got {}",
                            t.values.len()
                        )));
                    }
                    let (c0, c1) = (t.values[0], t.values[1]);
                    constant = constant.checked_add(c0).ok_or_else(overflow)?;
                    let lin = c1.checked_sub(c0).ok_or_else(overflow)?;
                    unary[v] = unary[v].checked_add(lin).ok_or_else(overflow)?;
                }
                &[a, b] => {
                    if a == b {
                        return Err(Error::MalformedTable(format!(
                            "table {t_idx}: repeated variable {a} in scope"
                        )));
                    }
                    if t.values.len() != 4 {
                        return Err(Error::MalformedTable(format!(
                            "table {t_idx}: binary table needs 4 values, got {}",
                            t.values.len()
                        )));
                    }
                    let [c00, c10, c01, c11] = [t.values[0], t.values[1], t.values[2], t.values[3]];
                    let lin_a = c10.checked_sub(c00).ok_or_else(overflow)?;
                    let lin_b = c01.checked_sub(c00).ok_or_else(overflow)?;
                    let quad = c11
                        .checked_sub(c01)
                        .and_then(|v| v.checked_sub(c10))
                        .and_then(|v| v.checked_add(c00))
                        .ok_or_else(overflow)?;
                    constant = constant.checked_add(c00).ok_or_else(overflow)?;
                    unary[a] = unary[a].checked_add(lin_a).ok_or_else(overflow)?;
                    unary[b] = unary[b].checked_add(lin_b).ok_or_else(overflow)?;
                    let e = pairs.entry(ordered(a, b)).or_insert(0);
                    *e = e.checked_add(quad).ok_or_else(overflow)?;
                }
                other => {
                    return Err(Error::MalformedTable(format!(
                        "table {t_idx}: scope of size {} (must be 1 or 2)",
                        other.len()
                    )))
                }
            }
        }

        let unaries: Vec<_> = unary.into_iter().enumerate().filter(|&(_, w)| w != 0).collect();
        let binaries: Vec<_> = pairs
            .into_iter()
            .filter(|&(_, w)| w != 0)
            .map(|((a, b), w)| (a, b, w))
            .collect();
        Instance::new(num_vars, constant, &unaries, &binaries)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constant(&self) -> i128 {
        self.constant
    }

    /// Unary weight of `i`, zero when absent.
    pub fn unary(&self, i: usize) -> i128 {
        self.unaries[i]
    }

    /// Nonzero unary constraints in index order.
    pub fn unaries(&self) -> impl Iterator<Item = (usize, i128)> + '_ {
        self.unaries
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0)
            .map(|(i, &w)| (i, w))
    }

    pub fn num_unaries(&self) -> usize {
        self.unaries.iter().filter(|&&w| w != 0).count()
    }

    pub fn binary(&self, i: usize, j: usize) -> Option<i128> {
        self.binaries.get(&ordered(i, j)).copied()
    }

    /// Binary constraints keyed by `(low, high)` index, in order.
    pub fn binaries(&self) -> impl Iterator<Item = ((usize, usize), i128)> + '_ {
        self.binaries.iter().map(|(&k, &w)| (k, w))
    }

    pub fn num_binaries(&self) -> usize {
        self.binaries.len()
    }

    /// Neighbours of `i` in the constraint graph with the connecting weight.
    pub fn neighbors(&self, i: usize) -> &[(usize, i128)] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<Label> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn index_of(&self, label: Label) -> Option<usize> {
        self.labels
            .as_ref()
            .and_then(|ls| ls.iter().position(|&l| l == label))
    }

    /// Human-readable variable name: `(k,i)` when labeled, else the index.
    pub fn var_name(&self, i: usize) -> String {
        match self.label(i) {
            Some(l) => l.to_string(),
            None => i.to_string(),
        }
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.num_vars {
            return Err(Error::IndexOutOfRange {
                index: i,
                num_vars: self.num_vars,
            });
        }
        Ok(())
    }

    pub fn fitness(&self, x: &Assignment) -> Result<i128> {
        self.check_len(x)?;
        let overflow = || Error::Overflow("evaluating fitness");
        let mut acc = self.constant;
        for (i, w) in self.unaries() {
            if x.get(i) {
                acc = acc.checked_add(w).ok_or_else(overflow)?;
            }
        }
        for (&(a, b), &w) in &self.binaries {
            if x.get(a) && x.get(b) {
                acc = acc.checked_add(w).ok_or_else(overflow)?;
            }
        }
        Ok(acc)
    }

    /// `f(x[i:1]) - f(x[i:0])`, computed from `i`'s neighbourhood only.
    pub fn gradient(&self, i: usize, x: &Assignment) -> Result<i128> {
        self.check_var(i)?;
        self.check_len(x)?;
        self.neighbors[i]
            .iter()
            .filter(|&&(j, _)| x.get(j))
            .try_fold(self.unaries[i], |acc, &(_, w)| acc.checked_add(w))
            .ok_or(Error::Overflow("evaluating gradient"))
    }

    /// Fitness change from flipping `i` in `x`.
    pub fn flip_gain(&self, i: usize, x: &Assignment) -> Result<i128> {
        let g = self.gradient(i, x)?;
        if x.get(i) {
            g.checked_neg().ok_or(Error::Overflow("negating gradient"))
        } else {
            Ok(g)
        }
    }

    /// All strictly improving flips, in index order.
    pub fn improving_moves(&self, x: &Assignment) -> Result<Vec<Move>> {
        self.check_len(x)?;
        let mut moves = Vec::new();
        for i in 0..self.num_vars {
            let gain = self.flip_gain(i, x)?;
            if gain > 0 {
                moves.push(Move { var: i, gain });
            }
        }
        Ok(moves)
    }

    pub fn is_local_peak(&self, x: &Assignment) -> Result<bool> {
        self.check_len(x)?;
        for i in 0..self.num_vars {
            if self.flip_gain(i, x)? > 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Dense indices in the order their bits appear in assignment strings.
    pub fn string_order(&self, order: BitOrder) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.num_vars).collect();
        if let (BitOrder::Labeled, Some(labels)) = (order, &self.labels) {
            idx.sort_by_key(|&i| (std::cmp::Reverse(labels[i].gadget), labels[i].position));
        }
        idx
    }

    pub fn format_assignment(&self, x: &Assignment, order: BitOrder) -> String {
        self.string_order(order)
            .into_iter()
            .map(|i| if x.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn parse_assignment(&self, s: &str, order: BitOrder) -> Result<Assignment> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                found: chars.len(),
            });
        }
        let mut x = Assignment::zeros(self.num_vars);
        for (pos, i) in self.string_order(order).into_iter().enumerate() {
            match chars[pos] {
                '0' => {}
                '1' => x.set(i, true),
                c => {
                    return Err(Error::InvalidAssignment(format!(
                        "unexpected character {c:?} in {s:?}"
                    )))
                }
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var() -> Instance {
        Instance::new(2, 0, &[(0, 1), (1, 1)], &[(0, 1, -3)]).unwrap()
    }

    #[test]
    fn minimal_instance() {
        let inst = two_var();
        assert_eq!(inst.num_vars(), 2);
        assert_eq!(inst.binary(1, 0), Some(-3));
        assert_eq!(inst.neighbors(0), &[(1, -3)]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Instance::new(2, 0, &[(0, 0)], &[]),
            Err(Error::ZeroWeight { scope: vec![0] })
        );
        assert_eq!(Instance::new(2, 0, &[], &[(1, 1, 4)]), Err(Error::SelfLoop(1)));
        assert_eq!(
            Instance::new(2, 0, &[], &[(0, 1, 4), (1, 0, 2)]),
            Err(Error::DuplicateScope { scope: vec![0, 1] })
        );
        assert_eq!(
            Instance::new(2, 0, &[(0, 1), (0, 2)], &[]),
            Err(Error::DuplicateScope { scope: vec![0] })
        );
        assert_eq!(
            Instance::new(2, 0, &[(2, 1)], &[]),
            Err(Error::IndexOutOfRange {
                index: 2,
                num_vars: 2
            })
        );
    }

    #[test]
    fn fitness_and_gradient() {
        let inst = two_var();
        let vals: Vec<i128> = ["00", "10", "01", "11"]
            .iter()
            .map(|s| inst.fitness(&Assignment::parse_dense(s).unwrap()).unwrap())
            .collect();
        assert_eq!(vals, vec![0, 1, 1, -1]);
        let x = Assignment::parse_dense("01").unwrap();
        assert_eq!(inst.gradient(0, &x).unwrap(), -2);
        assert_eq!(inst.flip_gain(1, &x).unwrap(), -1);
    }

    #[test]
    fn length_mismatch() {
        let inst = two_var();
        assert_eq!(
            inst.fitness(&Assignment::zeros(3)),
            Err(Error::LengthMismatch {
                expected: 2,
                found: 3
            })
        );
    }

    #[test]
    fn overflow_is_detected() {
        let inst = Instance::new(2, i128::MAX, &[(0, 1)], &[]).unwrap();
        assert!(matches!(
            inst.fitness(&Assignment::ones(2)),
            Err(Error::Overflow(_))
        ));
        let inst = Instance::new(3, 0, &[(0, i128::MAX)], &[(0, 1, 1)]).unwrap();
        assert!(matches!(
            inst.gradient(0, &Assignment::ones(3)),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn tables_collapse_to_linear_terms() {
        let t = ConstraintTable::binary(0, 1, [0, 2, 3, 5]);
        let inst = Instance::from_constraint_tables(2, &[t]).unwrap();
        assert_eq!(inst.unary(0), 2);
        assert_eq!(inst.unary(1), 3);
        assert_eq!(inst.num_binaries(), 0);
    }

    #[test]
    fn constant_table() {
        let t = ConstraintTable::unary(0, [7, 7]);
        let inst = Instance::from_constraint_tables(1, &[t]).unwrap();
        assert_eq!(inst.constant(), 7);
        assert_eq!(inst.num_unaries(), 0);
    }

    #[test]
    fn and_table() {
        let t = ConstraintTable::binary(0, 1, [0, 0, 0, 1]);
        let inst = Instance::from_constraint_tables(2, &[t]).unwrap();
        assert_eq!(inst.constant(), 0);
        assert_eq!(inst.num_unaries(), 0);
        assert_eq!(inst.binary(0, 1), Some(1));
    }

    #[test]
    fn malformed_tables() {
        for t in [
            ConstraintTable {
                scope: vec![],
                values: vec![1],
            },
            ConstraintTable {
                scope: vec![0],
                values: vec![1, 2, 3],
            },
            ConstraintTable {
                scope: vec![0, 0],
                values: vec![1, 2, 3, 4],
            },
            ConstraintTable {
                scope: vec![0, 1, 2],
                values: vec![0; 8],
            },
            ConstraintTable {
                scope: vec![0, 9],
                values: vec![0; 4],
            },
        ] {
            assert!(matches!(
                Instance::from_constraint_tables(3, &[t]),
                Err(Error::MalformedTable(_))
            ));
        }
    }

    #[test]
    fn labeled_string_order() {
        let inst = Instance::new(4, 0, &[], &[])
            .unwrap()
            .with_labels(vec![
                Label::new(1, 1),
                Label::new(1, 2),
                Label::new(2, 1),
                Label::new(2, 2),
            ])
            .unwrap();
        assert_eq!(inst.string_order(BitOrder::Labeled), vec![2, 3, 0, 1]);
        assert_eq!(inst.string_order(BitOrder::Raw), vec![0, 1, 2, 3]);
        let x = inst.parse_assignment("0100", BitOrder::Labeled).unwrap();
        assert!(x.get(3));
        assert_eq!(inst.format_assignment(&x, BitOrder::Raw), "0001");
        assert_eq!(inst.format_assignment(&x, BitOrder::Labeled), "0100");
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = Instance::new(2, 0, &[], &[])
            .unwrap()
            .with_labels(vec![Label::new(1, 1), Label::new(1, 1)]);
        assert!(matches!(r, Err(Error::InvalidLabels(_))));
    }
}
