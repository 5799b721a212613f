//! Finite groups given by multiplication tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("table has {rows} rows but order is {order}")]
    Shape { order: usize, rows: usize },
    #[error("row {row} has {len} entries, expected {order}")]
    RowLength { row: usize, len: usize, order: usize },
    #[error("entry ({row}, {col}) = {value} is out of range")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
}

/// Cayley table, 0-indexed, `table[a][b] = a·b` (row is the left factor).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GroupRepr")]
pub struct GroupTable {
    order: usize,
    table: Vec<Vec<usize>>,
    #[serde(skip)]
    identity: usize,
    #[serde(skip)]
    inverse: Vec<usize>,
}

#[derive(Deserialize)]
struct GroupRepr {
    order: usize,
    table: Vec<Vec<usize>>,
}

impl TryFrom<GroupRepr> for GroupTable {
    type Error = GroupError;

    fn try_from(r: GroupRepr) -> Result<Self, GroupError> {
        GroupTable::new(r.order, r.table)
    }
}

impl GroupTable {
    /// Validates identity, inverses and associativity.
    pub fn new(order: usize, table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        if table.len() != order || order == 0 {
            return Err(GroupError::Shape {
                order,
                rows: table.len(),
            });
        }
        for (row, r) in table.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::RowLength {
                    row,
                    len: r.len(),
                    order,
                });
            }
            if let Some((col, &value)) = r.iter().enumerate().find(|(_, &v)| v >= order) {
                return Err(GroupError::OutOfRange { row, col, value });
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = Vec::with_capacity(order);
        for g in 0..order {
            let inv = (0..order)
                .find(|&h| table[g][h] == identity && table[h][g] == identity)
                .ok_or(GroupError::NoInverse(g))?;
            inverse.push(inv);
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(Self {
            order,
            table,
            identity,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Whether `elems` is closed under products and inverses.
    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        !elems.is_empty()
            && elems.iter().all(|&a| {
                elems.contains(&self.inverse[a]) && elems.iter().all(|&b| elems.contains(&self.table[a][b]))
            })
    }

    pub fn cyclic(n: usize) -> Self {
        Self::from_fn(n, |a, b| (a + b) % n)
    }

    /// `G × H`, element `(g, h)` indexed `g·|H| + h`.
    pub fn direct_product(g: &Self, h: &Self) -> Self {
        let m = h.order;
        Self::from_fn(g.order * m, |a, b| {
            g.mul(a / m, b / m) * m + h.mul(a % m, b % m)
        })
    }

    /// Dihedral group of order `2n`: `r^i s^f` indexed `f·n + i`.
    pub fn dihedral(n: usize) -> Self {
        Self::from_fn(2 * n, |a, b| {
            let (fa, ia) = (a / n, a % n);
            let (fb, ib) = (b / n, b % n);
            // r^ia s^fa r^ib s^fb = r^(ia ± ib) s^(fa+fb)
            let i = if fa == 0 { (ia + ib) % n } else { (ia + n - ib) % n };
            ((fa + fb) % 2) * n + i
        })
    }

    /// Quaternion group `{±1, ±i, ±j, ±k}`: sign bit `·4` plus unit index.
    pub fn quaternion() -> Self {
        // unit products: (sign, unit) for 1, i, j, k
        const T: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        Self::from_fn(8, |a, b| {
            let (s, u) = T[a % 4][b % 4];
            ((a / 4 + b / 4 + s) % 2) * 4 + u
        })
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let table = (0..n).map(|a| (0..n).map(|b| f(a, b)).collect()).collect();
        Self::new(n, table).expect("built-in construction is a group")
    }

    /// Every group of order at most 8 up to isomorphism (14 groups), with names.
    pub fn all_up_to_order_8() -> Vec<(&'static str, Self)> {
        let c = Self::cyclic;
        vec![
            ("Z1", c(1)),
            ("Z2", c(2)),
            ("Z3", c(3)),
            ("Z4", c(4)),
            ("Z2xZ2", Self::direct_product(&c(2), &c(2))),
            ("Z5", c(5)),
            ("Z6", c(6)),
            ("S3", Self::dihedral(3)),
            ("Z7", c(7)),
            ("Z8", c(8)),
            ("Z4xZ2", Self::direct_product(&c(4), &c(2))),
            ("Z2xZ2xZ2", Self::direct_product(&Self::direct_product(&c(2), &c(2)), &c(2))),
            ("D4", Self::dihedral(4)),
            ("Q8", Self::quaternion()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn element_orders(g: &GroupTable) -> Vec<usize> {
        let mut out: Vec<usize> = (0..g.order())
            .map(|a| {
                let mut x = a;
                let mut k = 1;
                while x != g.identity() {
                    x = g.mul(x, a);
                    k += 1;
                }
                k
            })
            .collect();
        out.sort();
        out
    }

    #[test]
    fn small_groups_are_pairwise_non_isomorphic() {
        let all = GroupTable::all_up_to_order_8();
        assert_eq!(all.len(), 14);
        for (i, (_, a)) in all.iter().enumerate() {
            for (_, b) in &all[..i] {
                if a.order() == b.order() {
                    let same = element_orders(a) == element_orders(b) && a.is_abelian() == b.is_abelian();
                    // D4 and Q8 share abelianness but differ in element orders.
                    assert!(!same);
                }
            }
        }
    }

    #[test]
    fn rejects_non_groups() {
        assert_eq!(GroupTable::new(2, vec![vec![0, 1], vec![1, 1]]), Err(GroupError::NoInverse(1)));
        assert!(matches!(GroupTable::new(2, vec![vec![0, 2], vec![1, 0]]), Err(GroupError::OutOfRange { .. })));
        assert!(matches!(GroupTable::new(2, vec![vec![1, 0], vec![0, 0]]), Err(GroupError::NoIdentity)));
        // a Latin square with identity that is not associative (order 5 loop)
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(GroupTable::new(5, loop5), Err(GroupError::NotAssociative(..))));
    }

    #[test]
    fn json_round_trip() {
        let g = GroupTable::dihedral(3);
        let s = serde_json::to_string(&g).unwrap();
        let back: GroupTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(!g.is_abelian());
        assert!(g.is_subgroup(&[0, 1, 2]));
        assert!(!g.is_subgroup(&[0, 3, 4]));
    }
}
